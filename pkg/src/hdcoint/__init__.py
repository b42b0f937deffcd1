"""Cointegration testing for large panels of time series.

Simulation of VAR(k) error-correction models, the classical and modified
canonical-correlation procedures, Wachter-law and Airy_1 asymptotics, random
matrix samplers and Monte Carlo experiment drivers.
"""

from .errors import DataError, DegenerateSpectrumWarning, DimensionError, DomainError, ParameterError
from .model import (DeterministicTerms, PanelSeries, SparsePattern, VarKSpec, E, E_col, I_rho,
                    difference, draw_noise, scaled_identity, simulate)
from .spectra import CanonicalSpectrum, johansen_spectrum, modified_spectrum

__version__ = "0.1.0"
