import numpy as np
import pytest
from scipy import linalg as sla
from scipy import stats

from hdcoint._tridiag import top_eigenvalues
from hdcoint.asymptotics import jacobi_to_wachter, wachter_cdf, wachter_params
from hdcoint.ensembles import (AiryQuantileTable, JacobiParams, ProjectorModelSpec, airy_sum_quantiles,
                               airy_sum_samples, goe_top_eigs, goe_window, haar_orthogonal, projector_jacobi_params,
                               projector_model_spectrum, reference_airy_samples, reference_quantile_table,
                               sample_jacobi_spectrum)
from hdcoint.errors import DomainError, ParameterError


def test_haar_trivial():
    assert np.array_equal(haar_orthogonal(1, 3), [[1.0]])


def test_haar_orthogonal_rotation():
    for s in range(5):
        O = haar_orthogonal(50, s)
        assert np.max(np.abs(O.T @ O - np.eye(50))) < 1e-10
        assert np.linalg.det(O) == pytest.approx(1.0)


def test_haar_second_moment():
    g = np.random.default_rng(0)
    x = np.array([haar_orthogonal(3, rng=g)[0, 0] ** 2 for _ in range(10_000)])
    assert abs(x.mean() - 1 / 3) < 0.02
    # rotation-invariant in distribution: each coordinate of column 0 is exchangeable
    y = np.array([haar_orthogonal(3, rng=g)[2, 1] ** 2 for _ in range(10_000)])
    assert abs(y.mean() - 1 / 3) < 0.02


def test_haar_seeded():
    assert np.array_equal(haar_orthogonal(6, 1), haar_orthogonal(6, 1))


def test_jacobi_uniform():
    g = np.random.default_rng(1)
    x = np.array([sample_jacobi_spectrum(JacobiParams(1, 1, 1), rng=g)[0] for _ in range(10_000)])
    assert stats.kstest(x, "uniform").statistic < 0.02


def test_jacobi_beta():
    g = np.random.default_rng(2)
    x = np.array([sample_jacobi_spectrum(JacobiParams(1, 2, 3), rng=g)[0] for _ in range(10_000)])
    assert abs(x.mean() - 0.4) < 0.01
    assert stats.kstest(x, stats.beta(2, 3).cdf).statistic < 0.02


def test_jacobi_bulk_matches_wachter():
    N, T, k = 50, 500, 1
    jp = JacobiParams(N, N / 2, (T - (k + 1) * N) / 2)
    g = np.random.default_rng(3)
    pooled = np.concatenate([sample_jacobi_spectrum(jp, rng=g) for _ in range(40)])
    w = wachter_params(*jacobi_to_wachter(N, jp.p, jp.q))
    assert stats.kstest(pooled, lambda x: wachter_cdf(x, w)).statistic < 0.05


def test_jacobi_non_integer_dof():
    with pytest.raises(ParameterError, match="projector"):
        sample_jacobi_spectrum(JacobiParams(2, 0.7, 3), 0)


def test_jacobi_params_validation():
    with pytest.raises(ParameterError):
        JacobiParams(3, 0, 1)


def test_projector_spec_validation():
    with pytest.raises(DomainError):
        ProjectorModelSpec(2, 3, 8)


def test_projector_values_bounded():
    g = np.random.default_rng(4)
    for spec in (ProjectorModelSpec(1, 3, 6), ProjectorModelSpec(3, 2, 8), ProjectorModelSpec(2, 4, 20)):
        v = projector_model_spectrum(spec, rng=g)
        assert v.shape == (spec.N,)
        assert np.all((v >= 0) & (v <= 1)) and np.all(np.diff(v) <= 0)


def test_projector_scalar_law():
    spec = ProjectorModelSpec(1, 1, 3)
    jp = projector_jacobi_params(spec)
    assert (jp.p, jp.q) == (0.5, 1.0)
    g = np.random.default_rng(5)
    x = np.array([projector_model_spectrum(spec, rng=g)[0] for _ in range(20_000)])
    assert stats.kstest(x, stats.beta(0.5, 1.0).cdf).statistic < 0.03


def test_projector_top_law_matches_jacobi():
    spec = ProjectorModelSpec(2, 2, 10)
    jp = projector_jacobi_params(spec)
    g, h = np.random.default_rng(6), np.random.default_rng(7)
    a = [projector_model_spectrum(spec, rng=g)[0] for _ in range(10_000)]
    b = [sample_jacobi_spectrum(jp, rng=h)[0] for _ in range(10_000)]
    assert stats.ks_2samp(a, b).statistic < 0.05


def test_goe_decreasing_and_seeded():
    for s in range(10):
        v = goe_top_eigs(2000, 6, s)
        assert np.all(np.diff(v) < 0)
    assert np.array_equal(goe_top_eigs(500, 3, 1), goe_top_eigs(500, 3, 1))


def test_sturm_bisection_matches_dense_solver():
    g = np.random.default_rng(8)
    m = 300
    d = g.normal(0, np.sqrt(2), m)
    e2 = g.chisquare(np.arange(m - 1, 0, -1, dtype=float))
    ref = sla.eigvalsh_tridiagonal(d, np.sqrt(e2))[::-1][:5]
    got = top_eigenvalues(d, e2, 5, m, ref[0] - 50, 1e-11)
    assert np.allclose(got, ref, atol=1e-8)


def test_window_captures_top_of_full_matrix():
    g = np.random.default_rng(9)
    n = 20_000
    d = g.normal(0, np.sqrt(2), n)
    e = np.sqrt(g.chisquare(np.arange(n - 1, 0, -1, dtype=float)))
    m = goe_window(n)
    full = sla.eigvalsh_tridiagonal(d, e, select="i", select_range=(n - 5, n - 1))[::-1]
    block = sla.eigvalsh_tridiagonal(d[:m], e[:m - 1], select="i", select_range=(m - 5, m - 1))[::-1]
    assert np.allclose(full * n ** (1 / 6), block * n ** (1 / 6), atol=1e-6)


def test_reference_median_and_scale():
    sums, prov = reference_airy_samples()
    assert prov["n"] == 10**5 and sums.shape[1] >= 3
    assert abs(np.median(sums[:, 0]) - (-1.27)) < 0.1


def test_n_stability_of_first_point():
    sums, _ = reference_airy_samples()
    small = airy_sum_samples(1, 10**4, 4000, seed=11)
    for a in (0.1, 0.5, 0.9):
        assert abs(np.quantile(small[:, 0], a) - np.quantile(sums[:, 0], a)) < 0.1


def test_quantile_table_shape_and_order():
    t = reference_quantile_table()
    assert t.is_monotone()
    for a in t.alphas:
        assert t.quantile(1, a) > t.quantile(2, a) > t.quantile(3, a)
    with pytest.raises(DomainError):
        t.quantile(1, 0.5)


def test_quantile_table_csv_round_trip(tmp_path):
    t = airy_sum_quantiles(3, reps=1000, n=200, seed=4)
    assert t.stderr[1][0.95] > 0
    t.to_csv(tmp_path / "q.csv")
    back = AiryQuantileTable.from_csv(tmp_path / "q.csv")
    assert back.quantiles == t.quantiles and (back.n, back.reps, back.seed) == (200, 1000, 4)


def test_quantiles_reps_floor():
    with pytest.raises(ParameterError):
        airy_sum_quantiles(1, reps=999)


def test_airy_samples_independent_of_threads():
    a = airy_sum_samples(3, 300, 400, seed=5, threads=1)
    b = airy_sum_samples(3, 300, 400, seed=5, threads=2)
    assert np.array_equal(a, b)
    assert np.all(np.diff(a, axis=1) < 0)
