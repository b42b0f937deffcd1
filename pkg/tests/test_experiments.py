import json
import math

import numpy as np
import pytest

from hdcoint.errors import DomainError, ParameterError
from hdcoint.experiments import (PowerScenario, coupling_check, edge_rescaled, rank_one_example_spec, null_density_experiment,
                                 order_sweep, power_experiment, stationary_coordinate_check, stationary_corr_limit, projector_check,
                                 size_experiment, wachter_lln_check)
from hdcoint.model import E, I_rho, VarKSpec, scaled_identity, simulate
from hdcoint.spectra import modified_spectrum


def test_size_small_run_consistent():
    res = size_experiment(30, 240, (1, 2), reps=60, seed=3)
    q = res.summary["quantile"]
    for j, k in enumerate((1, 2)):
        x = np.array(res.per_rep[f"rescaled_k{k}"])
        rate = np.mean(x > q)
        assert res.summary["rejection_rate"][j] == rate
        assert res.summary["stderr"][j] == pytest.approx(math.sqrt(rate * (1 - rate) / 60))


def test_size_independent_of_threads():
    a = size_experiment(20, 160, (1, 2), reps=24, seed=5, threads=1)
    b = size_experiment(20, 160, (1, 2), reps=24, seed=5, threads=2)
    assert a.per_rep == b.per_rep and a.summary == b.summary


def test_size_replications_reproducible_in_subsets():
    full = size_experiment(20, 160, (1,), reps=10, seed=2)
    head = size_experiment(20, 160, (1,), reps=4, seed=2)
    assert full.per_rep["rescaled_k1"][:4] == head.per_rep["rescaled_k1"]


def test_size_domain():
    with pytest.raises(DomainError):
        size_experiment(50, 150, (1, 2), reps=5)


@pytest.mark.slow
@pytest.mark.parametrize("gammas,k,tol", [
    ((E(1, 1, 0.95),), 2, 0.12),
    ((), 2, 0.08),
    ((E(1, 1, 1.0), E(1, 1, -2 / 9)), 3, 0.12),
])
def test_null_density_matches_airy(gammas, k, tol):
    res = null_density_experiment(gammas, 100, 500, k, reps=2000, seed=0)
    assert res.summary["ks"] < tol


def test_order_sweep_var2_pattern():
    spec = VarKSpec(100, 2, 500, gammas=(E(1, 1, 0.95),))
    s = order_sweep(spec, (1, 2, 3), seed=0).summary
    assert s["outliers"][0] >= 1 and s["outliers"][1:] == [0, 0]
    assert s["transition_k"] == 2 and s["sharp_transition"]
    a = order_sweep(spec, (1, 2, 3), rule="absolute", seed=0).summary
    assert a["outliers"][0] >= 1 and a["outliers"][1:] == [0, 0]


def test_order_sweep_no_cointegration():
    s = order_sweep(VarKSpec(100, 1, 500), (1, 2, 3), seed=1).summary
    assert s["outliers"] == [0, 0, 0] and not s["sharp_transition"]


def test_order_sweep_histograms_and_rules():
    panel = simulate(VarKSpec(40, 1, 300), 0)
    res = order_sweep(panel, (1, 2))
    for k in (1, 2):
        assert sum(res.histograms[f"k{k}"]["counts"]) == 40
    assert res.summary["lambda_1_rescaled"][0] == pytest.approx(
        edge_rescaled(modified_spectrum(panel, 1).values[:1], 40, 300, 1)[0])
    with pytest.raises(ParameterError):
        order_sweep(panel, (1,), rule="other")


def test_power_rank_one():
    res = power_experiment(E(1, 1, -0.95), (), 100, 500, 2, reps=60, seed=0)
    assert res.summary["rejection_rate"] > 0.9


def test_power_full_rank_separates():
    res = power_experiment(I_rho(150, -0.8), (E(1, 2, 0.95),), 150, 1500, 2, reps=10, seed=0)
    assert res.summary["separated_fraction"] == 1.0


def test_power_null_is_size():
    res = power_experiment(None, (), 50, 400, 1, reps=300, seed=0)
    assert abs(res.summary["rejection_rate"] - 0.05) < 3 * math.sqrt(0.05 * 0.95 / 300) + 0.01


def test_stationary_limit_formula():
    assert stationary_corr_limit(0.0, 1.0, 3.0) == pytest.approx(1 / (2 + 9 / 6))
    assert stationary_corr_limit(0.5, 2.0, 0.0) == pytest.approx(0.25)
    with pytest.raises(DomainError):
        PowerScenario(1.0)


def test_stationary_coordinate_small_run():
    res = stationary_coordinate_check(PowerScenario(0.5), reps=40, seed=0)
    assert res.summary["within_tol_fraction"] >= 0.9
    assert res.summary["bound_holds_fraction"] == 1.0
    corr2, lam = np.array(res.per_rep["corr2"]), np.array(res.per_rep["lambda_1"])
    assert np.all(lam >= corr2 - 1e-9)


def test_lln_rank_one_example():
    s = wachter_lln_check(rank_one_example_spec(), seed=0).summary
    assert s["ks"] < 0.05 and s["outliers"] == 1 and s["applicable"]


def test_lln_null():
    s = wachter_lln_check(VarKSpec(150, 2, 1500), seed=0).summary
    assert s["ks"] < 0.05 and s["outliers"] == 0


def test_lln_full_rank_not_applicable():
    spec = VarKSpec(100, 2, 1000, gammas=(scaled_identity(0.95),))
    s = wachter_lln_check(spec, seed=0).summary
    assert not s["applicable"]
    # the bulk moves away from the reference law
    assert s["ks"] > 0.1


def test_lln_modified_procedure():
    s = wachter_lln_check(rank_one_example_spec(), seed=1, procedure="modified").summary
    assert s["ks"] < 0.05


def test_projector_and_coupling_small():
    p = projector_check(2, 2, 10, reps=600, seed=0)
    assert p.summary["ks"] < 0.1
    c = coupling_check(60, 400, 1, reps=20, seed=0)
    assert c.summary["ks"] < 0.05
    assert sum(c.histograms["pooled"]["counts"]) == 60 * 20


def test_result_files(tmp_path):
    res = size_experiment(20, 160, (1,), reps=6, seed=7)
    paths = res.write(tmp_path, "json")
    names = {p.name for p in paths}
    assert "size_seed7.json" in names
    data = json.loads((tmp_path / "size_seed7.json").read_text())
    assert data["seed"] == 7 and data["params"]["reps"] == 6
    again = size_experiment(20, 160, (1,), reps=6, seed=7)
    a, b = again.to_dict(), res.to_dict()
    a.pop("runtime_sec"), b.pop("runtime_sec")
    assert a == b
    csv_paths = res.write(tmp_path / "c", "csv")
    assert any(p.suffix == ".csv" for p in csv_paths)
