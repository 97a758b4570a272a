import json

import numpy as np
import pytest

from heinzlab import certifier as cert
from heinzlab.certifier import CertificationReport, TrialConfig, ViolationRecord, certify, shrink
from heinzlab.errors import DomainError
from heinzlab.matrix_ineq import MatrixTriple


def scalar_report(trials=3000, **kw):
    return certify(TrialConfig(seed=5, trials=trials), "scalar", **kw)


def matrix_report(trials=24, **kw):
    return certify(TrialConfig(seed=5, trials=trials, dim_max=4), "matrix", **kw)


# ---------------------------------------------------------------- config and generators


@pytest.mark.parametrize(
    "kw",
    [
        {"seed": -1},
        {"trials": 0},
        {"scalar_range": (3, -3)},
        {"dim_max": 0},
        {"nu_strategy": "gaussian"},
        {"tol_rel_scalar": 0},
    ],
)
def test_config_validation(kw):
    with pytest.raises(DomainError):
        TrialConfig(**kw)


def test_scalar_trial_ranges():
    cfg = TrialConfig(trials=5000)
    f = cert._scalar_fields(cfg, np.arange(5000))
    assert f["a"].min() >= 1e-3 and f["a"].max() <= 1e3
    assert f["m"].min() >= 1 and f["m"].max() <= 12 and set(np.unique(f["m"])) == set(range(1, 13))
    assert f["p"].min() >= 1 and f["p"].max() <= 8
    assert f["nu"].min() >= 0 and f["nu"].max() <= 1


def test_trials_regenerate_by_index():
    cfg = TrialConfig(trials=100)
    pair, w, m, p = cert.generate_scalar_trial(cfg, 37)
    f = cert._scalar_fields(cfg, np.arange(100))
    assert (pair.a, pair.b, w.nu, m.m, p.p) == (f["a"][37], f["b"][37], f["nu"][37], f["m"][37], f["p"][37])
    with pytest.raises(DomainError):
        cert.generate_scalar_trial(cfg, 100)


def test_boundary_weighted_nu_mass():
    cfg = TrialConfig(trials=100_000)
    nu = cert._scalar_fields(cfg, np.arange(100_000))["nu"]
    near = np.min(np.abs(nu[:, None] - np.array([0.0, 0.5, 1.0])), axis=1) <= 1e-6
    assert near.mean() >= 0.15


def test_uniform_strategy_has_no_boundary_mass():
    cfg = TrialConfig(trials=100_000, nu_strategy="uniform")
    nu = cert._scalar_fields(cfg, np.arange(100_000))["nu"]
    near = np.min(np.abs(nu[:, None] - np.array([0.0, 0.5, 1.0])), axis=1) <= 1e-6
    assert near.mean() < 0.001


def test_diagonal_substream_frequency():
    cfg = TrialConfig(seed=7, trials=10_000)
    share = np.mean([cert.matrix_trial_is_diagonal(cfg, i) for i in range(10_000)])
    assert abs(share - 0.2) <= 0.02


def test_matrix_trials_are_valid():
    cfg = TrialConfig(seed=7, trials=200, dim_max=6)
    dims = set()
    for i in range(200):
        t = cert.generate_matrix_trial(cfg, i)
        dims.add(t.n)
        assert np.min(t.A.eigenvalues) > 0 and np.min(t.B.eigenvalues) > 0
        assert t.is_diagonal() == cert.matrix_trial_is_diagonal(cfg, i) or t.n == 1
        assert 0 <= cert.matrix_trial_weight(cfg, i) <= 1
    assert dims == set(range(1, 7))


# ---------------------------------------------------------------- runs


def test_scalar_run_clean():
    r = scalar_report()
    assert r.ok and r.violation_count == 0 and r.trial_errors == 0
    assert r.summary_line() == f"OK 3000 trials, {len(r.statistics)} inequalities, 0 violations"
    ids = {s.inequality_id for s in r.statistics}
    assert {"eq4", "eq7", "eq10", "eq15", "eq16", "eq18", "oracle-xcheck"} <= ids


def test_matrix_run_clean():
    r = matrix_report()
    assert r.ok, r.summary_line()
    ids = {s.inequality_id for s in r.statistics}
    assert {"hs-identity", "eq21", "thm32[trace]", "cor31-display[spectral,q=3]", "f-convex[hs]"} <= ids


def test_report_document():
    doc = json.loads(scalar_report(500).to_json())
    assert doc["schema"] == "heinzlab-report/1"
    assert doc["status"] == "OK" and doc["config"]["seed"] == 5
    e = doc["inequalities"][0]
    for key in ("id", "paper_eq", "trials", "equality_hits", "min_lower_slack", "median_lower_slack", "violations"):
        assert key in e


def test_determinism_and_thread_independence(monkeypatch):
    one = scalar_report(70_000, workers=1).to_json()
    two = scalar_report(70_000, workers=2).to_json()
    assert one == two
    m1 = matrix_report(workers=1).to_json()
    monkeypatch.setenv("HEINZLAB_THREADS", "3")
    assert matrix_report().to_json() == m1


@pytest.mark.parametrize("check_id", ["eq4", "eq15", "eq16", "eq17[exp]"])
def test_scalar_perturbation_caught_and_shrunk(check_id):
    r = scalar_report(perturb={check_id: 1.01})
    assert not r.ok
    records = [v for v in r.violations if v.inequality_id == check_id]
    assert records and all(v.shrunk_inputs is not None for v in records)
    # only the perturbed check fails
    assert {s.inequality_id for s in r.statistics if s.violations} == {check_id}
    # shrinking moves toward the equality manifold a = b
    v = records[0]
    spread = lambda d: abs(np.log(d["a"] / d["b"]))  # noqa: E731
    assert spread(v.shrunk_inputs) <= spread(v.inputs)


@pytest.mark.parametrize("check_id", ["eq21", "thm32[hs]", "f-convex[hs]", "diag-heinz-trace"])
def test_matrix_perturbation_caught_and_shrunk(check_id):
    r = matrix_report(perturb={check_id: 1.01})
    assert not r.ok
    v = next(v for v in r.violations if v.inequality_id == check_id)
    n0 = v.inputs["triple"]["A"]["rows"]
    assert v.shrunk_inputs["triple"]["A"]["rows"] <= n0


def test_perturbed_reports_are_deterministic():
    a = scalar_report(perturb={"eq10": 1.01}).to_json()
    b = scalar_report(perturb={"eq10": 1.01}).to_json()
    assert a == b and '"perturb"' in a


def test_unknown_perturb_id():
    with pytest.raises(DomainError):
        scalar_report(10, perturb={"eq99": 1.01})


def test_shrink_precondition():
    cfg = TrialConfig(seed=5, trials=10)
    inputs = cert.ScalarBatch(cert._scalar_fields(cfg, np.arange(1))).inputs(0)
    with pytest.raises(DomainError, match="precondition"):
        shrink(ViolationRecord("eq4", inputs, -1.0, 1e-12), cfg)
    with pytest.raises(DomainError):
        shrink(ViolationRecord("nope", inputs, -1.0, 1e-12), cfg)


def test_identity_source_is_all_equality():
    def source(cfg, index):
        n = 1 + index % 4
        return MatrixTriple.from_arrays(np.eye(n), np.eye(n), np.eye(n)), 0.3

    r = certify(TrialConfig(trials=20), "matrix", matrix_source=source)
    assert r.ok
    hits = {s.inequality_id: s.equality_hits for s in r.statistics}
    assert hits["eq21"] == 20 and hits["heinz-bounds[trace]"] == 20


def test_error_budget_flags_run():
    cfg = TrialConfig(trials=10)
    r = CertificationReport(cfg, "scalar", [], [], trial_errors=1, trials=10)
    assert r.aborted and not r.ok
    assert r.summary_line().endswith("(error budget exceeded)")
    assert r.summary_line().startswith("FAIL")


def test_unknown_suite():
    with pytest.raises(DomainError):
        certify(TrialConfig(trials=1), "vector")
