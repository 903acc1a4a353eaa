import json
import math

import numpy as np
import pytest

from fbmsde import sde, verify
from fbmsde.noise import generate_fbm
from fbmsde.paths import SamplePath, TimeGrid
from fbmsde.reports import EstimateReport


def _problem(family, x0=1.0, **params):
    c = sde.make_coefficients(family, **params)
    return sde.SDEProblem(c, np.full(c.d, x0), 1.0, 0.75)


def test_hoelder_fit_smooth_and_degenerate():
    g = TimeGrid.uniform_grid(1.0, 512)
    assert verify.hoelder_fit(SamplePath.from_function(g, lambda t: 3 * t)).exponent == pytest.approx(1.0, abs=1e-9)
    with pytest.warns(verify.DegeneratePathWarning):
        fit = verify.hoelder_fit(SamplePath.from_function(g, np.ones_like))
    assert fit.exponent == 1.0 and "degenerate" in fit.flags
    with pytest.raises(ValueError):
        verify.hoelder_fit(SamplePath.from_function(TimeGrid.uniform_grid(1.0, 64), lambda t: t))


def test_hoelder_fit_on_fbm():
    g = TimeGrid.uniform_grid(1.0, 2048)
    est = np.mean([verify.hoelder_exponent_estimate(generate_fbm(g, 0.8, 1, 0, p)) for p in range(10)])
    assert est == pytest.approx(0.8, abs=0.08)


def test_fit_order_recovers_slope():
    h = 2.0 ** -np.arange(3, 9)
    order, r2 = verify.fit_order(h, 3 * h ** 0.7)
    assert order == pytest.approx(0.7) and r2 == pytest.approx(1.0)


def test_convergence_needs_five_dividing_meshes():
    pr = _problem("ito_gbm")
    with pytest.raises(ValueError):
        verify.strong_convergence_study(pr, (16, 32, 64, 128), 10)
    with pytest.raises(ValueError):
        verify.strong_convergence_study(pr, (16, 32, 48, 64, 128), 10)
    with pytest.raises(ValueError):
        verify.strong_convergence_study(_problem("sin"), (8, 16, 32, 64, 128), 10)


def test_convergence_study_shape():
    st = verify.strong_convergence_study(_problem("ito_gbm"), (8, 16, 32, 64, 128), 200, seed=1)
    assert st.meshes == sorted(st.meshes, reverse=True)
    assert len(st.errors) == len(st.std_errors) == 5
    assert st.passed and st.fitted_order > 0


def test_partition_indices():
    u = verify.partition_indices("uniform", 8, 64, 1.0)
    np.testing.assert_array_equal(u, np.arange(0, 65, 8))
    g = verify.partition_indices("geometric", 8, 64, 1.0)
    assert g[0] == 0 and g[-1] == 64 and np.all(np.diff(g) > 0)
    with pytest.raises(ValueError):
        verify.partition_indices("random", 8, 64, 1.0)


def test_uniqueness_exact_for_constant_coefficients():
    st = verify.pathwise_uniqueness_harness(_problem("constant"), (8, 16, 32, 64, 128), base_factor=4)
    assert st.passed and "exact agreement" in st.flags


def test_moment_audit_small():
    rep = verify.moment_bound_audit(_problem("linear", a_b=0.5, a_w=0.3, a_h=0.5), (16, 32, 64), 1, 300, 0)
    assert rep.name == "moment_N1" and len(rep.meta["plateaus"]) == 3
    with pytest.raises(ValueError):
        verify.moment_bound_audit(_problem("linear"), N=3)


def test_caps_calibrate_and_apply():
    a = [EstimateReport.from_sides("X", 1.0, 2.0), EstimateReport.from_sides("X", 3.0, 2.0)]
    caps = verify.calibrate_caps(a)
    assert caps == {"X": 1.5}
    b = verify.apply_caps([EstimateReport.from_sides("X", 5.0, 2.0), EstimateReport.from_sides("X", 7.0, 2.0)], caps)
    assert [r.passed for r in b] == [True, False]
    assert "FAILED" in b[1].flags
    lines = verify.reports_jsonl(b).splitlines()
    assert json.loads(lines[0])["cap"] == 3.0


def test_drift_and_fbm_audits_report_every_name():
    g = TimeGrid.uniform_grid(1.0, 64)
    corpus = verify.corpus_paths(g, 0, 0.75)
    c = sde.make_coefficients("sin")
    reps = verify.audit_drift_estimates(corpus, 0.3, c)
    reps += verify.audit_fbm_integral_estimates(corpus, generate_fbm(g, 0.75, 1, 0), 0.3, c, 0.75)
    assert {r.name for r in reps} == {"Fbf", "Fbfh", "GsigmaHf2", "GHfh"}
    assert all(math.isfinite(r.implied_constant) for r in reps)
    identical = [r for r in reps if r.name in ("Fbfh", "GHfh") and r.meta["corpus"].split("|")[0] == r.meta["corpus"].split("|")[1]]
    assert identical and all(r.lhs == 0.0 for r in identical)


def test_fbm_window_enforced():
    g = TimeGrid.uniform_grid(1.0, 32)
    corpus = verify.corpus_paths(g, 0, 0.75)[:2]
    with pytest.raises(ValueError):
        verify.audit_fbm_integral_estimates(corpus, generate_fbm(g, 0.75, 1, 0), 0.2, sde.make_coefficients("sin"), 0.75)


def test_ito_audit_requires_budget():
    with pytest.raises(ValueError):
        verify.audit_ito_estimates(TimeGrid.uniform_grid(1.0, 16), 0.3, sde.make_coefficients("sin"), 500)


def test_delta_lemma_audit_passes_on_corpus():
    corpus = verify.corpus_paths(TimeGrid.uniform_grid(1.0, 128), 0, 0.75)
    reps = verify.audit_delta_lemma(corpus, 0.3, 1.0, 0.6)
    assert reps and all(r.passed for r in reps)
