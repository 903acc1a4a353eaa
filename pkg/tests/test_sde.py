import numpy as np
import pytest

from fbmsde import sde
from fbmsde.noise import make_noise
from fbmsde.paths import GridError, TimeGrid


@pytest.mark.parametrize("family", sorted(sde.coefficient_registry()))
def test_registry_families_satisfy_declared_constants(family):
    rep = sde.validate_assumptions(sde.make_coefficients(family), probe_budget=500)
    assert rep.passed, rep.failures()


def test_quadratic_drift_is_flagged():
    good = sde.make_coefficients("constant")
    bad = sde.CoefficientSet(1, 1, 1, lambda t, x: x ** 2, good.sigma_w, good.sigma_h, good.dsigma_h,
                             dict(good.constants))
    rep = sde.validate_assumptions(bad, probe_budget=300)
    assert {"Hb_lipschitz", "Hb_growth"} <= set(rep.failures())


def test_wrong_derivative_is_flagged():
    c = sde.make_coefficients("sin")
    bad = sde.CoefficientSet(1, 1, 1, c.b, c.sigma_w, c.sigma_h, lambda t, x: np.zeros((x.shape[0], 1, 1, 1)),
                             dict(c.constants))
    assert "HsH_derivative_consistency" in sde.validate_assumptions(bad, probe_budget=300).failures()


def test_shape_validation():
    c = sde.make_coefficients("sin")
    with pytest.raises(ValueError, match="sigma_w"):
        sde.CoefficientSet(1, 2, 1, c.b, c.sigma_w, c.sigma_h, c.dsigma_h, dict(c.constants))


def test_unknown_family_and_param():
    with pytest.raises(KeyError):
        sde.make_coefficients("nope")
    with pytest.raises(TypeError):
        sde.make_coefficients("sin", bogus=1)


def test_spec_round_trip():
    c = sde.make_coefficients("affine", b1=-2.0)
    c2 = sde.coefficients_from_spec(c.spec())
    assert sde.spec_json(c) == sde.spec_json(c2)
    assert c2.params["b1"] == -2.0 and c2.params["w0"] == 0.2


def _problem(family, x0=1.0, H=0.75, **params):
    c = sde.make_coefficients(family, **params)
    return sde.SDEProblem(c, np.full(c.d, x0), 1.0, H)


def test_drift_only_exact():
    grid = TimeGrid.uniform_grid(1.0, 64)
    pr = _problem("drift_only", x0=0.5, b0=2.0, b1=0.0)
    nb = make_noise(grid, 0.75, 1, 1, seed=0)
    run = sde.euler_solve(pr, grid, nb)
    np.testing.assert_allclose(run.path.values[:, 0], 0.5 + 2.0 * grid.nodes, rtol=0, atol=1e-14)
    ref = sde.closed_form_oracle("drift_only", pr, nb)
    np.testing.assert_allclose(run.path.values, ref.values, atol=1e-14)


def test_batched_matches_single():
    grid = TimeGrid.uniform_grid(1.0, 32)
    pr = _problem("linear", d=2, a_b=0.5, a_w=0.3, a_h=0.5)
    runs = [sde.euler_solve(pr, grid, make_noise(grid, 0.75, 2, 2, 5, p)) for p in range(3)]
    dW = np.stack([np.diff(r.noise.bm.values, axis=0) for r in runs])
    dB = np.stack([np.diff(r.noise.fbm.values, axis=0) for r in runs])
    out = sde.euler_paths(pr.coeffs, pr.x0, grid.nodes, dW, dB)
    for p in range(3):
        np.testing.assert_array_equal(out[p], runs[p].path.values)


def test_dense_euler_agrees_with_recurrence_at_partition_nodes():
    base = TimeGrid.uniform_grid(1.0, 64)
    nb = make_noise(base, 0.75, 1, 1, seed=2)
    pr = _problem("sin")
    idx = np.arange(0, 65, 8)
    dense = sde.dense_euler_paths(pr.coeffs, pr.x0, base.nodes, idx, nb.bm.values[None], nb.fbm.values[None])
    coarse = sde.euler_solve(pr, base.subgrid(idx), nb.restrict(base.subgrid(idx)))
    np.testing.assert_allclose(dense[0, idx], coarse.path.values, atol=1e-13)


def test_blowup_guard():
    grid = TimeGrid.uniform_grid(1.0, 16)
    pr = _problem("linear", a_b=1e12, a_h=0.0)
    with pytest.raises(sde.BlowUpError) as e:
        sde.euler_solve(pr, grid, make_noise(grid, 0.75, 1, 1, 0))
    assert e.value.node >= 1


def test_noise_grid_mismatch():
    pr = _problem("sin")
    with pytest.raises(GridError):
        sde.euler_solve(pr, TimeGrid.uniform_grid(1.0, 8), make_noise(TimeGrid.uniform_grid(1.0, 16), 0.75, 1, 1, 0))


def test_oracles_start_at_x0_and_reject_unknown():
    grid = TimeGrid.uniform_grid(1.0, 16)
    nb = make_noise(grid, 0.75, 1, 1, 0)
    for kind in ("ito_gbm", "young_exponential", "mixed_exponential"):
        ref = sde.closed_form_oracle(kind, _problem(kind, x0=2.0), nb)
        assert ref.values[0, 0] == 2.0
    with pytest.raises(ValueError):
        sde.closed_form_oracle("sin", _problem("sin"), nb)


def test_manifest_has_required_fields():
    grid = TimeGrid.uniform_grid(1.0, 8)
    run = sde.euler_solve(_problem("sin"), grid, make_noise(grid, 0.75, 1, 1, 4))
    m = run.manifest()
    assert {"seed", "H", "n", "T", "coefficient_family", "params", "wall_time"} <= set(m)
    assert m["seed"] == 4 and m["coefficient_family"] == "sin"
