import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nepwave.dynamics import (CostKind, GpeParams, Nonlinearity, NudgeSpec, Trainables, kappa_free, kappa_nudged,
                              pump_field)
from nepwave.lattice import Lattice
from nepwave.relax import IntegrationDiverged, RelaxConfig, SteadyState, relax, relax_gpe, rk4_step
from nepwave.tasks import build_xor_task


def test_rk4_zero_rhs():
    psi = np.array([1 + 2j, 3j])
    assert np.array_equal(rk4_step(psi, lambda p: np.zeros_like(p), 0.1), psi)


def test_rk4_decay_step_matches_truncated_series():
    ref = sum((-0.1) ** n / math.factorial(n) for n in range(5))
    assert rk4_step(np.array([1.0 + 0j]), lambda p: -p, 0.1)[0].real == pytest.approx(ref, abs=1e-15)
    assert ref == pytest.approx(0.9048375, abs=1e-7)


def _global_error(dt):
    psi = np.array([1.0 + 0j])
    for _ in range(int(round(1 / dt))):
        psi = rk4_step(psi, lambda p: -1j * p, dt)
    return abs(psi[0] - np.exp(-1j))


def test_rk4_fourth_order():
    ratios = [_global_error(dt) / _global_error(dt / 2) for dt in (0.2, 0.1, 0.05)]
    assert all(12 < r < 20 for r in ratios), ratios


def test_rk4_divergence():
    with pytest.raises(IntegrationDiverged):
        rk4_step(np.array([1e300 + 0j]), lambda p: p * 1e300, 1.0)


def test_relax_zero_rhs():
    ss = relax(np.array([1j]), lambda p: np.zeros_like(p))
    assert ss.converged and ss.steps_used == 0 and ss.residual == 0


def test_relax_divergence_names_step():
    with pytest.raises(IntegrationDiverged) as e:
        relax(np.array([1.0 + 0j]), lambda p: p * p * 1e3, RelaxConfig(dt=1.0))
    assert e.value.step is not None and e.value.step >= 1


def test_relax_nonconvergence_is_not_an_error():
    ss = relax(np.array([1.0 + 0j]), lambda p: -1j * p, RelaxConfig(max_steps=10))
    assert not ss.converged and ss.steps_used == 10


def test_single_node_closed_form():
    lat = Lattice.chain(1, [0], [0])
    p = GpeParams(Nonlinearity.DENSITY, g=0.0, gamma=0.1)
    tr = Trainables(np.array([1.0]), np.ones(1))
    ss = relax_gpe(lat, p, tr, np.ones(1, complex))
    assert ss.converged
    assert abs(ss.psi[0] - 1 / (0.1 + 2j)) < 1e-6


def test_config_validation_and_budget_warning():
    with pytest.raises(ValueError):
        RelaxConfig(dt=0)
    with pytest.warns(RuntimeWarning):
        RelaxConfig(dt=0.1, max_steps=10).check_budget(0.1)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert RelaxConfig().check_budget(0.1)


def _random_system(seed, kind):
    rng = np.random.default_rng(seed)
    lat = Lattice((2, 4), [0, 6], [3, 5])
    params = GpeParams(kind, g=0.1, gamma=0.2)
    tr = Trainables(rng.uniform(-0.3, 0.3, 8), rng.uniform(-1, 1, 2))
    P = pump_field(rng.uniform(0, 1, 2), tr, lat)
    return lat, params, tr, P, rng


@given(st.integers(0, 2**32 - 1), st.sampled_from(list(Nonlinearity)))
def test_compiled_matches_numpy_free(seed, kind):
    lat, params, tr, P, _ = _random_system(seed, kind)
    cfg = RelaxConfig(max_steps=300, residual_tol=0)
    a = relax_gpe(lat, params, tr, P, cfg)
    b = relax(np.zeros(8, complex), lambda p: kappa_free(p, params, tr, P, lat), cfg)
    assert a.steps_used == b.steps_used == 300
    assert np.allclose(a.psi, b.psi, atol=1e-12)


@given(st.integers(0, 2**32 - 1), st.sampled_from(list(CostKind)))
def test_compiled_matches_numpy_nudged(seed, kind):
    lat, params, tr, P, rng = _random_system(seed, Nonlinearity.SATURATION)
    target = np.eye(2)[rng.integers(2)] if kind is CostKind.CCE else rng.uniform(0, 1, 2)
    spec = NudgeSpec(0.3, kind, target)
    init = rng.normal(size=8) + 1j * rng.normal(size=8)
    cfg = RelaxConfig(max_steps=200, residual_tol=0)
    a = relax_gpe(lat, params, tr, P, cfg, initial=init, nudge=spec)
    b = relax(init, lambda p: kappa_nudged(p, params, tr, P, spec, lat), cfg)
    assert np.allclose(a.psi, b.psi, atol=1e-12)


def test_frozen_nudge_matches_numpy(rng):
    lat, params, tr, P, rng = _random_system(7, Nonlinearity.DENSITY)
    frozen = rng.normal(size=8) + 1j * rng.normal(size=8)
    spec = NudgeSpec(0.2, CostKind.MSE, np.ones(2), frozen_at=frozen)
    cfg = RelaxConfig(max_steps=100, residual_tol=0)
    a = relax_gpe(lat, params, tr, P, cfg, nudge=spec)
    b = relax(np.zeros(8, complex), lambda p: kappa_nudged(p, params, tr, P, spec, lat), cfg)
    assert np.allclose(a.psi, b.psi, atol=1e-12)


def test_batch_rows_match_individual_runs():
    lat, params, tr, _, rng = _random_system(3, Nonlinearity.SATURATION)
    X = rng.uniform(0, 1, (5, 2))
    P = pump_field(X, tr, lat)
    batch = relax_gpe(lat, params, tr, P)
    for b in range(5):
        single = relax_gpe(lat, params, tr, P[b])
        assert np.array_equal(single.psi, batch.psi[b])


def test_converged_state_verifies_independently():
    lat, params, tr, P, _ = _random_system(11, Nonlinearity.SATURATION)
    ss = relax_gpe(lat, params, tr, P)
    assert ss.converged
    assert np.max(np.abs(kappa_free(ss.psi, params, tr, P, lat))) <= 1e-9 * 1.001


def test_deterministic_and_warm_start_equivalent():
    task = build_xor_task("nine")
    tr = Trainables(np.random.default_rng(0).uniform(-0.2, 0.2, 9), np.array([1.0, -0.75]))
    P = pump_field([1.0, 0.0], tr, task.lattice)
    a = relax_gpe(task.lattice, task.params, tr, P)
    b = relax_gpe(task.lattice, task.params, tr, P)
    assert np.array_equal(a.psi, b.psi)
    c = relax_gpe(task.lattice, task.params, tr, P, initial=a.psi * (1 + 1e-3))
    assert np.max(np.abs(c.psi - a.psi)) < 1e-6


def test_compiled_divergence_raises():
    lat = Lattice.chain(3, [0], [2])
    p = GpeParams(Nonlinearity.DENSITY, g=1.0, gamma=0.0)
    tr = Trainables(np.zeros(3), np.array([1e3]))
    with pytest.raises(IntegrationDiverged):
        relax_gpe(lat, p, tr, pump_field([1.0], tr, lat), RelaxConfig(dt=1.0, max_steps=1000))
