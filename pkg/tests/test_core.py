import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_instance
from ssbm import (
    ConfigurationError,
    DimensionError,
    NestSchedule,
    ProblemInstance,
    RunConfig,
    UpdateRule,
    ValidationError,
    base_map,
    composite_update,
    evolved_update,
    gen_circulant,
    gen_complete,
    init_state,
    nest,
    psi_field,
    psi_update,
    run,
)
from ssbm.core import sharpen, step_state


def sin2(x):
    return math.sin(x) ** 2


# -- scalar maps ---------------------------------------------------------------


def test_sharpen_fixed_points_are_exact():
    assert sharpen(0.0) == 0.0
    assert sharpen(1.0) == 1.0
    assert sharpen(0.5) == 0.5


@pytest.mark.parametrize("x", [0.01, 0.2, 0.37, 0.5, 0.8, 0.999])
def test_sharpen_matches_sin_squared(x):
    assert sharpen(x) == pytest.approx(sin2(math.pi / 2 * x), abs=1e-15)


@pytest.mark.parametrize("phi, expected", [(0.0, 0.0), (0.25, 0.5), (0.5, 1.0)])
def test_base_map_examples(phi, expected):
    assert base_map(phi, 2 * math.pi, 0.0) == pytest.approx(expected, abs=1e-15)


def test_base_map_theta_shift():
    assert base_map(0.0, 2 * math.pi, math.pi / 4) == pytest.approx(0.5)


def test_nest_examples():
    assert nest(0.25, 0) == 0.25
    inner = sin2(math.pi / 2 * 0.25)
    assert inner == pytest.approx(0.14645, abs=1e-5)
    assert nest(0.25, 2) == pytest.approx(sin2(math.pi / 2 * inner), abs=1e-15)
    assert nest(0.25, 2) == pytest.approx(0.05199, abs=1e-5)
    for n in (0, 1, 5, 30):
        assert nest(0.5, n) == 0.5
        assert nest(0.0, n) == 0.0
        assert nest(1.0, n) == 1.0


def test_nest_rejects_negative():
    with pytest.raises(ValidationError):
        nest(0.3, -1)


def test_nest_vector_keeps_shape():
    x = np.array([0.1, 0.5, 0.9])
    assert nest(x, 3).shape == (3,)
    assert isinstance(nest(0.3, 2), float)


@given(st.floats(0, 1), st.integers(0, 8), st.integers(0, 8))
def test_nest_composition(x, a, b):
    assert nest(nest(x, a), b) == nest(x, a + b)


@given(st.floats(0, 1))
def test_sharpen_decouples_towards_ends(x):
    y = sharpen(x)
    assert 0.0 <= y <= 1.0
    if x < 0.5:
        assert y <= x
    elif x > 0.5:
        assert y >= x


def test_sharpen_slope_at_half():
    h = 1e-7
    slope = (sharpen(0.5 + h) - sharpen(0.5 - h)) / (2 * h)
    assert slope == pytest.approx(math.pi / 2, rel=1e-6)


# -- coupling field -------------------------------------------------------------


def test_field_vanishes_at_half(backend):
    inst = gen_complete(30, "random-pm1", seed=2)
    assert np.all(psi_field(np.full(30, 0.5), inst, 0.02, backend) == 0.0)


def test_field_vanishes_without_edges():
    inst = ProblemInstance(5, [], [], [])
    phi = np.linspace(0, 1, 5)
    assert np.all(psi_field(phi, inst, 0.3) == 0.0)


def test_field_pair_af(pair_af):
    assert psi_field([1.0, 1.0], pair_af, 0.1) == pytest.approx([-0.1, -0.1], abs=1e-15)


def test_field_matches_direct_sum(backend):
    rng = np.random.default_rng(11)
    inst = random_instance(rng, 9)
    phi = rng.random(9)
    j = 0.07
    expect = np.zeros(9)
    for i, k, w in inst.edges():
        for a, b in ((i, k), (k, i)):
            if w > 0:
                expect[a] -= j * abs(w) * (math.sqrt(phi[a]) - math.sqrt(1 - phi[b]))
            else:
                expect[a] -= j * abs(w) * (math.sqrt(phi[a]) - math.sqrt(phi[b]))
    assert psi_field(phi, inst, j, backend) == pytest.approx(expect, abs=1e-14)


def test_field_length_mismatch(pair_af):
    with pytest.raises(DimensionError):
        psi_field([0.5, 0.5, 0.5], pair_af, 0.1)


def test_state_out_of_range(pair_af):
    with pytest.raises(ValidationError):
        psi_update([0.5, 1.2], pair_af, 0.1)


# -- update rules -----------------------------------------------------------------


def test_psi_update_decoupled():
    inst = ProblemInstance(3, [], [], [])
    phi = np.array([0.2, 0.5, 0.7])
    assert np.array_equal(psi_update(phi, inst, 0.4), sharpen(phi))
    assert psi_update(phi, inst, 0.4)[1] == 0.5


def test_psi_update_pair_af_aligned(pair_af):
    # q = -0.1 at phi = (1, 1); the coupled term is (1 - 0.1)^2
    expect = sin2(math.pi / 2 * 0.9**2)
    out = psi_update([1.0, 1.0], pair_af, 0.1)
    assert out == pytest.approx([expect, expect], abs=1e-14)
    assert expect == pytest.approx(0.91354, abs=1e-5)


def test_psi_update_pair_af_antialigned_is_fixed(pair_af):
    for j in (0.01, 0.1, 0.3):
        assert np.array_equal(psi_update([1.0, 0.0], pair_af, j), [1.0, 0.0])


def test_psi_update_moves_af_pair_apart(pair_af):
    out = psi_update([0.6, 0.6], pair_af, 0.05)
    assert out[0] < sharpen(0.6)


def test_psi_update_moves_ferro_pair_together():
    inst = ProblemInstance.from_edges(2, [(0, 1, -1.0)])
    out = psi_update([0.7, 0.4], inst, 0.05)
    decoupled = sharpen(np.array([0.7, 0.4]))
    assert out[0] < decoupled[0] and out[1] > decoupled[1]


def test_composite_pair_af(pair_af):
    direct = sin2(math.pi / 2 * 0.9**2)
    conj = sin2(math.pi / 2 * 0.1**2)
    assert conj == pytest.approx(2.467e-4, rel=1e-3)
    out = composite_update([1.0, 1.0], pair_af, 0.1)
    assert out[0] == pytest.approx(0.5 * (direct + 1 - conj), abs=1e-14)
    assert out[0] == pytest.approx(0.95665, abs=1e-5)


def test_evolved_pair_af(pair_af):
    comp = composite_update([1.0, 1.0], pair_af, 0.1)[0]
    out = evolved_update([1.0, 1.0], pair_af, 0.1, 1)
    assert out[0] == pytest.approx(sin2(math.pi / 2 * comp), abs=1e-14)


def test_evolved_zero_nesting_is_composite():
    inst = gen_complete(12, "random-pm1", seed=4)
    phi = np.random.default_rng(0).random(12)
    assert np.array_equal(evolved_update(phi, inst, 0.05, 0), composite_update(phi, inst, 0.05))


@pytest.mark.parametrize("kind", ["psi", "composite", "evolved"])
def test_sbsb_is_fixed(kind, backend):
    inst = gen_complete(40, "random-pm1", seed=9)
    phi = np.full(40, 0.5)
    for n in (0, 1, 7, 12):
        out = step_state(phi, inst, UpdateRule(kind), 1 / 39, n, backend)
        assert np.max(np.abs(out - 0.5)) <= 1e-15


def test_composite_complement_equivariance(backend):
    rng = np.random.default_rng(5)
    for _ in range(50):
        n = int(rng.integers(2, 15))
        inst = random_instance(rng, n, density=rng.random())
        phi = rng.random(n)
        j = float(rng.random() * 0.3)
        lhs = composite_update(1 - phi, inst, j, backend)
        rhs = 1 - composite_update(phi, inst, j, backend)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12


states = arrays(np.float64, 8, elements=st.floats(0, 1))


@settings(max_examples=60, deadline=None)
@given(states, st.floats(0, 1), st.integers(0, 6))
def test_rules_preserve_range(phi, j, n):
    inst = gen_complete(8, "random-pm1", seed=1)
    for out in (
        psi_update(phi, inst, j),
        composite_update(phi, inst, j),
        evolved_update(phi, inst, j, n),
    ):
        assert np.all((out >= 0) & (out <= 1))


@settings(max_examples=40, deadline=None)
@given(states, st.floats(0, 0.2), st.integers(0, 2**32 - 1))
def test_relabelling_nodes_relabels_output(phi, j, seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, 8)
    perm = rng.permutation(8)
    inv = np.argsort(perm)
    relabelled = ProblemInstance(8, inv[inst.rows], inv[inst.cols], inst.weights)
    out = composite_update(phi, inst, j)
    out_p = composite_update(phi[perm], relabelled, j)
    assert out_p == pytest.approx(out[perm], abs=1e-13)


# -- initial state --------------------------------------------------------------------


def test_init_state_zero_noise():
    assert np.array_equal(init_state(4, 0.0, 123), np.full(4, 0.5))


def test_init_state_deterministic():
    a = init_state(100, 1e-3, np.random.default_rng(8))
    b = init_state(100, 1e-3, np.random.default_rng(8))
    assert a.tobytes() == b.tobytes()


def test_init_state_mean():
    phi = init_state(10**4, 1e-3, np.random.default_rng(17))
    assert abs(phi.mean() - 0.5) < 5e-5


def test_init_state_clamped():
    phi = init_state(1000, 10.0, np.random.default_rng(0))
    assert phi.min() == 1e-9 and phi.max() == 1 - 1e-9


def test_init_state_rejects_bad_args():
    with pytest.raises(ValidationError):
        init_state(0, 1e-3, 0)
    with pytest.raises(ValidationError):
        init_state(4, -1.0, 0)


# -- configuration objects ----------------------------------------------------------


def test_schedule_parse_and_str():
    s = NestSchedule.parse("6:2000, 7:800,8:600,9:400,10:400,12:300")
    assert s.total_steps == 4500
    assert s.boundaries() == [2000, 2800, 3400, 3800, 4200, 4500]
    assert str(s) == "6:2000,7:800,8:600,9:400,10:400,12:300"
    assert NestSchedule.parse("30").phases == ((0, 30),)


@pytest.mark.parametrize("text", ["", "a:3", "1:0", "-1:5", "1:2:3"])
def test_schedule_rejects(text):
    with pytest.raises(ConfigurationError):
        NestSchedule.parse(text)


def test_rule_rejects_unknown():
    with pytest.raises(ConfigurationError):
        UpdateRule("annealed")


def test_config_round_trip_and_fingerprint():
    cfg = RunConfig(UpdateRule("evolved"), NestSchedule.parse("1:10,2:5"), 0.01, 1e-3, 5)
    again = RunConfig.from_dict(cfg.to_dict())
    assert again == cfg
    assert again.fingerprint() == cfg.fingerprint()
    other = RunConfig(UpdateRule("evolved"), NestSchedule.parse("1:10,2:5"), 0.01, 1e-3, 6)
    assert other.fingerprint() != cfg.fingerprint()


@pytest.mark.parametrize(
    "kwargs",
    [{"j_magnitude": -1}, {"noise_sigma": -1e-3}, {"record_every": 0}, {"seed": -1}, {"j_magnitude": float("nan")}],
)
def test_config_validation(kwargs):
    base = {"rule": UpdateRule("psi"), "schedule": NestSchedule.parse("0:5")}
    with pytest.raises(ConfigurationError):
        RunConfig(**{**base, **kwargs})


# -- runner -----------------------------------------------------------------------------


def _cfg(rule="evolved", schedule="1:20,2:15", j=0.02, seed=3, **kw):
    return RunConfig(UpdateRule(rule), NestSchedule.parse(schedule), j, 1e-3, seed, **kw)


def test_run_step_accounting():
    inst = gen_complete(20, "random-pm1", seed=0)
    rec = run(inst, _cfg(record_every=10))
    assert rec.total_steps == 35
    assert list(rec.steps) == [0, 10, 20, 30, 35]
    assert list(rec.n_active) == [1, 1, 1, 2, 2]
    assert sorted(rec.states) == [0, 20, 35]
    assert np.array_equal(rec.states[35], rec.final_state)


def test_run_records_all_states_on_request():
    inst = gen_complete(10, "random-pm1", seed=0)
    rec = run(inst, _cfg(record_every=5, record_states=True))
    assert sorted(rec.states) == [0, 5, 10, 15, 20, 25, 30, 35]


def test_run_energy_and_cut_consistent():
    from ssbm import cut_value, ising_energy, threshold_states

    inst = gen_complete(25, "random-pm1", seed=6)
    rec = run(inst, _cfg(record_every=35))
    spins = threshold_states(rec.final_state)
    assert rec.energy[-1] == ising_energy(spins, inst)
    assert rec.cut[-1] == cut_value(spins, inst)


def test_run_deterministic():
    inst = gen_complete(30, "random-pm1", seed=1)
    a = run(inst, _cfg(seed=42))
    b = run(inst, _cfg(seed=42))
    assert a.digest() == b.digest()
    assert run(inst, _cfg(seed=43)).digest() != a.digest()


def test_run_backends_agree():
    from ssbm import kernels

    names = kernels.available()
    if len(names) < 2:
        pytest.skip("only one kernel backend available")
    inst = gen_complete(60, "random-pm1", seed=2)
    recs = [run(inst, _cfg(schedule="2:60", j=0.01), backend=b) for b in names]
    assert np.allclose(recs[0].final_state, recs[1].final_state, atol=1e-9)
    assert np.array_equal(recs[0].cut, recs[1].cut)


def test_run_decoupled_settles():
    inst = ProblemInstance(16, [], [], [])
    rec = run(inst, _cfg(rule="psi", schedule="0:30", j=0.0, seed=1, record_states=True))
    start = rec.states[0]
    final = rec.final_state
    assert np.array_equal(np.round(final), (start > 0.5).astype(float))


def test_run_basic_rule_requires_edgeless():
    with pytest.raises(ConfigurationError):
        run(gen_circulant(4, [1]), _cfg(rule="basic", schedule="0:5"))


def test_run_basic_rule_on_edgeless():
    inst = ProblemInstance(4, [], [], [])
    rec = run(inst, _cfg(rule="basic", schedule="0:3", j=0.0))
    assert rec.total_steps == 3
    assert np.all(rec.energy == 0)


def test_run_per_step_noise_changes_trajectory():
    inst = gen_complete(20, "random-pm1", seed=0)
    a = run(inst, _cfg(seed=1))
    b = run(inst, _cfg(seed=1, per_step_noise=True))
    assert not np.array_equal(a.final_state, b.final_state)
