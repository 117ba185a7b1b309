import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqwalk.lindblad import (CollapseSet, DecoherenceRates, IntegrationError,
                             IntegratorConfig, build_collapse_set,
                             clear_caches, compiled_liouvillian,
                             density_matrix_checks, evolve_schedule,
                             evolve_segment, lindblad_apply, liouvillian_matrix,
                             load_snapshots, save_snapshots)
from cqwalk.protocol import build_schedule
from cqwalk.statespace import DeviceParams, StateSpace

REF = DeviceParams.from_mhz(2, 50.0, 100.0)


def _random_density(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def test_t0_preset_rates():
    r = DecoherenceRates.t0()
    assert r.kappa == pytest.approx(0.1)
    assert r.gamma_ge == pytest.approx(0.1)
    assert r.gamma_ef == pytest.approx(0.1)
    assert r.gamma_gf == pytest.approx(0.1)
    assert r.gamma_phi_e == pytest.approx(0.2)
    assert r.gamma_phi_f == pytest.approx(0.2)


def test_rate_scaling_divides_rates():
    r = DecoherenceRates.t0(scale=5.0)
    assert r.kappa == pytest.approx(0.02)
    assert r.gamma_phi_e == pytest.approx(0.04)
    with pytest.raises(ValueError):
        DecoherenceRates.t0().scaled(0.0)
    with pytest.raises(ValueError):
        DecoherenceRates(kappa=-1.0)
    with pytest.raises(ValueError):
        DecoherenceRates(kappa=math.nan)


def test_collapse_set_counts():
    space = StateSpace(1)
    full = build_collapse_set(space, DecoherenceRates.t0())
    # five channels per qutrit, one per cavity: 5*2 + 1
    assert len(full) == 11
    none = build_collapse_set(space, DecoherenceRates.zero())
    assert len(none) == 0
    only_kappa = build_collapse_set(space, DecoherenceRates(kappa=0.3))
    assert len(only_kappa) == 1
    assert only_kappa.labels == ("loss_c1",)
    op = only_kappa.ops[0]
    assert op[0, space.cavity_index(1)] == pytest.approx(math.sqrt(0.3))


def test_liouvillian_matches_direct_application():
    rng = np.random.default_rng(3)
    space = StateSpace(1)
    collapse = build_collapse_set(space, DecoherenceRates.t0())
    h = rng.normal(size=(space.dim, space.dim))
    h = h + h.T
    rho = _random_density(rng, space.dim)
    direct = lindblad_apply(rho, h, collapse)
    via_super = (liouvillian_matrix(h, collapse)
                 @ rho.reshape(-1)).reshape(space.dim, space.dim)
    assert np.allclose(direct, via_super, atol=1e-12)


def test_rk4_agrees_with_exponential_backend():
    space = StateSpace(2)
    params = DeviceParams.from_mhz(2, 50.0, 100.0)
    schedule = build_schedule(space, params)
    collapse = build_collapse_set(space, DecoherenceRates.t0())
    rng = np.random.default_rng(5)
    rho0 = _random_density(rng, space.dim)
    out_rk = evolve_schedule(rho0, schedule, collapse,
                             IntegratorConfig(method="rk4")).rho
    out_ex = evolve_schedule(rho0, schedule, collapse,
                             IntegratorConfig(method="expm")).rho
    assert np.max(np.abs(out_rk - out_ex)) < 1e-9


def test_auto_uses_unitary_shortcut_for_closed_segments():
    space = StateSpace(1)
    params = DeviceParams.from_mhz(1, 50.0, 100.0)
    schedule = build_schedule(space, params)
    empty = CollapseSet((), ())
    rng = np.random.default_rng(11)
    rho0 = _random_density(rng, space.dim)
    auto = evolve_schedule(rho0, schedule, empty, IntegratorConfig()).rho
    rk = evolve_schedule(rho0, schedule, empty,
                         IntegratorConfig(method="rk4")).rho
    assert np.max(np.abs(auto - rk)) < 1e-9
    # purity preserved without collapse channels
    assert np.trace(auto @ auto).real == pytest.approx(
        np.trace(rho0 @ rho0).real, abs=1e-9)


def test_trace_and_hermiticity_tracked():
    space = StateSpace(2)
    schedule = build_schedule(space, REF)
    collapse = build_collapse_set(space, DecoherenceRates.t0(0.2))
    rng = np.random.default_rng(7)
    rho0 = _random_density(rng, space.dim)
    res = evolve_schedule(rho0, schedule, collapse, IntegratorConfig())
    assert res.max_trace_error < 1e-10
    assert res.max_hermiticity_drift < 1e-12
    checks = density_matrix_checks(res.rho)
    assert checks["trace_error"] < 1e-10
    assert checks["hermiticity"] == 0.0
    assert checks["min_eigenvalue"] > -1e-12


def test_record_modes():
    space = StateSpace(2)
    schedule = build_schedule(space, REF)
    collapse = build_collapse_set(space, DecoherenceRates.t0())
    rho0 = np.zeros((space.dim, space.dim), dtype=complex)
    rho0[space.qutrit_index(1, 1), space.qutrit_index(1, 1)] = 1.0
    by_step = evolve_schedule(rho0, schedule, collapse, IntegratorConfig(),
                              record="steps")
    assert len(by_step.snapshots) == 3          # t=0 plus two steps
    assert by_step.times[0] == 0.0
    assert by_step.times[-1] == pytest.approx(schedule.total_duration)
    by_seg = evolve_schedule(rho0, schedule, collapse, IntegratorConfig(),
                             record="segments")
    assert len(by_seg.snapshots) == 7           # t=0 plus six segments
    with pytest.raises(ValueError):
        evolve_schedule(rho0, schedule, collapse, IntegratorConfig(),
                        record="sometimes")


def test_richardson_failure_raises():
    space = StateSpace(1)
    schedule = build_schedule(space, DeviceParams.from_mhz(1, 50.0, 100.0))
    collapse = build_collapse_set(space, DecoherenceRates.t0())
    rho0 = np.zeros((space.dim, space.dim), dtype=complex)
    rho0[1, 1] = 1.0
    cfg = IntegratorConfig(method="rk4", base_substeps=1,
                           richardson_tol=1e-300, max_doublings=1)
    with pytest.raises(IntegrationError):
        evolve_schedule(rho0, schedule, collapse, cfg)


def test_richardson_refines_until_tolerance():
    space = StateSpace(1)
    params = DeviceParams.from_mhz(1, 50.0, 100.0)
    collapse = build_collapse_set(space, DecoherenceRates.t0(0.1))
    rho0 = np.zeros((space.dim, space.dim), dtype=complex)
    rho0[1, 1] = 1.0
    h = build_schedule(space, params).segments[1].hamiltonian
    coarse_cfg = IntegratorConfig(method="rk4", base_substeps=2,
                                  richardson=False)
    out_c, stats_c = evolve_segment(rho0, h, 5e-3, collapse, coarse_cfg)
    rich_cfg = IntegratorConfig(method="rk4", base_substeps=2,
                                richardson=True, richardson_tol=1e-8,
                                max_doublings=10)
    out_r, stats_r = evolve_segment(rho0, h, 5e-3, collapse, rich_cfg)
    assert stats_r.substeps > stats_c.substeps
    exact = evolve_segment(rho0, h, 5e-3, collapse,
                           IntegratorConfig(method="expm"))[0]
    assert np.max(np.abs(out_r - exact)) < 1e-8


def test_compiled_liouvillian_is_cached():
    clear_caches()
    space = StateSpace(1)
    collapse = build_collapse_set(space, DecoherenceRates.t0())
    h = np.eye(space.dim)
    first = compiled_liouvillian(h, collapse)
    second = compiled_liouvillian(h.copy(), collapse)
    assert first is second


def test_integrator_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(method="leapfrog")
    with pytest.raises(ValueError):
        IntegratorConfig(base_substeps=0)
    with pytest.raises(ValueError):
        IntegratorConfig(dt_max_us=0.0)


def test_dt_max_raises_substep_count():
    space = StateSpace(1)
    collapse = build_collapse_set(space, DecoherenceRates.t0())
    h = build_schedule(space, DeviceParams.from_mhz(1, 50.0, 100.0)) \
        .segments[1].hamiltonian
    rho0 = np.zeros((space.dim, space.dim), dtype=complex)
    rho0[1, 1] = 1.0
    few = IntegratorConfig(method="rk4", base_substeps=10, richardson=False)
    _, stats_few = evolve_segment(rho0, h, 5e-3, collapse, few)
    capped = IntegratorConfig(method="rk4", base_substeps=10,
                              dt_max_us=1e-4, richardson=False)
    _, stats_capped = evolve_segment(rho0, h, 5e-3, collapse, capped)
    assert stats_few.substeps == 10
    assert stats_capped.substeps == 50


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10_000), scale=st.floats(0.2, 5.0))
def test_evolution_preserves_trace_property(seed, scale):
    space = StateSpace(1)
    collapse = build_collapse_set(space, DecoherenceRates.t0(scale))
    rng = np.random.default_rng(seed)
    rho0 = _random_density(rng, space.dim)
    h = build_schedule(space, DeviceParams.from_mhz(1, 50.0, 100.0)) \
        .segments[0].hamiltonian
    out, stats = evolve_segment(rho0, h, 2e-3, collapse,
                                IntegratorConfig(method="rk4",
                                                 base_substeps=64,
                                                 richardson=False))
    assert stats.trace_error < 1e-10
    assert np.trace(out).real == pytest.approx(1.0, abs=1e-10)


def test_snapshot_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    times = [0.0, 1.5e-3, 3.0e-3]
    snaps = [_random_density(rng, 6) for _ in times]
    path = tmp_path / "states.bin"
    save_snapshots(path, times, snaps)
    times2, snaps2 = load_snapshots(path)
    assert np.allclose(times, times2)
    for a, b in zip(snaps, snaps2):
        assert np.array_equal(a, b)


def test_snapshot_file_validation(tmp_path):
    bad = tmp_path / "junk.bin"
    bad.write_bytes(b"not a snapshot")
    with pytest.raises(ValueError):
        load_snapshots(bad)
    with pytest.raises(ValueError):
        save_snapshots(tmp_path / "x.bin", [0.0], [])
