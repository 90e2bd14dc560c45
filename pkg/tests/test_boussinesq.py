import numpy as np
import pytest

from anisodisp.boussinesq import (
    BoussState,
    default_profiles,
    diagonal_variables,
    linear_propagator,
    mode_energy,
    stability_experiment,
    step,
    velocity,
)
from anisodisp.spectral import Grid2D, SpectralError, SpectralField
from conftest import random_field


def random_pair(grid, seed=1):
    om = random_field(grid, seed=seed)
    rh = random_field(grid, seed=seed + 100)
    return om, rh


def test_branch_validated(grid64):
    om, rh = random_pair(grid64)
    with pytest.raises(SpectralError):
        BoussState(omega=om, rho=rh, branch="sideways")


def test_grids_must_match(grid64):
    om = random_field(grid64)
    rh = random_field(Grid2D(32, 10.0))
    with pytest.raises(SpectralError):
        BoussState(omega=om, rho=rh)


def test_velocity_divergence_free(grid64):
    om = random_field(grid64, seed=2)
    u1, u2 = velocity(om)
    from anisodisp.spectral import MultiplierSpec, apply_multiplier

    d1, d2 = MultiplierSpec.deriv(1), MultiplierSpec.deriv(2)
    div = apply_multiplier(u1, d1).coeffs + apply_multiplier(u2, d2).coeffs
    assert np.max(np.abs(div)) <= 1e-12


def test_vorticity_recovered_from_velocity(grid64):
    """u = perp-grad (-Lap)^{-1} omega, so curl u = d1 u2 - d2 u1 = -omega."""
    om = random_field(grid64, seed=3)
    u1, u2 = velocity(om)
    from anisodisp.spectral import MultiplierSpec, apply_multiplier

    curl = (
        apply_multiplier(u2, MultiplierSpec.deriv(1)).coeffs
        - apply_multiplier(u1, MultiplierSpec.deriv(2)).coeffs
    )
    ref = om.copy()
    ref.zero_nyquist()
    assert np.max(np.abs(curl + ref.coeffs)) <= 1e-12


def test_stable_propagator_conserves_mode_energy(grid64):
    om, rh = random_pair(grid64, seed=4)
    st = BoussState(omega=om, rho=rh, branch="stable")
    E0, tot0 = mode_energy(st.omega, st.rho)
    st2 = linear_propagator(st, 7.3)
    E1, tot1 = mode_energy(st2.omega, st2.rho)
    assert np.max(np.abs(E1 - E0)) <= 1e-12 * np.max(E0)
    assert abs(tot1 - tot0) <= 1e-12 * tot0


def test_diagonal_variables_rotate(grid64):
    """omega +- |grad| rho pick up exactly the phases exp(+-i beta t)."""
    om, rh = random_pair(grid64, seed=5)
    st = BoussState(omega=om, rho=rh, branch="stable")
    t = 2.6
    st2 = linear_propagator(st, t)
    ap0, am0 = diagonal_variables(st)
    ap1, am1 = diagonal_variables(st2)
    beta = grid64.xi1 / grid64.xi_mod_safe
    beta[0, 0] = 0.0
    scale = np.max(np.abs(ap0))
    assert np.max(np.abs(ap1 - np.exp(1j * beta * t) * ap0)) <= 1e-12 * scale
    assert np.max(np.abs(am1 - np.exp(-1j * beta * t) * am0)) <= 1e-12 * scale


def test_unstable_growth_rate_unit_frequency():
    """At xi = (1, 0) the unstable branch grows like exp(t) exactly."""
    grid = Grid2D(64, 10.0 * np.pi)  # lattice contains xi = (1, 0) at k = (5, 0)
    om = SpectralField(grid, np.zeros((64, 64), dtype=complex))
    rh = SpectralField(grid, np.zeros((64, 64), dtype=complex))
    om.coeffs[5, 0] = 1.0
    rh.coeffs[5, 0] = -1j
    om.enforce_hermitian()
    rh.enforce_hermitian()
    assert grid.xi1[5, 0] == 1.0 and grid.xi2[5, 0] == 0.0
    st = BoussState(omega=om, rho=rh, branch="unstable")
    t = 2.0
    st2 = linear_propagator(st, t)
    a0 = st.omega.coeffs[5, 0] + 1j * st.rho.coeffs[5, 0]
    a1 = st2.omega.coeffs[5, 0] + 1j * st2.rho.coeffs[5, 0]
    rate = np.log(abs(a1 / a0)) / t
    assert abs(rate - 1.0) <= 1e-10


def test_linear_propagator_group_law(grid64):
    om, rh = random_pair(grid64, seed=6)
    st = BoussState(omega=om, rho=rh, branch="stable")
    a = linear_propagator(linear_propagator(st, 1.1), 2.2)
    b = linear_propagator(st, 3.3)
    assert np.max(np.abs(a.omega.coeffs - b.omega.coeffs)) <= 1e-12
    assert np.max(np.abs(a.rho.coeffs - b.rho.coeffs)) <= 1e-12


def test_step_keeps_fields_real(grid64):
    om, rh = random_pair(grid64, seed=7)
    om.coeffs *= 0.01
    rh.coeffs *= 0.01
    st = BoussState(omega=om, rho=rh, dt=0.02, branch="stable")
    for _ in range(5):
        st = step(st)
    assert st.omega.hermitian_defect() <= 1e-12
    assert st.rho.hermitian_defect() <= 1e-12


def test_small_step_tracks_linear(grid64):
    """Tiny amplitude: the nonlinear stepper reproduces the exact propagator."""
    om, rh = random_pair(grid64, seed=8)
    eps = 1e-6
    om.coeffs *= eps
    rh.coeffs *= eps
    st = BoussState(omega=om.copy(), rho=rh.copy(), dt=0.05, branch="stable")
    for _ in range(10):
        st = step(st)
    ref = linear_propagator(
        BoussState(omega=om, rho=rh, branch="stable"), 0.5
    )
    scale = np.max(np.abs(ref.omega.coeffs))
    # the residual is the quadratic coupling, O(eps^2) relative to eps
    assert np.max(np.abs(st.omega.coeffs - ref.omega.coeffs)) <= 10.0 * eps * scale


def test_eps_zero_rejected(grid64):
    with pytest.raises(SpectralError):
        stability_experiment(grid64, eps=0.0, T=1.0, dt=0.1)
    with pytest.raises(SpectralError):
        stability_experiment(grid64, eps=0.2, T=1.0, dt=0.1)


def test_stability_experiment_series(grid64):
    rep = stability_experiment(grid64, eps=0.01, T=1.0, dt=0.05, n_outputs=5)
    assert rep.exit_time == 1.0  # censored: no doubling this fast
    assert len(rep.times) == 6
    assert all(np.isfinite(rep.e_total))
    assert all(
        rep.integral[i] <= rep.integral[i + 1] + 1e-15
        for i in range(len(rep.integral) - 1)
    )
    assert rep.initial_norms["omega_H4d"] > 0.0


def test_default_profiles_zero_mean(grid64):
    fo, fr = default_profiles(grid64)
    assert fo.coeffs[0, 0] == 0.0
    assert fr.coeffs[0, 0] == 0.0
    assert fo.hermitian_defect() <= 1e-13
