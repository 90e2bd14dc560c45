import numpy as np
import pytest

from anisodisp.semigroup import SemigroupParams, evolve_linear
from anisodisp.spectral import (
    Grid2D,
    SpectralError,
    SpectralField,
    forward_transform,
    l2_norm,
    linf_norm,
)
from anisodisp.sqg import (
    BlowUpError,
    CFLError,
    SQGState,
    _dealias_mask,
    _Workspace,
    cfl_dt,
    run_and_diagnose,
    step,
    velocity,
)
from conftest import random_field


def small_state(grid, eps=0.05, dt=0.01, seed=1):
    f = random_field(grid, seed=seed, width=2.0)
    f.coeffs *= eps / linf_norm(f)
    return SQGState(theta=f, alpha=1.0, dt=dt)


def test_state_validation(grid64):
    f = random_field(grid64)
    with pytest.raises(SpectralError):
        SQGState(theta=f, dealias=1.5)


def test_velocity_perpendicular_to_gradient(grid64):
    """u = perp-gradient of the stream function, so u . grad is divergence form."""
    theta = random_field(grid64, seed=2)
    u1, u2 = velocity(theta)
    from anisodisp.spectral import MultiplierSpec, apply_multiplier, inner_product

    d1, d2 = MultiplierSpec.deriv(1), MultiplierSpec.deriv(2)
    div = apply_multiplier(u1, d1).coeffs + apply_multiplier(u2, d2).coeffs
    assert np.max(np.abs(div)) <= 1e-12
    # transport by u preserves L^2: <theta, u . grad theta> = 0
    tx = apply_multiplier(theta, d1)
    ty = apply_multiplier(theta, d2)
    adv = forward_transform(
        u1.to_physical() * tx.to_physical() + u2.to_physical() * ty.to_physical(),
        grid64,
    )
    assert abs(inner_product(theta, adv)) <= 1e-10


def test_dealias_mask_shape(grid64):
    mask = _dealias_mask(grid64, 2.0 / 3.0)
    cutoff = 2.0 / 3.0 * (grid64.N // 2)
    assert mask[0, 0]
    assert not mask[grid64.N // 2, 0]
    assert bool(mask[int(cutoff) + 1, 0]) is False


def test_single_mode_matches_linear(grid64):
    """One plane wave: the nonlinearity cancels, stepping equals the semigroup."""
    c = np.zeros((64, 64), dtype=complex)
    c[2, 1] = 0.3 - 0.1j
    f = SpectralField(grid64, c)
    f.enforce_hermitian()
    st = SQGState(theta=f.copy(), alpha=1.0, dt=0.05)
    for _ in range(10):
        st = step(st)
    lin = evolve_linear(f, SemigroupParams(1.0, 0.5))
    assert np.max(np.abs(st.theta.coeffs - lin.coeffs)) <= 1e-12


def test_l2_conserved_short_run(grid64):
    st = small_state(grid64, dt=0.01)
    n0 = l2_norm(st.theta)
    for _ in range(50):
        st = step(st)
    assert abs(l2_norm(st.theta) - n0) <= 1e-10 * n0


def test_reversibility(grid64):
    st = small_state(grid64, dt=0.02, seed=3)
    start = st.theta.copy()
    for _ in range(10):
        st = step(st)
    st = SQGState(theta=st.theta, time=st.time, alpha=st.alpha, dt=-st.dt)
    for _ in range(10):
        st = step(st)
    diff = np.max(np.abs(st.theta.coeffs - start.coeffs))
    assert diff <= 1e-6 * max(np.max(np.abs(start.coeffs)), 1e-30)


def test_cfl_guard(grid64):
    st = small_state(grid64, eps=1.0, dt=10.0, seed=4)
    with pytest.raises(CFLError) as err:
        step(st)
    assert err.value.dt_required < 10.0


def test_cfl_dt_scales_with_velocity(grid64):
    st = small_state(grid64)
    assert cfl_dt(st, 2.0) == 2.0 * cfl_dt(st, 4.0)
    assert cfl_dt(st, 0.0) == np.inf


def test_blowup_error_carries_state(grid64):
    st = small_state(grid64)
    st.theta.coeffs *= np.nan
    ws = _Workspace(grid64, 1.0, 2.0 / 3.0)
    with pytest.raises(BlowUpError):
        # NaN input propagates to a NaN output
        step(st, ws)


def test_zero_data_stays_zero(grid64):
    f = SpectralField(grid64, np.zeros((64, 64), dtype=complex))
    diag = run_and_diagnose(f, T=0.5, dt=0.05, n_outputs=5)
    assert all(v == 0.0 for v in diag.h_s)
    assert all(v == 0.0 for v in diag.integral)


def test_diagnostics_series(grid64):
    st = small_state(grid64)
    diag = run_and_diagnose(st.theta, T=1.0, dt=0.05, n_outputs=10)
    assert len(diag.times) == 11
    assert diag.times[0] == 0.0
    # running integral is nondecreasing
    assert all(
        diag.integral[i] <= diag.integral[i + 1] + 1e-15
        for i in range(len(diag.integral) - 1)
    )
    # the fitted Gronwall envelope dominates the recorded norms
    assert all(
        e >= h * (1.0 - 1e-9) for e, h in zip(diag.envelope, diag.h_s)
    )
    assert not diag.blew_up


def test_max_theta_nearly_monotone(grid64):
    """Transport preserves sup; discretization leaks only at high order."""
    st = small_state(grid64, eps=0.05, dt=0.01, seed=5)
    m0 = linf_norm(st.theta)
    worst = 0.0
    for _ in range(20):
        st = step(st)
        m1 = linf_norm(st.theta)
        worst = max(worst, m1 - m0)
        m0 = m1
    # the leak per step is dealiasing error, far below the 0.05 amplitude
    assert worst <= 1e-4
