"""Perturbed stratified Boussinesq system around rho = -y (stable) or
rho = +y (unstable), in vorticity/density-perturbation variables.

Per Fourier mode the linear part is a 2x2 system in (omega_hat, |xi| rho_hat)
with eigenvalues +-i xi_1/|xi| on the stable branch (an exact rotation, so
the mode energy |omega_hat|^2 + |xi|^2 |rho_hat|^2 is conserved) and real
growth rates +-xi_1/|xi| on the unstable branch.  The stepper uses this
exact propagator as the integrating factor for RK4.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .spectral import (
    MultiplierSpec,
    SpectralError,
    SpectralField,
    apply_multiplier,
    l2_norm,
    linf_norm,
    sobolev_norm,
)
from .sqg import BlowUpError, CFLError, _dealias_mask


@dataclass
class BoussState:
    omega: SpectralField
    rho: SpectralField
    time: float = 0.0
    dt: float = 1e-2
    dealias: float = 2.0 / 3.0
    branch: str = "stable"

    def __post_init__(self):
        if self.branch not in ("stable", "unstable"):
            raise SpectralError(f"branch must be stable or unstable, got {self.branch}")
        if self.omega.grid != self.rho.grid:
            raise SpectralError("omega and rho must share a grid")
        self.omega.zero_mean()
        self.rho.zero_mean()


def velocity(omega):
    """u = (-d2, d1)(-Lap)^{-1} omega; u2 = d1 (-Lap)^{-1} omega."""
    return (
        apply_multiplier(omega, MultiplierSpec.velocity_bouss(1)),
        apply_multiplier(omega, MultiplierSpec.velocity_bouss(2)),
    )


def mode_energy(omega, rho):
    """Per-mode E(k) = |omega_hat|^2 + |xi|^2 |rho_hat|^2 and its total."""
    E = np.abs(omega.coeffs) ** 2 + omega.grid.xi_sq * np.abs(rho.coeffs) ** 2
    return E, float(np.sum(E))


def _propagator_arrays(grid, t, branch):
    """(c, s_om, s_rho): omega' = c om + s_om rho, rho' = c rho + s_rho om."""
    beta = grid.xi1 / grid.xi_mod_safe
    beta[0, 0] = 0.0
    r = grid.xi_mod_safe
    if branch == "stable":
        c = np.cos(beta * t)
        s = np.sin(beta * t)
        return c + 0j, 1j * r * s, 1j * s / r
    c = np.cosh(beta * t)
    s = np.sinh(beta * t)
    return c + 0j, 1j * r * s, -1j * s / r


def linear_propagator(state, t):
    """Exact per-mode solution of the linearized system, advanced by t."""
    grid = state.omega.grid
    c, s_om, s_rho = _propagator_arrays(grid, t, state.branch)
    om = state.omega.coeffs
    rh = state.rho.coeffs
    om_new = c * om + s_om * rh
    rh_new = c * rh + s_rho * om
    fo = SpectralField(grid, om_new)
    fr = SpectralField(grid, rh_new)
    for f in (fo, fr):
        f.zero_mean()
        f.zero_nyquist()
        f.enforce_hermitian()
    return BoussState(
        omega=fo, rho=fr, time=state.time + t, dt=state.dt,
        dealias=state.dealias, branch=state.branch,
    )


def diagonal_variables(state):
    """(omega + |grad| rho, omega - |grad| rho) as coefficient arrays."""
    r = state.omega.grid.xi_mod
    return (
        state.omega.coeffs + r * state.rho.coeffs,
        state.omega.coeffs - r * state.rho.coeffs,
    )


class _Workspace:
    def __init__(self, grid, dealias, branch):
        self.grid = grid
        xi_sq = grid.xi_sq.copy()
        xi_sq[0, 0] = 1.0
        self.u1_sym = -1j * grid.xi2 / xi_sq
        self.u2_sym = 1j * grid.xi1 / xi_sq
        self.u1_sym[0, 0] = 0.0
        self.u2_sym[0, 0] = 0.0
        self.d1 = 1j * grid.xi1
        self.d2 = 1j * grid.xi2
        self.mask = _dealias_mask(grid, dealias)
        self.N2 = grid.N**2
        self.branch = branch
        self._props = {}

    def propagator(self, t):
        key = round(t, 15)
        if key not in self._props:
            self._props[key] = _propagator_arrays(self.grid, t, self.branch)
        return self._props[key]

    def nonlinear(self, om, rh):
        """(-dealias(u.grad omega), -dealias(u.grad rho), max |u|)."""
        u1 = np.real(sfft.ifft2(self.u1_sym * om)) * self.N2
        u2 = np.real(sfft.ifft2(self.u2_sym * om)) * self.N2
        ox = np.real(sfft.ifft2(self.d1 * om)) * self.N2
        oy = np.real(sfft.ifft2(self.d2 * om)) * self.N2
        rx = np.real(sfft.ifft2(self.d1 * rh)) * self.N2
        ry = np.real(sfft.ifft2(self.d2 * rh)) * self.N2
        f_om = -(sfft.fft2(u1 * ox + u2 * oy) / self.N2) * self.mask
        f_rh = -(sfft.fft2(u1 * rx + u2 * ry) / self.N2) * self.mask
        umax = float(max(np.max(np.abs(u1)), np.max(np.abs(u2))))
        return f_om, f_rh, umax

    def apply_prop(self, arrays, t):
        c, s_om, s_rho = self.propagator(t)
        om, rh = arrays
        return c * om + s_om * rh, c * rh + s_rho * om


def step(state, workspace=None):
    """One integrating-factor RK4 step of the perturbed system."""
    ws = workspace or _Workspace(state.omega.grid, state.dealias, state.branch)
    om = state.omega.coeffs * ws.mask
    rh = state.rho.coeffs * ws.mask
    dt = state.dt
    _, _, umax = ws.nonlinear(om, rh)
    kmax = np.pi * state.omega.grid.N / state.omega.grid.L
    if umax > 0.0 and abs(dt) > 0.5 / (umax * kmax):
        raise CFLError(dt, 0.5 / (umax * kmax))

    def N(pair):
        a, b, _ = ws.nonlinear(pair[0], pair[1])
        return a, b

    def ax(pair, h, other):
        return pair[0] + h * other[0], pair[1] + h * other[1]

    y = (om, rh)
    k1 = N(y)
    k2 = N(ws.apply_prop(ax(y, dt / 2.0, k1), dt / 2.0))
    k3 = ax(ws.apply_prop(y, dt / 2.0), dt / 2.0, k2)
    k3 = N(k3)
    k4 = N(ax(ws.apply_prop(y, dt), dt, ws.apply_prop(k3, dt / 2.0)))
    Ey = ws.apply_prop(y, dt)
    Ek1 = ws.apply_prop(k1, dt)
    E2k23 = ws.apply_prop((k2[0] + k3[0], k2[1] + k3[1]), dt / 2.0)
    om_n = Ey[0] + dt / 6.0 * (Ek1[0] + 2.0 * E2k23[0] + k4[0])
    rh_n = Ey[1] + dt / 6.0 * (Ek1[1] + 2.0 * E2k23[1] + k4[1])
    if not (np.all(np.isfinite(om_n)) and np.all(np.isfinite(rh_n))):
        raise BlowUpError(state.time, state)
    fo = SpectralField(state.omega.grid, om_n)
    fr = SpectralField(state.omega.grid, rh_n)
    for f in (fo, fr):
        f.zero_mean()
        f.zero_nyquist()
    return BoussState(
        omega=fo, rho=fr, time=state.time + dt, dt=dt,
        dealias=state.dealias, branch=state.branch,
    )


@dataclass
class StabilityReport:
    branch: str
    eps: float
    times: list = field(default_factory=list)
    hs_omega: list = field(default_factory=list)
    hs1_rho: list = field(default_factory=list)
    e_total: list = field(default_factory=list)
    grad_u_inf: list = field(default_factory=list)
    grad_rho_inf: list = field(default_factory=list)
    integral: list = field(default_factory=list)
    exit_time: float = None
    initial_norms: dict = field(default_factory=dict)
    blew_up: bool = False

    def rows(self):
        for i in range(len(self.times)):
            yield {
                "t": self.times[i],
                "Hs_omega": self.hs_omega[i],
                "Hs1_rho": self.hs1_rho[i],
                "E_total": self.e_total[i],
                "gradU_inf": self.grad_u_inf[i],
                "gradRho_inf": self.grad_rho_inf[i],
                "integral": self.integral[i],
            }


def default_profiles(grid):
    """Fixed smooth zero-mean profiles for the unit-size perturbation."""
    X, Y = grid.meshgrid()
    w = np.exp(-(X**2 + Y**2) / 4.0) * np.sin(2.0 * np.pi * X / grid.L * 4.0)
    r = np.exp(-((X - 2.0) ** 2 + Y**2) / 4.0) * np.sin(2.0 * np.pi * Y / grid.L * 4.0)
    from .spectral import forward_transform

    fo = forward_transform(w, grid).zero_mean()
    fr = forward_transform(r, grid).zero_mean()
    return fo, fr


def stability_experiment(grid, eps, T, dt, branch="stable", delta=0.5, gamma=0.5,
                         n_outputs=60, dealias=2.0 / 3.0, growth_cap=1e3,
                         profiles=None):
    """Integrate eps-size perturbations and report the bootstrap exit time.

    Exit is the first output time where ||omega||_{H^{4+delta}} +
    ||rho||_{H^{5+gamma}} exceeds twice its initial value; censored runs
    report exit_time = T.
    """
    if not 0.0 < eps <= 0.1:
        raise SpectralError(f"perturbation size must lie in (0, 0.1], got {eps}")
    s_om = 4.0 + delta
    s_rh = 5.0 + gamma
    fo, fr = profiles if profiles else default_profiles(grid)
    om0 = SpectralField(grid, eps * fo.coeffs)
    rh0 = SpectralField(grid, eps * fr.coeffs)
    state = BoussState(omega=om0, rho=rh0, dt=dt, dealias=dealias, branch=branch)
    ws = _Workspace(grid, dealias, branch)
    state.omega.coeffs *= ws.mask
    state.rho.coeffs *= ws.mask

    rep = StabilityReport(branch=branch, eps=eps)
    rep.initial_norms = {
        "omega_H4d": sobolev_norm(state.omega, s_om),
        "omega_Hm1": sobolev_norm(state.omega, -1.0),
        "rho_H5g": sobolev_norm(state.rho, s_rh),
        "omega_L2": l2_norm(state.omega),
    }
    norm0 = rep.initial_norms["omega_H4d"] + rep.initial_norms["rho_H5g"]
    d1 = MultiplierSpec.deriv(1)
    d2 = MultiplierSpec.deriv(2)

    def record(st, running):
        u1, u2 = velocity(st.omega)
        gu = max(
            linf_norm(apply_multiplier(u1, d1)),
            linf_norm(apply_multiplier(u1, d2)),
            linf_norm(apply_multiplier(u2, d1)),
            linf_norm(apply_multiplier(u2, d2)),
        )
        gr = max(
            linf_norm(apply_multiplier(st.rho, d1)),
            linf_norm(apply_multiplier(st.rho, d2)),
        )
        rep.times.append(st.time)
        rep.hs_omega.append(sobolev_norm(st.omega, s_om))
        rep.hs1_rho.append(sobolev_norm(st.rho, s_rh))
        rep.e_total.append(mode_energy(st.omega, st.rho)[1])
        rep.grad_u_inf.append(gu)
        rep.grad_rho_inf.append(gr)
        rep.integral.append(running)
        return gu + gr

    out_times = np.linspace(0.0, T, n_outputs + 1)
    running = 0.0
    last_rate = record(state, running)
    next_out = 1
    nsteps = int(round(T / dt))
    try:
        for n in range(1, nsteps + 1):
            state = step(state, ws)
            current = sobolev_norm(state.omega, s_om) + sobolev_norm(state.rho, s_rh)
            if eps > 0 and current > growth_cap * norm0:
                raise BlowUpError(state.time, state, reason="growth cap exceeded")
            while next_out <= n_outputs and state.time >= out_times[next_out] - 1e-12:
                rate_prev = last_rate
                t_prev = rep.times[-1]
                last_rate = record(state, running)
                running += 0.5 * (rate_prev + last_rate) * (state.time - t_prev)
                rep.integral[-1] = running
                next_out += 1
            if rep.exit_time is None and current > 2.0 * norm0:
                rep.exit_time = state.time
                break
    except BlowUpError:
        rep.blew_up = True
        if rep.exit_time is None:
            rep.exit_time = state.time
    if rep.exit_time is None:
        rep.exit_time = T
    return rep
