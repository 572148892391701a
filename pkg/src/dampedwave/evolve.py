"""Time integration of the semilinear problem.

The production path is exponential time differencing: the linear part is
advanced with the exact propagator and the Duhamel integral over one step is
approximated with the nonlinearity held constant (ETD1) or linear in time
(ETD2, predictor-corrector).  :func:`picard_solve` instead iterates the
integral equation u = u_lin + int K(t - tau) * N(u(tau)) dtau on stored
samples, as a structural mirror of the fixed-point construction.
"""
from collections import deque
from dataclasses import dataclass, field, replace
import math

import numpy as np

from .errors import InvalidArg, NonFiniteState
from .moduli import nonlinear_term
from .spectral import (State, forward_transform, inverse_transform,
                       kernel_pair, propagator_matrix)
from . import diagnostics

SCHEMES = ("ETD1", "ETD2")
DATA_KINDS = ("gaussian", "uniform", "zero")


@dataclass(frozen=True)
class DataSpec:
    """One initial-data component.

    ``gaussian``: ``amplitude * exp(-|x - center|^2 / width^2)``;
    ``uniform``: the constant ``amplitude``; ``zero``: identically zero.
    """
    kind: str = "gaussian"
    amplitude: float = 1.0
    width: float = 1.0
    center: float = 0.0

    def __post_init__(self):
        if self.kind not in DATA_KINDS:
            raise InvalidArg(f"unknown data kind {self.kind!r}")
        if self.kind == "gaussian" and not self.width > 0:
            raise InvalidArg("gaussian width must be positive")

    def sample(self, grid):
        if self.kind == "zero":
            return np.zeros(grid.shape)
        if self.kind == "uniform":
            return np.full(grid.shape, float(self.amplitude))
        x = grid.x - self.center
        r2 = x * x
        out = r2
        for _ in range(grid.n - 1):
            out = np.add.outer(out, r2)
        return self.amplitude * np.exp(-out / self.width**2)

    def integral(self, n):
        """Whole-space integral (infinite for nonzero uniform data)."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "uniform":
            return math.copysign(math.inf, self.amplitude) if self.amplitude else 0.0
        return self.amplitude * (math.pi * self.width**2) ** (n / 2)


@dataclass(frozen=True)
class SolverConfig:
    """Solver and data settings for one run.

    ``blowup_threshold=None`` means ``1e3 * max(1, eps)``.  Sample times are
    snapped to the step lattice ``k * dt``.
    """
    dt: float = 0.05
    scheme: str = "ETD2"
    T_max: float = 10.0
    sample_times: tuple = ()
    blowup_threshold: float = None
    dealias: bool = False
    eps: float = 0.1
    u0: DataSpec = field(default_factory=DataSpec)
    u1: DataSpec = field(default_factory=lambda: DataSpec("zero"))
    nonlinear: bool = True
    gl_points: int = 8

    def __post_init__(self):
        if not 0 < self.dt <= 0.1:
            raise InvalidArg(f"dt must lie in (0, 0.1], got {self.dt}")
        if self.scheme not in SCHEMES:
            raise InvalidArg(f"unknown scheme {self.scheme!r}")
        if not self.T_max > 0:
            raise InvalidArg("T_max must be positive")
        st = tuple(float(t) for t in self.sample_times)
        if any(b < a for a, b in zip(st, st[1:])):
            raise InvalidArg("sample_times must be sorted")
        if st and (st[0] < 0 or st[-1] > self.T_max * (1 + 1e-12)):
            raise InvalidArg("sample_times must lie in [0, T_max]")
        object.__setattr__(self, "sample_times", st)
        if self.blowup_threshold is not None and not self.blowup_threshold > 0:
            raise InvalidArg("blowup_threshold must be positive")
        if self.eps < 0:
            raise InvalidArg("eps must be non-negative")
        if self.gl_points < 2:
            raise InvalidArg("gl_points must be at least 2")

    @property
    def threshold(self):
        if self.blowup_threshold is not None:
            return self.blowup_threshold
        return 1e3 * max(1.0, self.eps)

    @property
    def n_steps(self):
        return int(round(self.T_max / self.dt))

    def sample_steps(self):
        """Sorted unique step indices of the sample times."""
        return sorted({int(round(t / self.dt)) for t in self.sample_times})

    def to_dict(self):
        return {
            "dt": self.dt, "scheme": self.scheme, "Tmax": self.T_max,
            "blowup_threshold": self.threshold, "dealias": self.dealias,
            "nonlinear": self.nonlinear, "eps": self.eps,
            "u0": vars(self.u0).copy(), "u1": vars(self.u1).copy(),
        }


class Stepper:
    """Cached per-(grid, dt) coefficients of the ETD schemes.

    ``w_u0``/``w_t0`` integrate the kernel and its time derivative against a
    constant nonlinearity over one step; ``w_u1``/``w_t1`` against the ramp
    ``sigma / dt``.  All four come from Gauss-Legendre quadrature per mode.
    """

    def __init__(self, grid, dt, gl_points=8):
        self.grid = grid
        self.dt = dt
        xi = grid.xi_norm
        self.a11, self.a12, self.a21, self.a22 = propagator_matrix(dt, xi)
        nodes, weights = np.polynomial.legendre.leggauss(gl_points)
        sig = 0.5 * dt * (nodes + 1.0)   # tau - t_n
        w = 0.5 * dt * weights
        self.w_u0 = np.zeros(xi.shape)
        self.w_t0 = np.zeros(xi.shape)
        self.w_u1 = np.zeros(xi.shape)
        self.w_t1 = np.zeros(xi.shape)
        for s, wi in zip(sig, w):
            K, Kt = kernel_pair(dt - s, xi)
            self.w_u0 += wi * K
            self.w_t0 += wi * Kt
            self.w_u1 += wi * (s / dt) * K
            self.w_t1 += wi * (s / dt) * Kt

    def linear(self, u_hat, ut_hat):
        return (self.a11 * u_hat + self.a12 * ut_hat,
                self.a21 * u_hat + self.a22 * ut_hat)


class _Problem:
    """Nonlinearity evaluation bound to one (config, spec, grid)."""

    def __init__(self, cfg, spec, grid):
        self.cfg, self.spec, self.grid = cfg, spec, grid

    def nl_hat(self, u):
        if not self.cfg.nonlinear:
            return None
        v = nonlinear_term(u, self.spec, self.grid.n)
        v_hat = forward_transform(v, self.grid)
        if self.cfg.dealias:
            v_hat = v_hat * self.grid.dealias_mask
        return v_hat


def step(s, cfg, spec, grid, stepper=None, u=None, nl_hat=None):
    """One ETD step from state ``s``; returns the new state.

    ``u`` and ``nl_hat`` (physical field and transformed nonlinearity at
    ``s``) may be passed in to avoid recomputation.
    """
    if stepper is None:
        stepper = Stepper(grid, cfg.dt, cfg.gl_points)
    prob = _Problem(cfg, spec, grid)
    if u is None:
        u = inverse_transform(s.u_hat, grid)
    if not np.all(np.isfinite(u)):
        raise NonFiniteState(s.t)
    if nl_hat is None:
        nl_hat = prob.nl_hat(u)
    return _advance(s, cfg, stepper, prob, nl_hat)


def _advance(s, cfg, st, prob, nl_hat):
    u_new, ut_new = st.linear(s.u_hat, s.ut_hat)
    if nl_hat is None:
        return State(s.t + st.dt, u_new, ut_new)
    u_pred = u_new + st.w_u0 * nl_hat
    ut_pred = ut_new + st.w_t0 * nl_hat
    if cfg.scheme == "ETD1":
        return State(s.t + st.dt, u_pred, ut_pred)
    up = inverse_transform(u_pred, prob.grid)
    if not np.all(np.isfinite(up)):
        raise NonFiniteState(s.t)
    d = prob.nl_hat(up) - nl_hat
    return State(s.t + st.dt, u_pred + st.w_u1 * d, ut_pred + st.w_t1 * d)


def initial_state(cfg, grid):
    u0 = cfg.eps * cfg.u0.sample(grid)
    u1 = cfg.eps * cfg.u1.sample(grid)
    return State(0.0, forward_transform(u0, grid), forward_transform(u1, grid))


def data_mass(cfg, grid):
    """eps * int (u0 + u1) dx over the box (trapezoid rule)."""
    return cfg.eps * float(np.sum(cfg.u0.sample(grid) + cfg.u1.sample(grid))) * grid.cell_volume


@dataclass
class RunResult:
    """Outcome of :func:`run`.

    ``status`` is ``"Completed"`` or ``"BlownUp"``; for a blow-up,
    ``t_detect`` is the first step time at which the sup norm exceeded the
    threshold (or the state stopped being finite) and ``last_finite`` the
    last state that passed the check.  ``history`` keeps ``(t, sup|u|)`` for
    the final ``window`` steps and ``checkpoint`` the state at its start.
    """
    series: "diagnostics.NormSeries"
    state: State
    status: str
    t_detect: float = None
    last_finite: State = None
    history: list = field(default_factory=list)
    checkpoint: State = None
    trajectory: tuple = None
    states: list = None

    @property
    def blown_up(self):
        return self.status == "BlownUp"


def run(cfg, spec, grid, trajectory_every=None, window=8, start=None,
        keep_states=False):
    """Integrate from t = 0 (or from ``start``) to ``cfg.T_max``.

    Diagnostics are recorded at ``cfg.sample_times``.  With
    ``trajectory_every=k`` the physical field is also stored every k steps
    (returned as ``(times, values)``); ``keep_states`` keeps the spectral
    state at every sample time in ``RunResult.states``.
    """
    stepper = Stepper(grid, cfg.dt, cfg.gl_points)
    prob = _Problem(cfg, spec, grid)
    s = initial_state(cfg, grid) if start is None else start.copy()
    k0 = int(round(s.t / cfg.dt))
    n_steps = cfg.n_steps
    samples = set(cfg.sample_steps())
    series = diagnostics.NormSeries(meta={"grid": grid.to_dict(), "solver": cfg.to_dict(),
                                          "mu": spec.to_dict()})
    mass0 = data_mass(cfg, grid)
    threshold = cfg.threshold
    cum_nl = 0.0
    prev_nl_int = None
    recent = deque(maxlen=max(1, window))
    traj_t, traj_u = [], []
    kept = [] if keep_states else None

    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(k0, n_steps + 1):
            u = inverse_transform(s.u_hat, grid)
            sup = float(np.max(np.abs(u)))
            if not math.isfinite(sup) or sup > threshold:
                last = recent[-1][1] if recent else None
                hist = [(st.t, m) for (_, st, m) in recent] + [(s.t, sup)]
                return RunResult(series, s, "BlownUp", t_detect=s.t, last_finite=last,
                                 history=hist, checkpoint=recent[0][1] if recent else None,
                                 trajectory=_traj(traj_t, traj_u), states=kept)
            nl_hat = prob.nl_hat(u)
            nl_int = 0.0 if nl_hat is None else float(nl_hat.flat[0].real) * grid.cell_volume
            if prev_nl_int is not None:
                cum_nl += 0.5 * cfg.dt * (prev_nl_int + nl_int)
            prev_nl_int = nl_int
            if k in samples:
                series.append(diagnostics.sample_state(s, u, grid, cum_nl, mass0 + cum_nl))
                if keep_states:
                    kept.append(s)
            if trajectory_every and (k - k0) % trajectory_every == 0:
                traj_t.append(s.t)
                traj_u.append(u.copy())
            recent.append((k, s, sup))
            if k == n_steps:
                break
            s = _advance(s, cfg, stepper, prob, nl_hat)
            s.t = (k + 1) * cfg.dt
    return RunResult(series, s, "Completed", last_finite=s,
                     trajectory=_traj(traj_t, traj_u), states=kept)


def _traj(ts, us):
    if not ts:
        return None
    return np.array(ts), np.array(us)


# --- Picard iteration -----------------------------------------------------

@dataclass
class PicardReport:
    """Per-iterate diagnostics of :func:`picard_solve`.

    ``x_norms[j]`` is the sampled X(T)-norm proxy of ``u_j`` (j = 1..J),
    ``y_diffs[j-1] = sup_t ||u_j - u_{j-1}||_{L^2}`` and
    ``ratios[j-1] = y_diffs[j] / y_diffs[j-1]``.
    """
    times: np.ndarray
    x_norms: list
    y_diffs: list
    ratios: list
    final_u_hat: np.ndarray
    linear_u_hat: np.ndarray


def picard_solve(cfg, spec, grid, J):
    """Iterate u_j = Phi[u_{j-1}] from u_0 = 0 on the sample lattice k * dt.

    The Duhamel integral uses the trapezoid rule in tau on the stored
    samples, so iterate j at time t_k needs the nonlinearity of iterate j-1
    at every t_i <= t_k.
    """
    if J < 2:
        raise InvalidArg("picard_solve needs J >= 2")
    dt = cfg.dt
    K_steps = cfg.n_steps
    times = dt * np.arange(K_steps + 1)
    xi = grid.xi_norm
    s0 = initial_state(cfg, grid)

    # u_lin(t_k) and K(t_m) for every lattice time
    lin = np.empty((K_steps + 1,) + grid.shape, dtype=complex)
    kern = np.empty((K_steps + 1,) + grid.shape)
    for m, t in enumerate(times):
        a11, a12, _, _ = propagator_matrix(t, xi) if t > 0 else (1.0, 0.0, 0.0, 1.0)
        lin[m] = a11 * s0.u_hat + a12 * s0.ut_hat
        kern[m] = kernel_pair(t, xi)[0]

    prob = _Problem(cfg, spec, grid)
    prev = np.zeros_like(lin)
    x_norms, y_diffs = [], []
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(J):
            nl = np.empty_like(lin)
            for i in range(K_steps + 1):
                u = inverse_transform(prev[i], grid)
                if not np.all(np.isfinite(u)):
                    raise NonFiniteState(times[i])
                v = prob.nl_hat(u)
                nl[i] = 0.0 if v is None else v
            cur = lin.copy()
            for k in range(1, K_steps + 1):
                # trapezoid over tau_i = t_i, i = 0..k; K(0) = 0 kills i = k
                acc = 0.5 * kern[k] * nl[0]
                for i in range(1, k):
                    acc = acc + kern[k - i] * nl[i]
                cur[k] += dt * acc
            diff = max(diagnostics.lq_norm(inverse_transform(cur[k] - prev[k], grid), grid, 2)
                       for k in range(K_steps + 1))
            y_diffs.append(diff)
            x_norms.append(diagnostics.x_norm_proxy(
                times, [inverse_transform(c, grid) for c in cur], cur, grid))
            prev = cur
    ratios = [b / a if a > 0 else 0.0 for a, b in zip(y_diffs, y_diffs[1:])]
    return PicardReport(times, x_norms, y_diffs, ratios, prev[-1].copy(), lin[-1].copy())


def with_overrides(cfg, **kw):
    return replace(cfg, **kw)
