"""Lifespan detection, amplitude sweeps, and test-function functionals."""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
import math

import numpy as np
from scipy.integrate import trapezoid

from .errors import (IncompleteSweep, InvalidArg, NoBlowupWithinHorizon,
                     TrajectoryTooShort)
from .evolve import run
from .moduli import _psi_segment, nonlinear_term, psi


def crossing_time(history, threshold):
    """Time at which sup|u| reaches ``threshold``.

    ``history`` holds ``(t, sup|u|)`` pairs whose last entry is the first one
    above the threshold.  Near blow-up 1/sup|u| is close to linear in t, so
    the crossing is interpolated in that variable.
    """
    if len(history) < 2:
        return history[-1][0]
    (ta, sa), (tb, sb) = history[-2], history[-1]
    ia = 1.0 / sa
    ib = 1.0 / sb if math.isfinite(sb) else 0.0
    if ia <= ib:
        return tb
    return ta + (ia - 1.0 / threshold) / (ia - ib) * (tb - ta)


def richardson(values, ratio=2.0, order=2.0, order_tol=0.5):
    """Extrapolate a sequence computed at steps h, h/ratio, h/ratio^2.

    The observed order from the last three values must lie within
    ``order_tol`` of ``order``; otherwise the sequence is not yet in its
    asymptotic range and the finest value is returned unchanged.
    """
    if len(values) < 3:
        return values[-1]
    a, b, c = values[-3:]
    d1, d2 = a - b, b - c
    if d1 == 0 or d2 == 0 or (d1 > 0) != (d2 > 0):
        return c
    p = math.log(d1 / d2, ratio)
    if abs(p - order) > order_tol:
        return c
    return c + (c - b) / (ratio**p - 1.0)


@dataclass
class LifespanResult:
    eps: float
    T: float
    T_levels: list
    dt: float
    N: int


def detect_lifespan(cfg, spec, grid, eps=None, refine=True, window=8):
    """Numerical lifespan: first crossing of the blow-up threshold.

    The final ``window`` steps before detection are re-run at dt/2 and dt/4
    from a checkpoint and the three crossing times Richardson-extrapolated.
    Raises :class:`NoBlowupWithinHorizon` when the run completes.
    """
    if eps is not None:
        cfg = replace(cfg, eps=eps)
    res = run(cfg, spec, grid, window=window)
    if not res.blown_up:
        raise NoBlowupWithinHorizon(cfg.T_max)
    U = cfg.threshold
    levels = [crossing_time(res.history, U)]
    if refine and res.checkpoint is not None:
        for f in (2, 4):
            sub = replace(cfg, dt=cfg.dt / f, sample_times=(),
                          T_max=res.t_detect + 4 * cfg.dt)
            r = run(sub, spec, grid, window=2, start=res.checkpoint)
            if not r.blown_up:
                r = run(replace(sub, T_max=cfg.T_max), spec, grid, window=2,
                        start=res.checkpoint)
            if not r.blown_up:
                break
            levels.append(crossing_time(r.history, U))
    T = richardson(levels) if len(levels) == 3 else levels[-1]
    return LifespanResult(cfg.eps, T, levels, cfg.dt, grid.N)


def psi_signed(spec, R, C=1.0, n=1):
    """Psi(R), extended to R < 1 by Psi(R) = -int_R^1 mu(C r^(-n/2)) dr / r."""
    if R >= 1:
        return psi(spec, R, C, n)
    return -_psi_segment(spec, math.log(R), 0.0, C, n)


@dataclass
class LifespanRow:
    eps: float
    T: float
    PsiT: float
    dt: float
    N: int


@dataclass
class LinearFit:
    slope: float
    intercept: float
    r2: float


def linear_fit(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    res = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(res**2)) / ss_tot if ss_tot > 0 else 1.0
    return LinearFit(float(slope), float(intercept), r2)


@dataclass
class LifespanTable:
    """Sweep rows (sorted by eps, descending) and the fit of Psi(T) against eps^(-2/n)."""
    rows: list
    n: int
    family: str
    fit: LinearFit = None
    C: float = 1.0

    @classmethod
    def from_rows(cls, rows, spec, n, C=1.0):
        rows = sorted(rows, key=lambda r: -r.eps)
        tab = cls(rows, n, spec.family, C=C)
        x = [r.eps ** (-2.0 / n) for r in rows]
        tab.fit = linear_fit(x, [r.PsiT for r in rows])
        return tab

    def is_monotone(self):
        """T non-increasing in eps (rows are ordered by decreasing eps)."""
        T = [r.T for r in self.rows]
        return all(a <= b for a, b in zip(T, T[1:]))

    def to_csv(self, path):
        with open(path, "w", newline="\n") as fh:
            fh.write("eps,T,PsiT,dt,N\n")
            for r in self.rows:
                fh.write("%.17g,%.17g,%.17g,%.17g,%d\n" % (r.eps, r.T, r.PsiT, r.dt, r.N))

    def fit_record(self):
        return {"slope": self.fit.slope, "intercept": self.fit.intercept,
                "r2": self.fit.r2, "n": self.n, "family": self.family}


def _sweep_one(args):
    cfg, spec, grid, eps = args
    try:
        return detect_lifespan(cfg, spec, grid, eps)
    except NoBlowupWithinHorizon:
        return eps


def lifespan_sweep(cfg, spec, grid, eps_list, threads=1, C=1.0):
    """Detect the lifespan for every amplitude and fit Psi(T_eps) against eps^(-2/n)."""
    eps_list = [float(e) for e in eps_list]
    if len(eps_list) < 4:
        raise InvalidArg("a lifespan sweep needs at least 4 amplitudes")
    jobs = [(cfg, spec, grid, e) for e in eps_list]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            out = list(ex.map(_sweep_one, jobs))
    else:
        out = [_sweep_one(j) for j in jobs]
    missing = [o for o in out if not isinstance(o, LifespanResult)]
    if missing:
        raise IncompleteSweep(missing)
    rows = [LifespanRow(o.eps, o.T, psi_signed(spec, o.T, C, grid.n), o.dt, o.N) for o in out]
    return LifespanTable.from_rows(rows, spec, grid.n, C)


# --- test functions -------------------------------------------------------

_SMOOTHSTEP = {
    3: (0, 0, 3, -2),
    5: (0, 0, 0, 10, -15, 6),
    7: (0, 0, 0, 0, 35, -84, 70, -20),
}


@dataclass(frozen=True)
class CutoffSpec:
    """Cutoff eta: 1 on [0, 1/2], smoothstep down to 0 on [1/2, 1], 0 after.

    ``exponent=None`` means n + 2.
    """
    degree: int = 5
    exponent: int = None

    def __post_init__(self):
        if self.degree not in _SMOOTHSTEP:
            raise InvalidArg(f"smoothstep degree must be one of {sorted(_SMOOTHSTEP)}")

    def eta(self, s):
        s = np.asarray(s, dtype=float)
        tau = np.clip(2.0 * s - 1.0, 0.0, 1.0)
        return 1.0 - np.polynomial.polynomial.polyval(tau, _SMOOTHSTEP[self.degree])

    def eta_star(self, s):
        s = np.asarray(s, dtype=float)
        return np.where(s < 0.5, 0.0, self.eta(s))

    def power(self, n):
        return n + 2 if self.exponent is None else self.exponent

    def psi(self, t, r2, R, n):
        """psi_R(t, x) = eta((|x|^2 + t) / R)^(n+2)."""
        return self.eta((r2 + t) / R) ** self.power(n)

    def psi_star(self, t, r2, R, n):
        return self.eta_star((r2 + t) / R) ** self.power(n)


@dataclass
class FunctionalValues:
    R: float
    I_R: float
    Y_R: float
    data_side: float
    data_total: float = field(default=math.nan)


def _space_time_integral(times, nl, weight_fn, grid):
    # trapezoid in t over the stored samples, Riemann sum in x
    vals = np.array([float(np.sum(nl[i] * weight_fn(t))) * grid.cell_volume
                     for i, t in enumerate(times)])
    if len(times) < 2:
        return 0.0
    return float(trapezoid(vals, times))


def test_functional(trajectory, grid, spec, R, u0, u1, cut=None, n_radii=128):
    """I_R, Y(R) and int (u0 + u1) psi_R(0, x) dx for a stored trajectory.

    ``trajectory`` is ``(times, values)`` with physical fields at increasing
    times starting at 0; it must reach t = R.
    """
    if not R >= 1:
        raise InvalidArg("R must be at least 1")
    cut = cut or CutoffSpec()
    times, values = trajectory
    times = np.asarray(times, dtype=float)
    if times.size == 0 or times[0] != 0 or times[-1] < R:
        raise TrajectoryTooShort(f"trajectory ends at t={times[-1] if times.size else 0:g} < R={R:g}")
    if math.sqrt(R) > grid.L:
        raise TrajectoryTooShort(f"ball of radius sqrt(R)={math.sqrt(R):g} leaves the box")
    n = grid.n
    last = int(np.searchsorted(times, R, side="left"))
    ts = times[: last + 1]
    nl = nonlinear_term(np.asarray(values[: last + 1]), spec, n)
    r2 = grid.r2

    I_R = _space_time_integral(ts, nl, lambda t: cut.psi(t, r2, R, n), grid)

    radii = R * np.geomspace(1.0 / 256, 1.0, n_radii)
    ys = np.array([_space_time_integral(ts, nl, lambda t, r=r: cut.psi_star(t, r2, r, n), grid)
                   for r in radii])
    # y(r)/r -> 0 as r -> 0, so the segment [0, radii[0]] adds a trapezoid from 0
    integrand = ys / radii
    Y_R = float(trapezoid(integrand, radii) + 0.5 * integrand[0] * radii[0])

    data = np.asarray(u0) + np.asarray(u1)
    data_side = float(np.sum(data * cut.psi(0.0, r2, R, n))) * grid.cell_volume
    total = float(np.sum(data)) * grid.cell_volume
    return FunctionalValues(R, I_R, Y_R, data_side, total)


# the name starts with test_, keep pytest from collecting it
test_functional.__test__ = False
