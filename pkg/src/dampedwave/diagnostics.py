"""Norms, mass functional, profile deviations and decay-rate fits."""
from dataclasses import dataclass, field, fields
import math

import numpy as np

from .errors import InsufficientData, InvalidArg, NotConverged
from .spectral import gauss_hat, inverse_transform

CSV_COLUMNS = ("t", "Lalpha", "L2", "Linf", "H2dot", "cumNL", "M",
               "devLalpha", "devLinf", "devH2")


def alpha(n):
    """Lebesgue exponent min(2, 1 + 2/n) of the decay estimates."""
    return min(2.0, 1.0 + 2.0 / n)


def lq_norm(f, grid, q):
    """L^q norm of a physical field: Riemann sum for finite q, max for q = inf."""
    a = np.abs(f)
    if q == math.inf:
        return float(a.max()) if a.size else 0.0
    if q == 2:
        return math.sqrt(float(np.sum(a * a)) * grid.cell_volume)
    return (float(np.sum(a**q)) * grid.cell_volume) ** (1.0 / q)


def h2dot_norm(f_hat, grid):
    """Homogeneous H^2 seminorm from spectral coefficients (Plancherel)."""
    w = grid.xi2 * np.abs(f_hat)
    return math.sqrt(float(np.sum(w * w)) * grid.cell_volume / grid.N**grid.n)


@dataclass
class NormSample:
    t: float
    Lalpha: float
    L2: float
    Linf: float
    H2dot: float
    cumNL: float
    M: float
    devLalpha: float = math.nan
    devLinf: float = math.nan
    devH2: float = math.nan


def sample_state(s, u, grid, cum_nl, mass):
    return NormSample(s.t, lq_norm(u, grid, alpha(grid.n)), lq_norm(u, grid, 2),
                      lq_norm(u, grid, math.inf), h2dot_norm(s.u_hat, grid), cum_nl, mass)


@dataclass
class NormSeries:
    """Time-ordered norm samples plus run metadata."""
    samples: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def append(self, sample):
        if self.samples and not sample.t > self.samples[-1].t:
            raise InvalidArg("series times must be strictly increasing")
        self.samples.append(sample)

    def __len__(self):
        return len(self.samples)

    def column(self, name):
        return np.array([getattr(s, name) for s in self.samples], dtype=float)

    @property
    def t(self):
        return self.column("t")

    def to_csv(self, path):
        """Write all columns with 17 significant digits."""
        with open(path, "w", newline="\n") as fh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            for s in self.samples:
                fh.write(",".join(_fmt(getattr(s, c)) for c in CSV_COLUMNS) + "\n")


def _fmt(v):
    return "%.17g" % v


def x_norm_proxy(times, us, u_hats, grid):
    """Sampled X(T)-norm: sup over samples of the three weighted norms."""
    n = grid.n
    a = alpha(n)
    best = 0.0
    for t, u, uh in zip(times, us, u_hats):
        val = ((1 + t) ** (n / 2 * (1 - 1 / a)) * lq_norm(u, grid, a)
               + (1 + t) ** (n / 4 + 1) * h2dot_norm(uh, grid)
               + (1 + t) ** (n / 2) * lq_norm(u, grid, math.inf))
        best = max(best, val)
    return best


@dataclass
class MassResult:
    t: np.ndarray
    M_t: np.ndarray
    M: float
    tail_increment: float


def mass_functional(series, data_mass, tol=0.05):
    """M(t) = eps * int(u0 + u1) + cumulative nonlinear mass.

    ``data_mass`` is ``eps * int (u0 + u1) dx``.  The last value is taken as
    M; the increment M(T) - M(T/2) must stay below ``tol * |M|``.
    """
    t = series.t
    if t.size == 0:
        raise InvalidArg("empty series")
    m_t = data_mass + series.column("cumNL")
    M = float(m_t[-1])
    tail = float(M - np.interp(t[-1] / 2, t, m_t))
    if abs(tail) > tol * abs(M):
        raise NotConverged(f"tail increment {tail:.3g} exceeds {tol:.0%} of M = {M:.6g}")
    return MassResult(t, m_t, M, tail)


def _deviation(u_hat, grid, t, M):
    d_hat = u_hat - gauss_hat(grid, t, M)
    return d_hat, inverse_transform(d_hat, grid)


def profile_deviation(s, grid, M, q):
    """t^(n/2 (1 - 1/q)) ||u(t) - M G(t)||_{L^q} for q in (1, inf]."""
    if s.t < 1:
        raise InvalidArg("profile deviation is defined for t >= 1")
    n = grid.n
    _, d = _deviation(s.u_hat, grid, s.t, M)
    w = s.t ** (n / 2) if q == math.inf else s.t ** (n / 2 * (1 - 1 / q))
    return w * lq_norm(d, grid, q)


def profile_deviation_h2(s, grid, M):
    """t^(n/4 + 1) ||u(t) - M G(t)||_{H^2-dot}."""
    if s.t < 1:
        raise InvalidArg("profile deviation is defined for t >= 1")
    d_hat, _ = _deviation(s.u_hat, grid, s.t, M)
    return s.t ** (grid.n / 4 + 1) * h2dot_norm(d_hat, grid)


@dataclass
class DecayFit:
    slope: float
    intercept: float
    r2: float
    n_points: int


def fit_decay_rate(t, y, t_window=None, min_points=5):
    """Least-squares slope of log y against log t inside ``t_window``.

    ``t_window`` defaults to the last decade of ``t``.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t_window is None:
        t_window = (t.max() / 10.0, t.max())
    lo, hi = t_window
    sel = (t >= lo * (1 - 1e-12)) & (t <= hi * (1 + 1e-12))
    t, y = t[sel], y[sel]
    if t.size < min_points:
        raise InsufficientData(f"{t.size} samples in window {t_window}, need {min_points}")
    if np.any(t <= 0) or np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise InsufficientData("log-log fit needs positive finite samples")
    X, Y = np.log(t), np.log(y)
    A = np.vstack([X, np.ones_like(X)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, Y, rcond=None)
    ss_res = float(np.sum((Y - (slope * X + intercept)) ** 2))
    ss_tot = float(np.sum((Y - Y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(float(slope), float(intercept), r2, int(t.size))


def fit_series(series, which, t_window=None):
    """:func:`fit_decay_rate` on one column of a :class:`NormSeries`."""
    if which not in {f.name for f in fields(NormSample)}:
        raise InvalidArg(f"unknown column {which!r}")
    return fit_decay_rate(series.t, series.column(which), t_window)


def fill_deviations(series, states, grid, M):
    """Set the dev* columns of every sample with t >= 1 from the matching state."""
    by_t = {s.t: s for s in states}
    a = alpha(grid.n)
    for smp in series.samples:
        s = by_t.get(smp.t)
        if s is None or smp.t < 1:
            continue
        smp.devLalpha = profile_deviation(s, grid, M, a)
        smp.devLinf = profile_deviation(s, grid, M, math.inf)
        smp.devH2 = profile_deviation_h2(s, grid, M)
    return series
