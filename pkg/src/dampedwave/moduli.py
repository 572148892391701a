"""Moduli of continuity and the quantities built from them.

Four parametric families are supported. Near zero their profiles are

========== ==========================================
power      ``s**kappa``                (0 < kappa <= 1)
logpower   ``log(1/s)**-gamma``
iterlog    ``log(1/s)**-1 * log(log(1/s))**-gamma``
constant   ``m``  (reference family, mu(0) != 0)
========== ==========================================

Every profile is continued by the constant ``mu(s0)`` for ``s >= s0``, which
keeps it non-decreasing and concave on the whole half line as long as ``s0``
lies inside the concave range of the profile.  When ``s0`` is not given the
cap defaults to ``min(1/e, start of the convex region)``.
"""
from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from scipy import integrate, optimize

from .errors import DivergentIntegral, InvalidArg, NoBracket

FAMILIES = ("power", "logpower", "constant", "iterlog")

_QUAD_EPSREL = 1e-12
_PSI_TOL = 1e-10
# exp(700) is close to the largest finite double
_MAX_LOG_R = 700.0


@lru_cache(maxsize=None)
def _iterlog_concave_from(gamma):
    """Smallest L = log(1/s) past which the iterated-log profile is concave."""
    def excess(L):
        g = math.log(L)
        return L * (1 + gamma / g) - (2 + 3 * gamma / g + gamma * (gamma + 1) / g**2)
    return optimize.brentq(excess, 1.0 + 1e-9, 1e3, xtol=1e-14)


@dataclass(frozen=True)
class ModulusSpec:
    """A modulus of continuity from one of the built-in families.

    Use the named constructors (:meth:`power`, :meth:`logpower`,
    :meth:`iterlog`, :meth:`constant`) rather than the raw initializer.
    """
    family: str
    param: float
    s0: float

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidArg(f"unknown modulus family {self.family!r}")
        if not (self.param > 0 and math.isfinite(self.param)):
            raise InvalidArg(f"family parameter must be positive, got {self.param}")
        if self.family == "power" and self.param > 1:
            raise InvalidArg("power modulus needs kappa <= 1 to be concave")
        if not self.s0 > 0:
            raise InvalidArg(f"s0 must be positive, got {self.s0}")
        if self.family == "logpower" and self.s0 >= 1:
            raise InvalidArg("logpower modulus needs s0 < 1")
        if self.family == "iterlog" and self.s0 >= math.exp(-1):
            raise InvalidArg("iterlog modulus needs s0 < 1/e")

    @classmethod
    def power(cls, kappa, s0=None):
        return cls("power", float(kappa), math.exp(-1) if s0 is None else float(s0))

    @classmethod
    def logpower(cls, gamma, s0=None):
        if s0 is None:
            s0 = math.exp(-max(1.0, gamma + 1.0))
        return cls("logpower", float(gamma), float(s0))

    @classmethod
    def iterlog(cls, gamma, s0=None):
        if s0 is None:
            s0 = math.exp(-_iterlog_concave_from(float(gamma)))
        return cls("iterlog", float(gamma), float(s0))

    @classmethod
    def constant(cls, m=1.0, s0=None):
        return cls("constant", float(m), math.exp(-1) if s0 is None else float(s0))

    @classmethod
    def from_mapping(cls, d):
        """Build from config keys ``family``, ``kappa``/``gamma``/``m``, ``s0``."""
        family = d["family"]
        key = {"power": "kappa", "logpower": "gamma",
               "iterlog": "gamma", "constant": "m"}[family]
        return getattr(cls, family)(d[key], d.get("s0"))

    @property
    def reference_family(self):
        """True for the constant family, which violates mu(0) = 0."""
        return self.family == "constant"

    @property
    def concave_cap(self):
        """Largest cap point for which the continued profile stays concave."""
        if self.family == "logpower":
            return math.exp(-(self.param + 1.0))
        if self.family == "iterlog":
            return math.exp(-_iterlog_concave_from(self.param))
        return math.inf

    def to_dict(self):
        key = {"power": "kappa", "logpower": "gamma",
               "iterlog": "gamma", "constant": "m"}[self.family]
        return {"family": self.family, key: self.param, "s0": self.s0}

    def _profile(self, s):
        # s is an array with 0 < s < s0
        if self.family == "power":
            return s ** self.param
        if self.family == "constant":
            return np.full_like(s, self.param)
        L = -np.log(s)
        if self.family == "logpower":
            return L ** -self.param
        return 1.0 / (L * np.log(L) ** self.param)

    def _dprofile(self, s):
        if self.family == "power":
            return self.param * s ** (self.param - 1)
        if self.family == "constant":
            return np.zeros_like(s)
        L = -np.log(s)
        if self.family == "logpower":
            return self.param * L ** (-self.param - 1) / s
        g = np.log(L)
        return (1 + self.param / g) / (L**2 * g**self.param * s)


def eval_mu(spec, s):
    """Evaluate the modulus at ``s >= 0`` (scalar or array)."""
    s_arr = np.asarray(s, dtype=float)
    scalar = s_arr.ndim == 0
    s_arr = np.atleast_1d(s_arr)
    if np.any(s_arr < 0):
        raise InvalidArg("eval_mu needs s >= 0")
    out = np.empty_like(s_arr)
    cap = float(spec._profile(np.array([spec.s0]))[0])
    inside = (s_arr > 0) & (s_arr < spec.s0)
    out[inside] = spec._profile(s_arr[inside])
    out[s_arr >= spec.s0] = cap
    out[s_arr == 0] = spec.param if spec.reference_family else 0.0
    return float(out[0]) if scalar else out


def nonlinear_term(u, spec, n):
    """Pointwise |u|^(1+2/n) mu(|u|)."""
    a = np.abs(u)
    return a ** (1.0 + 2.0 / n) * eval_mu(spec, a)


def is_dini(spec):
    """Analytic Dini classification: does the integral of mu(s)/s over (0, 1) converge?"""
    if spec.family == "power":
        return True
    if spec.family in ("logpower", "iterlog"):
        return spec.param > 1
    return False


def _dini_below(spec, a):
    # int_0^a mu(s)/s ds = int_{log(1/a)}^inf mu(exp(-L)) dL, a <= s0.
    # A second substitution turns the slow tail into an exponential one:
    # L = exp(z) for power/logpower, L = exp(exp(q)) for iterlog.
    la = -math.log(a)
    k = spec.param
    if spec.family == "power":
        def f(z):
            return math.exp(z - k * math.exp(z)) if z < 700.0 else 0.0
        lower = math.log(la) if la > 0 else -math.inf
    elif spec.family == "logpower":
        def f(z):
            return math.exp((1.0 - k) * z)
        lower = math.log(la)
    else:
        def f(q):
            return math.exp((1.0 - k) * q)
        lower = math.log(math.log(la))
    val, _ = integrate.quad(f, lower, math.inf, epsabs=0.0,
                            epsrel=_QUAD_EPSREL, limit=400)
    return val


def dini_integral(spec, eps0):
    """The integral of mu(s)/s over (0, eps0) for a Dini modulus."""
    if not is_dini(spec):
        raise DivergentIntegral(f"{spec.family} modulus with parameter "
                                f"{spec.param:g} is not Dini")
    if not 0 < eps0 <= 1:
        raise InvalidArg(f"eps0 must lie in (0, 1], got {eps0}")
    if eps0 <= spec.s0:
        return _dini_below(spec, eps0)
    return _dini_below(spec, spec.s0) + eval_mu(spec, spec.s0) * math.log(eps0 / spec.s0)


def derivative_ratio(spec, s_grid):
    """Max over the grid of s |mu'(s)| / mu(s); certifies s|mu'| <~ mu."""
    s = np.asarray(s_grid, dtype=float).ravel()
    if s.size == 0 or np.any(s <= 0) or np.any(s >= spec.s0):
        raise InvalidArg("derivative_ratio needs grid points inside (0, s0)")
    return float(np.max(s * np.abs(spec._dprofile(s)) / spec._profile(s)))


def _psi_segment(spec, a, b, C, n):
    # int_a^b mu(C exp(-n w / 2)) dw, where w = log r
    if b <= a:
        return 0.0
    half_n = 0.5 * n

    def f(w):
        return eval_mu(spec, C * math.exp(-half_n * w))

    kink = math.log(C / spec.s0) / half_n
    pts = [kink] if a < kink < b else None
    if math.isinf(b - a) or b - a > 50.0:
        # split long ranges so quad does not miss the early structure
        edges = [a] + [x for x in (kink,) if a < x < b] + [b]
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            total += _quad_long(f, lo, hi)
        return total
    val, _ = integrate.quad(f, a, b, points=pts, epsabs=0.0,
                            epsrel=_QUAD_EPSREL, limit=400)
    return val


def _quad_long(f, a, b):
    total, lo, width = 0.0, a, 8.0
    while lo < b:
        hi = min(b, lo + width)
        val, _ = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=_QUAD_EPSREL, limit=400)
        total += val
        lo, width = hi, width * 2.0
    return total


def _check_psi_args(C, n):
    if not C > 0:
        raise InvalidArg(f"C must be positive, got {C}")
    if n not in (1, 2, 3, 4):
        raise InvalidArg(f"dimension must be 1..4, got {n}")


def psi(spec, R, C=1.0, n=1):
    """Psi(R) = int_1^R mu(C r^(-n/2)) / r dr."""
    _check_psi_args(C, n)
    if not R >= 1:
        raise InvalidArg(f"psi needs R >= 1, got {R}")
    return _psi_segment(spec, 0.0, math.log(R), C, n)


def psi_inverse(spec, y, C=1.0, n=1):
    """Solve psi(R) = y for R >= 1 by bracketing and bisection in log R."""
    _check_psi_args(C, n)
    if not y >= 0:
        raise InvalidArg(f"psi_inverse needs y >= 0, got {y}")
    if y == 0:
        return 1.0
    tol = _PSI_TOL * max(1.0, y)

    lo, psi_lo = 0.0, 0.0
    hi = 1.0
    psi_hi = _psi_segment(spec, lo, hi, C, n)
    while psi_hi < y:
        if hi >= _MAX_LOG_R:
            raise NoBracket(f"psi stays below {y:g} for R up to exp({_MAX_LOG_R:g})")
        lo, psi_lo = hi, psi_hi
        hi = min(2.0 * hi, _MAX_LOG_R)
        psi_hi = psi_lo + _psi_segment(spec, lo, hi, C, n)

    while True:
        mid = 0.5 * (lo + hi)
        psi_mid = psi_lo + _psi_segment(spec, lo, mid, C, n)
        if abs(psi_mid - y) <= tol or not lo < mid < hi:
            return math.exp(mid)
        if psi_mid < y:
            lo, psi_lo = mid, psi_mid
        else:
            hi = mid
