import math

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest
from scipy import integrate

from dampedwave.diagnostics import (CSV_COLUMNS, NormSample, NormSeries, alpha,
                                    fill_deviations, fit_decay_rate, fit_series,
                                    h2dot_norm, lq_norm, mass_functional,
                                    profile_deviation, profile_deviation_h2,
                                    x_norm_proxy)
from dampedwave.errors import InsufficientData, InvalidArg, NotConverged
from dampedwave.evolve import DataSpec, SolverConfig, data_mass, run
from dampedwave.moduli import ModulusSpec
from dampedwave.spectral import (Grid, State, forward_transform, gauss_field,
                                 gauss_hat)

POWER = ModulusSpec.power(1.0)
BOTH = dict(u0=DataSpec("gaussian", 1.0, 1.0), u1=DataSpec("gaussian", 1.0, 1.0))


def test_alpha():
    assert alpha(1) == 2.0 and alpha(2) == 2.0
    assert alpha(3) == pytest.approx(5 / 3) and alpha(4) == 1.5


# --- norms -------------------------------------------------------------------

def test_zero_field_norms():
    g = Grid(2, 32, 32.0)
    z = np.zeros(g.shape)
    for q in (1.5, 2, math.inf):
        assert lq_norm(z, g, q) == 0
    assert h2dot_norm(forward_transform(z, g), g) == 0


def test_gaussian_l2_two_resolutions():
    for N in (256, 1024):
        g = Grid(1, N, 32.0)
        f = np.exp(-g.x**2)
        assert lq_norm(f, g, 2) == pytest.approx((math.pi / 2) ** 0.25, rel=1e-12)


def test_h2dot_against_independent_quadrature():
    g = Grid(1, 1024, 64.0)
    f_hat = forward_transform(gauss_field(g, 1.0), g)   # symbol e^{-xi^2}
    # ||f||_{H2dot}^2 = (1/2pi) int xi^4 e^{-2 xi^2} dxi
    val, _ = integrate.quad(lambda x: x**4 * math.exp(-2 * x * x), -np.inf, np.inf,
                            epsabs=0, epsrel=1e-13)
    assert h2dot_norm(f_hat, g) == pytest.approx(math.sqrt(val / (2 * math.pi)), abs=1e-6)


def test_l2_weak_interpolation_bound():
    g = Grid(1, 512, 64.0)
    rng = np.random.default_rng(7)
    for _ in range(5):
        u = rng.standard_normal(g.shape) * np.exp(-g.x**2 / 50)
        l2 = lq_norm(u, g, 2)
        bound = max(lq_norm(u, g, alpha(1)), math.sqrt(g.volume) * lq_norm(u, g, math.inf))
        assert l2 <= 1.01 * bound


# --- series and CSV ---------------------------------------------------------------

def _sample(t, **kw):
    base = dict(Lalpha=1.0, L2=1.0, Linf=1.0, H2dot=1.0, cumNL=0.0, M=1.0)
    base.update(kw)
    return NormSample(t, **base)


def test_series_requires_increasing_time():
    s = NormSeries()
    s.append(_sample(0.0))
    s.append(_sample(1.0))
    with pytest.raises(InvalidArg):
        s.append(_sample(1.0))


def test_csv_has_all_columns_with_full_precision(tmp_path):
    s = NormSeries()
    s.append(_sample(0.1, L2=1 / 3))
    p = tmp_path / "n.csv"
    s.to_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    fields = lines[1].split(",")
    assert float(fields[2]) == 1 / 3
    assert fields[2] == "%.17g" % (1 / 3)
    assert fields[-1] == "nan"


def test_x_norm_proxy_is_a_sup():
    g = Grid(1, 256, 32.0)
    u = np.exp(-g.x**2)
    uh = forward_transform(u, g)
    one = x_norm_proxy([0.0], [u], [uh], g)
    two = x_norm_proxy([0.0, 1.0], [u, 0.5 * u], [uh, 0.5 * uh], g)
    assert one == pytest.approx(lq_norm(u, g, 2) + h2dot_norm(uh, g) + 1.0)
    assert two >= one


# --- mass functional ---------------------------------------------------------------

def test_mass_without_nonlinearity_is_data_mass():
    g = Grid(1, 512, 64.0)
    cfg = SolverConfig(eps=0.3, T_max=10.0, nonlinear=False,
                       sample_times=tuple(np.linspace(0, 10, 11)), **BOTH)
    res = run(cfg, POWER, g)
    m = mass_functional(res.series, data_mass(cfg, g))
    expected = 0.3 * 2 * math.sqrt(math.pi)
    assert np.allclose(m.M_t, expected, rtol=1e-12)
    assert m.tail_increment == 0


def test_mass_zero_amplitude():
    g = Grid(1, 256, 32.0)
    cfg = SolverConfig(eps=0.0, T_max=5.0, sample_times=(0.0, 5.0), **BOTH)
    m = mass_functional(run(cfg, POWER, g).series, 0.0)
    assert np.all(m.M_t == 0) and m.M == 0


def test_mass_converges_for_dini_run():
    g = Grid(1, 4096, 256.0)
    cfg = SolverConfig(eps=0.05, T_max=200.0, sample_times=tuple(np.linspace(0, 200, 201)), **BOTH)
    res = run(cfg, POWER, g)
    m = mass_functional(res.series, data_mass(cfg, g))
    assert np.all(np.diff(m.M_t) >= 0)
    assert abs(m.tail_increment) < 0.05 * m.M


def test_mass_not_converged():
    s = NormSeries()
    for t, c in ((1.0, 0.0), (2.0, 1.0), (4.0, 3.0)):
        s.append(_sample(t, cumNL=c))
    with pytest.raises(NotConverged):
        mass_functional(s, 1.0)


# --- profile deviations ---------------------------------------------------------------

def _state(grid, t, u):
    return State(t, forward_transform(u, grid), np.zeros(grid.shape, complex))


@pytest.mark.parametrize("n,N,L", [(1, 1024, 64.0), (2, 128, 32.0)])
def test_exact_profile_has_zero_deviation(n, N, L):
    g = Grid(n, N, L)
    s = State(4.0, gauss_hat(g, 4.0, 2.5), np.zeros(g.shape, complex))
    assert profile_deviation(s, g, 2.5, 2) < 1e-12
    assert profile_deviation(s, g, 2.5, math.inf) < 1e-12
    assert profile_deviation_h2(s, g, 2.5) < 1e-12


@pytest.mark.parametrize("n,N,L", [(1, 1024, 64.0), (2, 128, 32.0)])
def test_gauss_scaling_identity(n, N, L):
    g = Grid(n, N, L)
    t = 3.0
    s = State(t, gauss_hat(g, t), np.zeros(g.shape, complex))
    assert profile_deviation(s, g, 0.0, math.inf) == pytest.approx((4 * math.pi) ** (-n / 2), rel=1e-10)


def test_profile_deviation_needs_t_at_least_one():
    g = Grid(1, 64, 32.0)
    s = State(0.5, np.zeros(64, complex), np.zeros(64, complex))
    with pytest.raises(InvalidArg):
        profile_deviation(s, g, 1.0, 2)
    with pytest.raises(InvalidArg):
        profile_deviation_h2(s, g, 1.0)


@settings(max_examples=25, deadline=None)
@given(c=st.floats(-5, 5).filter(lambda v: abs(v) > 1e-3), M=st.floats(0.1, 3))
def test_profile_deviation_is_homogeneous(c, M):
    g = Grid(1, 256, 32.0)
    u = np.exp(-g.x**2 / 9) * (1 + 0.3 * np.sin(g.x))
    base = _state(g, 2.0, u)
    scaled = _state(g, 2.0, c * u)
    for q in (2, math.inf):
        assert profile_deviation(scaled, g, c * M, q) == pytest.approx(
            abs(c) * profile_deviation(base, g, M, q), rel=1e-9)
    assert profile_deviation_h2(scaled, g, c * M) == pytest.approx(
        abs(c) * profile_deviation_h2(base, g, M), rel=1e-9)


def test_linear_deviation_decreases():
    g = Grid(1, 4096, 256.0)
    cfg = SolverConfig(eps=1.0, T_max=64.0, nonlinear=False, sample_times=(8.0, 64.0),
                       **BOTH)
    res = run(cfg, POWER, g, keep_states=True)
    M = data_mass(cfg, g)
    d8, d64 = (profile_deviation(s, g, M, 2) for s in res.states)
    assert d64 < d8


def test_fill_deviations_sets_columns_from_t_one():
    g = Grid(1, 1024, 64.0)
    cfg = SolverConfig(eps=0.1, T_max=4.0, sample_times=(0.0, 0.5, 1.0, 4.0), **BOTH)
    res = run(cfg, POWER, g, keep_states=True)
    fill_deviations(res.series, res.states, g, 0.3)
    dev = res.series.column("devLinf")
    assert np.isnan(dev[:2]).all() and np.isfinite(dev[2:]).all()


# --- decay fits ----------------------------------------------------------------

def test_fit_synthetic_power_laws():
    t = np.geomspace(1, 100, 20)
    f = fit_decay_rate(t, t**-0.5, (1, 100))
    assert f.slope == pytest.approx(-0.5, abs=1e-12) and f.r2 == pytest.approx(1.0)
    assert fit_decay_rate(t, 3 * t**-2.0, (1, 100)).slope == pytest.approx(-2.0, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(p=st.floats(-3, 1), c=st.floats(0.01, 100))
def test_fit_exact_on_noiseless_power_laws(p, c):
    t = np.geomspace(2, 500, 12)
    assert fit_decay_rate(t, c * t**p, (2, 500)).slope == pytest.approx(p, abs=1e-10)


def test_fit_default_window_is_last_decade():
    t = np.geomspace(1, 1000, 31)
    y = np.where(t < 100, t**-3.0, 1e-6 * (t / 100) ** -1.0)
    assert fit_decay_rate(t, y).slope == pytest.approx(-1.0, abs=1e-10)


def test_fit_insufficient_data():
    t = np.array([10.0, 20.0, 30.0, 40.0])
    with pytest.raises(InsufficientData):
        fit_decay_rate(t, t**-1, (10, 40))
    with pytest.raises(InsufficientData):
        fit_decay_rate(np.arange(1, 10.0), np.zeros(9), (1, 9))


def test_fit_series_rejects_unknown_column():
    with pytest.raises(InvalidArg):
        fit_series(NormSeries(), "L7")
