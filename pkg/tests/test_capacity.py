import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from ssacc.capacity import (ApproximationWarning, asc_closed, auto_bob_scale, avg_rb_closed,
                            avg_rw_closed, avg_rw_no_jamming, capacity_context, j2, j3,
                            secrecy_capacity, secrecy_from_sinr, sinr_bob, sinr_willie)
from ssacc.channel import ChannelDraw, cascaded_stats, reference_scenario
from ssacc.numerics import gauss_laguerre

LN2 = math.log(2)


def j2_quad(x, y, p):
    """Average of log2(1 + psi_W) over p_J uniform on [0, P_J_max] by adaptive quadrature."""
    b2 = p.beta ** 2
    psi = lambda pj: p.P_A * b2 * x * p.L4 / (pj * b2 * y * p.L3 + p.sigma2_W)
    val, _ = integrate.quad(lambda u: math.log2(1 + psi(u * p.P_J_max)), 0, 1, epsabs=0, epsrel=1e-12)
    return val


def j2_direct(x, y, p):
    """Same average via the antiderivative of ln(c + w p); independent of the library algebra."""
    a = p.sigma2_W / p.beta ** 2
    A = p.P_A * p.L4 * x / a
    w = p.P_J_max * p.L3 * y / a
    if w < 1e-6:
        return math.log1p(A / (1 + 0.5 * w)) / LN2
    xl = lambda c: c * math.log(c)
    return (xl(1 + A + w) - xl(1 + A) - xl(1 + w)) / (w * LN2)


def test_sinrs_by_hand():
    p = reference_scenario(8).with_(rho=0.5)
    d = ChannelDraw(40.0, 8.0, 6.0, 4.0, 3.0)
    s = cascaded_stats(p)
    b2 = p.beta ** 2
    psi_b = p.P_A * b2 * s.scale * 40.0 * p.L1 / (0.5 * 3.0 * b2 * 6.0 * p.L2 + p.sigma2_B)
    psi_w = p.P_A * b2 * 8.0 * p.L4 / (3.0 * b2 * 4.0 * p.L3 + p.sigma2_W)
    assert sinr_bob(p, d) == pytest.approx(psi_b, rel=1e-14)
    assert sinr_willie(p, d) == pytest.approx(psi_w, rel=1e-14)
    assert secrecy_capacity(p, d) == pytest.approx(max(0.0, math.log2(1 + psi_b) - math.log2(1 + psi_w)))


@settings(max_examples=200)
@given(st.floats(0, 1e9), st.floats(0, 1e9))
def test_secrecy_nonnegative(a, b):
    v = secrecy_from_sinr(a, b)
    assert v >= 0
    if a >= b:
        assert v == pytest.approx(math.log2(1 + a) - math.log2(1 + b), abs=1e-9)


@pytest.mark.parametrize("x,y", [(0.0, 3.0), (1e-4, 5.0), (2.0, 1e-9), (8.0, 8.0), (30.0, 0.3), (0.5, 200.0)])
def test_j2_against_quad(x, y):
    p = reference_scenario(8)
    ctx = capacity_context(p)
    assert j2(x, y, ctx) == pytest.approx(j2_quad(x, y, p), rel=1e-9, abs=1e-14)


@pytest.mark.parametrize("x,y", [(0.1, 3.0), (2.0, 0.01), (8.0, 8.0), (30.0, 60.0)])
def test_direct_oracle_against_quad(x, y):
    p = reference_scenario(8)
    assert j2_direct(x, y, p) == pytest.approx(j2_quad(x, y, p), rel=1e-8)


def test_j2_no_jamming_limit():
    p = reference_scenario(8)
    ctx = capacity_context(p)
    A = p.P_A * p.beta ** 2 * 5.0 * p.L4 / p.sigma2_W
    assert j2(5.0, 0.0, ctx) == pytest.approx(math.log2(1 + A), rel=1e-13)
    np.testing.assert_allclose(j2(np.array([1.0, 2.0]), 3.0, ctx), [j2(1.0, 3.0, ctx), j2(2.0, 3.0, ctx)])


@pytest.mark.parametrize("y", [0.0, 1e-6, 0.2, 8.0, 60.0])
def test_j3_against_quad(y):
    p = reference_scenario(8)
    ctx = capacity_context(p)
    N = p.N
    val, _ = integrate.quad(lambda s: j2_direct(N * s, y, p) * math.exp(-s), 0, np.inf, epsabs=0, epsrel=1e-10)
    assert j3(y, ctx) == pytest.approx(val, rel=1e-8)


def test_j3_continuous_at_zero():
    ctx = capacity_context(reference_scenario(8))
    assert j3(1e-12, ctx) == pytest.approx(j3(0.0, ctx), rel=1e-9)
    assert j3(0.0, ctx) == pytest.approx(avg_rw_no_jamming(ctx.params), rel=1e-12)


@pytest.mark.parametrize("N", [8, 128])
def test_rb_against_quad(N):
    p = reference_scenario(N)
    ctx = capacity_context(p)
    dist = stats.ncx2(1, ctx.stats.lam)
    lo, hi = dist.ppf(1e-16), dist.ppf(1 - 1e-16)
    val, _ = integrate.quad(lambda x: math.log2(1 + ctx.varpi1 * x) * dist.pdf(x), lo, hi,
                            points=[ctx.stats.lam], epsabs=0, epsrel=1e-11, limit=200)
    assert avg_rb_closed(ctx) == pytest.approx(val, rel=1e-9)


def test_reference_values():
    c8, c128 = capacity_context(reference_scenario(8)), capacity_context(reference_scenario(128))
    assert avg_rb_closed(c8) == pytest.approx(11.245434, abs=1e-5)
    assert avg_rb_closed(c128) == pytest.approx(19.276515, abs=1e-5)
    assert avg_rw_closed(c8) == pytest.approx(0.805004, abs=1e-5)
    assert avg_rw_closed(c128) == pytest.approx(0.807047, abs=1e-5)
    assert avg_rw_no_jamming(reference_scenario(8)) == pytest.approx(10.9934, abs=1e-3)


def test_rw_single_point_2d():
    p = reference_scenario(8, 40.0, 30.0)
    N = p.N
    ref, _ = integrate.dblquad(lambda s, t: j2_direct(N * s, N * t, p) * math.exp(-s - t),
                               0, np.inf, 0, np.inf, epsabs=0, epsrel=1e-7)
    assert avg_rw_closed(capacity_context(p)) == pytest.approx(ref, rel=1e-6)


def test_order_doubling_converges():
    p = reference_scenario(8)
    vb = [avg_rb_closed(capacity_context(p, u1=u)) for u in (25, 50, 100, 200)]
    vw = [avg_rw_closed(capacity_context(p, u2=u)) for u in (25, 50, 100, 200)]
    for v in (vb, vw):
        d = np.abs(np.diff(v))
        assert d[-1] <= d[0] and d[-1] < 1e-6 * abs(v[-1])


def test_split_rule_vs_single_panel():
    # the single-panel rule misses the knee near t ~ 1 / (k3 N); the split rule does not
    ctx = capacity_context(reference_scenario(8))
    assert avg_rw_closed(ctx, split=False) == pytest.approx(0.79679, abs=1e-4)
    assert avg_rw_closed(ctx) != pytest.approx(avg_rw_closed(ctx, split=False), rel=1e-3)


def test_monotonicity():
    rb = [avg_rb_closed(capacity_context(reference_scenario(8, pa, 40))) for pa in (20, 30, 40, 50)]
    rw = [avg_rw_closed(capacity_context(reference_scenario(8, 40, pj))) for pj in (20, 30, 40, 50)]
    assert np.all(np.diff(rb) > 0) and np.all(np.diff(rw) < 0)
    weak = avg_rw_closed(capacity_context(reference_scenario(8, 40, -40)))
    assert weak == pytest.approx(avg_rw_no_jamming(reference_scenario(8)), rel=1e-4)


def test_asc_warns_when_negative():
    p = reference_scenario(8).with_distances(100, 100, 2000, 5).with_(P_J_max=1e-6)
    with pytest.warns(ApproximationWarning):
        assert asc_closed(capacity_context(p)) < 0
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert asc_closed(capacity_context(reference_scenario(8))) > 0


def test_context_validation():
    r = gauss_laguerre(100)
    assert auto_bob_scale(1.0, r) == 1.0
    assert auto_bob_scale(5000.0, r) > 1.0
    with pytest.raises(ValueError):
        capacity_context(reference_scenario(8), bob_scale=0.0)
    with pytest.raises(ValueError):
        j2(-1.0, 1.0, capacity_context(reference_scenario(8)))
    with pytest.raises(ValueError):
        j3(-1.0, capacity_context(reference_scenario(8)))
