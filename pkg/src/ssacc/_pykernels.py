"""Pure-Python numerical kernels.

Reference implementation of the scalar loops behind :mod:`ssacc.numerics`
and the quadrature sums in :mod:`ssacc.capacity`.  The
compiled module ``_ckernels`` mirrors every function here one for one and is
preferred at import time when it has been built.
"""
import math

EULER_GAMMA = 0.57721566490153286061
LOG_2PI_HALF = 0.91893853320467274178
LN2 = math.log(2.0)

_FPMIN = 1e-300
_EPS = 1e-16
_MAX_ITER = 20000

_LANCZOS_G = 607.0 / 128.0
_LANCZOS = (
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
)


def lgamma(x):
    if x < 0.5:
        return lgamma(x + 1.0) - math.log(x)
    x -= 1.0
    a = _LANCZOS[0]
    for i in range(1, 15):
        a += _LANCZOS[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    return LOG_2PI_HALF + (x + 0.5) * math.log(t) - t + math.log(a)


def _lower_series(s, x):
    # sum_{n>=0} x^n / (s (s+1) ... (s+n)), i.e. gamma(s,x) e^x x^-s
    term = 1.0 / s
    total = term
    for n in range(1, _MAX_ITER):
        term *= x / (s + n)
        total += term
        if abs(term) < abs(total) * _EPS:
            return total
    raise ArithmeticError("lower incomplete gamma series did not converge")


def upper_gamma_cf(s, x):
    """Continued fraction for e^x x^-s Gamma(s, x), modified Lentz, x > 0."""
    b = x + 1.0 - s
    c = 1.0 / _FPMIN
    d = 1.0 / b if b != 0.0 else 1.0 / _FPMIN
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError("incomplete gamma continued fraction did not converge")


def lower_gamma(s, x):
    if x == 0.0:
        return 0.0
    if x < s + 1.0:
        return math.exp(s * math.log(x) - x) * _lower_series(s, x)
    upper = math.exp(s * math.log(x) - x) * upper_gamma_cf(s, x)
    return math.exp(lgamma(s)) - upper


def regularized_lower_gamma(s, x):
    if x == 0.0:
        return 0.0
    if x < s + 1.0:
        return math.exp(s * math.log(x) - x - lgamma(s)) * _lower_series(s, x)
    return 1.0 - math.exp(s * math.log(x) - x - lgamma(s)) * upper_gamma_cf(s, x)


def upper_gamma(s, x):
    return math.exp(s * math.log(x) - x) * upper_gamma_cf(s, x)


def _e1_series(x):
    # -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    total = 0.0
    term = 1.0
    for k in range(1, 200):
        term *= -x / k
        add = term / k
        total += add
        if abs(add) < _EPS * abs(total):
            break
    return -EULER_GAMMA - math.log(x) - total


def e1(x):
    if x < 1.0:
        return _e1_series(x)
    return math.exp(-x) * upper_gamma_cf(0.0, x)


def e1_scaled(x):
    if x < 1.0:
        return math.exp(x) * _e1_series(x)
    return upper_gamma_cf(0.0, x)


def _laguerre_pair(n, z):
    """Return (L_n(z), L_{n-1}(z), log scale) with L_k = value * exp(scale)."""
    p1 = 1.0
    p2 = 0.0
    log_scale = 0.0
    for j in range(1, n + 1):
        p3 = p2
        p2 = p1
        p1 = ((2 * j - 1 - z) * p2 - (j - 1) * p3) / j
        if abs(p1) > 1e150:
            p1 *= 1e-150
            p2 *= 1e-150
            log_scale += 345.38776394910684
    return p1, p2, log_scale


def _newton(n, z):
    for _ in range(200):
        p1, p2, _ = _laguerre_pair(n, z)
        pp = n * (p1 - p2) / z
        z_old = z
        z = z_old - p1 / pp
        if abs(z - z_old) <= 3e-15 * abs(z):
            return z, True
    return z, False


def _bisect_root(n, lo, hi):
    flo = _laguerre_pair(n, lo)[0]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = _laguerre_pair(n, mid)[0]
        if (fm < 0.0) == (flo < 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= 4e-16 * hi:
            break
    return 0.5 * (lo + hi)


def laguerre_rule(n):
    """Nodes and log-weights of the n-point Gauss-Laguerre rule."""
    nodes = [0.0] * n
    logw = [0.0] * n
    z = 0.0
    for i in range(n):
        if i == 0:
            z = 3.0 / (1.0 + 2.4 * n)
        elif i == 1:
            z += 15.0 / (1.0 + 2.5 * n)
        else:
            ai = i - 1.0
            z += (1.0 + 2.55 * ai) / (1.9 * ai) * (z - nodes[i - 2])
        guess = z
        lower = nodes[i - 1] if i > 0 else 0.0
        z, ok = _newton(n, guess)
        if not ok or z <= lower * (1.0 + 1e-12) or (i == 0 and z <= 0.0):
            # march from the previous root for a sign change, then bisect
            step = max((guess - lower) / 16.0, 1e-3)
            a = lower + step * 1e-3 if i > 0 else 1e-12
            fa = _laguerre_pair(n, a)[0]
            b = a + step
            while (_laguerre_pair(n, b)[0] < 0.0) == (fa < 0.0):
                b += step
            z = _bisect_root(n, b - step, b)
        nodes[i] = z
        # weight x / ((n+1)^2 L_{n+1}(x)^2), with L_{n+1} from one more step
        pn, pnm1, log_scale = _laguerre_pair(n, z)
        pnext = ((2 * n + 1 - z) * pn - n * pnm1) / (n + 1)
        logw[i] = math.log(z) - 2.0 * math.log(n + 1.0) - 2.0 * (math.log(abs(pnext)) + log_scale)
    return nodes, logw


def ncx2_logpdf(x, lam, terms):
    """Log density of the noncentral chi-square law with one degree of freedom.

    The Poisson-mixture series is summed outward from its dominant term so
    that the relative stopping rule is applied on both tails.
    """
    if x == 0.0:
        return math.inf
    if lam == 0.0:
        return -0.5 * math.log(2.0 * math.pi * x) - 0.5 * x
    z = 0.25 * lam * x
    i0 = int(max(0.0, (math.sqrt(0.25 + 4.0 * z) - 1.5) * 0.5))
    log_t0 = (
        i0 * math.log(lam)
        + (i0 - 0.5) * math.log(x)
        - lgamma(i0 + 1.0)
        - (2 * i0 + 0.5) * LN2
        - lgamma(i0 + 0.5)
    )
    total = 1.0
    used = 1
    t = 1.0
    i = i0
    while used < terms:
        t *= z / ((i + 1.0) * (i + 0.5))
        total += t
        used += 1
        i += 1
        if t < 1e-14 * total:
            break
    t = 1.0
    i = i0
    while i > 0 and used < terms:
        t *= (i * (i - 0.5)) / z
        total += t
        used += 1
        i -= 1
        if t < 1e-14 * total:
            break
    return -0.5 * (x + lam) + log_t0 + math.log(total)


def ncx2_cdf(x, lam, terms):
    """CDF of the one-dof noncentral chi-square law (Poisson mixture of P(i+1/2, x/2))."""
    if x == 0.0:
        return 0.0
    h = 0.5 * lam
    half = 0.5 * x
    if lam == 0.0:
        return regularized_lower_gamma(0.5, half)
    i0 = int(h)
    log_p0 = i0 * math.log(h) - h - lgamma(i0 + 1.0)
    p0 = math.exp(log_p0)
    total = p0 * regularized_lower_gamma(i0 + 0.5, half)
    mass = p0
    used = 1
    p = p0
    i = i0
    while used < terms:
        p *= h / (i + 1.0)
        i += 1
        term = p * regularized_lower_gamma(i + 0.5, half)
        total += term
        mass += p
        used += 1
        if p < 1e-14 * mass or term < 1e-16 * total:
            break
    p = p0
    i = i0
    while i > 0 and used < terms:
        p *= i / h
        i -= 1
        term = p * regularized_lower_gamma(i + 0.5, half)
        total += term
        mass += p
        used += 1
        if p < 1e-14 * mass:
            break
    return min(total, 1.0)


def bob_sum(nodes, logw, scale, lam, w1, terms):
    """Gauss-Laguerre sum for the average Bob capacity (bits/s/Hz).

    Nodes are stretched by ``scale`` so the rule covers the bulk of the
    noncentral chi-square density; ``scale == 1`` is the plain rule.
    """
    total = 0.0
    log_scale = math.log(scale)
    for k in range(len(nodes)):
        t = nodes[k]
        x = scale * t
        lw = logw[k] + t + log_scale + ncx2_logpdf(x, lam, terms)
        if lw != lw or lw == math.inf:
            raise ArithmeticError("non-finite quadrature term at node %d" % k)
        total += math.exp(lw) * math.log1p(w1 * x) / LN2
    return total


def _willie_bracket_over_t(t, k3n, u0, gu0):
    # B(N t) / t with B = ln(1+nu3) + g(u0 (1+nu3)) - g(u0), nu3 = k3n t
    nu3 = k3n * t
    if nu3 < 1e-5:
        d = u0 * nu3
        # B = int_{u0}^{u0+d} g(s) ds, g' = g - 1/s
        return k3n * u0 * (gu0 + 0.5 * d * (gu0 - 1.0 / u0))
    return (math.log1p(nu3) + e1_scaled(u0 * (1.0 + nu3)) - gu0) / t


def willie_sum(nodes, weights, k3n, u0, split_at):
    """Gauss-Laguerre evaluation of the outer integral of the Willie capacity.

    Returns the integral of exp(-t) B(N t)/t over t >= 0 (to be multiplied by
    nu2).  With ``split_at > 0`` the head [0, split_at] is mapped through
    t = split_at * exp(-s) so that it is again an exp(-s)-weighted integral.
    """
    gu0 = e1_scaled(u0)
    total = 0.0
    n = len(nodes)
    if split_at <= 0.0:
        for k in range(n):
            total += weights[k] * _willie_bracket_over_t(nodes[k], k3n, u0, gu0)
        return total
    tail = 0.0
    head = 0.0
    for k in range(n):
        tail += weights[k] * _willie_bracket_over_t(split_at + nodes[k], k3n, u0, gu0)
        t = split_at * math.exp(-nodes[k])
        head += weights[k] * split_at * math.exp(-t) * _willie_bracket_over_t(t, k3n, u0, gu0)
    return head + math.exp(-split_at) * tail
