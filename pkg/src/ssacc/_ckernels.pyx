# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerical kernels; one-for-one mirror of ``_pykernels``."""
from libc.math cimport exp, log, log1p, sqrt, fabs, INFINITY, M_PI

import numpy as np

cdef double EULER_GAMMA = 0.57721566490153286061
cdef double LOG_2PI_HALF = 0.91893853320467274178
cdef double LN2 = 0.69314718055994530942
cdef double FPMIN = 1e-300
cdef double EPS = 1e-16
cdef int MAX_ITER = 20000

cdef double LANCZOS_G = 607.0 / 128.0
cdef double[15] LANCZOS = [
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
]


cdef double _lgamma(double x) nogil:
    cdef double a, t
    cdef int i
    if x < 0.5:
        return _lgamma(x + 1.0) - log(x)
    x -= 1.0
    a = LANCZOS[0]
    for i in range(1, 15):
        a += LANCZOS[i] / (x + i)
    t = x + LANCZOS_G + 0.5
    return LOG_2PI_HALF + (x + 0.5) * log(t) - t + log(a)


cpdef double lgamma(double x):
    return _lgamma(x)


cdef double _lower_series(double s, double x) except? -1.0:
    cdef double term = 1.0 / s
    cdef double total = term
    cdef int n
    for n in range(1, MAX_ITER):
        term *= x / (s + n)
        total += term
        if fabs(term) < fabs(total) * EPS:
            return total
    raise ArithmeticError("lower incomplete gamma series did not converge")


cdef double _upper_gamma_cf(double s, double x) except? -1.0:
    cdef double b = x + 1.0 - s
    cdef double c = 1.0 / FPMIN
    cdef double d, h, an, delta
    cdef int i
    d = 1.0 / b if b != 0.0 else 1.0 / FPMIN
    h = d
    for i in range(1, MAX_ITER):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if fabs(d) < FPMIN:
            d = FPMIN
        c = b + an / c
        if fabs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < EPS:
            return h
    raise ArithmeticError("incomplete gamma continued fraction did not converge")


cpdef double upper_gamma_cf(double s, double x):
    return _upper_gamma_cf(s, x)


cpdef double lower_gamma(double s, double x):
    if x == 0.0:
        return 0.0
    if x < s + 1.0:
        return exp(s * log(x) - x) * _lower_series(s, x)
    return exp(_lgamma(s)) - exp(s * log(x) - x) * _upper_gamma_cf(s, x)


cdef double _reg_lower(double s, double x) except? -2.0:
    if x == 0.0:
        return 0.0
    if x < s + 1.0:
        return exp(s * log(x) - x - _lgamma(s)) * _lower_series(s, x)
    return 1.0 - exp(s * log(x) - x - _lgamma(s)) * _upper_gamma_cf(s, x)


cpdef double regularized_lower_gamma(double s, double x):
    return _reg_lower(s, x)


cpdef double upper_gamma(double s, double x):
    return exp(s * log(x) - x) * _upper_gamma_cf(s, x)


cdef double _e1_series(double x) nogil:
    cdef double total = 0.0
    cdef double term = 1.0
    cdef double add
    cdef int k
    for k in range(1, 200):
        term *= -x / k
        add = term / k
        total += add
        if fabs(add) < EPS * fabs(total):
            break
    return -EULER_GAMMA - log(x) - total


cpdef double e1(double x):
    if x < 1.0:
        return _e1_series(x)
    return exp(-x) * _upper_gamma_cf(0.0, x)


cdef double _e1_scaled(double x) except? -1.0:
    if x < 1.0:
        return exp(x) * _e1_series(x)
    return _upper_gamma_cf(0.0, x)


cpdef double e1_scaled(double x):
    return _e1_scaled(x)


cdef void _laguerre_pair(int n, double z, double* pn, double* pnm1, double* log_scale) nogil:
    cdef double p1 = 1.0
    cdef double p2 = 0.0
    cdef double p3
    cdef double ls = 0.0
    cdef int j
    for j in range(1, n + 1):
        p3 = p2
        p2 = p1
        p1 = ((2 * j - 1 - z) * p2 - (j - 1) * p3) / j
        if fabs(p1) > 1e150:
            p1 *= 1e-150
            p2 *= 1e-150
            ls += 345.38776394910684
    pn[0] = p1
    pnm1[0] = p2
    log_scale[0] = ls


cdef double _lag(int n, double z) nogil:
    cdef double a, b, c
    _laguerre_pair(n, z, &a, &b, &c)
    return a


cdef bint _newton(int n, double* z) nogil:
    cdef double p1, p2, ls, pp, z_old
    cdef int it
    for it in range(200):
        _laguerre_pair(n, z[0], &p1, &p2, &ls)
        pp = n * (p1 - p2) / z[0]
        z_old = z[0]
        z[0] = z_old - p1 / pp
        if fabs(z[0] - z_old) <= 3e-15 * fabs(z[0]):
            return True
    return False


cdef double _bisect_root(int n, double lo, double hi) nogil:
    cdef double flo = _lag(n, lo)
    cdef double mid, fm
    cdef int it
    for it in range(200):
        mid = 0.5 * (lo + hi)
        fm = _lag(n, mid)
        if (fm < 0.0) == (flo < 0.0):
            lo = mid
            flo = fm
        else:
            hi = mid
        if hi - lo <= 4e-16 * hi:
            break
    return 0.5 * (lo + hi)


def laguerre_rule(int n):
    cdef double[:] nodes = np.zeros(n)
    cdef double[:] logw = np.zeros(n)
    cdef double z = 0.0
    cdef double guess, lower, step, a, fa, b, pn, pnm1, ls, pnext, ai
    cdef bint ok
    cdef int i
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
        ok = _newton(n, &z)
        if not ok or z <= lower * (1.0 + 1e-12) or (i == 0 and z <= 0.0):
            step = max((guess - lower) / 16.0, 1e-3)
            a = lower + step * 1e-3 if i > 0 else 1e-12
            fa = _lag(n, a)
            b = a + step
            while (_lag(n, b) < 0.0) == (fa < 0.0):
                b += step
            z = _bisect_root(n, b - step, b)
        nodes[i] = z
        _laguerre_pair(n, z, &pn, &pnm1, &ls)
        pnext = ((2 * n + 1 - z) * pn - n * pnm1) / (n + 1)
        logw[i] = log(z) - 2.0 * log(n + 1.0) - 2.0 * (log(fabs(pnext)) + ls)
    return list(nodes), list(logw)


cdef double _ncx2_logpdf(double x, double lam, int terms) nogil:
    cdef double z, log_t0, total, t
    cdef int i0, used, i
    if x == 0.0:
        return INFINITY
    if lam == 0.0:
        return -0.5 * log(2.0 * M_PI * x) - 0.5 * x
    z = 0.25 * lam * x
    i0 = <int>max(0.0, (sqrt(0.25 + 4.0 * z) - 1.5) * 0.5)
    log_t0 = (i0 * log(lam) + (i0 - 0.5) * log(x) - _lgamma(i0 + 1.0)
              - (2 * i0 + 0.5) * LN2 - _lgamma(i0 + 0.5))
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
    return -0.5 * (x + lam) + log_t0 + log(total)


cpdef double ncx2_logpdf(double x, double lam, int terms):
    return _ncx2_logpdf(x, lam, terms)


cpdef double ncx2_cdf(double x, double lam, int terms):
    cdef double h, half, log_p0, p0, total, mass, p, term
    cdef int i0, used, i
    if x == 0.0:
        return 0.0
    h = 0.5 * lam
    half = 0.5 * x
    if lam == 0.0:
        return _reg_lower(0.5, half)
    i0 = <int>h
    log_p0 = i0 * log(h) - h - _lgamma(i0 + 1.0)
    p0 = exp(log_p0)
    total = p0 * _reg_lower(i0 + 0.5, half)
    mass = p0
    used = 1
    p = p0
    i = i0
    while used < terms:
        p *= h / (i + 1.0)
        i += 1
        term = p * _reg_lower(i + 0.5, half)
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
        term = p * _reg_lower(i + 0.5, half)
        total += term
        mass += p
        used += 1
        if p < 1e-14 * mass:
            break
    return min(total, 1.0)


def bob_sum(nodes, logw, double scale, double lam, double w1, int terms):
    cdef const double[:] xs = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef const double[:] lws = np.ascontiguousarray(logw, dtype=np.float64)
    cdef double total = 0.0
    cdef double log_scale = log(scale)
    cdef double t, x, lw
    cdef Py_ssize_t k
    for k in range(xs.shape[0]):
        t = xs[k]
        x = scale * t
        lw = lws[k] + t + log_scale + _ncx2_logpdf(x, lam, terms)
        if lw != lw or lw == INFINITY:
            raise ArithmeticError("non-finite quadrature term at node %d" % k)
        total += exp(lw) * log1p(w1 * x) / LN2
    return total


cdef double _willie_bracket_over_t(double t, double k3n, double u0, double gu0) except? -1.0:
    cdef double nu3 = k3n * t
    cdef double d
    if nu3 < 1e-5:
        d = u0 * nu3
        return k3n * u0 * (gu0 + 0.5 * d * (gu0 - 1.0 / u0))
    return (log1p(nu3) + _e1_scaled(u0 * (1.0 + nu3)) - gu0) / t


def willie_sum(nodes, weights, double k3n, double u0, double split_at):
    cdef const double[:] xs = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef const double[:] ws = np.ascontiguousarray(weights, dtype=np.float64)
    cdef double gu0 = _e1_scaled(u0)
    cdef double total = 0.0
    cdef double head = 0.0
    cdef double tail = 0.0
    cdef double t
    cdef Py_ssize_t k, n = xs.shape[0]
    if split_at <= 0.0:
        for k in range(n):
            total += ws[k] * _willie_bracket_over_t(xs[k], k3n, u0, gu0)
        return total
    for k in range(n):
        tail += ws[k] * _willie_bracket_over_t(split_at + xs[k], k3n, u0, gu0)
        t = split_at * exp(-xs[k])
        head += ws[k] * split_at * exp(-t) * _willie_bracket_over_t(t, k3n, u0, gu0)
    return head + exp(-split_at) * tail
