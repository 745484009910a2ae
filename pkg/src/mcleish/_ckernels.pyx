# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same algorithms and API as ``mcleish._kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, log1p, exp, sqrt, sin, sinh, cosh, fabs, lgamma, isinf, M_PI, INFINITY

cnp.import_array()

cdef double[29] _RGAMMA
_vals = (
    0.0, 1.0, 0.57721566490153286061, -0.65587807152025388108,
    -0.042002635034095235529, 0.1665386113822914895, -0.042197734555544336748,
    -0.0096219715278769735621, 0.0072189432466630995424, -0.0011651675918590651121,
    -0.00021524167411495097282, 0.00012805028238811618615, -0.000020134854780788238656,
    -1.2504934821426706573e-6, 1.1330272319816958824e-6, -2.0563384169776071035e-7,
    6.1160951044814158179e-9, 5.0020076444692229301e-9, -1.1812745704870201446e-9,
    1.0434267116911005105e-10, 7.782263439905071254e-12, -3.6968056186422057082e-12,
    5.100370287454475979e-13, -2.0583260535665067832e-14, -5.3481225394230179824e-15,
    1.2267786282382607902e-15, -1.1812593016974587695e-16, 1.1866922547516003326e-18,
    1.4123806553180317816e-18,
)
for _i in range(29):
    _RGAMMA[_i] = _vals[_i]

cdef double EPS = 1e-16
cdef int MAXIT = 100000
cdef double DEBYE_ORDER = 200.0
cdef double _FLUSH = 1e200
cdef double _BIG = 1e100


cdef double _log_kv_debye(double nu, double x) nogil:
    cdef double z = x / nu
    cdef double s2 = 1.0 + z * z
    cdef double sq = sqrt(s2)
    cdef double t = 1.0 / sq
    cdef double t2 = t * t
    cdef double eta = sq + log(z) - log1p(sq)
    cdef double u1 = t * (3.0 - 5.0 * t2) / 24.0
    cdef double u2 = t2 * (81.0 + t2 * (-462.0 + 385.0 * t2)) / 1152.0
    cdef double u3 = t * t2 * (30375.0 + t2 * (-369603.0 + t2 * (765765.0 - 425425.0 * t2))) / 414720.0
    cdef double u4 = t2 * t2 * (4465125.0 + t2 * (-94121676.0 + t2 * (349922430.0
                     + t2 * (-446185740.0 + 185910725.0 * t2)))) / 39813120.0
    cdef double inv = 1.0 / nu
    cdef double series = 1.0 + inv * (-u1 + inv * (u2 + inv * (-u3 + inv * u4)))
    return 0.5 * log(M_PI / (2.0 * nu)) - nu * eta - 0.25 * log(s2) + log(series)


cdef double log_kv_c(double nu, double x) nogil:
    cdef int nl, i, j
    cdef double mu, m2, logk, r
    cdef double x2, pimu, fact, d, e, fact2, gam1, gam2, gampl, gammi
    cdef double ff, total, total1, p, q, c, delta, even, odd, pw
    cdef double b, h, delh, q1, q2, a1, a, s, qnew, dels
    cdef double prod, acc
    nu = fabs(nu)
    if nu >= DEBYE_ORDER:
        return _log_kv_debye(nu, x)
    nl = <int>(nu + 0.5)
    mu = nu - nl
    m2 = mu * mu
    if x < 2.0:
        even = 0.0
        odd = 0.0
        pw = 1.0
        j = 0
        while j < 28:
            even += _RGAMMA[j + 1] * pw
            if j + 2 < 29:
                odd += _RGAMMA[j + 2] * pw
            pw *= m2
            j += 2
        gam2 = even
        gam1 = -odd
        gampl = gam2 - mu * gam1
        gammi = gam2 + mu * gam1
        x2 = 0.5 * x
        pimu = M_PI * mu
        fact = 1.0 if fabs(pimu) < EPS else pimu / sin(pimu)
        d = -log(x2)
        e = mu * d
        fact2 = 1.0 if fabs(e) < EPS else sinh(e) / e
        ff = fact * (gam1 * cosh(e) + gam2 * fact2 * d)
        total = ff
        e = exp(e)
        p = 0.5 * e / gampl
        q = 0.5 / (e * gammi)
        c = 1.0
        d = x2 * x2
        total1 = p
        for i in range(1, MAXIT):
            ff = (i * ff + p + q) / (i * i - m2)
            c *= d / i
            p /= i - mu
            q /= i + mu
            delta = c * ff
            total += delta
            total1 += c * (p - i * ff)
            if fabs(delta) < fabs(total) * EPS:
                break
        logk = log(total)
        r = (total1 / total) * (2.0 / x)
    else:
        b = 2.0 * (1.0 + x)
        d = 1.0 / b
        h = d
        delh = d
        q1 = 0.0
        q2 = 1.0
        a1 = 0.25 - m2
        q = a1
        c = a1
        a = -a1
        s = 1.0 + q * delh
        for i in range(2, MAXIT):
            a -= 2 * (i - 1)
            c = -a * c / i
            qnew = (q1 - b * q2) / a
            q1 = q2
            q2 = qnew
            q += c * qnew
            b += 2.0
            d = 1.0 / (b + a * d)
            delh = (b * d - 1.0) * delh
            h += delh
            dels = q * delh
            s += dels
            if fabs(dels / s) < EPS:
                break
        h = a1 * h
        logk = 0.5 * log(M_PI / (2.0 * x)) - x - log(s)
        r = (mu + x + 0.5 - h) / x
    if nl == 0:
        return logk
    prod = 1.0
    acc = 0.0
    for j in range(nl):
        if j:
            r = 2.0 * (mu + j) / x + 1.0 / r
        if r > _BIG:
            acc += log(r)
        else:
            prod *= r
            if prod > _FLUSH:
                acc += log(prod)
                prod = 1.0
    return logk + acc + log(prod)


cdef double kv_c(double nu, double x) nogil:
    cdef double lk = log_kv_c(nu, x)
    if lk < -745.2:
        return 0.0
    if lk > 709.7:
        return INFINITY
    return exp(lk)


def log_kv(double nu, double x):
    return log_kv_c(nu, x)


def kv(double nu, double x):
    return kv_c(nu, x)


def log_kv_array(double nu, x):
    cdef cnp.ndarray[double, ndim=1] xf = np.ascontiguousarray(np.asarray(x, dtype=float).reshape(-1))
    cdef Py_ssize_t n = xf.shape[0], i
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double[::1] xv = xf
    with nogil:
        for i in range(n):
            o[i] = log_kv_c(nu, xv[i])
    return out.reshape(np.shape(x))


def kv_array(double nu, x):
    cdef cnp.ndarray[double, ndim=1] xf = np.ascontiguousarray(np.asarray(x, dtype=float).reshape(-1))
    cdef Py_ssize_t n = xf.shape[0], i
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double[::1] xv = xf
    with nogil:
        for i in range(n):
            o[i] = kv_c(nu, xv[i])
    return out.reshape(np.shape(x))


def gamma_exp_mean(double nu, a):
    """E[exp(-a/G)] for G ~ Gamma(shape nu, mean 1), elementwise over a >= 0."""
    if isinf(nu):
        return np.exp(-np.asarray(a, dtype=float))
    cdef cnp.ndarray[double, ndim=1] af = np.ascontiguousarray(np.asarray(a, dtype=float).reshape(-1))
    cdef Py_ssize_t n = af.shape[0], i
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double[::1] av = af
    cdef double c0 = log(2.0) - lgamma(nu)
    cdef double v, z, lv
    with nogil:
        for i in range(n):
            v = av[i]
            if v <= 0.0:
                o[i] = 1.0
                continue
            z = 2.0 * sqrt(v * nu)
            if isinf(z):
                o[i] = 0.0
                continue
            lv = c0 + nu * log(0.5 * z) + log_kv_c(nu, z)
            o[i] = exp(lv) if lv > -745.2 else 0.0
    return out.reshape(np.shape(a))


def nearest_index(r, symbols, double h):
    """Index of argmin_m ||r_i - h s_m||^2 per row; first index wins ties."""
    cdef double complex[:, ::1] rv = np.ascontiguousarray(r, dtype=complex)
    cdef double complex[:, ::1] sv = np.ascontiguousarray(h * np.asarray(symbols, dtype=complex))
    cdef Py_ssize_t n = rv.shape[0], L = rv.shape[1], M = sv.shape[0]
    cdef Py_ssize_t i, m, l, best
    cdef double dist, bestd, dr, di
    out = np.empty(n, dtype=np.int64)
    cdef long long[::1] o = out
    with nogil:
        for i in range(n):
            best = 0
            bestd = 0.0
            for m in range(M):
                dist = 0.0
                for l in range(L):
                    dr = rv[i, l].real - sv[m, l].real
                    di = rv[i, l].imag - sv[m, l].imag
                    dist += dr * dr + di * di
                if m == 0 or dist < bestd:
                    bestd = dist
                    best = m
            o[i] = best
    return out
