"""Pure-Python kernels.

Reference implementation of the hot loops. The compiled module
``mcleish._ckernels`` exposes the same functions and is preferred when it
is importable; see ``mcleish._backend``.
"""

import math

import numpy as np

# Taylor coefficients of 1/Gamma(z) about z = 0 (index k is the z**k term).
_RGAMMA = (
    0.0,
    1.0,
    0.57721566490153286061,
    -0.65587807152025388108,
    -0.042002635034095235529,
    0.1665386113822914895,
    -0.042197734555544336748,
    -0.0096219715278769735621,
    0.0072189432466630995424,
    -0.0011651675918590651121,
    -0.00021524167411495097282,
    0.00012805028238811618615,
    -0.000020134854780788238656,
    -1.2504934821426706573e-6,
    1.1330272319816958824e-6,
    -2.0563384169776071035e-7,
    6.1160951044814158179e-9,
    5.0020076444692229301e-9,
    -1.1812745704870201446e-9,
    1.0434267116911005105e-10,
    7.782263439905071254e-12,
    -3.6968056186422057082e-12,
    5.100370287454475979e-13,
    -2.0583260535665067832e-14,
    -5.3481225394230179824e-15,
    1.2267786282382607902e-15,
    -1.1812593016974587695e-16,
    1.1866922547516003326e-18,
    1.4123806553180317816e-18,
)

EPS = 1e-16
MAXIT = 100000
DEBYE_ORDER = 200.0
_FLUSH = 1e200
_BIG = 1e100


def _temme_gammas(mu):
    """Return (gam1, gam2, 1/Gamma(1+mu), 1/Gamma(1-mu)) for |mu| <= 1/2."""
    m2 = mu * mu
    even = 0.0
    odd = 0.0
    p = 1.0
    # 1/Gamma(1+mu) = sum_j c_{j+1} mu^j, split into even and odd powers.
    for j in range(0, len(_RGAMMA) - 1, 2):
        even += _RGAMMA[j + 1] * p
        if j + 2 < len(_RGAMMA):
            odd += _RGAMMA[j + 2] * p
        p *= m2
    gam2 = even
    gam1 = -odd
    return gam1, gam2, gam2 - mu * gam1, gam2 + mu * gam1


def _log_kv_debye(nu, x):
    z = x / nu
    s2 = 1.0 + z * z
    sq = math.sqrt(s2)
    t = 1.0 / sq
    t2 = t * t
    eta = sq + math.log(z) - math.log1p(sq)
    u1 = t * (3.0 - 5.0 * t2) / 24.0
    u2 = t2 * (81.0 + t2 * (-462.0 + 385.0 * t2)) / 1152.0
    u3 = t * t2 * (30375.0 + t2 * (-369603.0 + t2 * (765765.0 - 425425.0 * t2))) / 414720.0
    u4 = t2 * t2 * (
        4465125.0
        + t2 * (-94121676.0 + t2 * (349922430.0 + t2 * (-446185740.0 + 185910725.0 * t2)))
    ) / 39813120.0
    inv = 1.0 / nu
    series = 1.0 + inv * (-u1 + inv * (u2 + inv * (-u3 + inv * u4)))
    return (
        0.5 * math.log(math.pi / (2.0 * nu))
        - nu * eta
        - 0.25 * math.log(s2)
        + math.log(series)
    )


def _start_temme(mu, x):
    """log K_mu(x) and K_{mu+1}(x)/K_mu(x) by Temme's series, x < 2."""
    x2 = 0.5 * x
    pimu = math.pi * mu
    fact = 1.0 if abs(pimu) < EPS else pimu / math.sin(pimu)
    d = -math.log(x2)
    e = mu * d
    fact2 = 1.0 if abs(e) < EPS else math.sinh(e) / e
    gam1, gam2, gampl, gammi = _temme_gammas(mu)
    ff = fact * (gam1 * math.cosh(e) + gam2 * fact2 * d)
    total = ff
    e = math.exp(e)
    p = 0.5 * e / gampl
    q = 0.5 / (e * gammi)
    c = 1.0
    d = x2 * x2
    total1 = p
    m2 = mu * mu
    for i in range(1, MAXIT):
        ff = (i * ff + p + q) / (i * i - m2)
        c *= d / i
        p /= i - mu
        q /= i + mu
        delta = c * ff
        total += delta
        total1 += c * (p - i * ff)
        if abs(delta) < abs(total) * EPS:
            break
    return math.log(total), (total1 / total) * (2.0 / x)


def _start_steed(mu, x):
    """log K_mu(x) and K_{mu+1}(x)/K_mu(x) by Steed's continued fraction, x >= 2."""
    m2 = mu * mu
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1 = 0.0
    q2 = 1.0
    a1 = 0.25 - m2
    q = c = a1
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
        if abs(dels / s) < EPS:
            break
    h = a1 * h
    logk = 0.5 * math.log(math.pi / (2.0 * x)) - x - math.log(s)
    return logk, (mu + x + 0.5 - h) / x


def log_kv(nu, x):
    """Natural log of K_nu(x) for x > 0."""
    nu = abs(nu)
    if nu >= DEBYE_ORDER:
        return _log_kv_debye(nu, x)
    nl = int(nu + 0.5)
    mu = nu - nl
    if x < 2.0:
        logk, r = _start_temme(mu, x)
    else:
        logk, r = _start_steed(mu, x)
    if nl == 0:
        return logk
    # Upward recurrence on the ratios K_{k+1}/K_k, which never overflow;
    # their product is accumulated with periodic flushes into log space.
    prod = 1.0
    acc = 0.0
    for j in range(nl):
        if j:
            r = 2.0 * (mu + j) / x + 1.0 / r
        if r > _BIG:
            acc += math.log(r)
        else:
            prod *= r
            if prod > _FLUSH:
                acc += math.log(prod)
                prod = 1.0
    return logk + acc + math.log(prod)


def kv(nu, x):
    """K_nu(x) for x > 0; 0 on underflow and inf on overflow."""
    lk = log_kv(nu, x)
    if lk < -745.2:
        return 0.0
    if lk > 709.7:
        return math.inf
    return math.exp(lk)


def log_kv_array(nu, x):
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape)
    flat = out.reshape(-1)
    for i, v in enumerate(x.reshape(-1)):
        flat[i] = log_kv(nu, v)
    return out


def kv_array(nu, x):
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape)
    flat = out.reshape(-1)
    for i, v in enumerate(x.reshape(-1)):
        flat[i] = kv(nu, v)
    return out


def gamma_exp_mean(nu, a):
    """E[exp(-a/G)] for G ~ Gamma(shape nu, mean 1), elementwise over a >= 0.

    Closed form (2/Gamma(nu)) (a nu)^(nu/2) K_nu(2 sqrt(a nu)), evaluated in
    log space so that large nu does not overflow.
    """
    a = np.asarray(a, dtype=float)
    out = np.empty(a.shape)
    flat = out.reshape(-1)
    if math.isinf(nu):
        return np.exp(-a)
    c0 = math.log(2.0) - math.lgamma(nu)
    for i, v in enumerate(a.reshape(-1)):
        if v <= 0.0:
            flat[i] = 1.0
            continue
        z = 2.0 * math.sqrt(v * nu)
        if math.isinf(z):
            flat[i] = 0.0
            continue
        lv = c0 + nu * math.log(0.5 * z) + log_kv(nu, z)
        flat[i] = math.exp(lv) if lv > -745.2 else 0.0
    return out


def nearest_index(r, symbols, h):
    """Index of argmin_m ||r_i - h s_m||^2 per row; first index wins ties."""
    r = np.asarray(r, dtype=complex)
    s = h * np.asarray(symbols, dtype=complex)
    n = r.shape[0]
    out = np.empty(n, dtype=np.int64)
    step = max(1, (1 << 22) // max(1, s.shape[0] * s.shape[1]))
    for lo in range(0, n, step):
        blk = r[lo:lo + step]
        d = np.abs(blk[:, None, :] - s[None, :, :]) ** 2
        out[lo:lo + step] = np.argmin(d.sum(axis=2), axis=1)
    return out
