"""Brute-force reference evaluators, independent of the package internals.

Everything here is deliberately naive: plain Racah alternating sums in
floating point with a factorial lookup table, explicit low-j rotation
formulas, and a matrix-exponential rotation.  These are the oracles the
library is checked against; they must not share code with it.
"""

import math

import numpy as np
from scipy.linalg import expm

_FACT = [float(math.factorial(k)) for k in range(60)]


def _ti(x) -> int:
    """Twice the value of an (half-)integer quantum number, as int."""
    t = int(round(2 * float(x)))
    assert abs(2 * float(x) - t) < 1e-9, f"not half-integer: {x}"
    return t


def _tri(ta, tb, tc) -> bool:
    return (ta + tb + tc) % 2 == 0 and abs(ta - tb) <= tc <= ta + tb


def racah_3j(j1, j2, j3, m1, m2, m3) -> float:
    """3j symbol via the single-sum Racah formula, float arithmetic."""
    tj1, tj2, tj3 = _ti(j1), _ti(j2), _ti(j3)
    tm1, tm2, tm3 = _ti(m1), _ti(m2), _ti(m3)
    if tm1 + tm2 + tm3 != 0 or not _tri(tj1, tj2, tj3):
        return 0.0
    if abs(tm1) > tj1 or abs(tm2) > tj2 or abs(tm3) > tj3:
        return 0.0
    tmin = max(0, (tj2 - tj3 - tm1) // 2, (tj1 - tj3 + tm2) // 2)
    tmax = min((tj1 + tj2 - tj3) // 2, (tj1 - tm1) // 2, (tj2 + tm2) // 2)
    terms = []
    for t in range(tmin, tmax + 1):
        den = (
            _FACT[t]
            * _FACT[(tj1 + tj2 - tj3) // 2 - t]
            * _FACT[(tj1 - tm1) // 2 - t]
            * _FACT[(tj2 + tm2) // 2 - t]
            * _FACT[(tj3 - tj2 + tm1) // 2 + t]
            * _FACT[(tj3 - tj1 - tm2) // 2 + t]
        )
        terms.append((-1.0) ** t / den)
    ssum = math.fsum(terms)
    delta = (
        _FACT[(tj1 + tj2 - tj3) // 2]
        * _FACT[(tj1 - tj2 + tj3) // 2]
        * _FACT[(-tj1 + tj2 + tj3) // 2]
        / _FACT[(tj1 + tj2 + tj3) // 2 + 1]
    )
    weight = (
        _FACT[(tj1 + tm1) // 2]
        * _FACT[(tj1 - tm1) // 2]
        * _FACT[(tj2 + tm2) // 2]
        * _FACT[(tj2 - tm2) // 2]
        * _FACT[(tj3 + tm3) // 2]
        * _FACT[(tj3 - tm3) // 2]
    )
    phase = (-1.0) ** ((tj1 - tj2 - tm3) // 2)
    return phase * ssum * math.sqrt(delta * weight)


def racah_6j(j1, j2, j3, j4, j5, j6) -> float:
    """6j symbol via the Racah alternating sum, float arithmetic."""
    t = [_ti(j) for j in (j1, j2, j3, j4, j5, j6)]
    triads = (
        (t[0], t[1], t[2]),
        (t[0], t[4], t[5]),
        (t[3], t[1], t[5]),
        (t[3], t[4], t[2]),
    )
    for ta, tb, tc in triads:
        if not _tri(ta, tb, tc):
            return 0.0
    tsum = [(ta + tb + tc) // 2 for ta, tb, tc in triads]
    xsum = (
        (t[0] + t[1] + t[3] + t[4]) // 2,
        (t[1] + t[2] + t[4] + t[5]) // 2,
        (t[2] + t[0] + t[5] + t[3]) // 2,
    )
    terms = []
    for z in range(max(tsum), min(xsum) + 1):
        den = 1.0
        for ts in tsum:
            den *= _FACT[z - ts]
        for xs in xsum:
            den *= _FACT[xs - z]
        terms.append((-1.0) ** z * _FACT[z + 1] / den)
    ssum = math.fsum(terms)
    delta = 1.0
    for ta, tb, tc in triads:
        delta *= (
            _FACT[(ta + tb - tc) // 2]
            * _FACT[(ta - tb + tc) // 2]
            * _FACT[(-ta + tb + tc) // 2]
            / _FACT[(ta + tb + tc) // 2 + 1]
        )
    return ssum * math.sqrt(delta)


def cg_from_3j(j1, m1, j2, m2, j, m) -> float:
    """Clebsch-Gordan coefficient through the standard 3j relation."""
    if abs(float(m1) + float(m2) - float(m)) > 1e-12:
        return 0.0
    phase = (-1.0) ** ((_ti(j1) - _ti(j2) + _ti(m)) // 2)
    return phase * math.sqrt(_ti(j) + 1) * racah_3j(j1, j2, j, m1, m2, -float(m))


def sixj_with_zero(j1, j2, j3) -> float:
    """Special case {j1 j2 j3; 0 j3 j2} = (-1)^(j1+j2+j3)/sqrt((2j2+1)(2j3+1))."""
    phase = (-1.0) ** ((_ti(j1) + _ti(j2) + _ti(j3)) // 2)
    return phase / math.sqrt((_ti(j2) + 1) * (_ti(j3) + 1))


def rotation_matrix_expm(j, beta: float) -> np.ndarray:
    """d^j(beta) computed as expm(-i beta Jy); rows/cols ordered m = -j..j."""
    tj = _ti(j)
    dim = tj + 1
    mvals = np.array([(-tj + 2 * k) / 2 for k in range(dim)])
    jv = tj / 2
    jplus = np.zeros((dim, dim))
    for k in range(dim - 1):
        m = mvals[k]
        jplus[k + 1, k] = math.sqrt(jv * (jv + 1) - m * (m + 1))
    jy = (jplus - jplus.T) / 2j
    rot = expm(-1j * beta * jy)
    assert np.max(np.abs(rot.imag)) < 1e-12
    return rot.real


def d_half_explicit(m, mp, beta: float) -> float:
    """Explicit j = 1/2 rotation matrix."""
    c, s = math.cos(beta / 2), math.sin(beta / 2)
    table = {(1, 1): c, (1, -1): -s, (-1, 1): s, (-1, -1): c}
    return table[(_ti(m), _ti(mp))]


def d_one_explicit(m, mp, beta: float) -> float:
    """Explicit j = 1 rotation matrix."""
    c, s = math.cos(beta), math.sin(beta)
    r2 = math.sqrt(2)
    table = {
        (2, 2): (1 + c) / 2,
        (2, 0): -s / r2,
        (2, -2): (1 - c) / 2,
        (0, 2): s / r2,
        (0, 0): c,
        (0, -2): -s / r2,
        (-2, 2): (1 - c) / 2,
        (-2, 0): s / r2,
        (-2, -2): (1 + c) / 2,
    }
    return table[(_ti(m), _ti(mp))]


def all_j_values(jmax) -> list[float]:
    """0, 1/2, 1, ... jmax."""
    return [t / 2 for t in range(0, _ti(jmax) + 1)]


def all_m_values(j) -> list[float]:
    tj = _ti(j)
    return [t / 2 for t in range(-tj, tj + 1, 2)]
