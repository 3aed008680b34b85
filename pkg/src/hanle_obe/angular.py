"""Exact Wigner 3j/6j symbols, Clebsch-Gordan coefficients and rotation matrices.

Angular momenta may be integer or half-integer.  Quantum numbers are passed as
plain numbers (``1``, ``1.5``, ``Fraction(3, 2)``) or as
:class:`AngularMomentum`; internally everything is doubled to integers and the
coupling symbols are evaluated with exact rational arithmetic, rounding to
float only once at the end.  Phase conventions are Condon-Shortley throughout:
``clebsch_gordan(j, j, 1, 1, j + 1, j + 1) == 1`` and
``wigner_small_d(j, m, mp, beta)`` is ``<j m| exp(-i beta J_y) |j mp>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

__all__ = [
    "AngularMomentum",
    "DomainError",
    "clebsch_gordan",
    "wigner_3j",
    "wigner_6j",
    "wigner_small_d",
]


class DomainError(ValueError):
    """An argument lies outside the physical domain of the requested quantity."""


def _twice(value, what: str = "projection") -> int:
    """Doubled-integer representation of an integer or half-integer number."""
    if isinstance(value, AngularMomentum):
        return value.twice_j
    doubled = 2.0 * float(value)
    rounded = int(round(doubled))
    if abs(doubled - rounded) > 1e-9:
        raise DomainError(f"{what} must be integer or half-integer, got {value!r}")
    return rounded


def _twice_j(value, what: str = "j") -> int:
    tj = _twice(value, what)
    if tj < 0:
        raise DomainError(f"{what} must be non-negative, got {value!r}")
    return tj


def _check_projection(tj: int, tm: int, what: str = "m") -> None:
    if abs(tm) > tj or (tj - tm) % 2:
        raise DomainError(
            f"invalid {what}: projection {tm / 2} not in -j..j for j = {tj / 2}"
        )


@dataclass(frozen=True, order=True)
class AngularMomentum:
    """An angular momentum quantum number, stored as ``2j`` so that
    half-integers are exact."""

    twice_j: int

    def __post_init__(self) -> None:
        if not isinstance(self.twice_j, int):
            raise DomainError(f"twice_j must be an int, got {self.twice_j!r}")
        if self.twice_j < 0:
            raise DomainError(f"twice_j must be non-negative, got {self.twice_j}")

    @classmethod
    def of(cls, value) -> "AngularMomentum":
        """Coerce a number (or AngularMomentum) into an AngularMomentum."""
        if isinstance(value, AngularMomentum):
            return value
        return cls(_twice_j(value))

    @property
    def value(self) -> float:
        return self.twice_j / 2

    def projections(self) -> list[float]:
        """All magnetic quantum numbers m = -j ... +j."""
        return [t / 2 for t in range(-self.twice_j, self.twice_j + 1, 2)]

    @property
    def multiplicity(self) -> int:
        return self.twice_j + 1

    def __float__(self) -> float:
        return self.value

    def __str__(self) -> str:
        if self.twice_j % 2 == 0:
            return str(self.twice_j // 2)
        return f"{self.twice_j}/2"


@lru_cache(maxsize=None)
def _fact(n: int) -> int:
    return math.factorial(n)


def _triangle_ok(ta: int, tb: int, tc: int) -> bool:
    """Triangle condition on doubled j's, including integer-perimeter parity."""
    return (ta + tb + tc) % 2 == 0 and abs(ta - tb) <= tc <= ta + tb


def _tri_delta(ta: int, tb: int, tc: int) -> Fraction:
    """Squared triangle coefficient Delta(a,b,c)^2 as an exact rational."""
    return Fraction(
        _fact((ta + tb - tc) // 2)
        * _fact((ta - tb + tc) // 2)
        * _fact((-ta + tb + tc) // 2),
        _fact((ta + tb + tc) // 2 + 1),
    )


def _signed_sqrt(ssum: Fraction, radicand: Fraction, negate: bool) -> float:
    """float of ``(+-1) * ssum * sqrt(radicand)`` keeping the rational part exact."""
    if not ssum:
        return 0.0
    mag = math.sqrt(float(ssum * ssum * radicand))
    if (ssum < 0) != negate:
        return -mag
    return mag


def _w3j(tj1, tj2, tj3, tm1, tm2, tm3) -> float:
    if tm1 + tm2 + tm3 != 0:
        return 0.0
    if not _triangle_ok(tj1, tj2, tj3):
        return 0.0
    tmin = max(0, (tj2 - tj3 - tm1) // 2, (tj1 - tj3 + tm2) // 2)
    tmax = min((tj1 + tj2 - tj3) // 2, (tj1 - tm1) // 2, (tj2 + tm2) // 2)
    ssum = Fraction(0)
    for t in range(tmin, tmax + 1):
        den = (
            _fact(t)
            * _fact((tj1 + tj2 - tj3) // 2 - t)
            * _fact((tj1 - tm1) // 2 - t)
            * _fact((tj2 + tm2) // 2 - t)
            * _fact((tj3 - tj2 + tm1) // 2 + t)
            * _fact((tj3 - tj1 - tm2) // 2 + t)
        )
        ssum += Fraction(-1 if t % 2 else 1, den)
    radicand = _tri_delta(tj1, tj2, tj3) * (
        _fact((tj1 + tm1) // 2)
        * _fact((tj1 - tm1) // 2)
        * _fact((tj2 + tm2) // 2)
        * _fact((tj2 - tm2) // 2)
        * _fact((tj3 + tm3) // 2)
        * _fact((tj3 - tm3) // 2)
    )
    negate = ((tj1 - tj2 - tm3) // 2) % 2 != 0
    return _signed_sqrt(ssum, radicand, negate)


def wigner_3j(j1, j2, j3, m1, m2, m3) -> float:
    """Wigner 3j symbol (j1 j2 j3 / m1 m2 m3).

    Returns exactly 0.0 when the projections do not sum to zero or the
    triangle condition fails; raises :class:`DomainError` for projections that
    are invalid for their j.
    """
    tj = (_twice_j(j1, "j1"), _twice_j(j2, "j2"), _twice_j(j3, "j3"))
    tm = (_twice(m1, "m1"), _twice(m2, "m2"), _twice(m3, "m3"))
    for k in range(3):
        _check_projection(tj[k], tm[k], f"m{k + 1}")
    return _w3j(*tj, *tm)


def _w6j(tj1, tj2, tj3, tj4, tj5, tj6) -> float:
    triads = (
        (tj1, tj2, tj3),
        (tj1, tj5, tj6),
        (tj4, tj2, tj6),
        (tj4, tj5, tj3),
    )
    for ta, tb, tc in triads:
        if not _triangle_ok(ta, tb, tc):
            return 0.0
    tsum = [(ta + tb + tc) // 2 for ta, tb, tc in triads]
    xsum = (
        (tj1 + tj2 + tj4 + tj5) // 2,
        (tj2 + tj3 + tj5 + tj6) // 2,
        (tj3 + tj1 + tj6 + tj4) // 2,
    )
    ssum = Fraction(0)
    for z in range(max(tsum), min(xsum) + 1):
        den = 1
        for t in tsum:
            den *= _fact(z - t)
        for x in xsum:
            den *= _fact(x - z)
        ssum += Fraction((-1 if z % 2 else 1) * _fact(z + 1), den)
    radicand = Fraction(1)
    for ta, tb, tc in triads:
        radicand *= _tri_delta(ta, tb, tc)
    return _signed_sqrt(ssum, radicand, negate=False)


def wigner_6j(j1, j2, j3, j4, j5, j6) -> float:
    """Wigner 6j symbol {j1 j2 j3 / j4 j5 j6}.

    Zero whenever one of the four triads (j1 j2 j3), (j1 j5 j6), (j4 j2 j6),
    (j4 j5 j3) violates the triangle condition.
    """
    return _w6j(
        _twice_j(j1, "j1"),
        _twice_j(j2, "j2"),
        _twice_j(j3, "j3"),
        _twice_j(j4, "j4"),
        _twice_j(j5, "j5"),
        _twice_j(j6, "j6"),
    )


def clebsch_gordan(j1, m1, j2, m2, j, m) -> float:
    """Clebsch-Gordan coefficient <j1 m1; j2 m2 | j m>.

    Zero when m != m1 + m2 or when (j1, j2, j) is not triangular.
    """
    tj1, tj2, tj = _twice_j(j1, "j1"), _twice_j(j2, "j2"), _twice_j(j, "j")
    tm1, tm2, tm = _twice(m1, "m1"), _twice(m2, "m2"), _twice(m, "m")
    _check_projection(tj1, tm1, "m1")
    _check_projection(tj2, tm2, "m2")
    _check_projection(tj, tm, "m")
    if tm1 + tm2 != tm:
        return 0.0
    if not _triangle_ok(tj1, tj2, tj):
        return 0.0
    three = _w3j(tj1, tj2, tj, tm1, tm2, -tm)
    sign = -1.0 if ((tj1 - tj2 + tm) // 2) % 2 else 1.0
    return sign * math.sqrt(tj + 1) * three


def wigner_small_d(j, m, mp, beta: float) -> float:
    """Rotation matrix element d^j_{m,mp}(beta) = <j m| exp(-i beta J_y) |j mp>."""
    tj = _twice_j(j, "j")
    tm = _twice(m, "m")
    tmp = _twice(mp, "mp")
    _check_projection(tj, tm, "m")
    _check_projection(tj, tmp, "mp")
    kmin = max(0, (tmp - tm) // 2)
    kmax = min((tj + tmp) // 2, (tj - tm) // 2)
    c = math.cos(beta / 2)
    s = math.sin(beta / 2)
    pref = (
        _fact((tj + tm) // 2)
        * _fact((tj - tm) // 2)
        * _fact((tj + tmp) // 2)
        * _fact((tj - tmp) // 2)
    )
    total = 0.0
    for k in range(kmin, kmax + 1):
        den = (
            _fact((tj + tmp) // 2 - k)
            * _fact(k)
            * _fact(k + (tm - tmp) // 2)
            * _fact((tj - tm) // 2 - k)
        )
        sign = -1.0 if (k + (tm - tmp) // 2) % 2 else 1.0
        total += sign * c ** (tj + (tmp - tm) // 2 - 2 * k) * s ** ((tm - tmp) // 2 + 2 * k) / den
    return math.sqrt(pref) * total
