"""Exact arithmetic for Lebesgue exponent tuples (q, p, r, a).

All admissibility / endpoint decisions are measure-zero conditions on the
exponents, so everything in this module runs on exact rationals with an
explicit +infinity symbol.  Floating point is deliberately absent.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union


class MalformedExponentError(ValueError):
    """Raised for non-positive or otherwise ill-formed exponent inputs."""


class ExponentRangeError(ValueError):
    """Raised when a parameter falls outside its admitted open range."""


RationalLike = Union[int, Fraction, str, "ExtRational"]


class ExtRational:
    """A strictly positive exact rational, or +infinity.

    Arithmetic goes through reciprocals where the infinite value matters:
    ``1/inf == 0`` exactly.  Instances are immutable and hashable.
    """

    __slots__ = ("_frac",)

    def __init__(self, value: RationalLike, denominator: int | None = None):
        if isinstance(value, ExtRational):
            self._frac = value._frac
            return
        if isinstance(value, str):
            s = value.strip().lower()
            if s in ("inf", "infinity", "oo"):
                self._frac = None
                return
            value = Fraction(s)
        if denominator is not None:
            value = Fraction(value, denominator)
        frac = Fraction(value)
        if frac <= 0:
            raise MalformedExponentError(f"exponent must be positive, got {frac}")
        self._frac = frac

    @classmethod
    def infinity(cls) -> "ExtRational":
        obj = object.__new__(cls)
        obj._frac = None
        return obj

    @classmethod
    def from_reciprocal(cls, inv: Fraction) -> "ExtRational":
        """Build from 1/x; inv == 0 yields +infinity."""
        if inv < 0:
            raise MalformedExponentError(f"reciprocal must be >= 0, got {inv}")
        if inv == 0:
            return cls.infinity()
        return cls(1 / Fraction(inv))

    @property
    def is_infinite(self) -> bool:
        return self._frac is None

    @property
    def reciprocal(self) -> Fraction:
        """1/x as an exact Fraction; 0 when x is infinite."""
        return Fraction(0) if self._frac is None else 1 / self._frac

    @property
    def fraction(self) -> Fraction:
        if self._frac is None:
            raise MalformedExponentError("infinite exponent has no finite value")
        return self._frac

    def __float__(self) -> float:
        return float("inf") if self._frac is None else float(self._frac)

    def __truediv__(self, other: RationalLike) -> "ExtRational":
        lam = ExtRational(other)
        if lam.is_infinite:
            raise MalformedExponentError("cannot divide by an infinite scale")
        if self._frac is None:
            return ExtRational.infinity()
        return ExtRational(self._frac / lam.fraction)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExtRational):
            try:
                other = ExtRational(other)
            except (ValueError, TypeError):
                return NotImplemented
        return self._frac == other._frac

    def __hash__(self):
        return hash(self._frac)

    def _cmp_key(self):
        # +infinity sorts above every rational
        return (1,) if self._frac is None else (0, self._frac)

    def __lt__(self, other: "ExtRational") -> bool:
        return self._cmp_key() < ExtRational(other)._cmp_key()

    def __le__(self, other: "ExtRational") -> bool:
        return self._cmp_key() <= ExtRational(other)._cmp_key()

    def __gt__(self, other: "ExtRational") -> bool:
        return ExtRational(other)._cmp_key() < self._cmp_key()

    def __ge__(self, other: "ExtRational") -> bool:
        return ExtRational(other)._cmp_key() <= self._cmp_key()

    def __repr__(self) -> str:
        return f"ExtRational({str(self)!r})"

    def __str__(self) -> str:
        return "inf" if self._frac is None else str(self._frac)


INF = ExtRational.infinity()


def conjugate(x: ExtRational) -> ExtRational:
    """Hoelder conjugate: 1/x + 1/x' = 1.  Requires x >= 1."""
    x = ExtRational(x)
    if x < ExtRational(1):
        raise MalformedExponentError(f"conjugate needs exponent >= 1, got {x}")
    return ExtRational.from_reciprocal(1 - x.reciprocal)


@dataclass(frozen=True)
class ExponentTuple:
    """The quadruple (q, p, r, a) of mixed-norm Lebesgue exponents."""

    q: ExtRational
    p: ExtRational
    r: ExtRational
    a: ExtRational

    def __post_init__(self):
        for name in ("q", "p", "r", "a"):
            val = ExtRational(getattr(self, name))
            if val < ExtRational(1):
                raise MalformedExponentError(f"{name} = {val} is < 1")
            object.__setattr__(self, name, val)

    def __str__(self) -> str:
        return f"({self.q}, {self.p}, {self.r}, {self.a})"


# Identifiers for the individual admissibility conditions.
COND_SCALING_QRP = "2/q = d(1/r - 1/p)"
COND_SCALING_A = "1/a = (1/r + 1/p)/2"
COND_Q_GT_A = "q > a"
COND_P_GE_A = "p >= a"


@dataclass(frozen=True)
class AdmissibilityVerdict:
    status: str  # admissible-nonendpoint | endpoint | inadmissible
    violated: tuple[str, ...] = ()

    @property
    def is_admissible(self) -> bool:
        return self.status == "admissible-nonendpoint"


def check_admissible(E: ExponentTuple, d: int) -> AdmissibilityVerdict:
    """Classify an exponent tuple against the scaling conditions.

    Exact rational comparison throughout; the endpoint is the boundary
    q = a with both scaling relations and p >= a intact.
    """
    if d < 1 or int(d) != d:
        raise MalformedExponentError(f"dimension must be a positive integer, got {d}")
    two_over_q = 2 * E.q.reciprocal
    scaling_qrp = two_over_q == d * (E.r.reciprocal - E.p.reciprocal)
    scaling_a = E.a.reciprocal == Fraction(1, 2) * (E.r.reciprocal + E.p.reciprocal)
    q_gt_a = E.q > E.a
    p_ge_a = E.p >= E.a

    violated = []
    if not scaling_qrp:
        violated.append(COND_SCALING_QRP)
    if not scaling_a:
        violated.append(COND_SCALING_A)
    if not p_ge_a:
        violated.append(COND_P_GE_A)

    if scaling_qrp and scaling_a and p_ge_a:
        if q_gt_a:
            return AdmissibilityVerdict("admissible-nonendpoint")
        if E.q == E.a:
            return AdmissibilityVerdict("endpoint")
        violated.append(COND_Q_GT_A)
    elif not q_gt_a:
        violated.append(COND_Q_GT_A)
    return AdmissibilityVerdict("inadmissible", tuple(violated))


def scale(E: ExponentTuple, lam: RationalLike) -> ExponentTuple:
    """The power-transform rescaling (q,p,r,a) -> (q,p,r,a)/lam.

    Mirrors the substitution f <-> f^lam, under which admissibility status
    is preserved.
    """
    lam = ExtRational(lam)
    if lam.is_infinite:
        raise MalformedExponentError("scale parameter must be finite")
    return ExponentTuple(E.q / lam, E.p / lam, E.r / lam, E.a / lam)


def dualize(E: ExponentTuple) -> tuple[ExtRational, ExtRational, ExtRational]:
    """Hoelder conjugates (q', p', a') of the tuple's (q, p, a)."""
    return conjugate(E.q), conjugate(E.p), conjugate(E.a)


def q_of_sigma(sigma: RationalLike, d: int) -> ExtRational:
    """Exact solution of 1/q + d/((d+1) sigma) = 1 for sigma > 1."""
    sigma = ExtRational(sigma)
    if sigma <= ExtRational(1):
        raise ExponentRangeError(f"sigma must exceed 1 (endpoint excluded), got {sigma}")
    inv_q = 1 - Fraction(d, d + 1) * sigma.reciprocal
    return ExtRational.from_reciprocal(inv_q)


def endpoint_tuple(d: int) -> ExponentTuple:
    """The L^2-data endpoint quadruple (2, 2d/(d-1), 2d/(d+1), 2).

    For d = 1 the spatial exponent is +infinity, the continuous extension
    of 2d/(d-1).
    """
    p = INF if d == 1 else ExtRational(2 * d, d - 1)
    return ExponentTuple(ExtRational(2), p, ExtRational(2 * d, d + 1), ExtRational(2))


def reduced_family_tuple(p: RationalLike, d: int) -> ExponentTuple:
    """The r = 1 reduced tuple determined by p.

    Solves 2/q = d(1 - 1/p) and 1/a = (1 + 1/p)/2 exactly.  Non-endpoint
    (q > a) iff p < (d+1)/(d-1) for d >= 2; every p > 1 works for d = 1.
    """
    p = ExtRational(p)
    if p <= ExtRational(1):
        raise ExponentRangeError(f"need p > 1 in the reduced family, got {p}")
    q = ExtRational.from_reciprocal(Fraction(d, 2) * (1 - p.reciprocal))
    a = ExtRational.from_reciprocal(Fraction(1, 2) * (1 + p.reciprocal))
    return ExponentTuple(q, p, ExtRational(1), a)
