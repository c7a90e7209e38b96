"""Exact formal Laurent series in q over arbitrary-precision rationals.

Coefficients are ints or fractions.Fraction, never floats: the whole point of
this module is integrality checking, which rounding would beg.  A series knows
its truncation modulus ``order``: coefficients are valid for every exponent
strictly below it, and arithmetic never silently extends validity.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import FractionalPower, ZeroLeadingCoefficient


def _norm_coeff(c):
    """Keep exact coefficients as plain ints whenever possible (much faster)."""
    if isinstance(c, Fraction):
        if c.denominator == 1:
            return int(c)
        return c
    if isinstance(c, int):
        return c
    raise TypeError(f"coefficient must be int or Fraction, got {type(c)!r}")


def _is_integer(c) -> bool:
    return isinstance(c, int) or c.denominator == 1


class FormalSeries:
    """Truncated Laurent series sum_{e >= start} coeffs[e-start] * q^e + O(q^order)."""

    __slots__ = ("start", "coeffs", "order")

    def __init__(self, start: int, coeffs: Sequence, order: int | None = None):
        coeffs = [_norm_coeff(c) for c in coeffs]
        if order is None:
            order = start + len(coeffs)
        if start + len(coeffs) > order:
            # zero entries beyond the stated validity carry no information
            keep = max(0, order - start)
            if any(c != 0 for c in coeffs[keep:]):
                raise ValueError("nonzero coefficient beyond the truncation order")
            coeffs = coeffs[:keep]
        # pad implicit zeros up to the stated order, then strip leading zeros
        coeffs.extend([0] * (order - start - len(coeffs)))
        lead = 0
        while lead < len(coeffs) and coeffs[lead] == 0:
            lead += 1
        self.start = start + lead if coeffs[lead:] else order
        self.coeffs = tuple(coeffs[lead:])
        self.order = order

    @classmethod
    def zero(cls, order: int) -> "FormalSeries":
        return cls(order, [], order)

    @classmethod
    def constant(cls, value, order: int) -> "FormalSeries":
        return cls(0, [value], order)

    @classmethod
    def monomial(cls, exponent: int, order: int, value=1) -> "FormalSeries":
        return cls(exponent, [value], order)

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, exponent: int):
        """Coefficient of q^exponent; exponent must lie below the valid order."""
        if exponent >= self.order:
            raise IndexError(f"exponent {exponent} beyond valid order {self.order}")
        i = exponent - self.start
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0

    def truncate(self, order: int) -> "FormalSeries":
        if order > self.order:
            raise ValueError("cannot extend validity by truncation")
        return FormalSeries(self.start, self.coeffs[: max(0, order - self.start)], order)

    def __eq__(self, other) -> bool:
        return (isinstance(other, FormalSeries) and self.start == other.start
                and self.order == other.order and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.start, self.coeffs, self.order))

    def __neg__(self) -> "FormalSeries":
        return FormalSeries(self.start, [-c for c in self.coeffs], self.order)

    def __add__(self, other) -> "FormalSeries":
        if not isinstance(other, FormalSeries):
            other = FormalSeries.constant(other, self.order)
        order = min(self.order, other.order)
        if self.is_zero():
            return other.truncate(order)
        if other.is_zero():
            return self.truncate(order)
        start = min(self.start, other.start)
        out = [0] * (order - start)
        for src in (self, other):
            for i, c in enumerate(src.coeffs):
                e = src.start + i
                if e < order:
                    out[e - start] += c
        return FormalSeries(start, out, order)

    __radd__ = __add__

    def __sub__(self, other) -> "FormalSeries":
        if not isinstance(other, FormalSeries):
            other = FormalSeries.constant(other, self.order)
        return self + (-other)

    def __rsub__(self, other) -> "FormalSeries":
        return (-self) + other

    def __mul__(self, other) -> "FormalSeries":
        if not isinstance(other, FormalSeries):
            return FormalSeries(self.start, [c * other for c in self.coeffs], self.order)
        if self.is_zero() or other.is_zero():
            return FormalSeries.zero(min(self.order + other.start, other.order + self.start))
        # validity of a product: exponent e is complete iff every split
        # i + j = e with i >= a.start, j >= b.start has both factors known
        order = min(self.order + other.start, other.order + self.start)
        start = self.start + other.start
        out = [0] * (order - start)
        bc = other.coeffs
        for i, ca in enumerate(self.coeffs):
            if ca == 0:
                continue
            base = self.start + i + other.start - start
            top = min(len(bc), order - start - base)
            for jj in range(top):
                cb = bc[jj]
                if cb:
                    out[base + jj] += ca * cb
        return FormalSeries(start, out, order)

    __rmul__ = __mul__

    def inverse(self) -> "FormalSeries":
        """Multiplicative inverse; requires a nonzero leading coefficient."""
        if self.is_zero():
            raise ZeroLeadingCoefficient("cannot invert the zero series")
        lead = self.coeffs[0]
        n = self.order - self.start  # number of valid unit-part terms
        a = self.coeffs
        unit_lead = lead == 1 or lead == -1  # fast path: no Fraction churn
        inv_lead = lead if unit_lead else Fraction(1) / Fraction(lead)
        b = [0] * n
        b[0] = _norm_coeff(Fraction(inv_lead)) if not unit_lead else lead
        for k in range(1, n):
            acc = 0
            for i in range(1, min(k, len(a) - 1) + 1):
                if a[i]:
                    acc += a[i] * b[k - i]
            if acc:
                b[k] = -acc * lead if unit_lead else _norm_coeff(-Fraction(acc) * inv_lead)
        return FormalSeries(-self.start, b, n - self.start)

    def __pow__(self, n: int) -> "FormalSeries":
        if not isinstance(n, int):
            raise TypeError("series powers must be integers")
        if n < 0:
            return self.inverse() ** (-n)
        # binary powering; validity tracked by the multiplications themselves
        base = self
        result = None
        m = n
        while m:
            if m & 1:
                result = base if result is None else result * base
            m >>= 1
            if m:
                base = base * base
        if result is None:  # n == 0
            return FormalSeries.constant(1, self.order - self.start)
        return result

    def rescale_exponents(self, d: int) -> "FormalSeries":
        """Substitute q -> q^d (d >= 1)."""
        if d < 1:
            raise ValueError("substitution degree must be >= 1")
        out = [0] * ((len(self.coeffs) - 1) * d + 1) if self.coeffs else []
        for i, c in enumerate(self.coeffs):
            out[i * d] = c
        return FormalSeries(self.start * d, out, self.order * d)

    def theta(self) -> "FormalSeries":
        """Apply q d/dq: the coefficient of q^m becomes m times itself."""
        return FormalSeries(self.start,
                            [(self.start + i) * c for i, c in enumerate(self.coeffs)],
                            self.order)

    def all_integral(self, through: int | None = None) -> bool:
        return self.first_nonintegral(through) is None

    def first_nonintegral(self, through: int | None = None):
        """Smallest exponent < through (default: order) with a non-integer coefficient."""
        top = self.order if through is None else min(through, self.order)
        for i, c in enumerate(self.coeffs):
            e = self.start + i
            if e >= top:
                break
            if not _is_integer(c):
                return e
        return None

    def to_json_dict(self) -> dict:
        return {"start_exp": self.start, "order": self.order,
                "coeffs": [str(Fraction(c)) for c in self.coeffs]}

    @classmethod
    def from_json_dict(cls, d: dict) -> "FormalSeries":
        return cls(d["start_exp"], [Fraction(s) for s in d["coeffs"]], d["order"])

    def __repr__(self):
        shown = ", ".join(f"q^{self.start + i}: {c}" for i, c in enumerate(self.coeffs[:4]))
        more = "..." if len(self.coeffs) > 4 else ""
        return f"FormalSeries({shown}{more} + O(q^{self.order}))"


@dataclass(frozen=True)
class EtaQuotientDescriptor:
    """prefactor * prod eta(d z)^e over the listed (d, e) factors.

    The fractional power sum(d*e)/24 is tracked explicitly; a series expansion
    exists only when it is an integer.
    """

    factors: tuple[tuple[int, int], ...]
    prefactor: Fraction = Fraction(1)

    def weight_shift_numerator(self) -> int:
        return sum(d * e for d, e in self.factors)

    def weight(self) -> Fraction:
        return Fraction(sum(e for _, e in self.factors), 2)


def _divisor_power_sums(k: int, n: int) -> list[int]:
    """sigma_k(m) for m = 0..n (index 0 unused) via a divisor sieve."""
    sig = [0] * (n + 1)
    for d in range(1, n + 1):
        dk = d ** k
        for m in range(d, n + 1, d):
            sig[m] += dk
    return sig


def eisenstein_series(k: int, order: int) -> FormalSeries:
    """E_2, E_4 or E_6 as an exact integer series to the given order."""
    if order < 1:
        raise ValueError("order must be >= 1")
    if k == 2:
        mult, power = -24, 1
    elif k == 4:
        mult, power = 240, 3
    elif k == 6:
        mult, power = -504, 5
    else:
        raise ValueError(f"unsupported Eisenstein weight {k}")
    sig = _divisor_power_sums(power, order - 1)
    coeffs = [1] + [mult * sig[m] for m in range(1, order)]
    return FormalSeries(0, coeffs, order)


def euler_product_series(order: int) -> FormalSeries:
    """prod_{n>=1} (1 - q^n) by the pentagonal number theorem."""
    coeffs = [0] * max(order, 1)
    if order > 0:
        coeffs[0] = 1
    k = 1
    while True:
        e1 = k * (3 * k - 1) // 2
        e2 = k * (3 * k + 1) // 2
        if e1 >= order and e2 >= order:
            break
        s = -1 if k % 2 else 1
        if e1 < order:
            coeffs[e1] = s
        if e2 < order:
            coeffs[e2] = s
        k += 1
    return FormalSeries(0, coeffs, order)


def eta_quotient_series(desc: EtaQuotientDescriptor, order: int) -> FormalSeries:
    """Exact expansion of an eta quotient whose weight shift sum(d*e)/24 is integral."""
    num = desc.weight_shift_numerator()
    if num % 24 != 0:
        raise FractionalPower(f"weight-shift exponent {num}/24 is not an integer")
    shift = num // 24
    unit_order = order - shift
    if unit_order < 1:
        raise ValueError("order too small for this eta quotient")
    result = FormalSeries.constant(1, unit_order)
    for d, e in desc.factors:
        p = euler_product_series(unit_order).rescale_exponents(d).truncate(unit_order)
        result = result * (p ** e)
    result = result * desc.prefactor
    return FormalSeries(result.start + shift, result.coeffs, result.order + shift)


FP_ETA_FACTORS = ((1, 2), (2, 2), (3, 2), (6, 2))
FP_E2_COMBINATION = ((1, 1), (2, -2), (3, -3), (6, 6))
FP_PREFACTOR = Fraction(1, 2)


def fp_series(order: int) -> FormalSeries:
    """The weight -2 eta-quotient form whose CM values encode partition numbers.

    Exact expansion of (E2(z) - 2E2(2z) - 3E2(3z) + 6E2(6z)) / 2 divided by
    eta(z)^2 eta(2z)^2 eta(3z)^2 eta(6z)^2; starts q^-1 - 10 - 29q - ...
    """
    if order < 2:
        raise ValueError("order must be >= 2")
    margin = order + 4
    e2 = eisenstein_series(2, margin)
    num = FormalSeries.zero(margin)
    for d, c in FP_E2_COMBINATION:
        num = num + e2.rescale_exponents(d).truncate(margin) * c
    num = num * FP_PREFACTOR
    den = eta_quotient_series(EtaQuotientDescriptor(FP_ETA_FACTORS), margin)
    return (num * den.inverse()).truncate(order)


def delta_series(order: int) -> FormalSeries:
    """The discriminant cusp form as eta(z)^24, exact integer coefficients."""
    return eta_quotient_series(EtaQuotientDescriptor(((1, 24),)), order)


def j_series(order: int) -> FormalSeries:
    """The modular j-function E4^3 / Delta as an exact integer series."""
    if order < 2:
        raise ValueError("order must be >= 2")
    margin = order + 4
    e4 = eisenstein_series(4, margin)
    return ((e4 ** 3) * delta_series(margin).inverse()).truncate(order)


@dataclass(frozen=True)
class HypothesisReport:
    f_integral: bool
    companion_integral: bool
    first_failure: int | None


def hypothesis_check(f: FormalSeries, order: int) -> HypothesisReport:
    """Integrality at infinity of F and of theta(F) + F*(E2*E4 - E6)/(6*E4).

    Both series are computed exactly over the rationals through exponents
    below ``order``; division by 6*E4 is performed on rationals so that
    integrality is a post-hoc finding, never an assumption.
    """
    margin = order - min(0, f.start) + 4
    e2 = eisenstein_series(2, margin)
    e4 = eisenstein_series(4, margin)
    e6 = eisenstein_series(6, margin)
    multiplier = (e2 * e4 - e6) * e4.inverse() * Fraction(1, 6)
    companion = f.theta() + f * multiplier
    f_fail = f.first_nonintegral(order)
    c_fail = companion.first_nonintegral(order)
    failures = [e for e in (f_fail, c_fail) if e is not None]
    return HypothesisReport(f_integral=f_fail is None,
                            companion_integral=c_fail is None,
                            first_failure=min(failures) if failures else None)
