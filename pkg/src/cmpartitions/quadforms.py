"""Binary quadratic forms, class representatives and their CM points.

A form (a, b, c) means a x^2 + b x y + c y^2, always positive definite here.
The level-6 representative sets pair each discriminant 1 - 24n with one form
per orbit of forms having 6 | a and b = 1 (mod 12) under the congruence group
of level 6.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mpc

from .precision import PrecisionConfig

IDENTITY = (1, 0, 0, 1)


@dataclass(frozen=True, order=True)
class QuadForm:
    a: int
    b: int
    c: int

    def __post_init__(self):
        if self.a <= 0 or self.discriminant() >= 0:
            raise ValueError(f"form {self} is not positive definite")

    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def content(self) -> int:
        return math.gcd(math.gcd(self.a, self.b), self.c)

    def transform(self, m) -> "QuadForm":
        """Right action by an integer matrix (p, q, r, s): substitute
        (x, y) -> (p x + q y, r x + s y)."""
        p, q, r, s = m
        a, b, c = self.a, self.b, self.c
        return QuadForm(a * p * p + b * p * r + c * r * r,
                        2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s,
                        a * q * q + b * q * s + c * s * s)

    def is_reduced(self) -> bool:
        a, b, c = self.a, self.b, self.c
        if not (abs(b) <= a <= c):
            return False
        if (abs(b) == a or a == c) and b < 0:
            return False
        return True


def _mat_mul(m1, m2):
    a, b, c, d = m1
    e, f, g, h = m2
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def _mat_inv(m):
    a, b, c, d = m
    det = a * d - b * c
    if det != 1:
        raise ValueError("only determinant-1 matrices can be inverted here")
    return (d, -b, -c, a)


def reduce_with_matrix(q: QuadForm):
    """Reduce q under the full modular group, returning (reduced, g) with
    q.transform(g) == reduced."""
    g = IDENTITY
    cur = q
    while True:
        a, b, c = cur.a, cur.b, cur.c
        # normalize: bring b into (-a, a]
        if not (-a < b <= a):
            k = (a - b) // (2 * a)  # b + 2ak in (-a, a]
            t = (1, k, 0, 1)
            cur, g = cur.transform(t), _mat_mul(g, t)
            continue
        if cur.a > cur.c:
            s = (0, -1, 1, 0)
            cur, g = cur.transform(s), _mat_mul(g, s)
            continue
        if cur.a == cur.c and cur.b < 0:
            s = (0, -1, 1, 0)
            cur, g = cur.transform(s), _mat_mul(g, s)
            continue
        if cur.b == -cur.a:
            t = (1, 1, 0, 1)
            cur, g = cur.transform(t), _mat_mul(g, t)
            continue
        return cur, g


def reduced_forms(d: int) -> list[QuadForm]:
    """All primitive reduced forms of discriminant d < 0; the count is the
    class number h(d)."""
    if d >= 0 or d % 4 not in (0, 1):
        raise ValueError(f"{d} is not a negative discriminant")
    forms = []
    b = d % 2
    while 3 * b * b <= -d:
        q, r = divmod(b * b - d, 4)
        assert r == 0
        a = max(b, 1)
        while a * a <= q:
            if q % a == 0:
                c = q // a
                if math.gcd(math.gcd(a, b), c) == 1:
                    forms.append(QuadForm(a, b, c))
                    if 0 < b < a < c:
                        forms.append(QuadForm(a, -b, c))
            a += 1
        b += 2
    return sorted(forms, key=lambda f: (f.a, abs(f.b), -f.b))


def transporter(q1: QuadForm, q2: QuadForm):
    """An SL2(Z) matrix g with q1.transform(g) == q2, or None.

    For discriminants below -4 the stabilizer of a form is {+-identity}, so
    g is unique up to sign and the result is canonical.
    """
    if q1.discriminant() != q2.discriminant():
        return None
    r1, g1 = reduce_with_matrix(q1)
    r2, g2 = reduce_with_matrix(q2)
    if r1 != r2:
        return None
    return _mat_mul(g1, _mat_inv(g2))


def gamma0_equivalent(q1: QuadForm, q2: QuadForm, level: int = 6) -> bool:
    """Whether some matrix in Gamma_0(level) carries q1 to q2.

    Decided exactly: the transporter between the forms is unique up to sign
    (discriminant < -4), and both signs share the same lower-left entry mod
    level, so a single congruence settles membership.
    """
    if q1.discriminant() >= -4:
        raise ValueError("equivalence test requires discriminant < -4")
    g = transporter(q1, q2)
    return g is not None and g[2] % level == 0


def enumerate_qn(n: int) -> list[QuadForm]:
    """One representative per level-6 class of discriminant 1 - 24n forms with
    6 | a, a > 0, b = 1 (mod 12).

    All candidates with a <= 4|D| are enumerated (b scanned over one full
    translation period per a), bucketed by exact equivalence and the member
    with smallest (a, |b|, b < 0) kept.  Imprimitive candidates are excluded.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    d = 1 - 24 * n
    a_max = 4 * (-d)
    candidates = []
    for a in range(6, a_max + 1, 6):
        # translation z -> z+1 shifts b by 2a and 12 | 2a, so one period
        # of b mod 2a meets every translate class exactly once
        b = 1 - 12 * (a // 12)  # smallest b = 1 (mod 12) with b > -a
        while b <= a:
            num = b * b - d
            if num % (4 * a) == 0:
                form = QuadForm(a, b, num // (4 * a))
                if form.content() == 1:
                    candidates.append(form)
            b += 12
    candidates.sort(key=lambda f: (f.a, abs(f.b), -f.b))
    # bucket by the full-group reduced form first: cheap complete invariant,
    # then split buckets by the exact level-6 test
    buckets: dict[QuadForm, list[QuadForm]] = {}
    for form in candidates:
        red, _ = reduce_with_matrix(form)
        cls = buckets.setdefault(red, [])
        if not any(gamma0_equivalent(rep, form) for rep in cls):
            cls.append(form)
    reps = [rep for cls in buckets.values() for rep in cls]
    return sorted(reps, key=lambda f: (f.a, abs(f.b), -f.b))


@dataclass(frozen=True)
class QuadFieldElem:
    """Exact element x + y*sqrt(d) of an imaginary quadratic field (d < 0)."""

    d: int
    x: Fraction
    y: Fraction

    def moebius(self, m) -> "QuadFieldElem":
        """Image under an integer matrix (p, q, r, s) acting as a fractional
        linear map; requires a nonzero denominator."""
        p, q, r, s = m
        # (p*self + q) / (r*self + s), using (u + v sqrt(d))^-1 conjugation
        nx, ny = p * self.x + q, p * self.y
        dx, dy = r * self.x + s, r * self.y
        norm = dx * dx - dy * dy * self.d
        if norm == 0:
            raise ZeroDivisionError("Moebius denominator vanishes")
        return QuadFieldElem(self.d,
                             (nx * dx - ny * dy * self.d) / norm,
                             (ny * dx - nx * dy) / norm)

    def embed(self, cfg: PrecisionConfig) -> mpc:
        """Complex embedding with sqrt(d) -> i sqrt(|d|), at working precision."""
        with mpmath.workprec(cfg.eval_bits):
            root = mpmath.sqrt(mpmath.mpf(-self.d))
            return mpc(_frac_to_mpf(self.x), _frac_to_mpf(self.y) * root)


def _frac_to_mpf(fr: Fraction):
    return mpmath.mpf(fr.numerator) / fr.denominator


@dataclass(frozen=True)
class CMPoint:
    """The root of Q(x, 1) = 0 in the upper half-plane, exactly and embedded."""

    form: QuadForm
    exact: QuadFieldElem
    embed: mpc

    @property
    def discriminant(self) -> int:
        return self.form.discriminant()


def cm_point(q: QuadForm, cfg: PrecisionConfig) -> CMPoint:
    """CM point (-b + sqrt(D)) / (2a) of a positive definite form."""
    d = q.discriminant()
    exact = QuadFieldElem(d, Fraction(-q.b, 2 * q.a), Fraction(1, 2 * q.a))
    return CMPoint(form=q, exact=exact, embed=exact.embed(cfg))
