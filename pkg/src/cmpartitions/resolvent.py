"""Degree-12 resolvent polynomials of A' and B over the full modular group.

Both A' and B are weight-0 level-6 functions, so the monic product of
(X - g(gamma z)) over the 12 cosets of the level-6 group inside the full
modular group has coefficients that are integer polynomials in j(z).  Those
coefficient polynomials are tabulated here in their factored shape, and
verified at runtime against the numerically expanded coset product; their
specializations at CM values of j witness that A' and B take algebraic
integer values there.
"""

from __future__ import annotations

import mpmath
from mpmath import mpc, mpf

from .evaluate import eval_Aprime, eval_B, eval_j, partition_form
from .precision import PrecisionConfig
from .quadforms import CMPoint
from .recognize import _carried_bits, orbit_product


class JPoly:
    """Dense integer polynomial in j, ascending coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        coeffs = list(coeffs)
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        self.coeffs = tuple(coeffs)

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __eq__(self, other):
        return isinstance(other, JPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other):
        if isinstance(other, int):
            other = JPoly((other,))
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return JPoly([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)
                      for i in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return JPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        if isinstance(other, int):
            other = JPoly((other,))
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return JPoly([c * other for c in self.coeffs])
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1) if self.coeffs and other.coeffs else []
        for i, ca in enumerate(self.coeffs):
            for k, cb in enumerate(other.coeffs):
                out[i + k] += ca * cb
        return JPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        result = JPoly((1,))
        for _ in range(n):
            result = result * self
        return result

    def __call__(self, x):
        if not self.coeffs:
            return 0 * x
        acc = x * 0 + self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * x + c
        return acc

    def __repr__(self):
        return f"JPoly({self.coeffs})"


def _aprime_coefficients() -> tuple[JPoly, ...]:
    """a_0..a_11 of the A' resolvent, in the factored shape of the table."""
    j = JPoly((0, 1))
    a11 = -2 * (j - 2**6 * 3**3) * (j - 2**5 * 3**3) * j
    a10 = -1 * ((j - 2**6 * 3**3) * j**2
                * (7 * 67 * j**2 - 2**6 * 3**2 * 2053 * j + 2**11 * 3**5 * 31 * 53))
    a9 = 2 * (j - 2**6 * 3**3)**2 * j**2 * (
        3**2 * j**4 - 2**3 * 6379 * j**3 + 2**6 * 3**2 * 162713 * j**2
        - 2**12 * 3**5 * 72797 * j + 2**25 * 3**12)
    a8 = 2 * (j - 2**6 * 3**3)**2 * j**3 * (
        2 * 7 * 13**2 * j**5 - 3**2 * 409 * 3373 * j**4
        + 2**7 * 3**4 * 1237 * 1973 * j**3 - 2**14 * 3**7 * 5 * 311 * 443 * j**2
        + 2**21 * 3**10 * 31 * 2897 * j - 2**31 * 3**14 * 163)
    a7 = 2**2 * (j - 2**6 * 3**3)**3 * j**4 * (
        11 * 61 * 193 * j**5 - 2**3 * 3 * 27510443 * j**4
        + 2**9 * 3**3 * 97550587 * j**3 - 2**16 * 3**6 * 11 * 2599451 * j**2
        + 2**23 * 3**9 * 5 * 739 * 1109 * j - 2**34 * 3**13 * 4691)
    a6 = 2**3 * (j - 2**6 * 3**3)**3 * j**4 * (
        2**4 * 3**2 * j**8 + 7 * 199 * 1373 * j**7
        - 2**2 * 29 * 37 * 281 * 13913 * j**6 + 2**13 * 3**3 * 7 * 233 * 143281 * j**5
        - 2**15 * 3**7 * 5 * 11 * 21117827 * j**4 + 2**23 * 3**9 * 3943 * 117577 * j**3
        - 2**31 * 3**12 * 769 * 45317 * j**2 + 2**41 * 3**16 * 7 * 15923 * j
        - 2**50 * 3**20 * 269)
    a5 = 2**4 * (j - 2**6 * 3**3)**4 * j**5 * (
        2**6 * 3**4 * 5 * j**8 - 7 * 5051 * 5939 * j**7
        + 2**3 * 3**2 * 5 * 61 * 101 * 330037 * j**6
        - 2**9 * 3**5 * 96289 * 119173 * j**5 + 2**16 * 3**9 * 17 * 77252741 * j**4
        - 2**22 * 3**11 * 11 * 71 * 523 * 4091 * j**3
        + 2**35 * 3**14 * 5 * 673 * 977 * j**2 - 2**41 * 3**18 * 79 * 1831 * j
        + 2**55 * 3**24)
    a4 = (j - 2**6 * 3**3)**4 * j**6 * (
        2**8 * 3**3 * 5 * 2003 * j**9 - 409 * 39157 * 44483 * j**8
        + 2**9 * 3 * 2092618568983 * j**7 - 2**20 * 3**4 * 98512996093 * j**6
        + 2**20 * 3**7 * 41 * 242261 * 608831 * j**5
        - 2**28 * 3**10 * 5 * 1231 * 155631757 * j**4
        + 2**32 * 3**13 * 521 * 3077579657 * j**3
        - 2**42 * 3**16 * 997 * 1607 * 16657 * j**2
        + 2**52 * 3**20 * 23 * 541 * 6863 * j - 2**63 * 3**24 * 5 * 11987)
    a3 = 2 * (j - 2**6 * 3**3)**5 * j**6 * (
        3**2 * 377732207 * j**10 - 2**6 * 5**2 * 7 * 101 * 28520381 * j**9
        + 2**11 * 11 * 337 * 17990477821 * j**8
        - 2**20 * 3**3 * 179 * 389 * 171956657 * j**7
        + 2**23 * 3**6 * 5 * 479 * 37193046587 * j**6
        - 2**30 * 3**9 * 1283 * 28703 * 758137 * j**5
        + 2**36 * 3**12 * 7 * 31 * 54791988203 * j**4
        - 2**45 * 3**15 * 19**2 * 151 * 7738067 * j**3
        + 2**55 * 3**20 * 41 * 12810583 * j**2 - 2**65 * 3**24 * 1103107 * j
        + 2**76 * 3**27 * 1447)
    a2 = 2**2 * (j - 2**6 * 3**3)**5 * j**7 * (
        42967 * 2406947 * j**11 - 2**3 * 557 * 1783 * 140768209 * j**10
        + 2**9 * 3**4 * 6205891 * 21226039 * j**9
        - 2**19 * 3**7 * 5 * 11 * 251872948013 * j**8
        + 2**24 * 3**9 * 5 * 13 * 23 * 37 * 521 * 3203149 * j**7
        - 2**29 * 3**13 * 47242981376477 * j**6
        + 2**35 * 3**16 * 227 * 112292655271 * j**5
        - 2**41 * 3**18 * 107 * 269749728667 * j**4
        + 2**54 * 3**22 * 43 * 449215127 * j**3
        - 2**61 * 3**27 * 5 * 653 * 54193 * j**2
        + 2**72 * 3**30 * 139 * 3719 * j - 2**82 * 3**35 * 139)
    a1 = 2**3 * (j - 2**6 * 3**3)**6 * j**8 * (
        1847032397279 * j**11 - 2**6 * 47 * 157 * 3691 * 11660843 * j**10
        + 2**14 * 3**4 * 383 * 25679 * 7797631 * j**9
        - 2**20 * 3**6 * 400129001343469 * j**8
        + 2**24 * 3**9 * 5 * 41 * 503 * 67307 * 267271 * j**7
        - 2**30 * 3**12 * 19 * 509 * 13597 * 11431571 * j**6
        + 2**37 * 3**15 * 31 * 3038701 * 4610147 * j**5
        - 2**43 * 3**20 * 7**2 * 41 * 73 * 2381 * 56891 * j**4
        + 2**52 * 3**21 * 5 * 139 * 9239401667 * j**3
        - 2**62 * 3**25 * 5 * 1381 * 3698087 * j**2
        + 2**73 * 3**29 * 11 * 47 * 58693 * j - 2**85 * 3**33 * 8161)
    a0 = -(2**4) * (j - 2**6 * 3**3)**6 * j**8 * (
        2**3 * 3**2 * 7**6 * j**14 - 5 * 13 * 3109 * 76441597 * j**13
        + 2**4 * 3449 * 4363 * 873750089 * j**12
        - 2**11 * 3**4 * 7 * 2087 * 57859 * 9420337 * j**11
        + 2**16 * 3**8 * 11**2 * 73 * 125183 * 10636957 * j**10
        - 2**26 * 3**9 * 691 * 14434308694753 * j**9
        + 2**31 * 3**13 * 101 * 283 * 252059913139 * j**8
        - 2**37 * 3**16 * 11 * 13 * 17 * 647 * 863 * 4253233 * j**7
        + 2**43 * 3**18 * 631819 * 16451871913 * j**6
        - 2**48 * 3**23 * 149 * 233 * 90533 * 330413 * j**5
        + 2**59 * 3**25 * 23 * 1408302006413 * j**4
        - 2**70 * 3**27 * 726838208711 * j**3
        + 2**80 * 3**32 * 7 * 263 * 337 * 1327 * j**2
        - 2**90 * 3**37 * 569731 * j + 2**100 * 3**39 * 17**3)
    return (a0, a1, a2, a3, a4, a5, a6, a7, a8, a9, a10, a11)


def _b_coefficients() -> tuple[JPoly, ...]:
    """b_0..b_11 of the B resolvent, in the factored shape of the table."""
    j = JPoly((0, 1))
    b11 = -1 * ((j - 2**6 * 3**3) * j)
    b10 = -2 * 13 * 3**2 * (j - 2**6 * 3**3) * j**2
    b9 = 2**2 * (j - 2**3 * 3**6) * (j - 2**6 * 3**3)**2 * j**2
    b8 = 3**4 * (13 * j - 2**5 * 3 * 163) * (j - 2**6 * 3**3)**2 * j**3
    b7 = 5 * 2**5 * 3**6 * (j - 2**6 * 3**3)**3 * j**4
    b6 = 2**2 * 3**3 * (j - 2**6 * 3**3)**3 * j**4 * (
        j**2 + 2**4 * 3**5 * 13 * j - 2**9 * 3**5 * 269)
    b5 = 2**5 * 3**5 * (5 * j - 2**6 * 3**4) * (j - 2**6 * 3**3)**4 * j**5
    b4 = 2**5 * 3**8 * (31 * j - 2**3 * 3**2 * 1471) * (j - 2**6 * 3**3)**4 * j**6
    b3 = 2**8 * 3**8 * (383 * j - 2**6 * 3 * 1447) * (j - 2**6 * 3**3)**5 * j**6
    b2 = 2**9 * 3**9 * (3923 * j - 2**6 * 3**5 * 139) * (j - 2**6 * 3**3)**5 * j**7
    b1 = 13 * 19 * 3**11 * 2**15 * (j - 2**6 * 3**3)**6 * j**8
    b0 = -(2**8) * 3**9 * (j - 2**6 * 3**3)**6 * j**8 * (
        j**2 - 2**7 * 3**3 * 1399 * j + 2**12 * 3**6 * 17**3)
    return (b0, b1, b2, b3, b4, b5, b6, b7, b8, b9, b10, b11)


APRIME_COEFFS = _aprime_coefficients()
B_COEFFS = _b_coefficients()

_TABLES = {"aprime": APRIME_COEFFS, "b": B_COEFFS}
_EVALUATORS = {
    "aprime": lambda desc, z, cfg: eval_Aprime(desc, z, cfg),
    "b": lambda desc, z, cfg: eval_B(desc, z, cfg),
}


def _which(name: str) -> str:
    key = name.strip().lower().replace("'", "prime")
    if key in ("aprime", "a_prime"):
        return "aprime"
    if key == "b":
        return "b"
    raise ValueError(f"unknown resolvent {name!r} (expected A' or B)")


def coset_reps(level: int = 6):
    """A complete system of 12 coset representatives of the level-6 group in
    the full modular group, grown from the identity by T/S products and kept
    pairwise inequivalent by the exact mod-6 test."""
    if level != 6:
        raise ValueError("only level 6 is supported")
    reps = []
    seen = set()
    queue = [(1, 0, 0, 1)]
    while queue and len(reps) < 12:
        mat = queue.pop(0)
        key = _coset_key(mat, level)
        if key in seen:
            continue
        seen.add(key)
        reps.append(mat)
        a, b, c, d = mat
        queue.append((a, a + b, c, c + d))  # right multiply by T
        queue.append((b, -a, d, -c))  # right multiply by S
    assert len(reps) == 12
    return reps


def _coset_key(mat, level: int):
    """Projective class of the bottom row mod level: gamma1 ~ gamma2 exactly
    when the bottom rows agree up to a unit mod level."""
    _, _, c, d = mat
    keys = []
    for u in (1, 5):  # units mod 6
        keys.append(((u * c) % level, (u * d) % level))
    return min(keys)


def coset_inequivalent(m1, m2, level: int = 6) -> bool:
    """Exact test: lower-left entry of m1 * m2^-1 nonzero mod level."""
    a1, b1, c1, d1 = m1
    a2, b2, c2, d2 = m2
    lower_left = c1 * d2 - d1 * c2
    return lower_left % level != 0


def psi_from_cosets(which: str, z: mpc, cfg: PrecisionConfig,
                    desc=None) -> list:
    """Coefficients (ascending, monic degree 12) of prod(X - g(gamma z)) over
    the coset representatives; g is level-6 invariant so each factor depends
    only on the coset."""
    key = _which(which)
    if desc is None:
        desc = partition_form()
    evaluator = _EVALUATORS[key]
    with mpmath.workprec(cfg.eval_bits):
        z = mpc(z)
        values = []
        for a, b, c, d in coset_reps():
            w = (a * z + b) / (c * z + d)
            values.append(evaluator(desc, w, cfg))
    return list(reversed(orbit_product(values, 1)))


def psi_tabulated(which: str, j_value) -> list:
    """The tabulated coefficients evaluated at a j-value (ascending, with the
    monic leading 1)."""
    table = _TABLES[_which(which)]
    with mpmath.workprec(_carried_bits([j_value]) + 32):
        out = [poly(mpc(j_value)) for poly in table]
    out.append(mpc(1))
    return out


def tabulated_deviations(which: str, z: mpc, cfg: PrecisionConfig,
                         desc=None) -> list:
    """Normalized per-coefficient deviations (ascending) between the
    numerically expanded resolvent and the tabulated polynomials at j(z)."""
    numeric = psi_from_cosets(which, z, cfg, desc)
    with mpmath.workprec(cfg.eval_bits):
        tabulated = psi_tabulated(which, eval_j(z, cfg))
        return [abs(num - tab) / (1 + abs(tab))
                for num, tab in zip(numeric, tabulated)]


def verify_tabulated(which: str, z: mpc, cfg: PrecisionConfig,
                     desc=None) -> mpf:
    """Max normalized deviation between the numerically expanded resolvent
    and the tabulated polynomials specialized at j(z)."""
    return max(tabulated_deviations(which, z, cfg, desc))


def psi_root_check(which: str, alpha: CMPoint, cfg: PrecisionConfig,
                   desc=None) -> mpf:
    """Residual of g(alpha) against its own tabulated resolvent at j(alpha):
    the numerical witness that the value is an algebraic integer."""
    key = _which(which)
    if desc is None:
        desc = partition_form()
    with mpmath.workprec(cfg.eval_bits):
        jval = eval_j(alpha.embed, cfg)
        gval = _EVALUATORS[key](desc, alpha.embed, cfg)
        coeffs = psi_tabulated(which, jval)
        total = mpc(0)
        largest = mpf(1)
        power = mpc(1)
        for c in coeffs:
            term = c * power
            total += term
            largest = max(largest, abs(term))
            power *= gval
        return abs(total) / largest
