"""Turning multisets of high-precision CM values into exact integers.

Integer recognition is plain nearest-integer rounding under the adaptive
precision ladder: every target here is a rational integer (orbit products and
traces), so rounding plus precision doubling is complete, and lattice-based
relation detection would be overkill.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
from mpmath import mpc, mpf

from .errors import NotNearIntegral
from .evaluate import eval_P, eval_j, partition_form
from .precision import PrecisionConfig, run_adaptive
from .quadforms import QuadForm, cm_point, enumerate_qn


def _carried_bits(values) -> int:
    """Highest mantissa precision present in the values (so later arithmetic
    never silently truncates them to the ambient context).  The values must
    not be converted first: mpc()/mpf() round to the ambient precision."""
    best = 53
    for v in values:
        for part in (getattr(v, "real", v), getattr(v, "imag", 0)):
            t = getattr(part, "_mpf_", None)
            if t is not None:
                best = max(best, int(t[3]))
    return best


def orbit_product(values, scale: int = 1):
    """Monic polynomial prod(x - scale*v) over the values, expanded in input
    order; coefficients returned leading-first."""
    if not values:
        raise ValueError("orbit product needs at least one value")
    with mpmath.workprec(_carried_bits(values) + 32):
        coeffs = [mpc(1)]
        for v in values:
            root = mpc(scale) * v
            nxt = [mpc(1)]
            for k in range(1, len(coeffs) + 1):
                prev = coeffs[k] if k < len(coeffs) else mpc(0)
                nxt.append(prev - root * coeffs[k - 1])
            coeffs = nxt
    return coeffs


def round_to_integers(poly, tol):
    """Round complex coefficients to integers; fails loudly above tolerance.

    Returns (integer coefficients, residual) where the residual is the max
    distance to the rounded value including imaginary parts.
    """
    rounded = []
    residual = mpf(0)
    with mpmath.workprec(_carried_bits(poly) + 32):
        for c in poly:
            c = mpc(c)
            n = int(mpmath.nint(mpmath.re(c)))
            residual = max(residual, abs(c - n))
            rounded.append(n)
    if not residual < tol:
        raise NotNearIntegral(
            f"residual {mpmath.nstr(residual, 5)} above tolerance {mpmath.nstr(mpf(tol), 5)}",
            residual=residual)
    return rounded, residual


_pentagonal_cache = [1]


def pentagonal_pn(n: int) -> int:
    """p(n) by Euler's pentagonal recurrence (exact, all big integers)."""
    if n < 0:
        return 0
    while len(_pentagonal_cache) <= n:
        m = len(_pentagonal_cache)
        total = 0
        k = 1
        while True:
            g1 = m - k * (3 * k - 1) // 2
            g2 = m - k * (3 * k + 1) // 2
            if g1 < 0 and g2 < 0:
                break
            term = 0
            if g1 >= 0:
                term += _pentagonal_cache[g1]
            if g2 >= 0:
                term += _pentagonal_cache[g2]
            total += term if k % 2 else -term
            k += 1
        _pentagonal_cache.append(total)
    return _pentagonal_cache[n]


@dataclass(frozen=True)
class OrbitRecord:
    """Everything computed for one n: forms, CM values, the scaled orbit
    polynomial, the recognized p(n) and the residuals that certify it."""

    n: int
    d: int
    forms: tuple[QuadForm, ...]
    p_values: tuple[mpc, ...]
    scaled_poly: tuple[int, ...]
    pn: int
    residual: mpf
    achieved_bits: int
    sharpness_divisor: int

    def to_json_dict(self, digits: int | None = None) -> dict:
        if digits is None:
            digits = max(30, int(self.achieved_bits * 0.30103))
        return {
            "n": self.n,
            "discriminant": self.d,
            "forms": [[f.a, f.b, f.c] for f in self.forms],
            "p_values": [[mpmath.nstr(mpmath.re(v), digits),
                          mpmath.nstr(mpmath.im(v), digits)] for v in self.p_values],
            "scaled_poly": [str(c) for c in self.scaled_poly],
            "pn": str(self.pn),
            "residual": mpmath.nstr(self.residual, 10),
            "achieved_bits": self.achieved_bits,
            "sharpness_divisor": self.sharpness_divisor,
        }


def _divisors_desc(m: int) -> list[int]:
    divs = set()
    for i in range(1, int(math.isqrt(m)) + 1):
        if m % i == 0:
            divs.update((i, m // i))
    return sorted(divs, reverse=True)


def sharpness_divisor(p_values, n: int, tol) -> int:
    """Largest divisor d of 24n - 1 with prod(x - d*P) integral; 24n - 1 means
    the full-strength scaling already suffices."""
    for d in _divisors_desc(24 * n - 1):
        try:
            round_to_integers(orbit_product(p_values, d), tol)
            return d
        except NotNearIntegral:
            continue
    return 0


def compute_pn(n: int, cfg: PrecisionConfig | None = None) -> OrbitRecord:
    """Assemble the full orbit record for n under the adaptive ladder.

    The per-point values, their sum and the scaled orbit polynomial must all
    stabilize across a precision doubling before anything is rounded.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if cfg is None:
        cfg = PrecisionConfig()
    desc = partition_form()
    forms = enumerate_qn(n)
    scale = 24 * n - 1

    def task(bits):
        sub = cfg.with_bits(bits)
        ps = [eval_P(desc, cm_point(f, sub).embed, sub) for f in forms]
        poly = orbit_product(ps, scale)
        with mpmath.workprec(sub.eval_bits):
            total = mpmath.fsum(ps)
        return {"p_values": ps, "poly": poly, "total": total}

    result, achieved = run_adaptive(task, cfg)
    poly_int, poly_res = round_to_integers(result["poly"], cfg.abs_tol)
    total = result["total"]
    with mpmath.workprec(_carried_bits([total]) + 32):
        pn = int(mpmath.nint(mpmath.re(total) / scale))
        residual = max(poly_res, abs(total / scale - pn))
    if not residual < cfg.abs_tol:
        raise NotNearIntegral(
            f"p({n}) residual {mpmath.nstr(residual, 5)} above tolerance",
            residual=residual)
    sharp = sharpness_divisor(result["p_values"], n, cfg.abs_tol)
    return OrbitRecord(
        n=n, d=1 - 24 * n, forms=tuple(forms),
        p_values=tuple(result["p_values"]),
        scaled_poly=tuple(poly_int), pn=pn,
        residual=residual, achieved_bits=achieved,
        sharpness_divisor=sharp)


def norm_6unit_check(values, label: str, tol=None):
    """Round the product of a full Galois-stable multiset to an integer and
    report whether it is coprime to 6.  Returns (norm, coprime_to_6)."""
    if tol is None:
        tol = PrecisionConfig().abs_tol
    with mpmath.workprec(_carried_bits(values) + 32):
        prod = mpc(1)
        for v in values:
            prod *= mpc(v)
    try:
        (norm,), _ = round_to_integers([prod], tol)
    except NotNearIntegral as exc:
        raise NotNearIntegral(f"{label}: {exc}", residual=exc.residual) from None
    return norm, math.gcd(norm, 6) == 1


def j_norm(n: int, cfg: PrecisionConfig | None = None):
    """Product of j over the class representatives for n, rounded, with the
    coprimality-to-6 flag; runs under the adaptive ladder."""
    if cfg is None:
        cfg = PrecisionConfig()
    forms = enumerate_qn(n)

    def task(bits):
        sub = cfg.with_bits(bits)
        js = [eval_j(cm_point(f, sub).embed, sub) for f in forms]
        with mpmath.workprec(sub.eval_bits):
            prod = mpc(1)
            for v in js:
                prod *= v
        return prod

    prod, achieved = run_adaptive(task, cfg)
    norm, coprime = norm_6unit_check([prod], f"j-norm(n={n})", cfg.abs_tol)
    return norm, coprime, achieved
