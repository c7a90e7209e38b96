"""High-precision evaluation of eta quotients, Eisenstein series, j and the
weight -2 / weight 0 pair (F, P) with its A + B*C split, at arbitrary points
of the upper half-plane.

Every point evaluation routes through reduction into the standard fundamental
domain, where the q-series converge geometrically; values are transported
back along the exact word of T/S moves, accumulating the automorphy factor
(including the quasimodular E2 shift and the eta multiplier) step by step.
Derivatives are analytic, via theta(E2) = (E2^2 - E4)/12 and
theta(log eta) = E2/24 - numerical differentiation is demoted to a test
oracle.
"""

from __future__ import annotations

import math as _math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mpc, mpf

from .errors import NearSingularity, NotUpperHalfPlane
from .precision import PrecisionConfig
from .series import FP_E2_COMBINATION, FP_ETA_FACTORS, FP_PREFACTOR


@dataclass(frozen=True)
class ReductionWord:
    """Word in T, S carrying a point into the standard fundamental domain."""

    matrix: tuple[int, int, int, int]
    word: tuple[tuple, ...]

    def __len__(self):
        return len(self.word)


@dataclass(frozen=True)
class FormDescriptor:
    """prefactor * sum(c_d E2(d z)) / prod(eta(d z)^e_d), weight -2 shape."""

    e2_terms: tuple[tuple[int, Fraction], ...]
    eta_factors: tuple[tuple[int, int], ...]
    prefactor: Fraction
    level: int
    weight: int = -2


def partition_form() -> FormDescriptor:
    """The level-6 weight -2 form whose CM values encode partition numbers."""
    return FormDescriptor(
        e2_terms=tuple((d, Fraction(c)) for d, c in FP_E2_COMBINATION),
        eta_factors=FP_ETA_FACTORS,
        prefactor=FP_PREFACTOR,
        level=6,
    )


_S = (0, -1, 1, 0)


def _mat_mul(m1, m2):
    a, b, c, d = m1
    e, f, g, h = m2
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def _walk(z: mpc):
    """Reduce z into the fundamental domain under the ambient precision.

    Returns (z_reduced, steps) where each step is ('T', m, z_before) meaning
    z -> z + m, or ('S', None, z_before) meaning z -> -1/z.
    """
    steps = []
    for _ in range(100000):
        k = int(mpmath.nint(mpmath.re(z)))
        if k != 0:
            steps.append(("T", -k, z))
            z = z - k
        if abs(z) < 1:
            steps.append(("S", None, z))
            z = -1 / z
        else:
            return z, steps
    raise RuntimeError("fundamental domain reduction did not terminate")


def reduce_to_fundamental(z: mpc, cfg: PrecisionConfig):
    """Reduce z to the standard fundamental domain; returns (z_red, word)."""
    z = mpc(z)
    if not mpmath.im(z) > 0:
        raise NotUpperHalfPlane(f"Im(z) = {mpmath.im(z)} is not positive")
    with mpmath.workprec(cfg.eval_bits):
        z_red, steps = _walk(z)
    matrix = (1, 0, 0, 1)
    word = []
    for kind, param, _ in steps:
        if kind == "T":
            matrix = _mat_mul((1, param, 0, 1), matrix)
            word.append(("T", param))
        else:
            matrix = _mat_mul(_S, matrix)
            word.append(("S",))
    return z_red, ReductionWord(matrix=matrix, word=tuple(word))


def _nterms(bits: int, im_w) -> int:
    """Series length so the geometric tail exp(-2 pi Im(w) N) is below 2^-bits."""
    n = int(bits * _math.log(2) / (2 * _math.pi * float(im_w))) + 9
    return max(n, 4)


def _ipow(x: mpc, n: int) -> mpc:
    """x**n for n >= 0 by binary squaring: mpmath routes complex integer
    powers through log/exp, which dominates profiles at high precision."""
    if n == 0:
        return mpc(1)
    result = None
    base = x
    while n:
        if n & 1:
            result = base if result is None else result * base
        n >>= 1
        if n:
            base = base * base
    return result


_sigma_cache: dict[tuple[int, int], list[int]] = {}


def _eisenstein_coeffs(k: int, n: int) -> list[int]:
    n = ((n // 64) + 1) * 64  # bucket so the cache is reused across calls
    key = (k, n)
    cached = _sigma_cache.get(key)
    if cached is None:
        power, mult = {2: (1, -24), 4: (3, 240), 6: (5, -504)}[k]
        sig = [0] * n
        for d in range(1, n):
            dk = d ** power
            for m in range(d, n, d):
                sig[m] += dk
        cached = [1] + [mult * s for s in sig[1:]]
        _sigma_cache[key] = cached
    return cached


def _horner(coeffs, n: int, q: mpc) -> mpc:
    acc = mpc(coeffs[n - 1])
    for i in range(n - 2, -1, -1):
        acc = acc * q
        if coeffs[i]:
            acc += coeffs[i]
    return acc


def _eta_reduced(w: mpc, bits: int) -> mpc:
    """eta at a fundamental-domain point via the pentagonal product.

    Pentagonal exponents are sparse (~sqrt(n) of them), and consecutive gaps
    are at most ~2 sqrt(n), so powers of q come from a small gap table rather
    than independent exponentiations.
    """
    n = _nterms(bits, mpmath.im(w))
    q24 = mpmath.exp(mpmath.pi * mpc(0, 2) * w / 24)
    q = _ipow(q24, 24)
    terms = []  # (exponent, sign), ascending
    k = 1
    while True:
        e1 = k * (3 * k - 1) // 2
        if e1 >= n:
            break
        s = -1 if k % 2 else 1
        terms.append((e1, s))
        e2 = k * (3 * k + 1) // 2
        if e2 < n:
            terms.append((e2, s))
        k += 1
    max_gap = max((e - p for (p, _), (e, _) in zip([(0, 1)] + terms, terms)),
                  default=0)
    gap_pow = [mpc(1), q]
    while len(gap_pow) <= max_gap:
        gap_pow.append(gap_pow[-1] * q)
    total = mpc(1)
    power = mpc(1)
    prev = 0
    for e, s in terms:
        power = power * gap_pow[e - prev]
        prev = e
        total += s * power
    return q24 * total


def _pentagonal_terms(n: int, stretch: int = 1):
    """(exponent, sign) pairs of the Euler product in q^stretch, below n."""
    terms = []
    k = 1
    while True:
        e1 = stretch * (k * (3 * k - 1) // 2)
        if e1 >= n:
            break
        s = -1 if k % 2 else 1
        terms.append((e1, s))
        e2 = stretch * (k * (3 * k + 1) // 2)
        if e2 < n:
            terms.append((e2, s))
        k += 1
    return terms


def _j_reduced(w: mpc, bits: int) -> mpc:
    """j at a fundamental-domain point via the eta quotient
    u = 2^12 (eta(2w)/eta(w))^24 and the classical identity
    j = (u + 16)^3 / u.

    The fractional eta prefactors collapse to one factor of q, so a single
    exponential and two sparse pentagonal sums (sharing one table of q
    powers) give j; this is the cheap route at very high precision, where
    the dense Eisenstein series would dominate.
    """
    n = _nterms(bits, mpmath.im(w))
    q = mpmath.exp(mpmath.pi * mpc(0, 2) * w)
    t1 = _pentagonal_terms(n)
    t2 = _pentagonal_terms(n, stretch=2)
    exps = sorted({e for e, _ in t1} | {e for e, _ in t2})
    max_gap = max((b - a for a, b in zip([0] + exps, exps)), default=0)
    gap_pow = [mpc(1), q]
    while len(gap_pow) <= max_gap:
        gap_pow.append(gap_pow[-1] * q)
    powers = {}
    acc = mpc(1)
    prev = 0
    for e in exps:
        acc = acc * gap_pow[e - prev]
        powers[e] = acc
        prev = e
    p1 = mpc(1)
    for e, s in t1:
        p1 += powers[e] if s > 0 else -powers[e]
    p2 = mpc(1)
    for e, s in t2:
        p2 += powers[e] if s > 0 else -powers[e]
    u = 4096 * q * _ipow(p2 / p1, 24)
    return _ipow(u + 16, 3) / u


def _j_from_eta(z: mpc, bits: int) -> mpc:
    """j anywhere on the upper half-plane along the eta-only route (j is
    invariant under the full modular group, so no transport is needed)."""
    w, _ = _walk(mpc(z))
    return _j_reduced(w, bits)


def _eis_reduced(k: int, w: mpc, bits: int) -> mpc:
    n = _nterms(bits, mpmath.im(w))
    return _horner(_eisenstein_coeffs(k, n), n, mpmath.exp(mpmath.pi * mpc(0, 2) * w))


def _basics(z: mpc, bits: int, want: frozenset) -> dict:
    """Values of the requested basic forms at z, by reduction and transport."""
    if not mpmath.im(z) > 0:
        raise NotUpperHalfPlane(f"Im(z) = {mpmath.im(z)} is not positive")
    w, steps = _walk(mpc(z))
    vals = {}
    if "eta" in want:
        vals["eta"] = _eta_reduced(w, bits)
    for name, k in (("e2", 2), ("e4", 4), ("e6", 6)):
        if name in want:
            vals[name] = _eis_reduced(k, w, bits)
    pi = +mpmath.pi
    for kind, param, z_before in reversed(steps):
        if kind == "T":
            if "eta" in vals:
                vals["eta"] *= mpmath.exp(mpc(0, -1) * pi * param / 12)
        else:
            zb = z_before
            if "eta" in vals:
                vals["eta"] /= mpmath.sqrt(mpc(0, -1) * zb)
            zb2 = zb * zb
            if "e2" in vals:
                vals["e2"] = (vals["e2"] + 6j * zb / pi) / zb2
            if "e4" in vals:
                vals["e4"] /= zb2 * zb2
            if "e6" in vals:
                vals["e6"] /= zb2 * zb2 * zb2
    return vals


def eval_eta(z: mpc, cfg: PrecisionConfig) -> mpc:
    with mpmath.workprec(cfg.eval_bits):
        return _basics(z, cfg.eval_bits, frozenset(("eta",)))["eta"]


def eval_eisenstein(k: int, z: mpc, cfg: PrecisionConfig) -> mpc:
    if k not in (2, 4, 6):
        raise ValueError(f"unsupported Eisenstein weight {k}")
    with mpmath.workprec(cfg.eval_bits):
        name = f"e{k}"
        return _basics(z, cfg.eval_bits, frozenset((name,)))[name]


def eval_delta(z: mpc, cfg: PrecisionConfig) -> mpc:
    with mpmath.workprec(cfg.eval_bits):
        return _ipow(_basics(z, cfg.eval_bits, frozenset(("eta",)))["eta"], 24)


def eval_j(z: mpc, cfg: PrecisionConfig) -> mpc:
    with mpmath.workprec(cfg.eval_bits):
        v = _basics(z, cfg.eval_bits, frozenset(("eta", "e4")))
        return _ipow(v["e4"], 3) / _ipow(v["eta"], 24)


def eval_theta_j(z: mpc, cfg: PrecisionConfig) -> mpc:
    """theta applied to j, analytically: -E4^2 E6 / Delta."""
    with mpmath.workprec(cfg.eval_bits):
        v = _basics(z, cfg.eval_bits, frozenset(("eta", "e4", "e6")))
        return -(v["e4"] * v["e4"]) * v["e6"] / _ipow(v["eta"], 24)


def _form_and_theta(desc: FormDescriptor, z: mpc, bits: int):
    """(F(z), thetaF(z)) from per-multiple basics, exactly by the chain rule:
    theta f(dz) = d * (theta f)(dz), theta E2 = (E2^2 - E4)/12,
    theta log eta = E2/24."""
    needed: dict[int, set] = {}
    for d, _ in desc.e2_terms:
        needed.setdefault(d, set()).update(("e2", "e4"))
    for d, _ in desc.eta_factors:
        needed.setdefault(d, set()).update(("eta", "e2"))
    at = {d: _basics(d * z, bits, frozenset(w)) for d, w in needed.items()}
    num = mpc(0)
    theta_num = mpc(0)
    for d, c in desc.e2_terms:
        cc = mpc(c.numerator) / c.denominator
        e2d, e4d = at[d]["e2"], at[d]["e4"]
        num += cc * e2d
        theta_num += cc * d * (e2d * e2d - e4d) / 12
    den = mpc(1)
    theta_log_den = mpc(0)
    for d, e in desc.eta_factors:
        den *= _ipow(at[d]["eta"], e) if e >= 0 else 1 / _ipow(at[d]["eta"], -e)
        theta_log_den += mpf(e) * d * at[d]["e2"] / 24
    pre = mpc(desc.prefactor.numerator) / desc.prefactor.denominator
    f = pre * num / den
    theta_f = pre * (theta_num - num * theta_log_den) / den
    return f, theta_f


def eval_form(desc: FormDescriptor, z: mpc, cfg: PrecisionConfig) -> mpc:
    with mpmath.workprec(cfg.eval_bits):
        return _form_and_theta(desc, z, cfg.eval_bits)[0]


def eval_theta_form(desc: FormDescriptor, z: mpc, cfg: PrecisionConfig) -> mpc:
    with mpmath.workprec(cfg.eval_bits):
        return _form_and_theta(desc, z, cfg.eval_bits)[1]


def eval_P(desc: FormDescriptor, z: mpc, cfg: PrecisionConfig) -> mpc:
    """The weight-0 completion -thetaF - F/(2 pi Im z)."""
    with mpmath.workprec(cfg.eval_bits):
        f, theta_f = _form_and_theta(desc, z, cfg.eval_bits)
        return -theta_f - f / (2 * mpmath.pi * mpmath.im(z))


def _singularity_guard(cfg: PrecisionConfig, **values):
    threshold = mpf(2) ** (-(cfg.working_bits // 4))
    for name, v in values.items():
        if abs(v) < threshold:
            raise NearSingularity(f"|{name}| = {mpmath.nstr(abs(v), 5)} below guard")


def _abc_pieces(desc: FormDescriptor, z: mpc, cfg: PrecisionConfig, bits: int):
    f, theta_f = _form_and_theta(desc, z, bits)
    v = _basics(z, bits, frozenset(("eta", "e2", "e4", "e6")))
    jval = _ipow(v["e4"], 3) / _ipow(v["eta"], 24)
    _singularity_guard(cfg, j=jval, j_1728=jval - 1728, e4=v["e4"], e6=v["e6"])
    return f, theta_f, v, jval


def eval_A(desc: FormDescriptor, z: mpc, cfg: PrecisionConfig) -> mpc:
    with mpmath.workprec(cfg.eval_bits):
        f, theta_f, v, jval = _abc_pieces(desc, z, cfg, cfg.eval_bits)
        return (-theta_f - f * v["e2"] / 6
                + f * v["e6"] * (7 * jval - 6912) / (6 * v["e4"] * (jval - 1728)))


def eval_B(desc: FormDescriptor, z: mpc, cfg: PrecisionConfig) -> mpc:
    with mpmath.workprec(cfg.eval_bits):
        f, _, v, jval = _abc_pieces(desc, z, cfg, cfg.eval_bits)
        return f * v["e6"] * jval / v["e4"]


def eval_C(z: mpc, cfg: PrecisionConfig) -> mpc:
    """E4/(6 E6 j) * (E2 - 3/(pi y)) - (7j - 6912)/(6 j (j - 1728)); level-1
    invariant, so the value at a CM point only depends on its class."""
    with mpmath.workprec(cfg.eval_bits):
        v = _basics(z, cfg.eval_bits, frozenset(("eta", "e2", "e4", "e6")))
        jval = _ipow(v["e4"], 3) / _ipow(v["eta"], 24)
        _singularity_guard(cfg, j=jval, j_1728=jval - 1728, e4=v["e4"], e6=v["e6"])
        e2star = v["e2"] - 3 / (mpmath.pi * mpmath.im(mpc(z)))
        return (v["e4"] * e2star / (6 * v["e6"] * jval)
                - (7 * jval - 6912) / (6 * jval * (jval - 1728)))


def eval_Aprime(desc: FormDescriptor, z: mpc, cfg: PrecisionConfig) -> mpc:
    """A * j * (j - 1728), regular at CM points of the discriminants in use."""
    with mpmath.workprec(cfg.eval_bits):
        f, theta_f, v, jval = _abc_pieces(desc, z, cfg, cfg.eval_bits)
        a = (-theta_f - f * v["e2"] / 6
             + f * v["e6"] * (7 * jval - 6912) / (6 * v["e4"] * (jval - 1728)))
        return a * jval * (jval - 1728)


ATKIN_LEHNER_MATRICES = {2: (2, -1, 6, -2), 3: (3, 1, 6, 3), 6: (0, -1, 6, 0)}


@dataclass(frozen=True)
class ALCheck:
    deviation: mpf
    sign: int


def al_deviation(fn, d: int, z: mpc, cfg: PrecisionConfig) -> ALCheck:
    """Deviation of fn from being a weight -2 eigenfunction of the level-6
    Atkin-Lehner involution W_d, minimized over both signs."""
    p, q, r, s = ATKIN_LEHNER_MATRICES[d]
    with mpmath.workprec(cfg.eval_bits):
        z = mpc(z)
        wz = (p * z + q) / (r * z + s)
        fw = fn(wz)
        rz = r * z + s
        base = d / (rz * rz) * fn(z)
        scale = 1 + abs(base)
        dev_plus = abs(fw - base) / scale
        dev_minus = abs(fw + base) / scale
    if dev_plus <= dev_minus:
        return ALCheck(deviation=dev_plus, sign=1)
    return ALCheck(deviation=dev_minus, sign=-1)


def atkin_lehner_check(desc: FormDescriptor, d: int, z: mpc,
                       cfg: PrecisionConfig) -> ALCheck:
    if d not in ATKIN_LEHNER_MATRICES:
        raise ValueError(f"d = {d} is not an exact divisor of level 6")
    return al_deviation(lambda w: eval_form(desc, w, cfg), d, z, cfg)
