"""Matrix classes of determinant m, local Taylor data of the classical
modular polynomial at (j(alpha), j(alpha)), and the modular-polynomial
expression for C.

The modular polynomial itself is never built as an exact bivariate integer
polynomial (its coefficients are enormous and nothing here needs them); only
the first- and second-order Taylor coefficients at the CM point are computed,
analytically from the product over matrix classes.  An independent
finite-difference fit over a local inversion of j provides the cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
from mpmath import mpc, mpf

from .errors import MultipleFixingClasses, NearSingularity, NoFixingClass
from .evaluate import _j_from_eta, eval_j, eval_theta_j
from .precision import PrecisionConfig, run_adaptive
from .quadforms import CMPoint, QuadFieldElem, cm_point, enumerate_qn
from .recognize import _carried_bits, norm_6unit_check


@dataclass(frozen=True)
class MatrixClass:
    """Hermite-normal-form representative (p q / 0 s) of a class of primitive
    integer matrices of determinant p*s, acting by z -> (p z + q)/s."""

    p: int
    q: int
    s: int

    def __post_init__(self):
        if self.p <= 0 or self.s <= 0 or not 0 <= self.q < max(self.s, 1):
            raise ValueError(f"not a normal form: {self}")
        if math.gcd(math.gcd(self.p, self.q), self.s) != 1:
            raise ValueError(f"imprimitive class: {self}")

    @property
    def determinant(self) -> int:
        return self.p * self.s

    def apply_exact(self, alpha: QuadFieldElem) -> QuadFieldElem:
        return alpha.moebius((self.p, self.q, 0, self.s))


def hnf_classes(m: int) -> list[MatrixClass]:
    """One normal form per class of primitive determinant-m matrices: all
    (p, q, s) with p*s = m, 0 <= q < s, gcd(p, q, s) = 1."""
    if m < 1:
        raise ValueError("determinant must be positive")
    out = []
    for s in range(1, m + 1):
        if m % s:
            continue
        p = m // s
        for q in range(s):
            if math.gcd(math.gcd(p, q), s) == 1:
                out.append(MatrixClass(p, q, s))
    return sorted(out, key=lambda c: (c.s, c.q))


def class_count(m: int) -> int:
    """m * prod(1 + 1/p) over primes p | m (the classical index formula)."""
    count = m
    rest = m
    p = 2
    while p * p <= rest:
        if rest % p == 0:
            count += count // p
            while rest % p == 0:
                rest //= p
        p += 1
    if rest > 1:
        count += count // rest
    return count


def is_special_candidate(d: int) -> bool:
    """Whether |d| = 3 k^2, the only discriminants whose CM points can be
    fixed by more than one matrix class."""
    if d >= 0:
        raise ValueError("discriminant must be negative")
    n = -d
    if n % 3:
        return False
    r = math.isqrt(n // 3)
    return r * r == n // 3


def _hnf_of(mat: tuple[int, int, int, int]) -> MatrixClass:
    """Hermite normal form of an integer matrix with positive determinant,
    under left multiplication by the modular group."""
    a, b, c, d = mat
    det = a * d - b * c
    if det <= 0:
        raise ValueError("determinant must be positive")
    if c == 0:
        g, x, y = abs(a), (1 if a > 0 else -1), 0
    else:
        g, x, y = _xgcd(a, c)
    # bottom row of the reducing matrix kills the lower-left entry
    u, v = -c // g, a // g
    p, q = g, x * b + y * d
    s = u * b + v * d  # positive: p = gcd > 0 and p*s = det > 0
    q %= s
    return MatrixClass(p, q, s)


def _xgcd(a: int, b: int):
    """(g, x, y) with g = gcd > 0 and x*a + y*b = g."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        k, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - k * x1
        y0, y1 = y1, y0 - k * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def _fixing_matrices(alpha: CMPoint, m: int):
    """All primitive integer matrices of determinant m fixing alpha exactly,
    up to sign, parametrized by u with t^2 = 4m + u^2 D."""
    a, b, c = alpha.form.a, alpha.form.b, alpha.form.c
    d = alpha.discriminant
    out = []
    u = 0
    while u * u * (-d) <= 4 * m:
        t2 = 4 * m + u * u * d
        t = math.isqrt(t2)
        if t * t == t2:
            for tt in {t, -t} if t else {0}:
                if (tt - u * b) % 2:
                    continue
                mat = ((tt - u * b) // 2, -u * c, u * a, (tt + u * b) // 2)
                if math.gcd(math.gcd(mat[0], mat[1]), math.gcd(mat[2], mat[3])) == 1:
                    out.append(mat)
        u += 1
    return out


def fixing_class(alpha: CMPoint, classes: list[MatrixClass]) -> MatrixClass:
    """The unique class whose orbit contains a matrix fixing alpha.

    The fixing matrices are constructed exactly from the form coefficients
    (no search), classified by Hermite normal form, and the fixed-point
    property is verified in exact quadratic-field arithmetic.
    """
    if not classes:
        raise ValueError("empty class list")
    m = classes[0].determinant
    found = set()
    for mat in _fixing_matrices(alpha, m):
        if alpha.exact.moebius(mat) == alpha.exact:
            found.add(_hnf_of(mat))
    if not found:
        raise NoFixingClass(f"no determinant-{m} class fixes {alpha.form}")
    if len(found) > 1:
        raise MultipleFixingClasses(
            f"{alpha.form} is special: {len(found)} fixing classes")
    rep = found.pop()
    if rep not in classes:
        raise NoFixingClass(f"fixing class {rep} missing from the class list")
    return rep


def _orbit_j_values(alpha: CMPoint, classes, cfg: PrecisionConfig):
    """(fixing class, j(alpha), theta_j-style data) for every class: exact
    image points are embedded at working precision before evaluating j."""
    fix = fixing_class(alpha, classes)
    j0 = eval_j(alpha.embed, cfg)
    images = {}
    for cl in classes:
        point = cl.apply_exact(alpha.exact).embed(cfg)
        images[cl] = point
    return fix, j0, images


def beta_product(alpha: CMPoint, classes, cfg: PrecisionConfig) -> mpc:
    """prod over non-fixing classes of (j(alpha) - j(class * alpha)).

    j is evaluated along the eta-only route here: the norm products for
    n = 3 already need >30000 working bits, where the dense Eisenstein series
    would dominate the runtime.
    """
    fix = fixing_class(alpha, classes)
    with mpmath.workprec(cfg.eval_bits):
        j0 = _j_from_eta(alpha.embed, cfg.eval_bits)
        prod = mpc(1)
        for cl in classes:
            if cl == fix:
                continue
            point = cl.apply_exact(alpha.exact).embed(cfg)
            prod *= j0 - _j_from_eta(point, cfg.eval_bits)
    return prod


@dataclass(frozen=True)
class TaylorData:
    """Local second-order data of the modular polynomial at (j0, j0)."""

    j0: mpc
    beta: mpc
    beta02: mpc
    beta11: mpc
    beta20: mpc

    def masser_c(self) -> mpc:
        with mpmath.workprec(_carried_bits([self.beta, self.beta02, self.beta11]) + 16):
            return (self.beta02 - self.beta11 + self.beta20) / self.beta


def taylor_coeffs(alpha: CMPoint, classes, cfg: PrecisionConfig) -> TaylorData:
    """Analytic first/second-order Taylor coefficients of the determinant-m
    modular polynomial about (j(alpha), j(alpha)).

    With f_i(s) = j(M_i s) and the product definition Phi(j(s), Y) =
    prod_i (Y - f_i(s)), differentiating through the local inverse of j gives

      beta    = prod_{i != fix} (j0 - f_i(alpha)),
      beta02  = beta * sum_{k != fix} 1/(j0 - f_k(alpha)),
      beta11  = -(f_fix' * beta02 + beta * sum_{k != fix} f_k'/(j0 - f_k)) / j'(alpha),

    all other terms vanishing because the factor through the fixing class is
    zero at the expansion point.  beta20 = beta02 by the symmetry of the
    polynomial; the finite-difference fit checks that independently.
    """
    if len(classes) < 2:
        raise ValueError("need a non-trivial class list (determinant > 1)")
    fix, j0, images = _orbit_j_values(alpha, classes, cfg)
    bits = cfg.eval_bits
    with mpmath.workprec(bits):
        two_pi_i = 2j * mpmath.pi
        jprime_alpha = two_pi_i * eval_theta_j(alpha.embed, cfg)
        if abs(jprime_alpha) < mpf(2) ** (-(cfg.working_bits // 4)):
            raise NearSingularity("j'(alpha) too small for Taylor data")
        beta = mpc(1)
        inv_sum = mpc(0)
        deriv_sum = mpc(0)
        for cl in classes:
            if cl == fix:
                continue
            jk = eval_j(images[cl], cfg)
            fk_prime = (two_pi_i * eval_theta_j(images[cl], cfg)
                        * cl.p) / cl.s
            diff = j0 - jk
            beta *= diff
            inv_sum += 1 / diff
            deriv_sum += fk_prime / diff
        beta02 = beta * inv_sum
        ffix_prime = (two_pi_i * eval_theta_j(images[fix], cfg) * fix.p) / fix.s
        beta11 = -(ffix_prime * beta02 + beta * deriv_sum) / jprime_alpha
    return TaylorData(j0=j0, beta=beta, beta02=beta02, beta11=beta11, beta20=beta02)


def masser_c(alpha: CMPoint, cfg: PrecisionConfig) -> mpc:
    """(beta02 - beta11 + beta20) / beta for alpha's discriminant."""
    classes = hnf_classes(-alpha.discriminant)
    return taylor_coeffs(alpha, classes, cfg).masser_c()


def taylor_fd_fit(alpha: CMPoint, classes, cfg: PrecisionConfig,
                  delta_rel: str = "1e-8") -> TaylorData:
    """Finite-difference oracle for the Taylor data.

    j is inverted locally around alpha by Newton iteration, the polynomial
    value is formed on a 5x5 grid of offsets (step |delta| = delta_rel*|j0|),
    and a least-squares fit of a total-degree-4 model recovers the quadratic
    coefficients.  Nothing is shared with the analytic chain-rule path, so
    agreement between the two is meaningful.
    """
    fix, j0, images = _orbit_j_values(alpha, classes, cfg)
    bits = cfg.eval_bits
    with mpmath.workprec(bits):
        delta = mpf(delta_rel) * abs(j0)
        offsets = range(-2, 3)
        # invert j on the X-grid: sigma(u) with j(sigma(u)) = j0 + u*delta
        sigmas = {}
        for u in offsets:
            target = j0 + u * delta
            sigma = mpc(alpha.embed)
            for _ in range(80):
                val = eval_j(sigma, cfg)
                err = val - target
                if abs(err) < mpf(2) ** (-bits + 8) * (1 + abs(target)):
                    break
                sigma -= err / (2j * mpmath.pi * eval_theta_j(sigma, cfg))
            sigmas[u] = sigma
        # polynomial values on the (u, v) grid
        rows = []
        rhs = []
        monomials = [(mu, nu) for mu in range(5) for nu in range(5)
                     if mu + nu <= 4]
        for u in offsets:
            roots = [eval_j(_apply_numeric(cl, sigmas[u]), cfg) for cl in classes]
            for v in offsets:
                y = j0 + v * delta
                phi = mpc(1)
                for r in roots:
                    phi *= y - r
                rows.append([mpf(u) ** mu * mpf(v) ** nu for mu, nu in monomials])
                rhs.append(phi)
        coeffs = _lstsq(rows, rhs, bits)
        by_mono = dict(zip(monomials, coeffs))
        return TaylorData(
            j0=j0,
            beta=by_mono[(0, 1)] / delta,
            beta02=by_mono[(0, 2)] / delta ** 2,
            beta11=by_mono[(1, 1)] / delta ** 2,
            beta20=by_mono[(2, 0)] / delta ** 2,
        )


def _apply_numeric(cl: MatrixClass, z: mpc) -> mpc:
    return (cl.p * z + cl.q) / cl.s


def _lstsq(rows, rhs, bits: int):
    """Least squares by normal equations at full precision (tiny systems)."""
    with mpmath.workprec(bits):
        a = mpmath.matrix(rows)
        b = mpmath.matrix(rhs)
        at = a.T
        return list(mpmath.lu_solve(at * a, at * b))


def beta_norm(n: int, cfg: PrecisionConfig | None = None):
    """Product of beta over all class representatives for n, rounded to an
    integer, with the coprime-to-6 flag.

    These integers are enormous (about 9000 digits at n = 3), so a cheap
    low-precision probe first measures the magnitude; the ladder then runs
    with that many bits added on top, doubling only the excess, so agreement
    to abs_tol is reached without a full doubling of a 30000-bit run.
    """
    if cfg is None:
        cfg = PrecisionConfig()
    forms = enumerate_qn(n)
    classes = hnf_classes(24 * n - 1)

    def product_at(bits):
        sub = cfg.with_bits(bits)
        betas = [beta_product(cm_point(f, sub), classes, sub) for f in forms]
        with mpmath.workprec(sub.eval_bits):
            prod = mpc(1)
            for v in betas:
                prod *= v
        return prod

    magnitude = max(int(mpmath.mag(product_at(cfg.working_bits))), 0)

    def task(excess_bits):
        return product_at(magnitude + excess_bits)

    prod, achieved_excess = run_adaptive(task, cfg)
    norm, coprime = norm_6unit_check([prod], f"beta-norm(n={n})", cfg.abs_tol)
    return norm, coprime, magnitude + achieved_excess
