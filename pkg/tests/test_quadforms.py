import random

import mpmath
import pytest
from mpmath import mpc, mpf

from cmpartitions.quadforms import (QuadForm, cm_point, enumerate_qn,
                                    gamma0_equivalent, reduce_with_matrix,
                                    reduced_forms, transporter)


def brute_force_reduced(d):
    """Direct scan of |b| <= a <= c with the boundary conventions; the
    independent count oracle for small discriminants."""
    found = []
    limit = int((-d / 3) ** 0.5) + 1
    for a in range(1, limit + 1):
        for b in range(-a, a + 1):
            num = b * b - d
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a:
                continue
            if (abs(b) == a or a == c) and b < 0:
                continue
            from math import gcd
            if gcd(gcd(a, b), c) == 1:
                found.append(QuadForm(a, b, c))
    return sorted(found, key=lambda f: (f.a, abs(f.b), -f.b))


def random_gamma0_element(rng, level=6):
    """Random word in the translations and the level-6 parabolic."""
    mat = (1, 0, 0, 1)
    for _ in range(rng.randint(1, 6)):
        if rng.random() < 0.5:
            k = rng.randint(-3, 3)
            other = (1, k, 0, 1)
        else:
            k = rng.randint(-2, 2)
            other = (1, 0, level * k, 1)
        a, b, c, d = mat
        e, f, g, h = other
        mat = (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
    return mat


class TestReducedForms:
    def test_d3(self):
        assert reduced_forms(-3) == [QuadForm(1, 1, 1)]

    def test_d23_against_brute_force(self):
        forms = reduced_forms(-23)
        assert forms == brute_force_reduced(-23)
        assert len(forms) == 3

    def test_d47_class_number(self):
        assert len(reduced_forms(-47)) == 5
        assert reduced_forms(-47) == brute_force_reduced(-47)

    def test_invalid_discriminant(self):
        with pytest.raises(ValueError):
            reduced_forms(-5)
        with pytest.raises(ValueError):
            reduced_forms(4)

    def test_reduction_reaches_the_reduced_form(self):
        rng = random.Random(5)
        for form in reduced_forms(-71):
            for _ in range(5):
                g = random_gamma0_element(rng)
                moved = form.transform(g)
                red, word = reduce_with_matrix(moved)
                assert red.is_reduced()
                assert moved.transform(word) == red


class TestGamma0Equivalence:
    def test_identity(self):
        q = QuadForm(6, 1, 1)
        assert gamma0_equivalent(q, q)

    def test_translation_image(self):
        # z -> z + 2 carries (6,1,1) to (6,25,27)
        q = QuadForm(6, 1, 1)
        image = q.transform((1, 2, 0, 1))
        assert image == QuadForm(6, 25, 27)
        assert gamma0_equivalent(q, image)

    def test_distinct_classes(self):
        assert not gamma0_equivalent(QuadForm(6, 1, 1), QuadForm(12, 13, 4))

    def test_random_translates(self):
        rng = random.Random(17)
        for form in enumerate_qn(2):
            for _ in range(20):
                g = random_gamma0_element(rng)
                assert gamma0_equivalent(form, form.transform(g))

    def test_pairwise_inequivalent_representatives(self):
        for n in (1, 2, 3):
            reps = enumerate_qn(n)
            for i in range(len(reps)):
                for k in range(i + 1, len(reps)):
                    assert not gamma0_equivalent(reps[i], reps[k])

    def test_full_group_equivalent_but_not_level6(self):
        # an S-translate stays in the full-group class but leaves the
        # level-6 class: the unique transporter has lower-left entry 1
        q = QuadForm(6, 1, 1)
        image = q.transform((0, -1, 1, 0))
        g = transporter(q, image)
        assert g is not None and g[2] % 6 != 0
        assert not gamma0_equivalent(q, image)

    def test_distinct_representatives_distinct_full_classes(self):
        # the level-6 representative set maps bijectively onto the reduced
        # forms for these discriminants
        for n in (1, 2, 3):
            reduced = {reduce_with_matrix(f)[0] for f in enumerate_qn(n)}
            assert len(reduced) == len(enumerate_qn(n))


class TestEnumerateQn:
    def test_n1(self):
        forms = enumerate_qn(1)
        assert len(forms) == 3
        assert forms[0] == QuadForm(6, 1, 1)
        assert [f.a for f in forms] == [6, 12, 18]

    def test_n1_alternative_representatives(self):
        # the same classes are often listed as (12,13,4) and (18,25,9)
        forms = enumerate_qn(1)
        assert gamma0_equivalent(forms[1], QuadForm(12, 13, 4))
        assert gamma0_equivalent(forms[2], QuadForm(18, 25, 9))

    def test_n2_count(self):
        assert len(enumerate_qn(2)) == 5

    def test_defining_congruences(self):
        for n in (1, 2, 3, 4, 7):
            d = 1 - 24 * n
            for f in enumerate_qn(n):
                assert f.a > 0 and f.a % 6 == 0
                assert f.b % 12 == 1
                assert f.discriminant() == d

    def test_counts_match_class_numbers(self):
        for n in range(1, 11):
            assert len(enumerate_qn(n)) == len(reduced_forms(1 - 24 * n))

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            enumerate_qn(0)


class TestCMPoint:
    def test_i(self, cfg256):
        point = cm_point(QuadForm(1, 0, 1), cfg256)
        assert abs(point.embed - mpc(0, 1)) < mpf(2) ** -250

    def test_omega(self, cfg256):
        point = cm_point(QuadForm(1, 1, 1), cfg256)
        with mpmath.workprec(300):
            expected = mpc(mpf(-1) / 2, mpmath.sqrt(3) / 2)
            assert abs(point.embed - expected) < mpf(2) ** -250

    def test_first_representative(self, cfg256):
        point = cm_point(QuadForm(6, 1, 1), cfg256)
        with mpmath.workprec(300):
            assert abs(mpmath.re(point.embed) + mpf(1) / 12) < mpf(2) ** -250
            assert abs(mpmath.im(point.embed) - mpmath.sqrt(23) / 12) < mpf(2) ** -250

    def test_root_residual(self, cfg256):
        bound = mpf(2) ** (-cfg256.working_bits + cfg256.guard_bits + 8)
        with mpmath.workprec(cfg256.eval_bits):
            for n in (1, 3, 6):
                for f in enumerate_qn(n):
                    alpha = cm_point(f, cfg256).embed
                    residual = abs(f.a * alpha * alpha + f.b * alpha + f.c)
                    assert residual < bound * (abs(f.a) + abs(f.b) + abs(f.c))

    def test_exact_matches_embed(self, cfg256):
        point = cm_point(QuadForm(12, -11, 3), cfg256)
        assert point.exact.x == mpf(11) / 24
        with mpmath.workprec(300):
            assert abs(point.exact.embed(cfg256) - point.embed) == 0
