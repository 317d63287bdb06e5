import math
from fractions import Fraction

import numpy as np
import pytest

from envlab import (
    TwistData,
    WeightedSet,
    admissible_indices,
    admissible_set,
    annulus_area_measure,
    base_profile,
    bergman,
    bergman_approximant,
    bm_rate,
    circle_atom,
    donaldson,
    donaldson_functional,
    fs_measure,
    gram,
    h0,
    i_model_envelope,
    l2_norm,
    lelong,
    limit_mass,
    reference_basis,
    section_basis,
    sup_norm,
)
from envlab.envelopes import window_envelope
from envlab.errors import (
    ConditioningError,
    DivergentIntegralError,
    InputError,
    NoSectionsError,
)
from envlab.sections import approximant_lower_bound_constant


THIRD_QUARTER = window_envelope(1, Fraction(1, 3), Fraction(1, 4))


def oracle_count(k, c, nu0, nu_inf, d=0):
    """Independent index count by direct rational comparisons."""
    m = math.floor(k * c) + d
    return sum(
        1 for j in range(0, m + 1)
        if Fraction(j + 1) > k * nu0 and Fraction(m - j + 1) > k * nu_inf
    )


class TestAdmissibleSet:
    def test_spec_window(self):
        m, J = admissible_indices(12, 1, Fraction(1, 3), Fraction(1, 4))
        assert (m, J) == (12, list(range(4, 10)))

    def test_minimal_singularity_keeps_everything(self):
        for k in (1, 7, 30):
            m, J = admissible_indices(k, 1, 0, 0)
            assert J == list(range(0, m + 1))

    def test_overfilled_class_is_empty(self):
        _, J = admissible_indices(10, 1, Fraction(3, 5), Fraction(1, 2))
        assert J == []

    def test_against_bruteforce_oracle(self):
        params = [
            (Fraction(1), Fraction(1, 3), Fraction(1, 4), 0),
            (Fraction(1), Fraction(1, 3), Fraction(1, 4), 1),
            (Fraction(1), Fraction(1, 3), Fraction(1, 4), -1),
            (Fraction(3, 2), Fraction(2, 7), Fraction(1, 5), 0),
            (Fraction(141421356, 10 ** 8), Fraction(0), Fraction(0), 0),
        ]
        for c, nu0, nu_inf, d in params:
            for k in range(1, 120):
                _, J = admissible_indices(k, c, nu0, nu_inf, TwistData(1, d))
                assert len(J) == oracle_count(k, c, nu0, nu_inf, d), (c, k, d)

    def test_boundary_exponent_excluded(self):
        # k*nu0 integral: the equality index diverges and is excluded
        _, J = admissible_indices(3, 1, Fraction(1, 3), 0)
        assert J[0] == 1  # j=0 has j+1 = 1 = k*nu0, excluded


class TestH0:
    def test_spec_counts(self):
        assert h0(24, THIRD_QUARTER) == 11
        assert h0(24, THIRD_QUARTER, TwistData(2, 0)) == 22
        assert h0(12, THIRD_QUARTER, TwistData(1, 1)) == 7

    def test_counting_bound(self):
        lim = limit_mass(1, Fraction(1, 3), Fraction(1, 4))
        assert lim == Fraction(5, 12)
        for r in (1, 2):
            for d in (-1, 0, 1):
                tw = TwistData(r, d)
                for k in range(1, 201):
                    err = abs(Fraction(h0(k, THIRD_QUARTER, tw), r * k) - lim)
                    assert err <= Fraction(3, k)


class TestNorms:
    def test_beta_function_identity(self):
        b = base_profile(1)
        K, nu = WeightedSet.whole(), fs_measure()
        k = 20
        for j in (0, 3, 10, 20):
            got = l2_norm(j, k, b, K, nu) ** 2
            want = math.factorial(j) * math.factorial(k - j) / math.factorial(k + 1)
            assert got == pytest.approx(want, rel=1e-10)

    def test_symmetry(self):
        b = base_profile(1)
        K, nu = WeightedSet.whole(), fs_measure()
        for j in (2, 5):
            assert l2_norm(j, 11, b, K, nu) == pytest.approx(
                l2_norm(11 - j, 11, b, K, nu), rel=1e-10)

    def test_constant_weight_shift(self):
        b = base_profile(1)
        nu = fs_measure()
        k = 9
        n0 = l2_norm(4, k, b, WeightedSet.whole(), nu) ** 2
        n1 = l2_norm(4, k, b, WeightedSet.whole(v=lambda t: np.full_like(t, 0.3)), nu) ** 2
        assert n1 == pytest.approx(n0 * np.exp(-k * 0.3), rel=1e-10)

    def test_scipy_quad_oracle_with_weight(self):
        from scipy.integrate import quad

        u = THIRD_QUARTER
        K = WeightedSet.whole(v=lambda t: 0.2 * np.exp(-t * t))
        nu = fs_measure()
        k, j = 15, 7
        got = l2_norm(j, k, u, K, nu) ** 2

        def integrand(t):
            ta = np.asarray([t])
            e = j * t - (k + 0.0) * np.log1p(np.exp(-abs(t))) - max(t, 0.0) * k \
                - k * 0.2 * np.exp(-t * t)
            return float(np.exp(e) * np.exp(-abs(t)) / (1 + np.exp(-abs(t))) ** 2)

        want, _ = quad(integrand, -42, 42, limit=800)
        assert got == pytest.approx(want, rel=1e-8)

    def test_singular_weight_divergence(self):
        # boundary index under the singular weight diverges
        u = window_envelope(1, Fraction(1, 3), 0)
        K, nu = WeightedSet.whole(), fs_measure()
        with pytest.raises(DivergentIntegralError):
            l2_norm(0, 3, u, K, nu, singular_weight=True)
        # the admissible indices stay finite
        assert l2_norm(1, 3, u, K, nu, singular_weight=True) > 0

    def test_sup_norm_single_circle(self):
        b = base_profile(1)
        K = WeightedSet.circles([0.0])
        for k, j in ((8, 0), (8, 5), (12, 12)):
            assert sup_norm(j, k, b, K) == pytest.approx(2.0 ** (-k / 2), rel=1e-12)

    def test_sup_dominates_l2(self):
        b = base_profile(1)
        K = WeightedSet.interval(-1.0, 1.0)
        nu = annulus_area_measure()
        k = 10
        for j in range(0, 11):
            assert sup_norm(j, k, b, K) >= l2_norm(j, k, b, K, nu) * (1 - 1e-12)

    def test_weight_monotonicity(self):
        b = base_profile(1)
        K1 = WeightedSet.interval(-1.0, 1.0)
        K2 = K1.add_weight(lambda t: np.ones_like(t), 0.2)
        for j in (0, 4, 9):
            assert sup_norm(j, 9, b, K1) >= sup_norm(j, 9, b, K2)


class TestBergman:
    def test_constant_kernel(self):
        b = base_profile(1)
        res = bergman(10, b, WeightedSet.whole(), fs_measure())
        sel = np.abs(res.grid) < 6
        assert np.max(np.abs(res.kernel[sel] - 11.0)) / 11.0 < 1e-10

    def test_mass_identity(self):
        u = THIRD_QUARTER
        for k in (10, 25):
            res = bergman(k, u, WeightedSet.whole(), fs_measure())
            assert res.total_mass == pytest.approx(res.h0 / k, rel=1e-8)

    def test_monotone_in_singularity(self):
        k = 16
        K, nu = WeightedSet.whole(), fs_measure()
        small = THIRD_QUARTER
        big = base_profile(1)
        Js, Jb = admissible_set(k, small).J, admissible_set(k, big).J
        assert set(Js) <= set(Jb)
        rs = bergman(k, small, K, nu)
        rb = bergman(k, big, K, nu)
        assert np.all(rs.kernel <= np.interp(rs.grid, rb.grid, rb.kernel) * (1 + 1e-9))

    def test_rank_scales_mass(self):
        u = THIRD_QUARTER
        r1 = bergman(12, u, WeightedSet.whole(), fs_measure())
        r2 = bergman(12, u, WeightedSet.whole(), fs_measure(), TwistData(2, 0))
        assert r2.h0 == 2 * r1.h0
        assert r2.total_mass == pytest.approx(2 * r1.total_mass, rel=1e-12)

    def test_empty_index_set_is_zero_kernel(self):
        u = base_profile(1)
        res = bergman(1, u, WeightedSet.whole(), fs_measure(), TwistData(1, -2))
        assert res.h0 == 0
        assert res.total_mass == 0.0

    def test_requires_probability_measure(self):
        nu = annulus_area_measure()
        bad = type(nu)(nu.breakpoints, nu.cell_masses * 2.0, (),
                       density_fn=nu.density_fn)
        with pytest.raises(InputError):
            bergman(5, base_profile(1), WeightedSet.interval(-1, 1), bad)

    def test_atom_measure_kernel(self):
        # single-circle reference: beta = (h0/k) * delta
        b = base_profile(1)
        K = WeightedSet.circles([0.0])
        res = bergman(6, b, K, circle_atom(0.0))
        assert res.total_mass == pytest.approx(res.h0 / 6, rel=1e-12)
        assert len(res.beta.atoms) == 1


class TestGram:
    def test_angle_independent_weight_is_diagonal(self):
        u = base_profile(1)
        K, nu = WeightedSet.whole(), fs_measure()
        k = 6
        basis = gram(k, u, K, lambda t, phi: np.zeros(np.broadcast(t, phi).shape), nu)
        G = basis.gram_matrix
        off = G - np.diag(np.diag(G))
        assert np.max(np.abs(off)) < 1e-12 * np.max(np.abs(np.diag(G)))
        for idx, j in enumerate(basis.J):
            want = l2_norm(j, k, u, K, nu) ** 2
            assert G[idx, idx].real == pytest.approx(want, rel=1e-9)

    def test_cosine_weight_bessel_structure(self):
        from scipy.special import iv

        u = base_profile(1)
        K, nu = WeightedSet.whole(), fs_measure()
        k, eps = 6, 0.5
        basis = gram(k, u, K, lambda t, phi: eps * np.cos(phi) + 0.0 * t, nu)
        G = basis.gram_matrix
        # angular factor of G_{j,j+1} is I_1(-k eps); ratios match Bessel
        diag_rad = np.diag(G).real
        band = np.abs(np.diag(G, 1))
        assert np.all(band > 0)
        # |I_1(k eps)| / I_0(k eps) ratio reproduced against radial means
        ratio = iv(1, k * eps) / iv(0, k * eps)
        mid = len(basis.J) // 2
        got = band[mid] / np.sqrt(diag_rad[mid] * diag_rad[mid + 1])
        assert got == pytest.approx(ratio, rel=0.2)
        # decay in |i - j|
        r0 = np.abs(G[mid, mid])
        assert np.abs(G[mid, mid + 1]) < r0
        assert np.abs(G[mid, mid + 2]) < np.abs(G[mid, mid + 1])

    def test_positive_definite(self):
        u = base_profile(1)
        basis = gram(5, u, WeightedSet.whole(),
                     lambda t, phi: 0.3 * np.cos(phi) + 0.0 * t, fs_measure())
        eig = np.linalg.eigvalsh(basis.gram_matrix)
        assert np.min(eig) > 0
        # nonzero coefficient vectors get strictly positive norms
        rng = np.random.default_rng(1)
        for _ in range(5):
            cvec = rng.normal(size=len(basis.J)) + 1j * rng.normal(size=len(basis.J))
            q = float(np.real(cvec.conj() @ basis.gram_matrix @ cvec))
            assert q > 0


class TestDonaldson:
    def test_zero_on_equal(self):
        u = THIRD_QUARTER
        A = section_basis(10, u, WeightedSet.whole(), fs_measure())
        assert donaldson(10, u, A, A) == 0.0

    def test_constant_shift_closed_form(self):
        u = THIRD_QUARTER
        k, a = 20, 0.4
        K0 = WeightedSet.whole()
        Ka = WeightedSet.whole(v=lambda t: np.full_like(t, a))
        A = section_basis(k, u, K0, fs_measure())
        B = section_basis(k, u, Ka, fs_measure())
        want = -a * len(A.J) / k
        assert donaldson(k, u, A, B) == pytest.approx(want, abs=1e-8)

    def test_mismatched_bases_rejected(self):
        u = THIRD_QUARTER
        A = section_basis(10, u, WeightedSet.whole(), fs_measure())
        B = section_basis(12, u, WeightedSet.whole(), fs_measure())
        with pytest.raises(InputError):
            donaldson(10, u, A, B)

    def test_functional_of_reference_is_zero(self):
        u = THIRD_QUARTER
        ref = reference_basis(14, u)
        assert donaldson_functional(14, u, ref) == 0.0


class TestBMRate:
    def test_fs_rate_decays(self):
        K, nu = WeightedSet.whole(), fs_measure()
        rates = [bm_rate(k, K, nu) for k in (10, 20, 40)]
        assert rates[2] < rates[0]
        assert rates[2] < 0.1

    def test_annulus_area_rate_decays(self):
        K, nu = WeightedSet.interval(-1, 1), annulus_area_measure()
        rates = [bm_rate(k, K, nu) for k in (10, 20, 40)]
        assert rates[2] < rates[0]

    def test_atom_reference_fails_diagnostic(self):
        K, nu = WeightedSet.interval(-1, 1), circle_atom(0.0)
        rates = [bm_rate(k, K, nu) for k in (10, 20, 40)]
        # rate pins at max_t (t - f_FS(t) + log 2) over [-1, 1]
        want = 1.0 - np.log1p(np.e) + np.log(2)
        assert np.max(np.abs(np.asarray(rates) - want)) < 1e-9
        assert min(rates) > 0.3


class TestApproximant:
    def test_minimal_singularity_closed_form(self):
        b = base_profile(1)
        for k in (8, 16):
            ap = bergman_approximant(k, b)
            ts = np.asarray([-3.0, 0.0, 0.7, 5.0])
            want = np.log1p(np.exp(ts)) + np.log(k + 1) / k
            assert np.max(np.abs(ap(ts) - want)) < 1e-9

    def test_tail_indices_at_k12(self):
        ap = bergman_approximant(12, THIRD_QUARTER)
        assert ap.s_minus == Fraction(4, 12)
        assert ap.s_plus == Fraction(9, 12)
        assert lelong(ap) == (Fraction(1, 3), Fraction(1, 4))

    def test_lelong_sandwich_and_mass(self):
        env = i_model_envelope(THIRD_QUARTER)
        for k in (7, 13, 40, 100):
            ap = bergman_approximant(k, THIRD_QUARTER)
            assert abs(ap.s_minus - Fraction(1, 3)) <= Fraction(1, k)
            assert abs((1 - ap.s_plus) - Fraction(1, 4)) <= Fraction(1, k)
            gap = ap.mass - env.mass
            assert 0 <= gap <= Fraction(2, k)

    def test_lower_bound_constant(self):
        ap = bergman_approximant(25, THIRD_QUARTER)
        c = approximant_lower_bound_constant(25, THIRD_QUARTER, ap)
        # F + C log k / k >= F_u on a probe grid
        ts = np.linspace(-30, 30, 1001)
        assert np.all(ap(ts) + c * np.log(25) / 25 >= THIRD_QUARTER(ts) - 1e-9)

    def test_zero_mass_rejected(self):
        line = window_envelope(1, Fraction(1, 2), Fraction(1, 2))
        with pytest.raises(NoSectionsError):
            bergman_approximant(10, line)
