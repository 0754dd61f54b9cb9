"""
Tests for the Hodge complex.

Covers metrics, operator adjoints, cohomology dimensions, Hodge
decompositions, Green operators and the minimal-norm solvers.
"""

import numpy as np
import pytest

from deforge.exterior import Form, monomial_basis
from deforge.hodge import HermitianMetric, HodgeComplex, Unsolvable, cohomology_dim
from deforge.identities import random_form
from deforge.linalg import Matrix
from deforge.scalars import EXACT, GaussianRational

THEORIES = ["dolbeault", "del", "bc", "aeppli"]


class TestHermitianMetric:
    """Tests for metrics and their Gram matrices."""

    def test_rejects_indefinite(self):
        """Test indefinite matrices are not metrics."""
        with pytest.raises(ValueError):
            HermitianMetric(Matrix([[1, 2], [2, 1]]))

    def test_standard_basis_orthonormal(self):
        """Test the monomial basis is orthonormal for the standard metric."""
        metric = HermitianMetric.standard(3, EXACT)
        assert metric.form_gram(1, 2).equals(Matrix.identity(9))

    def test_fundamental_form_round_trip(self, rng):
        """Test the metric is recovered from its fundamental form."""
        metric = HermitianMetric.random(rng, 3, EXACT)
        omega = metric.fundamental_form()
        assert omega.is_real()
        assert HermitianMetric.from_fundamental_form(omega).h.equals(metric.h)

    def test_standard_fundamental_form(self):
        """Test ω = i Σ dz^j∧dz̄^j for the standard metric."""
        omega = HermitianMetric.standard(2, EXACT).fundamental_form()
        i = GaussianRational(0, 1)
        assert omega.equals(Form(2, {(0, 2): i, (1, 3): i}))

    def test_random_metric_gram_hermitian(self, rng):
        """Test Gram matrices of a random metric are hermitian."""
        metric = HermitianMetric.random(rng, 3, EXACT)
        assert metric.form_gram(1, 1).is_hermitian()


class TestOperators:
    """Tests for operator matrices and adjoints."""

    def test_adjoint_property(self, iwasawa, rng):
        """Test ⟨∂̄u, v⟩ = ⟨u, ∂̄*v⟩ for a non-standard metric."""
        hc = HodgeComplex(iwasawa, HermitianMetric.random(rng, 3, EXACT))
        u = random_form(rng, 3, EXACT, (1, 1))
        v = random_form(rng, 3, EXACT, (1, 2))
        dbar = hc.step("db", 1, 1)
        dbar_star = hc.step("dbs", 1, 2)
        lhs = hc.inner(dbar.apply(u), v, hc.space(1, 2))
        rhs = hc.inner(u, dbar_star.apply(v), hc.space(1, 1))
        assert lhs == rhs

    def test_laplacian_is_self_adjoint(self, iwasawa):
        """Test the Bott-Chern Laplacian is hermitian in an orthonormal basis."""
        hc = HodgeComplex(iwasawa)
        assert hc.laplacian("bc", 1, 1).matrix.is_hermitian()

    def test_unknown_laplacian(self, iwasawa):
        """Test unknown Laplacian names raise ValueError."""
        with pytest.raises(ValueError):
            HodgeComplex(iwasawa).laplacian("hodge", 1, 1)

    def test_metric_dimension_checked(self, iwasawa):
        """Test the metric must match the algebra dimension."""
        with pytest.raises(ValueError):
            HodgeComplex(iwasawa, HermitianMetric.standard(2, EXACT))


class TestCohomology:
    """Tests for cohomology dimensions."""

    @pytest.mark.parametrize(
        "theory,bidegree,expected",
        [
            ("dolbeault", (1, 0), 3),
            ("dolbeault", (0, 1), 2),
            ("del", (0, 1), 3),
            ("bc", (1, 0), 2),
            ("aeppli", (1, 0), 3),
        ],
    )
    def test_iwasawa_low_degrees(self, iwasawa, theory, bidegree, expected):
        """Test hand-computed dimensions on the Iwasawa algebra."""
        assert cohomology_dim(iwasawa, None, theory, bidegree) == expected

    @pytest.mark.parametrize("theory", THEORIES)
    def test_torus_dimensions(self, torus3, theory):
        """Test every form is harmonic on the torus."""
        hc = HodgeComplex(torus3)
        for p in range(4):
            for q in range(4):
                assert hc.cohomology_dim(theory, p, q) == len(monomial_basis(3, p, q))

    def test_unknown_theory(self, iwasawa):
        """Test unknown theories raise ValueError."""
        with pytest.raises(ValueError):
            HodgeComplex(iwasawa).cohomology_dim("de-rham", 1, 1)

    @pytest.mark.parametrize("theory", THEORIES)
    @pytest.mark.parametrize("bidegree", [(1, 1), (2, 1), (2, 3), (1, 2)])
    def test_harmonic_dimension_matches(self, iwasawa, theory, bidegree):
        """Test harmonic spaces compute cohomology."""
        hc = HodgeComplex(iwasawa)
        assert hc.harmonic_dim(theory, *bidegree) == hc.cohomology_dim(theory, *bidegree)

    @pytest.mark.parametrize("algebra", ["torus3", "iwasawa", "abelian_i0", "category_iii"])
    def test_top_chain_inequalities(self, request, algebra):
        """Test dim H_A ≤ dim H_∂ ≤ dim H_BC at (n-1, n)."""
        hc = HodgeComplex(request.getfixturevalue(algebra))
        aeppli = hc.cohomology_dim("aeppli", 2, 3)
        partial = hc.cohomology_dim("del", 2, 3)
        bott_chern = hc.cohomology_dim("bc", 2, 3)
        assert aeppli <= partial <= bott_chern

    @pytest.mark.parametrize("bidegree", [(0, 0), (1, 1), (2, 1), (3, 3)])
    def test_decompositions_fill_space(self, abelian_i0, bidegree):
        """Test the summands of both decompositions add up to the whole space."""
        dims = HodgeComplex(abelian_i0).decomposition_dims(*bidegree)
        for parts in dims.values():
            assert sum(v for k, v in parts.items() if k != "total") == parts["total"]

    def test_vector_valued_dolbeault(self, iwasawa, torus3):
        """Test dim H^{0,1}(T^{1,0}) is 6 on Iwasawa and 9 on the torus."""
        assert len(HodgeComplex(iwasawa).harmonic_basis("dbar", 0, 1, vector=True)) == 6
        assert len(HodgeComplex(torus3).harmonic_basis("dbar", 0, 1, vector=True)) == 9


class TestGreenOperators:
    """Tests for Green operators and the minimal-norm solvers."""

    @pytest.mark.parametrize("bidegree", [(0, 0), (1, 1), (1, 2), (2, 1)])
    def test_green_identities(self, iwasawa, bidegree):
        """Test the Green-operator identities around ∂∂̄."""
        checks = HodgeComplex(iwasawa).check_green_identities(*bidegree)
        assert all(checks.values()), checks

    def test_green_identities_random_metric(self, abelian_i0):
        """Test the identities under a non-standard metric."""
        metric = HermitianMetric.random(np.random.default_rng(3), 3, EXACT)
        checks = HodgeComplex(abelian_i0, metric).check_green_identities(1, 1)
        assert all(checks.values()), checks

    def test_solve_dbar_minimal(self, iwasawa):
        """Test ∂̄x = w~1^w~2 is solved by x = w~3."""
        hc = HodgeComplex(iwasawa)
        y = Form(3, {(3, 4): 1})
        x = hc.solve_dbar_minimal(y)
        assert x.equals(Form.generator(3, 5))

    def test_solve_dbar_unsolvable(self, iwasawa):
        """Test a harmonic right-hand side is reported with its witness."""
        y = Form.generator(3, 3)
        with pytest.raises(Unsolvable) as exc:
            HodgeComplex(iwasawa).solve_dbar_minimal(y)
        assert exc.value.witness.equals(y)
        assert exc.value.residual.equals(y)

    def test_unsolvable_witness_is_harmonic_part(self, iwasawa):
        """Test a non-closed right-hand side has zero harmonic witness but a residual."""
        y = Form.generator(3, 5)
        with pytest.raises(Unsolvable) as exc:
            HodgeComplex(iwasawa).solve_dbar_minimal(y)
        assert exc.value.witness.is_zero()
        assert exc.value.residual.equals(y)

    def test_ddbar_witness_is_bott_chern_harmonic(self, torus3):
        """Test the ∂∂̄ witness is the Bott-Chern harmonic part."""
        y = Form(3, {(0, 3): 1})
        with pytest.raises(Unsolvable) as exc:
            HodgeComplex(torus3).solve_ddbar_minimal(y)
        assert exc.value.witness.equals(y)

    def test_solve_ddbar_minimal(self, iwasawa, rng):
        """Test the solution solves ∂∂̄x = y and beats perturbed solutions in norm."""
        hc = HodgeComplex(iwasawa)
        x0 = random_form(rng, 3, EXACT, (1, 1), max_terms=6)
        y = hc.ddbar(1, 1).apply(x0)
        x = hc.solve_ddbar_minimal(y, (2, 2))
        assert hc.ddbar(1, 1).apply(x).equals(y)
        space = hc.space(1, 1)
        best = hc.norm2(x, space).re
        kernel = hc.ddbar(1, 1).matrix.nullspace()
        for column in kernel.columns():
            k = space.element(column, EXACT)
            assert hc.inner(x, k, space) == GaussianRational(0)
            assert hc.norm2(x + k, space).re >= best

    def test_mild_witness_unsolvable(self, iwasawa):
        """Test w1^w2^w~1^w~2^w~3 is not ∂∂̄-exact on Iwasawa."""
        y = Form(3, {(0, 1, 3, 4, 5): 1})
        with pytest.raises(Unsolvable):
            HodgeComplex(iwasawa).solve_ddbar_minimal(y)

    def test_torus_nothing_exact(self, torus3):
        """Test ∂∂̄ vanishes on the torus."""
        with pytest.raises(Unsolvable):
            HodgeComplex(torus3).solve_ddbar_minimal(Form(3, {(0, 3): 1}))
