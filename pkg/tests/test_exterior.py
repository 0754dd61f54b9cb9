"""
Tests for the exterior algebra.

Covers wedge signs, conjugation, contractions, frame endomorphisms and the
extension maps.
"""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deforge.exterior import (
    DimensionMismatch,
    Form,
    FrameDegenerate,
    FrameEndomorphism,
    VectorForm,
    contract,
    contract_vector,
    exp_contract,
    extend,
    extend_blockwise,
    extend_inverse,
    monomial_basis,
    simul_contract,
)
from deforge.identities import random_beltrami, random_form
from deforge.linalg import Matrix
from deforge.scalars import EXACT, GaussianRational

seeds = st.integers(min_value=0, max_value=10**6)
I = GaussianRational(0, 1)


def _dz(n, k):
    return Form.generator(n, k)


def _dzbar(n, k):
    return Form.generator(n, n + k)


class TestForm:
    """Tests for Form construction and arithmetic."""

    def test_wedge_anticommutes_on_one_forms(self):
        """Test dz1∧dz2 = -dz2∧dz1."""
        a, b = _dz(2, 0), _dz(2, 1)
        assert a.wedge(b).equals(-b.wedge(a))
        assert a.wedge(a).is_zero()

    def test_monomial_tracks_sign(self):
        """Test the ordered constructor reorders with sign."""
        form = Form.monomial(2, [1, 0], [])
        assert form.coefficient((0, 1)) == GaussianRational(-1)

    def test_invalid_monomial(self):
        """Test unsorted or out-of-range keys are rejected."""
        with pytest.raises(ValueError):
            Form(2, {(1, 0): 1})
        with pytest.raises(ValueError):
            Form(2, {(4,): 1})

    def test_dimension_mismatch(self):
        """Test forms over different dimensions do not combine."""
        with pytest.raises(DimensionMismatch):
            Form.zero(2) + Form.zero(3)

    def test_zero_coefficients_dropped(self):
        """Test zero coefficients are never stored."""
        assert len(Form(2, {(0,): 0, (1,): 1})) == 1

    def test_bidegree(self):
        """Test bidegree of homogeneous and mixed forms."""
        assert Form(3, {(0, 4): 1}).bidegree == (1, 1)
        mixed = Form(3, {(0,): 1, (3,): 1})
        assert mixed.bidegrees() == {(1, 0), (0, 1)}
        with pytest.raises(ValueError):
            _ = mixed.bidegree
        assert mixed.component(0, 1).equals(_dzbar(3, 0))

    def test_conjugate_reorders(self):
        """Test conj(dz1∧dz̄2) = -dz2∧dz̄1."""
        form = _dz(2, 0).wedge(_dzbar(2, 1))
        expected = -_dz(2, 1).wedge(_dzbar(2, 0))
        assert form.conjugate().equals(expected)

    def test_kahler_form_is_real(self):
        """Test i dz1∧dz̄1 + i dz2∧dz̄2 is real."""
        omega = Form(2, {(0, 2): I, (1, 3): I})
        assert omega.is_real()
        assert not Form(2, {(0, 2): 1}).is_real()

    def test_format(self):
        """Test text output in the structure-constant syntax."""
        assert Form(2, {(0, 2): 1}).format() == "(1+0*i)*w1^w~1"
        assert Form.zero(2).format() == "0"

    def test_immutable(self):
        """Test forms cannot be mutated."""
        with pytest.raises(AttributeError):
            Form.zero(2).n = 3

    @settings(max_examples=60, derandomize=True)
    @given(seeds)
    def test_double_conjugate(self, seed):
        """Test conjugation is an involution."""
        a = random_form(np.random.default_rng(seed), 3, EXACT)
        assert a.conjugate().conjugate().equals(a)

    @settings(max_examples=60, derandomize=True)
    @given(seeds)
    def test_conjugate_is_multiplicative(self, seed):
        """Test conj(a∧b) = conj(a)∧conj(b)."""
        rng = np.random.default_rng(seed)
        a, b = random_form(rng, 3, EXACT), random_form(rng, 3, EXACT)
        assert a.wedge(b).conjugate().equals(a.conjugate().wedge(b.conjugate()))

    @settings(max_examples=60, derandomize=True)
    @given(seeds)
    def test_wedge_associative(self, seed):
        """Test (a∧b)∧c = a∧(b∧c)."""
        rng = np.random.default_rng(seed)
        a, b, c = (random_form(rng, 3, EXACT) for _ in range(3))
        assert a.wedge(b).wedge(c).equals(a.wedge(b.wedge(c)))


class TestMonomialBasis:
    """Tests for the canonical bidegree bases."""

    def test_order(self):
        """Test holomorphic-major order of Λ^{1,1} for n = 2."""
        assert monomial_basis(2, 1, 1) == ((0, 2), (0, 3), (1, 2), (1, 3))

    def test_out_of_range(self):
        """Test bidegrees outside 0..n give an empty basis."""
        assert monomial_basis(2, 3, 0) == ()
        assert monomial_basis(2, -1, 0) == ()

    @pytest.mark.parametrize("n,p,q,size", [(3, 1, 1, 9), (3, 2, 3, 3), (4, 2, 2, 36)])
    def test_sizes(self, n, p, q, size):
        """Test dim Λ^{p,q} = C(n,p) C(n,q)."""
        assert len(monomial_basis(n, p, q)) == size


class TestContraction:
    """Tests for contractions with vector-valued forms."""

    def test_contract_generator(self):
        """Test ι_φ dz^1 = φ^1."""
        phi = VectorForm.beltrami(2, [[0, 1], [0, 0]])
        assert contract(phi, _dz(2, 0)).equals(_dzbar(2, 1))
        assert contract(phi, _dzbar(2, 0)).is_zero()

    def test_even_derivation(self):
        """Test ι_φ(a∧b) = ι_φa∧b + a∧ι_φb for a Beltrami φ."""
        phi = VectorForm.beltrami(2, [[1, 0], [0, 0]])
        a, b = _dz(2, 0), _dz(2, 1)
        lhs = contract(phi, a.wedge(b))
        rhs = contract(phi, a).wedge(b) + a.wedge(contract(phi, b))
        assert lhs.equals(rhs)

    def test_exp_contract_factorizes(self):
        """Test e^{ι_φ}(dz1∧dz2) = (dz1+dz̄1)∧(dz2+dz̄2) for φ = identity."""
        phi = VectorForm.beltrami(2, [[1, 0], [0, 1]])
        result = exp_contract(phi, _dz(2, 0).wedge(_dz(2, 1)))
        expected = (_dz(2, 0) + _dzbar(2, 0)).wedge(_dz(2, 1) + _dzbar(2, 1))
        assert result.equals(expected)

    def test_contract_vector_is_composition(self):
        """Test slotwise contraction agrees with composing frame maps."""
        phi = VectorForm.beltrami(2, [[1, 2], [0, 1]])
        phibar = phi.conjugate()
        composed = FrameEndomorphism.from_vector_form(contract_vector(phi, phibar))
        product = FrameEndomorphism.from_vector_form(phi) @ FrameEndomorphism.from_vector_form(
            phibar
        )
        assert composed.equals(product)

    def test_vector_conjugate_swaps_slots(self):
        """Test conjugation moves e_k coefficients to ē_k."""
        phi = VectorForm.beltrami(2, [[1, 0], [0, 0]])
        conj = phi.conjugate()
        assert conj.slot(2).equals(_dz(2, 0))
        assert conj.slot(0).is_zero()

    @settings(max_examples=40, derandomize=True)
    @given(seeds)
    def test_exp_contract_is_exterior_power(self, seed):
        """Test e^{ι_φ} = Λ(1 + φ) on random forms."""
        rng = np.random.default_rng(seed)
        phi = random_beltrami(rng, 3, EXACT)
        a = random_form(rng, 3, EXACT)
        endo = FrameEndomorphism.identity(3) + FrameEndomorphism.from_vector_form(phi)
        assert exp_contract(phi, a).equals(simul_contract(endo, a))


class TestExtension:
    """Tests for frame endomorphisms and the extension map."""

    def test_identity_acts_trivially(self):
        """Test the identity endomorphism fixes every form."""
        a = Form(2, {(0, 3): 2, (1,): I})
        assert simul_contract(FrameEndomorphism.identity(2), a).equals(a)

    def test_simul_contract_composes(self):
        """Test Λ(A)Λ(B) = Λ(A∘B)."""
        rng = np.random.default_rng(5)
        a = random_form(rng, 2, EXACT, (1, 1))
        m1 = Matrix([[int(rng.integers(-2, 3)) for _ in range(4)] for _ in range(4)])
        m2 = Matrix([[int(rng.integers(-2, 3)) for _ in range(4)] for _ in range(4)])
        big_a, big_b = FrameEndomorphism(2, m1), FrameEndomorphism(2, m2)
        assert simul_contract(big_a, simul_contract(big_b, a)).equals(
            simul_contract(big_a @ big_b, a)
        )

    def test_wrong_size_rejected(self):
        """Test frame endomorphisms must be 2n x 2n."""
        with pytest.raises(DimensionMismatch):
            FrameEndomorphism(2, Matrix.identity(3))

    def test_singular_inverse(self):
        """Test inverting a singular frame map raises FrameDegenerate."""
        with pytest.raises(FrameDegenerate):
            FrameEndomorphism(2, Matrix.zeros(4, 4)).inverse()

    def test_extend_inverse_round_trip(self):
        """Test extend_inverse undoes extend."""
        phi = VectorForm.beltrami(2, [[0, Fraction(1, 2)], [0, 0]])
        a = Form(2, {(0, 3): 1, (1, 2): I})
        assert extend_inverse(phi, extend(phi, a)).equals(a)

    def test_extend_zero_phi_is_identity(self):
        """Test extending with φ = 0 changes nothing."""
        a = Form(3, {(0, 1, 4): 3})
        assert extend(VectorForm.zero(3), a).equals(a)

    def test_extend_degenerate(self):
        """Test extend_inverse raises when 1 - φφ̄ is singular."""
        phi = VectorForm.beltrami(1, [[1]])
        with pytest.raises(FrameDegenerate):
            extend_inverse(phi, Form.generator(1, 0))

    @settings(max_examples=40, derandomize=True)
    @given(seeds)
    def test_extend_matches_blockwise(self, seed):
        """Test Λ(1+φ+φ̄) agrees with the monomial-by-monomial definition."""
        rng = np.random.default_rng(seed)
        phi = random_beltrami(rng, 3, EXACT)
        a = random_form(rng, 3, EXACT)
        assert extend(phi, a).equals(extend_blockwise(phi, a))
