"""
Tests for the identity validators and the fuzzer.

Each registered identity is driven with seeded random exact inputs on the
catalog algebras; any failure is a bug in the calculus.
"""

import numpy as np
import pytest

from deforge.exterior import Form, VectorForm
from deforge.identities import (
    DegreeMismatch,
    dbar_leibniz,
    fuzz_identity,
    get_all_identity_names,
    random_beltrami,
    random_form,
    resolve_identity_names,
    validate_identity,
)
from deforge.scalars import EXACT

IDENTITY_NAMES = [
    "extension-commutator",
    "bracket-formula",
    "contraction-reorder",
    "bracket-contraction",
    "bracket-contraction-closed",
    "dbar-leibniz",
    "double-conjugate-contraction",
    "double-conjugate-contraction-11",
    "bracket-commutes",
    "twisted-extension",
    "inverse-extension",
]


class TestRegistry:
    """Tests for identity lookup."""

    def test_all_registered(self):
        """Test every identity is registered."""
        assert sorted(get_all_identity_names()) == sorted(IDENTITY_NAMES)

    def test_resolve_all(self):
        """Test "all" expands to every identity."""
        assert resolve_identity_names("all") == get_all_identity_names()

    def test_resolve_list(self):
        """Test comma lists keep their order."""
        assert resolve_identity_names("twisted-extension, bracket-formula") == [
            "twisted-extension",
            "bracket-formula",
        ]

    def test_resolve_unknown(self):
        """Test unknown names raise KeyError."""
        with pytest.raises(KeyError):
            resolve_identity_names("bracket-formula,nonsense")

    def test_validate_unknown(self, torus3):
        """Test validating an unknown identity raises KeyError."""
        zero = VectorForm.zero(3)
        with pytest.raises(KeyError):
            validate_identity(torus3, "nonsense", zero, zero, Form.zero(3))


class TestValidators:
    """Tests for individual validators."""

    @pytest.mark.parametrize("name", IDENTITY_NAMES)
    def test_zero_inputs(self, iwasawa, name):
        """Test every identity holds trivially at φ = ψ = 0."""
        zero = VectorForm.zero(3)
        alpha = Form(3, {(0, 3): 1, (1, 4): 2})
        result = validate_identity(iwasawa, name, zero, zero, alpha)
        assert result.holds

    def test_non_beltrami_rejected(self, iwasawa):
        """Test Beltrami-only identities reject other vector forms."""
        v = VectorForm(3, {3: Form.generator(3, 0)})
        with pytest.raises(DegreeMismatch):
            validate_identity(iwasawa, "bracket-formula", v, v, Form.zero(3))

    def test_eleven_case_needs_eleven_form(self, iwasawa):
        """Test the (1,1) special case rejects other bidegrees."""
        phi = VectorForm.beltrami(3, [[1, 0, 0], [0, 0, 0], [0, 0, 0]])
        with pytest.raises(DegreeMismatch):
            validate_identity(
                iwasawa, "double-conjugate-contraction-11", phi, phi, Form.generator(3, 0)
            )

    def test_dbar_leibniz_rejects_antiholomorphic_slots(self, iwasawa):
        """Test ψ must be (1,0)-vector valued."""
        psi = VectorForm(3, {4: Form.generator(3, 3)})
        with pytest.raises(DegreeMismatch):
            dbar_leibniz(iwasawa, psi, Form.generator(3, 0))

    def test_result_carries_both_sides(self, iwasawa, rng):
        """Test a result carries both sides and their difference."""
        phi = random_beltrami(rng, 3, EXACT)
        alpha = random_form(rng, 3, EXACT)
        result = validate_identity(iwasawa, "bracket-formula", phi, phi, alpha)
        assert result.holds
        assert result.difference().is_zero()


class TestFuzzing:
    """Tests for seeded fuzzing over the catalog algebras."""

    @pytest.mark.parametrize("name", IDENTITY_NAMES)
    @pytest.mark.parametrize("algebra", ["torus3", "iwasawa", "abelian_i0"])
    def test_identity_holds(self, request, algebra, name):
        """Test the identity on seeded random exact inputs."""
        alg = request.getfixturevalue(algebra)
        summary = fuzz_identity(alg, name, cases=8, seed=7)
        assert summary.holds, summary.failure_detail
        assert summary.passed + summary.not_applicable == 8

    @pytest.mark.slow
    @pytest.mark.parametrize("name", IDENTITY_NAMES)
    def test_identity_holds_non_nilpotent(self, category_iii, name):
        """Test the identity on the non-nilpotent catalog algebra."""
        summary = fuzz_identity(category_iii, name, cases=20, seed=11)
        assert summary.holds, summary.failure_detail

    @pytest.mark.slow
    @pytest.mark.parametrize("name", IDENTITY_NAMES)
    @pytest.mark.parametrize("algebra", ["torus_2", "iwasawa", "torus_4"])
    def test_identity_holds_at_scale(self, algebra, name):
        """Test 500 exact cases per identity on complex dimensions 2, 3 and 4."""
        from deforge.catalog.builtin import builtin

        summary = fuzz_identity(builtin(algebra).algebra, name, cases=500, seed=2024)
        assert summary.holds, summary.failure_detail
        assert summary.passed + summary.not_applicable == 500

    def test_worker_count_does_not_change_outcome(self, iwasawa):
        """Test parallel fuzzing reproduces the sequential summary."""
        sequential = fuzz_identity(iwasawa, "twisted-extension", cases=6, seed=3, workers=1)
        parallel = fuzz_identity(iwasawa, "twisted-extension", cases=6, seed=3, workers=3)
        assert sequential == parallel

    def test_random_inputs_are_seeded(self):
        """Test the same seed gives the same random form."""
        a = random_form(np.random.default_rng(9), 3, EXACT)
        b = random_form(np.random.default_rng(9), 3, EXACT)
        assert a.equals(b)

    def test_unknown_identity(self, iwasawa):
        """Test fuzzing an unknown identity raises KeyError."""
        with pytest.raises(KeyError):
            fuzz_identity(iwasawa, "nonsense", cases=1, seed=0)
