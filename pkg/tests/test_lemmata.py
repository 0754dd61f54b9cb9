"""Tests for the ∂∂̄-lemma checks and the classification of complex structures."""

import pytest

from deforge.calculus import LieAlgebraPresentation, partial
from deforge.exterior import Form
from deforge.lemmata import (
    Classification,
    LemmaKind,
    check_lemma,
    check_strong,
    classify,
    nilpotent_filtration,
)


def _w(n, *keys):
    result = Form.one(n)
    for g in keys:
        result = result.wedge(Form.generator(n, g))
    return result


@pytest.fixture
def mixed_nilpotent():
    """d w2 = w1^w~1, d w3 = w1^w2: nilpotent but neither abelian nor parallelizable."""
    return LieAlgebraPresentation("mixed", 3, [Form.zero(3), _w(3, 0, 3), _w(3, 0, 1)])


class TestIwasawaLemmata:
    """Tests for the lemma family on the Iwasawa algebra."""

    def test_mild_fails_with_witness(self, iwasawa):
        """Test the mild lemma fails on ∂(w3^w~1^w~2^w~3)."""
        verdict = check_lemma(iwasawa, LemmaKind.MILD)
        assert not verdict.holds
        assert verdict.bidegree == (2, 3)
        assert verdict.preimage.equals(_w(3, 2, 3, 4, 5))
        assert verdict.witness.equals(_w(3, 0, 1, 3, 4, 5))
        assert partial(iwasawa, verdict.preimage).equals(verdict.witness)
        assert verdict.consistent

    def test_dual_mild_holds(self, iwasawa):
        """Test the dual mild lemma holds."""
        verdict = check_lemma(iwasawa, LemmaKind.DUAL_MILD)
        assert verdict.holds
        assert verdict.witness is None

    def test_weak_holds(self, iwasawa):
        """Test the weak lemma holds."""
        assert check_lemma(iwasawa, "weak").holds

    def test_strong_fails(self, iwasawa):
        """Test the strong lemma fails and agrees with mild ∧ dual mild."""
        verdict = check_strong(iwasawa)
        assert not verdict.holds
        assert verdict.consistent
        assert verdict.details["mild"] is False
        assert verdict.details["dual_mild"] is True
        assert verdict.witness is not None

    def test_full_lemma_by_bidegree(self, iwasawa):
        """Test the full lemma holds at (1,1) and fails at (2,1)."""
        assert check_lemma(iwasawa, LemmaKind.FULL, (1, 1)).holds
        failing = check_lemma(iwasawa, LemmaKind.FULL, (2, 1))
        assert not failing.holds
        assert failing.witness.bidegree == (2, 1)

    def test_conclusion_names_hypotheses(self, iwasawa):
        """Test the nilmanifold statement lists the cohomologies it relies on."""
        text = check_lemma(iwasawa, LemmaKind.MILD).nilmanifold_conclusion
        assert "fails" in text
        assert "Bott-Chern cohomology" in text
        assert "∂ cohomology" in text


class TestOtherAlgebras:
    """Tests for the lemma family on the torus and abelian structures."""

    @pytest.mark.parametrize("kind", list(LemmaKind))
    def test_torus_all_hold(self, torus3, kind):
        """Test every lemma holds when all differentials vanish."""
        assert check_lemma(torus3, kind).holds

    def test_abelian_mild_without_dual(self, abelian_i0):
        """Test the abelian structure satisfies mild but not dual mild."""
        assert check_lemma(abelian_i0, LemmaKind.MILD).holds
        dual = check_lemma(abelian_i0, LemmaKind.DUAL_MILD)
        assert not dual.holds
        assert dual.witness.bidegree == (2, 3)

    @pytest.mark.parametrize("algebra", ["torus3", "iwasawa", "abelian_i0", "category_iii"])
    def test_strong_is_mild_and_dual(self, request, algebra):
        """Test strong = mild ∧ dual mild on every catalog algebra."""
        alg = request.getfixturevalue(algebra)
        strong = check_lemma(alg, LemmaKind.STRONG)
        mild = check_lemma(alg, LemmaKind.MILD)
        dual = check_lemma(alg, LemmaKind.DUAL_MILD)
        assert strong.holds == (mild.holds and dual.holds)
        assert strong.consistent and mild.consistent

    def test_invalid_kind(self, torus3):
        """Test unknown lemma names raise ValueError."""
        with pytest.raises(ValueError):
            check_lemma(torus3, "medium")


class TestClassification:
    """Tests for the classification of complex structures."""

    @pytest.mark.parametrize(
        "algebra,expected",
        [
            ("torus3", Classification.ABELIAN),
            ("iwasawa", Classification.COMPLEX_PARALLELIZABLE),
            ("abelian_i0", Classification.ABELIAN),
            ("category_iii", Classification.NON_NILPOTENT),
        ],
    )
    def test_catalog(self, request, algebra, expected):
        """Test the catalog algebras classify as recorded."""
        assert classify(request.getfixturevalue(algebra)) is expected

    def test_mixed_nilpotent(self, mixed_nilpotent):
        """Test a mixed structure is recognised as nilpotent."""
        assert classify(mixed_nilpotent) is Classification.NILPOTENT
        assert nilpotent_filtration(mixed_nilpotent) == [1, 2, 3]

    def test_non_nilpotent_filtration_stalls(self, category_iii):
        """Test the filtration stabilises below n for a non-nilpotent structure."""
        assert nilpotent_filtration(category_iii)[-1] < 3
