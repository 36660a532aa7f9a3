import pytest

from core.coeff_ring import PrimeField, RationalField, parse_ring
from core.eigenforms import common_eigenvector, eigenforms, operator_matrices, split_eigenspaces
from core.errors import HMFError, UnsupportedError
from core.ideals import ideal_from_label
from core.quad_field import QuadraticField
from core.stability import CandidateSpace, candidate_space, largest_stable_submodule


@pytest.fixture
def stable6(synthetic_run6):
    multiplier, basis, ctx, _ = synthetic_run6
    return largest_stable_submodule(candidate_space(multiplier, basis), ctx)


class TestEigenforms:
    """Splitting the synthetic stable space into eigenforms."""

    def test_two_normalised_eigenforms(self, stable6, synthetic_run6, eisenstein_pair6):
        _, _, ctx, square_basis = synthetic_run6
        forms = eigenforms(stable6, ctx, square_basis)
        assert len(forms) == 2
        p2 = ideal_from_label(stable6.classes.field, "2.0.1")
        by_eigenvalue = {form.ring.format(form.eigenvalues[p2]): form for form in forms}
        assert set(by_eigenvalue) == {"2", "-2"}
        assert all(form.normalized for form in forms)
        assert all(form.squaring == "verified" for form in forms)
        assert by_eigenvalue["2"].series == eisenstein_pair6[0]
        assert by_eigenvalue["-2"].series == eisenstein_pair6[1]

    def test_eigenvalues_at_other_primes(self, stable6, synthetic_run6):
        _, _, ctx, _ = synthetic_run6
        field = stable6.classes.field
        forms = eigenforms(stable6, ctx)
        p2, p3, p5 = (ideal_from_label(field, label) for label in ("2.0.1", "3.0.1", "5.1.1"))
        for form in forms:
            ring = form.ring
            assert form.eigenvalues[p3] == ring.from_int(2)
            assert form.eigenvalues[p5] == form.eigenvalues[p2]
            assert form.squaring == "unverified"

    def test_splitting_with_one_prime(self, stable6, synthetic_run6):
        _, _, ctx, _ = synthetic_run6
        p2 = ideal_from_label(stable6.classes.field, "2.0.1")
        matrices = operator_matrices(stable6, ctx, [p2])
        blocks = split_eigenspaces(stable6.ring, matrices, stable6.rank)
        assert sorted(len(block) for block in blocks) == [1, 1]

    def test_prime_three_does_not_split(self, stable6, synthetic_run6):
        """Both forms have eigenvalue 2 at p3, so T_p3 alone leaves one block."""
        _, _, ctx, _ = synthetic_run6
        p3 = ideal_from_label(stable6.classes.field, "3.0.1")
        blocks = split_eigenspaces(stable6.ring, operator_matrices(stable6, ctx, [p3]), stable6.rank)
        assert [len(block) for block in blocks] == [2]

    def test_reduction_mod_a_prime(self, synthetic_run6):
        """Modulo 5 the eigenvalues 2 and -2 stay apart."""
        multiplier, basis, ctx, _ = synthetic_run6
        f5 = PrimeField(5)
        reduced = [f.over(f5, lambda v: f.ring.reduce(v, f5)) for f in [multiplier] + basis]
        stable = largest_stable_submodule(candidate_space(reduced[0], reduced[1:]), ctx)
        assert stable.rank == 2
        p2 = ideal_from_label(stable.classes.field, "2.0.1")
        values = sorted(f5.format(form.eigenvalues[p2]) for form in eigenforms(stable, ctx))
        assert values == ["2", "3"]

    def test_empty_space(self, synthetic_run6):
        multiplier, basis, ctx, _ = synthetic_run6
        assert eigenforms(candidate_space(multiplier, []), ctx) == []

    def test_needs_a_prime_base_field(self, stable6, synthetic_run6):
        _, _, ctx, _ = synthetic_run6
        ring = parse_ring("nf:x^2-6")
        space = CandidateSpace(ring, stable6.classes, stable6.weight, stable6.bound, stable6.columns)
        with pytest.raises(UnsupportedError):
            eigenforms(space, ctx)

    def test_unstable_space_is_reported(self, synthetic_run6):
        multiplier, basis, ctx, _ = synthetic_run6
        with pytest.raises(HMFError):
            eigenforms(candidate_space(multiplier, basis), ctx)


class TestUnsplitBlocks:
    """Blocks on which no operator has an irreducible characteristic polynomial."""

    def test_jordan_block_has_one_eigenvector(self):
        ring = RationalField()
        p2 = ideal_from_label(QuadraticField(6), "2.0.1")
        two = ring.from_int(2)
        block = [[ring.one, ring.zero], [ring.zero, ring.one]]
        jordan = [[two, ring.one], [ring.zero, two]]
        vector, values, common = common_eigenvector(ring, {p2: jordan}, block)
        assert common == 1
        assert values == {p2: two}
        assert not ring.is_zero(vector[0])
        assert ring.is_zero(vector[1])

    def test_scalar_block(self):
        ring = RationalField()
        p2 = ideal_from_label(QuadraticField(6), "2.0.1")
        two = ring.from_int(2)
        block = [[ring.one, ring.zero], [ring.zero, ring.one]]
        _, values, common = common_eigenvector(ring, {p2: [[two, ring.zero], [ring.zero, two]]}, block)
        assert common == 2
        assert values == {p2: two}

    def test_prime_three_alone_keeps_the_block(self, stable6, synthetic_run6):
        """T_p3 is 2 on the whole space, so the block is reported whole instead of dropped."""
        _, _, ctx, _ = synthetic_run6
        p3 = ideal_from_label(stable6.classes.field, "3.0.1")
        forms = eigenforms(stable6, ctx, primes=[p3])
        assert len(forms) == 1
        form = forms[0]
        assert form.block_dimension == 2
        assert form.eigenvalues == {p3: form.ring.from_int(2)}

    def test_no_primes_at_all(self, stable6, synthetic_run6):
        _, _, ctx, _ = synthetic_run6
        forms = eigenforms(stable6, ctx, primes=[])
        assert [form.block_dimension for form in forms] == [2]
        assert forms[0].eigenvalues == {}
