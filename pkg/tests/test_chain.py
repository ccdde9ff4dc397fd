import numpy as np
import pytest
from scipy import stats

from collapsekit import (
    AlgebraicState,
    ChainSpec,
    compare_conventions,
    empirical_distribution,
    exact_chain_distribution,
    records,
    sample_chain_leftfold,
    sample_chain_tree,
    total_variation,
)
from collapsekit.measurement import observable

from conftest import PAULI_X, PAULI_Z

Z = observable("Z", PAULI_Z)
X = observable("X", PAULI_X)
KET0 = AlgebraicState.pure([1.0, 0.0])
MIXED = AlgebraicState.maximally_mixed(2)


class TestChainSpec:
    def test_cycling(self):
        spec = ChainSpec([Z, X], length=5)
        names = [o.name for o in spec.sequence()]
        assert names == ["Z", "X", "Z", "X", "Z"]

    def test_tree_from_convention(self):
        assert str(ChainSpec([Z], 3, "left_fold").tree()) == "((0 >o 1) >o 2)"
        assert str(ChainSpec([Z], 3, "right_fold").tree()) == "(0 >o (1 >o 2))"
        assert str(ChainSpec([Z], 3, "reverse_fold").tree()) == "((0 o< 1) o< 2)"

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            ChainSpec([Z], 0)
        with pytest.raises(ValueError):
            ChainSpec([], 3)
        with pytest.raises(ValueError):
            ChainSpec([Z], 3, "middle_out")


class TestDeterminism:
    def test_leftfold_byte_identical(self):
        spec = ChainSpec([Z, X], length=6, seed=42)
        a = sample_chain_leftfold(spec, MIXED, runs=500)
        b = sample_chain_leftfold(spec, MIXED, runs=500)
        assert np.array_equal(a, b)

    def test_seed_changes_output(self):
        a = sample_chain_leftfold(ChainSpec([Z, X], 6, seed=1), MIXED, 500)
        b = sample_chain_leftfold(ChainSpec([Z, X], 6, seed=2), MIXED, 500)
        assert not np.array_equal(a, b)

    def test_run_prefix_stability(self):
        # Run r's outcomes do not depend on how many runs are requested.
        spec = ChainSpec([Z, X], length=4, seed=7)
        small = sample_chain_leftfold(spec, MIXED, runs=100)
        large = sample_chain_leftfold(spec, MIXED, runs=1000)
        assert np.array_equal(small, large[:100])

    def test_tree_sampler_deterministic(self):
        spec = ChainSpec([Z, X], length=3, seed=11)
        a = sample_chain_tree(spec, MIXED, runs=500)
        b = sample_chain_tree(spec, MIXED, runs=500)
        assert np.array_equal(a, b)


class TestStatistics:
    def test_single_measurement_binomial(self):
        # X on |0>: each outcome is a fair coin; 3-sigma band on the count.
        runs = 20_000
        spec = ChainSpec([X], length=1, seed=3)
        outcomes = sample_chain_leftfold(spec, KET0, runs)
        count = int(outcomes.sum())
        sigma = np.sqrt(runs * 0.25)
        assert abs(count - runs / 2) < 3 * sigma

    def test_repeatability_same_observable(self):
        # Consecutive identical measurements repeat their outcome.
        spec = ChainSpec([Z], length=5, seed=9)
        outcomes = sample_chain_leftfold(spec, MIXED, runs=2000)
        assert np.all(outcomes == outcomes[:, :1])

    def test_leftfold_matches_exact(self):
        runs = 50_000
        spec = ChainSpec([Z, X, Z], length=3, seed=17)
        outcomes = sample_chain_leftfold(spec, KET0, runs)
        emp = empirical_distribution(outcomes, spec)
        exact = exact_chain_distribution(spec, KET0)
        assert total_variation(exact, emp) < 0.01

    def test_mechanism_equivalence_chi_square(self):
        # Step sampling and table sampling target the same distribution.
        runs = 50_000
        spec = ChainSpec([Z, X], length=3, seed=23)
        exact = exact_chain_distribution(spec, KET0)
        for sampler in (sample_chain_leftfold, sample_chain_tree):
            outcomes = sampler(spec, KET0, runs)
            emp = empirical_distribution(outcomes, spec)
            expected = exact.probabilities.ravel() * runs
            observed = emp.probabilities.ravel() * runs
            mask = expected > 1e-9
            chi2 = float(((observed[mask] - expected[mask]) ** 2
                          / expected[mask]).sum())
            dof = int(mask.sum()) - 1
            assert chi2 < stats.chi2.ppf(0.999, dof)

    def test_left_vs_right_fold_diverge(self):
        left = ChainSpec([Z, X, Z], 3, "left_fold")
        right = ChainSpec([Z, X, Z], 3, "right_fold")
        cmp = compare_conventions([left, right], KET0, runs=20_000)
        key = ("left_fold", "right_fold")
        assert cmp.exact_tv[key] > 0.1
        assert cmp.empirical_tv[key] > 0.05
        for v in cmp.exact_vs_empirical_tv.values():
            assert v < 0.02

    def test_commuting_reverse_fold_identical(self):
        a = observable("A", np.diag([1.0, 2.0]))
        b = observable("B", np.diag([3.0, 5.0]))
        rho = AlgebraicState(np.diag([0.3, 0.7]))
        fwd = exact_chain_distribution(ChainSpec([a, b, a], 3, "left_fold"), rho)
        rev = exact_chain_distribution(ChainSpec([a, b, a], 3, "reverse_fold"), rho)
        assert total_variation(fwd, rev) <= 1e-12


class TestRecords:
    def test_line_format(self):
        outcomes = np.array([[0, 1, 1], [1, 0, 0]])
        lines = [r.line() for r in records(outcomes)]
        assert lines == ["0\t0,1,1", "1\t1,0,0"]


class TestGuards:
    def test_leftfold_requires_leftfold_convention(self):
        with pytest.raises(ValueError):
            sample_chain_leftfold(ChainSpec([Z], 2, "right_fold"), MIXED, 10)

    def test_tree_length_limit(self):
        with pytest.raises(ValueError):
            exact_chain_distribution(ChainSpec([Z], 13), MIXED)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            sample_chain_leftfold(
                ChainSpec([Z], 2), AlgebraicState.maximally_mixed(3), 10
            )
