"""Long-sequence measurement sampling under a chosen collapse convention.

Randomness comes from the counter-based Philox generator keyed by the chain
seed; run r owns the r-th row of the counter space, so runs are independent
substreams that can be evaluated in any order with byte-identical results.

Two mechanisms are provided: step-by-step sampling with a collapse of the
state after every outcome (the left-fold convention, constant memory in the
chain length), and direct sampling of the exact effect table for any
bracketing (bounded chain length).  For the left fold the two induce the same
distribution.

The per-step collapse tracks the PSD root S of the accumulated effect
(S <- sqrt(S P S)); the conditional state after k outcomes is S rho S up to
normalization.  This coincides with the Luders operation at the first step
and for chains of length two, and for longer chains it is the collapse whose
step-by-step law equals the left-fold effect table.  Conjugating with the raw
projector at every step instead would reproduce the right-fold table
(P_1 ... P_n ... P_1), not the left fold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .collapse_product import (
    BracketTree,
    _batched_psd_sqrt,
    JointDistribution,
    collapse_effect_tree,
    joint_distribution,
    left_fold_tree,
    reverse_fold_tree,
    right_fold_tree,
    total_variation,
)
from .config import DEFAULT, Tolerances
from .measurement import AlgebraicState, Observable

__all__ = [
    "ChainSpec",
    "OutcomeRecord",
    "sample_chain_leftfold",
    "sample_chain_tree",
    "exact_chain_distribution",
    "empirical_distribution",
    "compare_conventions",
    "ConventionComparison",
    "records",
]

CONVENTIONS = ("left_fold", "right_fold", "reverse_fold")
MAX_TREE_TUPLES = 10**7


@dataclass(frozen=True)
class ChainSpec:
    """A measurement sequence plus a collapse convention and an RNG seed.

    `observables` is cycled to reach `length` when shorter."""

    observables: list
    length: int
    convention: object = "left_fold"     # name or explicit BracketTree
    seed: int = 0

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("chain length must be >= 1")
        if not self.observables:
            raise ValueError("at least one observable required")
        if isinstance(self.convention, str) and self.convention not in CONVENTIONS:
            raise ValueError(f"unknown convention {self.convention!r}")

    def sequence(self) -> list:
        return [self.observables[k % len(self.observables)]
                for k in range(self.length)]

    def tree(self) -> BracketTree:
        if isinstance(self.convention, str):
            builder = {
                "left_fold": left_fold_tree,
                "right_fold": right_fold_tree,
                "reverse_fold": reverse_fold_tree,
            }[self.convention]
            return builder(self.length)
        tree = self.convention
        if tree.leaves != tuple(range(self.length)):
            raise ValueError("explicit tree does not match the chain length")
        return tree


@dataclass(frozen=True)
class OutcomeRecord:
    run_id: int
    outcomes: tuple

    def line(self) -> str:
        return f"{self.run_id}\t" + ",".join(str(i) for i in self.outcomes)


def records(outcomes: np.ndarray):
    """View a (runs, n) outcome-index array as OutcomeRecord objects."""
    for r, row in enumerate(outcomes):
        yield OutcomeRecord(r, tuple(int(v) for v in row))


def _uniform_block(seed: int, runs: int, n: int) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    return gen.random((runs, n))


def sample_chain_leftfold(spec: ChainSpec, rho0: AlgebraicState, runs: int,
                          tol: Tolerances = DEFAULT) -> np.ndarray:
    """Step-by-step sampling: at each step draw an outcome from the current
    conditional state's probabilities, then fold that outcome's projector into
    the accumulated effect root.

    Vectorized across runs; returns outcome indices of shape (runs, n)."""
    if spec.convention != "left_fold":
        raise ValueError("step sampling is defined for the left_fold convention")
    if runs < 1:
        raise ValueError("runs must be >= 1")
    sequence = spec.sequence()
    n = spec.length
    d = rho0.dim
    uniforms = _uniform_block(spec.seed, runs, n)
    # Accumulated effect roots S; the conditional state is S rho0 S up to
    # normalization, so probabilities read off as Tr[S rho0 S P_i].
    roots = np.broadcast_to(np.eye(d, dtype=np.complex128), (runs, d, d)).copy()
    outcomes = np.empty((runs, n), dtype=np.int64)
    for k, obs in enumerate(sequence):
        if obs.dim != d:
            raise ValueError("observable/state dimension mismatch")
        projs = np.stack(obs.projectors)
        conditional = roots @ rho0.density @ roots
        probs = np.einsum("rab,iba->ri", conditional, projs).real
        probs = np.clip(probs, 0.0, None)
        probs /= probs.sum(axis=1, keepdims=True)
        cum = np.cumsum(probs, axis=1)
        cum[:, -1] = 1.0     # uniforms are in [0, 1), so the last bin catches all
        idx = (uniforms[:, k, None] < cum).argmax(axis=1)
        outcomes[:, k] = idx
        roots = _batched_psd_sqrt(roots @ projs[idx] @ roots, tol)
    return outcomes


def exact_chain_distribution(spec: ChainSpec, rho0: AlgebraicState,
                             tol: Tolerances = DEFAULT) -> JointDistribution:
    """The exact joint distribution of the chain under its bracketing."""
    sequence = spec.sequence()
    count = 1
    for obs in sequence:
        count *= obs.n_outcomes
        if count > MAX_TREE_TUPLES:
            raise ValueError("effect table too large for tree evaluation")
    if spec.length > 12:
        raise ValueError("tree conventions are limited to chains of length <= 12")
    table = collapse_effect_tree(sequence, spec.tree(), tol)
    return joint_distribution(table, rho0, tol)


def sample_chain_tree(spec: ChainSpec, rho0: AlgebraicState, runs: int,
                      tol: Tolerances = DEFAULT) -> np.ndarray:
    """Sample outcome tuples directly from the bracketing's exact joint
    distribution (one uniform per run from the run's substream)."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    dist = exact_chain_distribution(spec, rho0, tol)
    flat = dist.probabilities.ravel()
    cum = np.cumsum(flat)
    cum[-1] = 1.0
    uniforms = _uniform_block(spec.seed, runs, 1)[:, 0]
    flat_idx = np.searchsorted(cum, uniforms, side="right")
    multi = np.unravel_index(flat_idx, dist.shape)
    return np.stack(multi, axis=1).astype(np.int64)


def empirical_distribution(outcomes: np.ndarray, spec: ChainSpec) -> JointDistribution:
    """Relative tuple frequencies of an outcome array on the chain's sample
    space."""
    sequence = spec.sequence()
    shape = tuple(obs.n_outcomes for obs in sequence)
    counts = np.zeros(shape)
    flat_idx = np.ravel_multi_index(tuple(outcomes.T), shape)
    np.add.at(counts.ravel(), flat_idx, 1.0)
    counts = counts.reshape(shape)
    return JointDistribution(
        [np.asarray(obs.sample_space) for obs in sequence],
        counts / outcomes.shape[0],
    )


@dataclass(frozen=True)
class ConventionComparison:
    conventions: list
    exact: list = field(repr=False)
    empirical: list = field(repr=False)
    exact_tv: dict
    empirical_tv: dict
    exact_vs_empirical_tv: dict


def compare_conventions(specs: list, rho0: AlgebraicState, runs: int,
                        tol: Tolerances = DEFAULT) -> ConventionComparison:
    """Exact and empirical total-variation distances between conventions.

    All specs must share the same observable sequence; each is sampled from
    its own table, then pairwise TV distances are reported for both the exact
    tables and the empirical frequencies."""
    base = specs[0].sequence()
    for s in specs[1:]:
        if [o.name for o in s.sequence()] != [o.name for o in base]:
            raise ValueError("conventions must share the observable sequence")
    exact = [exact_chain_distribution(s, rho0, tol) for s in specs]
    empirical = [
        empirical_distribution(sample_chain_tree(s, rho0, runs, tol), s)
        for s in specs
    ]
    names = [str(s.convention) for s in specs]
    exact_tv = {}
    empirical_tv = {}
    for i in range(len(specs)):
        for j in range(i + 1, len(specs)):
            key = (names[i], names[j])
            exact_tv[key] = total_variation(exact[i], exact[j])
            empirical_tv[key] = total_variation(empirical[i], empirical[j])
    vs = {names[i]: total_variation(exact[i], empirical[i])
          for i in range(len(specs))}
    return ConventionComparison(names, exact, empirical, exact_tv, empirical_tv, vs)
