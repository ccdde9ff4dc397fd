"""The collapse product: joint-measurement effect tables for sequences of
observables under arbitrary bracketings.

For a pair, the effect at outcome tuple (alpha_i, beta_j) is the sequential
product P_i o P_j = P_i P_j P_i.  For longer sequences every bracket node
combines its two sub-tables entrywise with the sequential product
X o Y = sqrt(X) Y sqrt(X); the recursion keeps every intermediate PSD, and for
a bare pair of projectors it reduces to the formula above.  The product is
noncommutative and nonassociative, so the bracketing is explicit input: a
binary tree whose leaves are the measurement sequence in order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import DEFAULT, Tolerances
from .measurement import (
    POVM,
    AlgebraicState,
    Observable,
    _clamp_probabilities,
)
from .operator_core import (
    DimensionMismatchError,
    NotPositiveSemidefiniteError,
    max_entry_norm,
)

__all__ = [
    "BracketTree",
    "Leaf",
    "Node",
    "JointEffectTable",
    "JointDistribution",
    "sequential_product",
    "collapse_effect_pair",
    "reverse_collapse_pair",
    "collapse_effect_tree",
    "enumerate_bracketings",
    "left_fold_tree",
    "right_fold_tree",
    "reverse_fold_tree",
    "q_relative_collapse",
    "joint_distribution",
    "catalan",
]


# --------------------------------------------------------------------------
# bracket trees
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Leaf:
    index: int

    @property
    def leaves(self):
        return (self.index,)

    def __str__(self):
        return str(self.index)


@dataclass(frozen=True)
class Node:
    left: "BracketTree"
    right: "BracketTree"
    # When set, this node combines operands in reverse order (right o left)
    # while keeping the axis order fixed.
    reverse: bool = False

    @property
    def leaves(self):
        return self.left.leaves + self.right.leaves

    def __str__(self):
        op = "o<" if self.reverse else ">o"
        return f"({self.left} {op} {self.right})"


BracketTree = Leaf | Node


def catalan(n: int) -> int:
    """Number of bracketings of an n-term product: (2n-2)!/((n-1)!n!)."""
    return math.factorial(2 * n - 2) // (math.factorial(n - 1) * math.factorial(n))


def enumerate_bracketings(n: int) -> list:
    """All full binary trees over leaves 0..n-1 in order (Catalan many)."""
    if not 1 <= n <= 12:
        raise ValueError("n must be between 1 and 12")

    @lru_cache(maxsize=None)
    def build(lo: int, hi: int):
        if hi - lo == 1:
            return (Leaf(lo),)
        trees = []
        for split in range(lo + 1, hi):
            for left in build(lo, split):
                for right in build(split, hi):
                    trees.append(Node(left, right))
        return tuple(trees)

    result = list(build(0, n))
    assert len(result) == catalan(n)
    return result


def left_fold_tree(n: int) -> BracketTree:
    """((...((1,2),3)...),n): collapse after every measurement."""
    if n < 1:
        raise ValueError("n must be >= 1")
    tree: BracketTree = Leaf(0)
    for k in range(1, n):
        tree = Node(tree, Leaf(k))
    return tree


def right_fold_tree(n: int) -> BracketTree:
    """(1,(2,...(n-1,n)...)): one combined collapse after the last-but-one
    measurement."""
    if n < 1:
        raise ValueError("n must be >= 1")
    tree: BracketTree = Leaf(n - 1)
    for k in range(n - 2, -1, -1):
        tree = Node(Leaf(k), tree)
    return tree


def reverse_fold_tree(n: int) -> BracketTree:
    """Left fold with the reverse product at every node: combined collapse in
    time-reverse order."""
    if n < 1:
        raise ValueError("n must be >= 1")
    tree: BracketTree = Leaf(0)
    for k in range(1, n):
        tree = Node(tree, Leaf(k), reverse=True)
    return tree


# --------------------------------------------------------------------------
# effect tables
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class JointEffectTable:
    """Operator-valued table over a product sample space.

    `axes` holds one sample-space array per measurement (in sequence order);
    `effects` has shape (*outcome_counts, dim, dim).  Entries are PSD and sum
    to the identity.
    """

    axes: list
    effects: np.ndarray

    @property
    def dim(self) -> int:
        return self.effects.shape[-1]

    @property
    def shape(self) -> tuple:
        return self.effects.shape[:-2]

    def flat_effects(self) -> np.ndarray:
        return self.effects.reshape(-1, self.dim, self.dim)

    def tuples(self) -> list:
        """Outcome tuples in row-major order matching flat_effects()."""
        grids = np.meshgrid(*self.axes, indexing="ij")
        return list(zip(*(g.ravel().tolist() for g in grids)))

    def total(self) -> np.ndarray:
        return self.flat_effects().sum(axis=0)

    def min_eigenvalue(self) -> float:
        flat = self.flat_effects()
        herm = 0.5 * (flat + np.conj(np.swapaxes(flat, -1, -2)))
        return float(np.linalg.eigvalsh(herm)[..., 0].min())

    def check(self, tol: Tolerances = DEFAULT) -> None:
        if self.min_eigenvalue() < -tol.psd:
            raise NotPositiveSemidefiniteError(
                f"effect eigenvalue {self.min_eigenvalue():.3e}"
            )
        if max_entry_norm(self.total() - np.eye(self.dim)) > tol.num:
            raise ValueError("effects do not sum to the identity")


def _batched_psd_sqrt(stack: np.ndarray, tol: Tolerances) -> np.ndarray:
    """PSD square root of a stack of Hermitian matrices, clamping eigenvalues
    in [-tol.psd, 0) to zero."""
    herm = 0.5 * (stack + np.conj(np.swapaxes(stack, -1, -2)))
    vals, vecs = np.linalg.eigh(herm)
    if vals.min() < -tol.psd:
        raise NotPositiveSemidefiniteError(
            f"eigenvalue {vals.min():.3e} below -{tol.psd:.1e}"
        )
    root_vals = np.sqrt(np.where(vals < tol.psd, 0.0, vals))
    return np.einsum("...ik,...k,...jk->...ij", vecs, root_vals, vecs.conj())


def sequential_product(x, y, tol: Tolerances = DEFAULT) -> np.ndarray:
    """X o Y = sqrt(X) Y sqrt(X) for PSD X, Hermitian Y."""
    from .operator_core import as_matrix, psd_sqrt

    mx, my = as_matrix(x), as_matrix(y)
    if mx.shape != my.shape:
        raise DimensionMismatchError("operand dimension mismatch")
    root = psd_sqrt(mx, tol)
    return root @ my @ root


def _combine(left: JointEffectTable, right: JointEffectTable,
             reverse: bool, tol: Tolerances) -> JointEffectTable:
    """Entrywise sequential product of two tables; axis order is always
    (left axes, right axes) regardless of operand reversal."""
    lflat = left.flat_effects()
    rflat = right.flat_effects()
    if left.dim != right.dim:
        raise DimensionMismatchError("table dimension mismatch")
    if reverse:
        roots = _batched_psd_sqrt(rflat, tol)          # sqrt over right operand
        out = np.einsum("rab,lbc,rcd->lrad", roots, lflat, roots)
    else:
        roots = _batched_psd_sqrt(lflat, tol)
        out = np.einsum("lab,rbc,lcd->lrad", roots, rflat, roots)
    shape = left.shape + right.shape + (left.dim, left.dim)
    return JointEffectTable(list(left.axes) + list(right.axes), out.reshape(shape))


def _leaf_table(obs: Observable) -> JointEffectTable:
    effects = np.stack(obs.projectors).astype(np.complex128)
    return JointEffectTable([np.asarray(obs.sample_space)], effects)


def collapse_effect_pair(a: Observable, b: Observable,
                         tol: Tolerances = DEFAULT) -> JointEffectTable:
    """Pair table: effect(alpha_i, beta_j) = P_i P_j P_i."""
    if a.dim != b.dim:
        raise DimensionMismatchError("observable dimension mismatch")
    return _combine(_leaf_table(a), _leaf_table(b), reverse=False, tol=tol)


def reverse_collapse_pair(a: Observable, b: Observable,
                          tol: Tolerances = DEFAULT) -> JointEffectTable:
    """Reverse pair table: effect(alpha_i, beta_j) = P_j P_i P_j, axes kept in
    (A, B) order."""
    if a.dim != b.dim:
        raise DimensionMismatchError("observable dimension mismatch")
    return _combine(_leaf_table(a), _leaf_table(b), reverse=True, tol=tol)


def collapse_effect_tree(observables: list, tree: BracketTree,
                         tol: Tolerances = DEFAULT) -> JointEffectTable:
    """Effect table for an n-fold collapse product under a given bracketing.

    Tree leaves must carry 0..n-1 in left-to-right order.  Each node is
    evaluated as the entrywise sequential product of its sub-tables (or the
    reverse product if the node is flagged)."""
    n = len(observables)
    if tree.leaves != tuple(range(n)):
        raise ValueError(
            f"tree leaves {tree.leaves} do not match observables 0..{n - 1}"
        )
    dims = {o.dim for o in observables}
    if len(dims) != 1:
        raise DimensionMismatchError("observables act on different dimensions")

    def eval_tree(t: BracketTree) -> JointEffectTable:
        if isinstance(t, Leaf):
            return _leaf_table(observables[t.index])
        return _combine(eval_tree(t.left), eval_tree(t.right), t.reverse, tol)

    return eval_tree(tree)


def q_relative_collapse(e_a: POVM, e_b: POVM, kappa_a, kappa_b, qs,
                        tol: Tolerances = DEFAULT) -> JointEffectTable:
    """Collapse product of two POVMs relative to a shared generating set
    {Q_lambda}: effect(X, Y) = sum_{lm, mu} kA[lm,X] kB[mu,Y] sqrt(Q_lm) Q_mu sqrt(Q_lm).
    """
    ka = np.asarray(kappa_a, dtype=float)
    kb = np.asarray(kappa_b, dtype=float)
    stack = np.stack([np.asarray(q, dtype=np.complex128) for q in qs])
    dim = stack.shape[-1]
    if ka.shape != (len(qs), len(e_a.sample_points)):
        raise ValueError("kappa_A table shape mismatch")
    if kb.shape != (len(qs), len(e_b.sample_points)):
        raise ValueError("kappa_B table shape mismatch")
    if ka.min() < 0 or kb.min() < 0:
        raise ValueError("negative kappa entry")
    for kap in (ka, kb):
        if np.any(np.abs(kap.sum(axis=1) - 1.0) > tol.num):
            raise ValueError("kappa rows must be normalized measures")
    if max_entry_norm(stack.sum(axis=0) - np.eye(dim)) > tol.num:
        raise ValueError("Q operators do not sum to the identity")
    # Both POVMs must actually be the stated mixtures of the shared Q set.
    for povm, kap, label in ((e_a, ka, "A"), (e_b, kb, "B")):
        rebuilt = np.einsum("lx,lab->xab", kap, stack)
        given = np.stack([np.asarray(e, dtype=np.complex128) for e in povm.effects])
        if max_entry_norm(rebuilt - given) > tol.num:
            raise ValueError(f"POVM {label} is not the stated mixture of the Q set")
    roots = _batched_psd_sqrt(stack, tol)
    core = np.einsum("lab,mbc,lcd->lmad", roots, stack, roots)
    out = np.einsum("lx,my,lmab->xyab", ka, kb, core)
    axes = [np.arange(len(e_a.sample_points)), np.arange(len(e_b.sample_points))]
    return JointEffectTable(axes, out)


# --------------------------------------------------------------------------
# joint distributions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class JointDistribution:
    """Probability table over a product sample space."""

    axes: list
    probabilities: np.ndarray

    @property
    def shape(self) -> tuple:
        return self.probabilities.shape

    def marginal(self, axis_indices) -> "JointDistribution":
        """Marginal distribution over the given axes (kept in order)."""
        keep = sorted(axis_indices)
        drop = tuple(i for i in range(len(self.axes)) if i not in keep)
        return JointDistribution(
            [self.axes[i] for i in keep], self.probabilities.sum(axis=drop)
        )

    def tuples(self) -> list:
        grids = np.meshgrid(*self.axes, indexing="ij")
        return list(zip(*(g.ravel().tolist() for g in grids)))

    def check(self, tol: Tolerances = DEFAULT) -> None:
        if self.probabilities.min() < 0:
            raise ValueError("negative probability entry")
        if abs(self.probabilities.sum() - 1.0) > tol.num:
            raise ValueError("probabilities do not sum to 1")


def joint_distribution(effects: JointEffectTable, rho: AlgebraicState,
                       tol: Tolerances = DEFAULT) -> JointDistribution:
    """p(tuple) = Tr[rho effect(tuple)], clamped and renormalized."""
    if effects.dim != rho.dim:
        raise DimensionMismatchError("effects/state dimension mismatch")
    raw = np.einsum("ab,...ba->...", rho.density, effects.effects).real
    probs = _clamp_probabilities(raw.ravel(), tol).reshape(raw.shape)
    return JointDistribution(list(effects.axes), probs)


def total_variation(p: JointDistribution, q: JointDistribution) -> float:
    """TV distance between two distributions on the same sample space."""
    if p.shape != q.shape:
        raise ValueError("shape mismatch")
    return 0.5 * float(np.abs(p.probabilities - q.probabilities).sum())
