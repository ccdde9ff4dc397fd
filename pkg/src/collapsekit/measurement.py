"""Observables, states, PVMs, POVMs, and single-measurement machinery.

An observable is a self-adjoint operator presented through its spectral
decomposition: the distinct eigenvalues form the sample space and each
carries an orthogonal projector.  States are density operators; the map
X -> Tr[rho X] satisfies the usual algebraic state axioms (complex
linearity, positivity on X^H X, adjoint compatibility, unit normalization).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT, Tolerances
from .operator_core import (
    DimensionMismatchError,
    NotPositiveSemidefiniteError,
    SpectralDecomposition,
    as_matrix,
    is_psd,
    max_entry_norm,
    require_hermitian,
    spectral_decompose,
)

__all__ = [
    "ZeroProbabilityOutcomeError",
    "Observable",
    "AlgebraicState",
    "VectorState",
    "PVM",
    "POVM",
    "observable",
    "probability_density",
    "characteristic_function",
    "moments",
    "luders_collapse",
    "pvm_from_observable",
    "discretize_observable",
    "povm_from_mixture",
]


class ZeroProbabilityOutcomeError(ValueError):
    """Conditioning on an outcome whose probability is numerically zero."""


@dataclass(frozen=True)
class Observable:
    """A named self-adjoint operator with sample space = distinct eigenvalues."""

    name: str
    decomposition: SpectralDecomposition

    @property
    def dim(self) -> int:
        return self.decomposition.dim

    @property
    def sample_space(self) -> np.ndarray:
        return self.decomposition.eigenvalues

    @property
    def projectors(self) -> list:
        return self.decomposition.projectors

    @property
    def n_outcomes(self) -> int:
        return len(self.decomposition.eigenvalues)

    def matrix(self) -> np.ndarray:
        return self.decomposition.reconstruct()


def observable(name, matrix, degeneracy_gap: float = 1e-8, tol: Tolerances = DEFAULT) -> Observable:
    """Build an Observable from a Hermitian matrix literal."""
    return Observable(name, spectral_decompose(matrix, degeneracy_gap, tol))


@dataclass(frozen=True)
class AlgebraicState:
    """Density operator rho_hat realizing the state rho(X) = Tr[rho_hat X]."""

    density: np.ndarray
    tol: Tolerances = field(default=DEFAULT, compare=False)

    def __post_init__(self):
        rho = require_hermitian(self.density, self.tol)
        vals = np.linalg.eigvalsh(rho)
        if vals[0] < -self.tol.psd:
            raise NotPositiveSemidefiniteError(
                f"density has eigenvalue {vals[0]:.3e}"
            )
        tr = float(np.trace(rho).real)
        if abs(tr - 1.0) > self.tol.num:
            raise ValueError(f"density trace {tr!r} != 1")
        object.__setattr__(self, "density", rho)

    @property
    def dim(self) -> int:
        return self.density.shape[0]

    def expect(self, x) -> complex:
        """rho(X) = Tr[rho_hat X]."""
        m = as_matrix(x)
        if m.shape[0] != self.dim:
            raise DimensionMismatchError("operator/state dimension mismatch")
        return complex(np.trace(self.density @ m))

    @classmethod
    def maximally_mixed(cls, dim: int, tol: Tolerances = DEFAULT) -> "AlgebraicState":
        return cls(np.eye(dim) / dim, tol)

    @classmethod
    def pure(cls, amplitudes, tol: Tolerances = DEFAULT) -> "AlgebraicState":
        psi = np.asarray(amplitudes, dtype=np.complex128).ravel()
        return cls(np.outer(psi, psi.conj()), tol)


@dataclass(frozen=True)
class VectorState:
    """Normalized Hilbert-space vector; its pure state is <psi|X|psi>."""

    amplitudes: np.ndarray
    tol: Tolerances = field(default=DEFAULT, compare=False)

    def __post_init__(self):
        psi = np.asarray(self.amplitudes, dtype=np.complex128).ravel()
        norm = float(np.linalg.norm(psi))
        if abs(norm - 1.0) > self.tol.num:
            raise ValueError(f"vector norm {norm!r} != 1")
        object.__setattr__(self, "amplitudes", psi)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def to_state(self) -> AlgebraicState:
        return AlgebraicState.pure(self.amplitudes, self.tol)


@dataclass(frozen=True)
class PVM:
    """Projection-valued measure over opaque sample points."""

    sample_points: list
    projectors: list

    def __post_init__(self):
        if len(self.sample_points) != len(self.projectors):
            raise ValueError("sample point / projector count mismatch")

    def check(self, tol: Tolerances = DEFAULT) -> None:
        dim = self.projectors[0].shape[0]
        total = np.zeros((dim, dim), dtype=np.complex128)
        for i, p in enumerate(self.projectors):
            total += p
            for j, q in enumerate(self.projectors):
                target = p if i == j else 0.0
                if max_entry_norm(p @ q - target) > tol.num:
                    raise ValueError(f"projectors {i},{j} fail orthogonality")
        if max_entry_norm(total - np.eye(dim)) > tol.num:
            raise ValueError("projectors do not sum to identity")


@dataclass(frozen=True)
class POVM:
    """Positive operator-valued measure: PSD effects summing to the identity.

    Sample points are opaque labels; additivity over disjoint unions of a
    finite sample space holds by construction.
    """

    sample_points: list
    effects: list

    def __post_init__(self):
        if len(self.sample_points) != len(self.effects):
            raise ValueError("sample point / effect count mismatch")

    def check(self, tol: Tolerances = DEFAULT) -> None:
        dim = self.effects[0].shape[0]
        total = np.zeros((dim, dim), dtype=np.complex128)
        for k, e in enumerate(self.effects):
            if not is_psd(e, tol):
                raise NotPositiveSemidefiniteError(f"effect {k} is not PSD")
            total += e
        if max_entry_norm(total - np.eye(dim)) > tol.num:
            raise ValueError("effects do not sum to identity")


def _clamp_probabilities(raw: np.ndarray, tol: Tolerances) -> np.ndarray:
    """Clamp tiny negatives from floating eigensolves to 0 and renormalize."""
    if raw.min() < -tol.num:
        raise ValueError(f"probability {raw.min():.3e} below -{tol.num:.1e}")
    p = np.clip(raw, 0.0, None)
    total = p.sum()
    if abs(total - 1.0) > tol.num:
        raise ValueError(f"probabilities sum to {total!r}")
    return p / total


def probability_density(
    a: Observable, rho: AlgebraicState, tol: Tolerances = DEFAULT
) -> list:
    """Discrete probability table [(alpha_i, Tr[rho P_i])] over the sample space."""
    if a.dim != rho.dim:
        raise DimensionMismatchError("observable/state dimension mismatch")
    raw = np.array([rho.expect(p).real for p in a.projectors])
    probs = _clamp_probabilities(raw, tol)
    return list(zip(a.sample_space.tolist(), probs.tolist()))


def characteristic_function(
    a: Observable, rho: AlgebraicState, lambdas, tol: Tolerances = DEFAULT
) -> np.ndarray:
    """phi(lambda) = sum_i exp(i lambda alpha_i) Tr[rho P_i]; phi(0) = 1."""
    density = probability_density(a, rho, tol)
    alphas = np.array([u for u, _ in density])
    probs = np.array([p for _, p in density])
    lam = np.asarray(lambdas, dtype=float)
    return np.exp(1j * np.outer(lam, alphas)) @ probs


def moments(
    a: Observable, rho: AlgebraicState, n_max: int, tol: Tolerances = DEFAULT
) -> np.ndarray:
    """Moments [rho(A^0), ..., rho(A^n_max)] via the spectral sum."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    density = probability_density(a, rho, tol)
    alphas = np.array([u for u, _ in density])
    probs = np.array([p for _, p in density])
    return np.array([float(np.sum(alphas**n * probs)) for n in range(n_max + 1)])


def luders_collapse(
    rho: AlgebraicState, a: Observable, outcome_index: int, tol: Tolerances = DEFAULT
) -> AlgebraicState:
    """State update rho -> P_i rho P_i / Tr[rho P_i] after outcome i."""
    if a.dim != rho.dim:
        raise DimensionMismatchError("observable/state dimension mismatch")
    p_i = a.projectors[outcome_index]
    prob = rho.expect(p_i).real
    if prob <= tol.prob:
        raise ZeroProbabilityOutcomeError(
            f"outcome {outcome_index} has probability {prob:.3e}"
        )
    collapsed = p_i @ rho.density @ p_i / prob
    return AlgebraicState(collapsed, tol)


def pvm_from_observable(a: Observable, partition: list, tol: Tolerances = DEFAULT) -> PVM:
    """Coarse-grain the eigenprojectors of `a` over a partition of its sample
    space; each partition cell becomes one sample point with the summed
    projector."""
    covered = []
    projectors = []
    points = []
    sample = a.sample_space
    for cell in partition:
        cell_vals = list(cell)
        idx = []
        for v in cell_vals:
            hits = np.flatnonzero(np.isclose(sample, v, rtol=0.0, atol=tol.num))
            if hits.size != 1:
                raise ValueError(f"partition value {v!r} does not match one eigenvalue")
            idx.append(int(hits[0]))
        if set(idx) & set(covered):
            raise ValueError("partition cells overlap")
        covered.extend(idx)
        proj = np.zeros((a.dim, a.dim), dtype=np.complex128)
        for i in idx:
            proj += a.projectors[i]
        projectors.append(proj)
        points.append(tuple(sorted(sample[i] for i in idx)))
    if len(covered) != a.n_outcomes:
        raise ValueError("partition does not cover the sample space")
    pvm = PVM(points, projectors)
    pvm.check(tol)
    return pvm


def discretize_observable(
    a: Observable, thresholds, tol: Tolerances = DEFAULT
) -> Observable:
    """Heaviside discretization: new value of eigenvalue alpha is the number
    of thresholds strictly below it.  Empty bins are dropped from the sample
    space."""
    thr = np.asarray(thresholds, dtype=float)
    if np.any(np.diff(thr) <= 0):
        raise ValueError("thresholds must be strictly increasing")
    for t in thr:
        if np.any(np.abs(a.sample_space - t) <= tol.num):
            raise ValueError(f"threshold {t!r} coincides with an eigenvalue")
    bins = {}
    for alpha, proj in zip(a.sample_space, a.projectors):
        v = int(np.sum(thr < alpha))
        bins.setdefault(v, []).append(proj)
    values = sorted(bins)
    projectors = [sum(bins[v][1:], bins[v][0].copy()) for v in values]
    decomp = SpectralDecomposition(np.array(values, dtype=float), projectors)
    return Observable(f"{a.name}_d", decomp)


def povm_from_mixture(kappas, qs, sample_points=None, tol: Tolerances = DEFAULT) -> POVM:
    """Build a POVM E(X) = sum_lambda kappa_lambda(X) Q_lambda.

    `kappas` is a (n_lambda, n_points) table of nonnegative reals whose rows
    are normalized measures; the PSD operators `qs` must sum to the identity,
    which is sufficient for the effects to normalize.
    """
    kap = np.asarray(kappas, dtype=float)
    if kap.ndim != 2 or kap.shape[0] != len(qs):
        raise ValueError("kappa table shape does not match the Q list")
    if kap.min() < 0:
        raise ValueError("negative kappa entry")
    row_sums = kap.sum(axis=1)
    if np.any(np.abs(row_sums - 1.0) > tol.num):
        raise ValueError("each kappa row must be a normalized measure")
    qs = [require_hermitian(q, tol) for q in qs]
    dim = qs[0].shape[0]
    for k, q in enumerate(qs):
        if not is_psd(q, tol):
            raise NotPositiveSemidefiniteError(f"Q_{k} is not PSD")
    total_q = sum(qs[1:], qs[0].copy())
    if max_entry_norm(total_q - np.eye(dim)) > tol.num:
        raise ValueError("Q operators do not sum to the identity")
    n_points = kap.shape[1]
    if sample_points is None:
        sample_points = list(range(n_points))
    if len(sample_points) != n_points:
        raise ValueError("sample point count does not match the kappa table")
    effects = []
    for x in range(n_points):
        e = np.zeros((dim, dim), dtype=np.complex128)
        for lam in range(len(qs)):
            e += kap[lam, x] * qs[lam]
        effects.append(e)
    povm = POVM(list(sample_points), effects)
    povm.check(tol)
    return povm
