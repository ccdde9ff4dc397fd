"""System-plus-ancilla unitary models of sequential measurements.

A measurement is implemented by a controlled pointer shift: the unitary
U = sum_i P_i (x) S_i, where S_i is the ancilla transposition exchanging the
ready pointer |0> with the outcome pointer |i+1>.  On the defining slice this
gives U (|a_i> (x) |ready>) = |a_i> (x) |pointer_i>; the completion on the
unused subspace is unitary by construction and never affects the extracted
probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .collapse_product import JointDistribution
from .config import DEFAULT, Tolerances
from .measurement import Observable, VectorState
from .operator_core import DimensionMismatchError, max_entry_norm

__all__ = [
    "Instrument",
    "InstrumentModel",
    "JointInstrument",
    "build_instrument",
    "sequential_probabilities",
    "interference_comparison",
    "luders_duality_check",
    "build_joint_instrument",
    "joint_instrument_probabilities",
    "LudersDualityReport",
]


def _transposition(dim: int, k: int) -> np.ndarray:
    """Permutation matrix exchanging basis states 0 and k."""
    t = np.eye(dim, dtype=np.complex128)
    if k != 0:
        t[0, 0] = t[k, k] = 0.0
        t[0, k] = t[k, 0] = 1.0
    return t


@dataclass(frozen=True)
class Instrument:
    """One measurement instrument: observable, ancilla, pointer unitary."""

    observable: Observable
    ancilla_dim: int
    unitary: np.ndarray        # acts on system (x) ancilla

    @property
    def system_dim(self) -> int:
        return self.observable.dim

    @property
    def n_outcomes(self) -> int:
        return self.observable.n_outcomes

    def pointer_state(self, outcome: int | None) -> np.ndarray:
        """Ancilla basis vector: the ready state for None, else outcome i."""
        idx = 0 if outcome is None else outcome + 1
        e = np.zeros(self.ancilla_dim, dtype=np.complex128)
        e[idx] = 1.0
        return e


def build_instrument(a: Observable, ancilla_dim: int,
                     tol: Tolerances = DEFAULT) -> Instrument:
    """Controlled pointer-shift unitary for one observable.

    Requires ancilla_dim >= n_outcomes + 1 (ready pointer plus one pointer per
    outcome).  Degenerate eigenspaces share a pointer."""
    if ancilla_dim < a.n_outcomes + 1:
        raise ValueError(
            f"ancilla dim {ancilla_dim} < {a.n_outcomes + 1} (outcomes + ready)"
        )
    u = np.zeros((a.dim * ancilla_dim,) * 2, dtype=np.complex128)
    for i, proj in enumerate(a.projectors):
        u += np.kron(proj, _transposition(ancilla_dim, i + 1))
    residual = max_entry_norm(u.conj().T @ u - np.eye(u.shape[0]))
    if residual > tol.num:
        raise ValueError(f"pointer unitary residual {residual:.3e}")
    return Instrument(a, ancilla_dim, u)


@dataclass(frozen=True)
class InstrumentModel:
    """Two instruments applied in sequence to one system."""

    first: Instrument
    second: Instrument

    def __post_init__(self):
        if self.first.system_dim != self.second.system_dim:
            raise DimensionMismatchError("instruments act on different systems")

    @property
    def system_dim(self) -> int:
        return self.first.system_dim


def _full_evolution(model: InstrumentModel) -> np.ndarray:
    """U_B U_A on system (x) ancilla_A (x) ancilla_B."""
    d = model.system_dim
    da, db = model.first.ancilla_dim, model.second.ancilla_dim
    # Embed U_A (sys (x) ancA) and U_B (sys (x) ancB) into the full space.
    u_a = np.kron(model.first.unitary, np.eye(db))
    u_b = np.zeros((d * da * db,) * 2, dtype=np.complex128)
    for j, proj in enumerate(model.second.observable.projectors):
        u_b += np.kron(np.kron(proj, np.eye(da)), _transposition(db, j + 1))
    return u_b @ u_a


def sequential_probabilities(model: InstrumentModel, psi: VectorState,
                             tol: Tolerances = DEFAULT) -> JointDistribution:
    """Pointer-basis Born probabilities after both instruments fire.

    Prepares |psi> (x) |ready_A> (x) |ready_B>, applies U_B U_A, and reads the
    probability of pointer pair (i, j); the result coincides with the
    collapse-product joint for the same observables and state."""
    if psi.dim != model.system_dim:
        raise DimensionMismatchError("vector/system dimension mismatch")
    a, b = model.first, model.second
    total = np.kron(np.kron(psi.amplitudes, a.pointer_state(None)),
                    b.pointer_state(None))
    final = (_full_evolution(model) @ total).reshape(
        model.system_dim, a.ancilla_dim, b.ancilla_dim
    )
    probs = np.zeros((a.n_outcomes, b.n_outcomes))
    for i in range(a.n_outcomes):
        for j in range(b.n_outcomes):
            probs[i, j] = float(np.sum(np.abs(final[:, i + 1, j + 1]) ** 2))
    total_p = probs.sum()
    if abs(total_p - 1.0) > tol.num:
        raise ValueError(f"pointer probabilities sum to {total_p!r}")
    probs /= total_p
    axes = [np.asarray(a.observable.sample_space), np.asarray(b.observable.sample_space)]
    return JointDistribution(axes, probs)


def interference_comparison(model: InstrumentModel, psi: VectorState,
                            tol: Tolerances = DEFAULT) -> list:
    """Per outcome of the second observable: (P with the first measured,
    P with the first never made).

    The first column averages over the first instrument's results; the second
    is the bare Born probability.  The columns differ by interference terms
    unless the observables commute on the support of psi."""
    dist = sequential_probabilities(model, psi, tol)
    measured = dist.probabilities.sum(axis=0)
    b = model.second.observable
    unmeasured = np.array(
        [float(np.real(np.vdot(psi.amplitudes, q @ psi.amplitudes)))
         for q in b.projectors]
    )
    return [
        (float(b.sample_space[j]), float(measured[j]), float(unmeasured[j]))
        for j in range(b.n_outcomes)
    ]


@dataclass(frozen=True)
class LudersDualityReport:
    outcomes: np.ndarray
    transformed_measurement: np.ndarray   # sum_i P_i Q_j P_i evaluated in |psi>
    transformed_state: np.ndarray         # Q_j evaluated in sum_i P_i |psi><psi| P_i
    max_deviation: float


def luders_duality_check(a: Observable, b: Observable, psi: VectorState) -> LudersDualityReport:
    """Evaluate both sides of the transformed-measurement vs transformed-state
    identity; they agree by trace cyclicity, here computed independently."""
    if not (a.dim == b.dim == psi.dim):
        raise DimensionMismatchError("dimension mismatch")
    vec = psi.amplitudes
    rho = np.outer(vec, vec.conj())
    transformed_state = sum(
        p @ rho @ p for p in a.projectors
    )
    lhs = []
    rhs = []
    for q in b.projectors:
        transformed_meas = sum(p @ q @ p for p in a.projectors)
        lhs.append(float(np.real(np.vdot(vec, transformed_meas @ vec))))
        rhs.append(float(np.real(np.trace(q @ transformed_state))))
    lhs, rhs = np.array(lhs), np.array(rhs)
    return LudersDualityReport(
        outcomes=np.asarray(b.sample_space),
        transformed_measurement=lhs,
        transformed_state=rhs,
        max_deviation=float(np.abs(lhs - rhs).max()),
    )


@dataclass(frozen=True)
class JointInstrument:
    """Single instrument AB on the enlarged space whose pointer statistics
    reproduce a target joint distribution."""

    basis_tuples: list           # outcome tuple per enlarged basis vector
    primed_first: np.ndarray     # diagonal A'
    primed_second: np.ndarray    # diagonal B'
    psi: np.ndarray              # |psi_AB> with |<ab_ij|psi>|^2 = target
    unitary: np.ndarray          # U_AB on enlarged system (x) anc_A (x) anc_B
    ancilla_dims: tuple
    axes: list

    @property
    def enlarged_dim(self) -> int:
        return len(self.basis_tuples)


def build_joint_instrument(dist_target: JointDistribution,
                           ancilla_dims: tuple | None = None,
                           tol: Tolerances = DEFAULT) -> JointInstrument:
    """Enlarged-space realization of a target pair distribution.

    The enlarged system has one basis vector per outcome tuple; A' and B' are
    the commuting diagonals of the tuple coordinates; |psi_AB> carries the
    nonnegative square roots of the target probabilities (phases are free and
    fixed to be real); U_AB is the controlled double pointer shift."""
    if len(dist_target.axes) != 2:
        raise ValueError("joint instrument targets a pair distribution")
    dist_target.check(tol)
    na, nb = dist_target.shape
    if ancilla_dims is None:
        ancilla_dims = (na + 1, nb + 1)
    da, db = ancilla_dims
    if da < na + 1 or db < nb + 1:
        raise ValueError("ancilla too small for the outcome counts")
    tuples = dist_target.tuples()
    n_tuples = na * nb
    primed_a = np.array([t[0] for t in tuples])
    primed_b = np.array([t[1] for t in tuples])
    psi = np.sqrt(dist_target.probabilities.ravel()).astype(np.complex128)
    u = np.zeros((n_tuples * da * db,) * 2, dtype=np.complex128)
    for t_index in range(n_tuples):
        i, j = divmod(t_index, nb)
        basis_proj = np.zeros((n_tuples, n_tuples), dtype=np.complex128)
        basis_proj[t_index, t_index] = 1.0
        u += np.kron(np.kron(basis_proj, _transposition(da, i + 1)),
                     _transposition(db, j + 1))
    return JointInstrument(
        basis_tuples=tuples,
        primed_first=primed_a,
        primed_second=primed_b,
        psi=psi,
        unitary=u,
        ancilla_dims=(da, db),
        axes=[np.asarray(ax) for ax in dist_target.axes],
    )


def joint_instrument_probabilities(model: JointInstrument,
                                   tol: Tolerances = DEFAULT) -> JointDistribution:
    """Pointer statistics of the AB instrument applied to its own |psi_AB>."""
    da, db = model.ancilla_dims
    ready = np.zeros(da, dtype=np.complex128)
    ready[0] = 1.0
    ready_b = np.zeros(db, dtype=np.complex128)
    ready_b[0] = 1.0
    total = np.kron(np.kron(model.psi, ready), ready_b)
    final = (model.unitary @ total).reshape(model.enlarged_dim, da, db)
    na, nb = len(model.axes[0]), len(model.axes[1])
    probs = np.zeros((na, nb))
    for i in range(na):
        for j in range(nb):
            probs[i, j] = float(np.sum(np.abs(final[:, i + 1, j + 1]) ** 2))
    total_p = probs.sum()
    if abs(total_p - 1.0) > tol.num:
        raise ValueError(f"pointer probabilities sum to {total_p!r}")
    return JointDistribution(list(model.axes), probs / total_p)
