"""Fidelity metrics for states, truth tables, and gate maps.

Four definitions are provided because they weight errors differently:
the Uhlmann state fidelity, the trace-distance fidelity (much harsher on
dephasing), the population-only truth-table overlap (blind to phases),
and two average-gate-fidelity formulas. The two-sided map formula
(`pedersen_fidelity`) accepts a non-unitary realized map, so leakage out
of the computational subspace is scored as population loss after
projection; it is the default gate score in the protocol layer because
it penalizes both population and phase errors.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .qcore import DensityMatrix

__all__ = [
    "TruthTable",
    "state_fidelity",
    "trace_distance",
    "trace_distance_fidelity",
    "truth_table",
    "truth_table_fidelity",
    "nielsen_fidelity",
    "pedersen_fidelity",
    "bell_state",
    "bell_fidelity",
    "conditional_phase",
]

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _density(rho) -> NDArray[np.complexfloating]:
    if isinstance(rho, DensityMatrix):
        return rho.array
    m = np.asarray(rho, dtype=complex)
    if m.ndim == 1:
        m = m / np.linalg.norm(m)
        return np.outer(m, m.conj())
    # Validate through the domain type so malformed input is rejected
    # with the same tolerances everywhere.
    return DensityMatrix(m).array


def _sqrtm_psd(m: NDArray) -> NDArray:
    """Square root of a Hermitian PSD matrix, eigenvalues clipped at -1e-12."""
    w, v = np.linalg.eigh(m)
    if w.min() < -1e-12:
        raise ValueError(f"matrix not positive semidefinite: min eigenvalue {w.min():.3e}")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def state_fidelity(rho, rho_ideal) -> float:
    """Uhlmann fidelity  Tr^2 sqrt(sqrt(rho_id) rho sqrt(rho_id)).

    Symmetric in its arguments; reduces to <psi|rho|psi> when the ideal
    state is pure.  Inputs may be kets, arrays, or DensityMatrix.
    """
    r = _density(rho)
    s = _density(rho_ideal)
    rs = _sqrtm_psd(s)
    inner = rs @ r @ rs
    # inner is PSD up to rounding; symmetrize before the root.
    inner = 0.5 * (inner + inner.conj().T)
    val = float(np.real(np.trace(_sqrtm_psd(inner)))) ** 2
    return min(max(val, 0.0), 1.0)


def trace_distance(rho, sigma) -> float:
    """(1/2) Tr |rho - sigma|."""
    d = _density(rho) - _density(sigma)
    w = np.linalg.eigvalsh(0.5 * (d + d.conj().T))
    return float(0.5 * np.sum(np.abs(w)))


def trace_distance_fidelity(rho, rho_ideal) -> float:
    """1 - trace distance; much more sensitive to dephasing than the
    Uhlmann fidelity."""
    return 1.0 - trace_distance(rho, rho_ideal)


@dataclass(frozen=True)
class TruthTable:
    """Input-output probability table; rows may sum to less than one when
    population leaks out of the computational subspace."""

    rows: NDArray[np.floating]

    def __post_init__(self):
        m = np.asarray(self.rows, dtype=float)
        object.__setattr__(self, "rows", m)
        if (m < -1e-12).any() or (m > 1.0 + 1e-10).any():
            raise ValueError("truth-table entries must lie in [0, 1]")
        if (m.sum(axis=1) > 1.0 + 1e-10).any():
            raise ValueError("truth-table rows must sum to at most 1")


def truth_table(gate_map: NDArray) -> TruthTable:
    """Probability table |U_ij|^2 of a (possibly non-unitary) gate map,
    one row per input basis state."""
    u = np.asarray(gate_map, dtype=complex)
    return TruthTable(np.abs(u.T) ** 2)


def truth_table_fidelity(realized: TruthTable | NDArray, ideal: TruthTable | NDArray) -> float:
    """Normalized population overlap Tr(U^T  Urealized)/d.

    Phase-blind by construction: a population-perfect gate with wrong
    phases scores 1 here.
    """
    r = realized.rows if isinstance(realized, TruthTable) else np.asarray(realized, float)
    i = ideal.rows if isinstance(ideal, TruthTable) else np.asarray(ideal, float)
    if r.shape != i.shape:
        raise ValueError(f"table shapes differ: {r.shape} vs {i.shape}")
    return float(np.trace(i.T @ r) / r.shape[0])


def nielsen_fidelity(channel, u_ideal: NDArray, n_qubits: int) -> float:
    """Average gate fidelity from the channel action on the Pauli basis.

    F = 1/(N+1) + 1/(N^2 (N+1)) sum_k Tr(U X_k^dag U^dag E(X_k)),
    N = 2^n_qubits, with X_k running over all Pauli products.  `channel`
    is a callable taking and returning an N x N matrix.
    """
    n = 2 ** n_qubits
    u = np.asarray(u_ideal, dtype=complex)
    total = 0.0
    for labels in itertools.product("IXYZ", repeat=n_qubits):
        x = _PAULI[labels[0]]
        for lab in labels[1:]:
            x = np.kron(x, _PAULI[lab])
        ex = np.asarray(channel(x), dtype=complex)
        total += float(np.real(np.trace(u @ x.conj().T @ u.conj().T @ ex)))
    # Trace growth on the identity flags an unphysical channel.
    tr_id = float(np.real(np.trace(np.asarray(channel(np.eye(n, dtype=complex))))))
    if tr_id > n + 1e-9:
        warnings.warn(f"channel grows trace: Tr E(I) = {tr_id:.6f} > {n}", stacklevel=2)
    return 1.0 / (n + 1) + total / (n * n * (n + 1))


def pedersen_fidelity(u_realized: NDArray, u_ideal: NDArray, dim: int | None = None) -> float:
    """Two-sided map fidelity

        F = [ |Tr(U^dag M)|^2 + Tr(U^dag M M^dag U) ] / (N (N + 1)),

    where M is the realized map projected onto the computational
    subspace (possibly non-unitary after leakage).  Equals 1 exactly when
    M = e^{i gamma} U; sensitive to both population loss and phase
    errors.
    """
    m = np.asarray(u_realized, dtype=complex)
    u = np.asarray(u_ideal, dtype=complex)
    if m.shape != u.shape:
        raise ValueError(f"map shapes differ: {m.shape} vs {u.shape}")
    n = dim or m.shape[0]
    ud_m = u.conj().T @ m
    val = (abs(np.trace(ud_m)) ** 2 + float(np.real(np.trace(ud_m @ ud_m.conj().T)))) / (n * (n + 1))
    return float(val)


_BELL = {
    "phi+": np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2),
    "phi-": np.array([1, 0, 0, -1], dtype=complex) / np.sqrt(2),
    "psi+": np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2),
    "psi-": np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2),
}


def bell_state(label: str) -> NDArray[np.complexfloating]:
    try:
        return _BELL[label.lower()].copy()
    except KeyError:
        raise KeyError(f"unknown Bell label {label!r}; use one of {sorted(_BELL)}") from None


def bell_fidelity(state_or_rho, label: str = "phi+") -> float:
    """Overlap <Psi| rho |Psi> with the named Bell state."""
    psi = bell_state(label)
    x = np.asarray(state_or_rho if not isinstance(state_or_rho, DensityMatrix)
                   else state_or_rho.array, dtype=complex)
    if x.ndim == 1:
        if x.size != 4:
            raise ValueError("Bell fidelity needs a two-qubit state")
        return float(abs(np.vdot(psi, x)) ** 2)
    if x.shape != (4, 4):
        raise ValueError("Bell fidelity needs a two-qubit density matrix")
    return float(np.real(psi.conj() @ x @ psi))


def conditional_phase(gate_map: NDArray) -> float:
    """Controlled phase arg(U11) + arg(U00) - arg(U01) - arg(U10) of a
    diagonal-dominant two-qubit map, wrapped to (-pi, pi]."""
    u = np.asarray(gate_map, dtype=complex)
    ph = np.angle(np.diag(u))
    val = ph[3] + ph[0] - ph[1] - ph[2]
    return float((val + np.pi) % (2.0 * np.pi) - np.pi)
