"""Dense complex linear algebra and time-evolution engines.

Everything here works on plain complex ndarrays in a fixed product basis.
Hamiltonians are stored divided by hbar, in rad/us, and times are in us,
so no physical constant ever appears inside a solver.  Closed-system
evolution uses an adaptive high-order Runge-Kutta integrator; piecewise
constant schedules can alternatively be propagated with exact
eigendecomposition exponentials.  Decay is modelled by default as a
non-Hermitian norm-loss term, with a dense Lindblad solver available for
small systems.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import solve_ivp
from scipy.linalg import expm

__all__ = [
    "StateVector",
    "OperatorMatrix",
    "DensityMatrix",
    "HamiltonianModel",
    "Trajectory",
    "EvolveError",
    "eig_hermitian",
    "evolve",
    "propagator",
    "evolve_open",
    "evolve_lindblad",
]

HERMITICITY_TOL = 1e-12
NORM_TOL = 1e-10
LINDBLAD_DIM_LIMIT = 256


class EvolveError(RuntimeError):
    """Raised when the integrator cannot reach the end of the time span."""

    def __init__(self, message: str, last_time: float):
        super().__init__(message)
        self.last_time = last_time


def _as_array(x) -> NDArray[np.complexfloating]:
    if isinstance(x, (StateVector, OperatorMatrix, DensityMatrix)):
        return x.array
    return np.asarray(x, dtype=complex)


# ======================================================================
# Domain types
# ======================================================================


@dataclass(frozen=True)
class StateVector:
    """A pure state over a product basis.

    The norm must be 1 (within 1e-10) for closed-system states; states
    produced by non-Hermitian evolution may have norm in (0, 1], the
    missing norm being the accumulated decay probability.
    """

    amplitudes: NDArray[np.complexfloating]
    basis_labels: tuple = ()

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        object.__setattr__(self, "amplitudes", amps)
        n = self.norm
        if not (0.0 < n <= 1.0 + NORM_TOL):
            raise ValueError(f"state norm {n} outside (0, 1]")
        if self.basis_labels and len(self.basis_labels) != amps.size:
            raise ValueError("basis label count does not match amplitude count")

    @property
    def array(self) -> NDArray[np.complexfloating]:
        return self.amplitudes

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def require_normalized(self, tol: float = NORM_TOL) -> None:
        if abs(self.norm - 1.0) > tol:
            raise ValueError(f"state not normalized: |norm - 1| = {abs(self.norm - 1.0):.3e}")


@dataclass(frozen=True)
class OperatorMatrix:
    """A square complex operator with an optional Hermiticity guarantee."""

    entries: NDArray[np.complexfloating]
    hermitian: bool = False

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be square, got shape {m.shape}")
        object.__setattr__(self, "entries", m)
        if self.hermitian:
            asym = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
            if asym >= HERMITICITY_TOL:
                raise ValueError(f"operator declared Hermitian but max |A - A^dag| = {asym:.3e}")

    @property
    def array(self) -> NDArray[np.complexfloating]:
        return self.entries

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class DensityMatrix:
    """A density operator: Hermitian, unit trace, positive semidefinite."""

    entries: NDArray[np.complexfloating]

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        object.__setattr__(self, "entries", m)
        asym = float(np.max(np.abs(m - m.conj().T)))
        if asym >= HERMITICITY_TOL:
            raise ValueError(f"density matrix not Hermitian: max asymmetry {asym:.3e}")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > NORM_TOL:
            raise ValueError(f"density matrix trace {tr} differs from 1")
        evals = np.linalg.eigvalsh(m)
        if evals.min() < -1e-10:
            raise ValueError(f"density matrix has negative eigenvalue {evals.min():.3e}")

    @property
    def array(self) -> NDArray[np.complexfloating]:
        return self.entries

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def from_state(cls, psi) -> "DensityMatrix":
        v = _as_array(psi).reshape(-1)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))


class HamiltonianModel:
    """H/hbar as a sum of (coefficient, matrix) terms.

    A coefficient is either a complex scalar or a callable of time; the
    assembled operator at time t is  sum_k  c_k(t) * M_k.  Coupling
    matrices carry the drive convention (Omega/2)|upper><lower| + h.c.,
    so a resonant pi pulse maps |lower> to -i|upper>.
    """

    def __init__(self, dim: int, terms: Sequence[tuple] = (), basis_labels: tuple = ()):
        self.dim = dim
        self.basis_labels = tuple(basis_labels)
        self._static = np.zeros((dim, dim), dtype=complex)
        self._dynamic: list[tuple[Callable[[float], complex], NDArray]] = []
        for coef, mat in terms:
            self.add_term(coef, mat)

    def add_term(self, coef, matrix) -> "HamiltonianModel":
        m = np.asarray(matrix, dtype=complex)
        if m.shape != (self.dim, self.dim):
            raise ValueError(f"term shape {m.shape} does not match dimension {self.dim}")
        if callable(coef):
            self._dynamic.append((coef, m))
        else:
            self._static = self._static + complex(coef) * m
        return self

    @property
    def is_time_dependent(self) -> bool:
        return bool(self._dynamic)

    def __call__(self, t: float) -> NDArray[np.complexfloating]:
        if not self._dynamic:
            return self._static
        h = self._static.copy()
        for coef, m in self._dynamic:
            h += complex(coef(t)) * m
        return h

    def static_matrix(self) -> NDArray[np.complexfloating]:
        if self._dynamic:
            raise ValueError("Hamiltonian is time dependent; no static matrix")
        return self._static

    def hermiticity_defect(self, times: Sequence[float] = (0.0,)) -> float:
        return max(float(np.max(np.abs(self(t) - self(t).conj().T))) for t in times)

    def with_decay(self, rates) -> "HamiltonianModel":
        """Return a copy augmented with -(i/2) * diag(rates).

        `rates` is one nonnegative rate per basis state (rad/us); the
        resulting model is non-Hermitian and loses norm at the decay rate.
        """
        r = np.asarray(rates, dtype=float).reshape(-1)
        if r.size != self.dim:
            raise ValueError(f"need {self.dim} rates, got {r.size}")
        if (r < 0).any():
            raise ValueError("decay rates must be nonnegative")
        out = HamiltonianModel(self.dim, basis_labels=self.basis_labels)
        out._static = self._static - 0.5j * np.diag(r.astype(complex))
        out._dynamic = list(self._dynamic)
        return out


@dataclass
class Trajectory:
    """Sampled states psi(t_k) along one evolution."""

    times: NDArray[np.floating]
    states: NDArray[np.complexfloating]  # shape (dim, n_times)

    @property
    def final(self) -> NDArray[np.complexfloating]:
        return self.states[:, -1]

    @property
    def norms(self) -> NDArray[np.floating]:
        return np.linalg.norm(self.states, axis=0)

    def populations(self, index: int) -> NDArray[np.floating]:
        return np.abs(self.states[index, :]) ** 2

    def subspace_population(self, indices: Sequence[int]) -> NDArray[np.floating]:
        return np.sum(np.abs(self.states[list(indices), :]) ** 2, axis=0)

    def residence_time(self, indices: Sequence[int]) -> float:
        """Time integral of the population in the given basis states."""
        return float(np.trapezoid(self.subspace_population(indices), self.times))


# ======================================================================
# Spectral decomposition
# ======================================================================


def eig_hermitian(h) -> tuple[NDArray[np.floating], NDArray[np.complexfloating]]:
    """Eigenvalues (ascending) and orthonormal eigenvector columns of a
    Hermitian operator.

    Raises
    ------
    ValueError
        If the input is not Hermitian; the message carries the maximum
        entrywise asymmetry as a diagnostic.
    """
    m = _as_array(h)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"need a square matrix of dimension >= 1, got shape {m.shape}")
    asym = float(np.max(np.abs(m - m.conj().T)))
    if asym >= HERMITICITY_TOL:
        raise ValueError(f"matrix is not Hermitian: max |A - A^dag| = {asym:.3e}")
    w, v = np.linalg.eigh(m)
    return w, v


# ======================================================================
# Time evolution
# ======================================================================


def _h_callable(h) -> tuple[Callable[[float], NDArray], int, bool]:
    """Normalize the Hamiltonian argument to (callable, dim, constant?)."""
    if isinstance(h, HamiltonianModel):
        return h, h.dim, not h.is_time_dependent
    if callable(h):
        probe = np.asarray(h(0.0), dtype=complex)
        return (lambda t: np.asarray(h(t), dtype=complex)), probe.shape[0], False
    m = _as_array(h)
    return (lambda t: m), m.shape[0], True


def evolve(h, psi0, span: tuple[float, float], tol: float = 1e-10,
           n_store: int = 2) -> Trajectory:
    """Integrate i d|psi>/dt = H(t)|psi> over `span`.

    Parameters
    ----------
    h : HamiltonianModel, ndarray, or callable t -> ndarray
        Hamiltonian divided by hbar, rad/us.
    psi0 : StateVector or ndarray
        Initial state.  Norm-1 is not enforced here so the same engine
        can continue non-Hermitian evolutions; schedule-level code
        checks normalization where the physics requires it.
    span : (t0, t1)
        Integration window in us.
    tol : float
        Relative tolerance of the embedded Runge-Kutta pair.
    n_store : int
        Number of equally spaced sample times kept in the trajectory
        (>= 2; the endpoints are always included).

    Raises
    ------
    EvolveError
        On step-size underflow; carries the last accepted time.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    hfun, dim, _ = _h_callable(h)
    y0 = _as_array(psi0).reshape(-1)
    if y0.size != dim:
        raise ValueError(f"state dimension {y0.size} does not match Hamiltonian {dim}")
    t0, t1 = float(span[0]), float(span[1])
    if t1 == t0:
        ts = np.array([t0, t1])
        return Trajectory(ts, np.column_stack([y0, y0]))

    def rhs(t, y):
        return -1j * (hfun(t) @ y)

    t_eval = np.linspace(t0, t1, max(2, int(n_store)))
    sol = solve_ivp(rhs, (t0, t1), y0, method="DOP853", rtol=tol,
                    atol=tol * 1e-2, t_eval=t_eval, dense_output=False)
    if not sol.success:
        last = float(sol.t[-1]) if sol.t.size else t0
        raise EvolveError(
            f"integrator failed ({sol.message.strip()}); last accepted time t = {last:.6g} us",
            last_time=last,
        )
    return Trajectory(sol.t, sol.y)


def _segment_expm(hmat: NDArray, dt: float) -> NDArray:
    """exp(-i H dt), via eigendecomposition when H is Hermitian."""
    asym = float(np.max(np.abs(hmat - hmat.conj().T)))
    if asym < HERMITICITY_TOL:
        w, v = np.linalg.eigh(hmat)
        return (v * np.exp(-1j * w * dt)) @ v.conj().T
    return expm(-1j * hmat * dt)


def propagator(segments) -> OperatorMatrix:
    """Exact propagator of a piecewise-constant schedule.

    `segments` is an ordered sequence of (H, duration) pairs; the result
    is the time-ordered product of the segment exponentials (the first
    listed segment acts first).  An empty schedule yields the identity
    with a warning.
    """
    segs = [( _as_array(h), float(dt)) for h, dt in segments]
    if not segs:
        warnings.warn("empty schedule: returning a 0-dimensional identity is impossible; "
                      "returning 1x1 identity", stacklevel=2)
        return OperatorMatrix(np.eye(1, dtype=complex))
    dim = segs[0][0].shape[0]
    u = np.eye(dim, dtype=complex)
    for hmat, dt in segs:
        if hmat.shape != (dim, dim):
            raise ValueError("all segments must share one dimension")
        u = _segment_expm(hmat, dt) @ u
    hermitian_inputs = all(
        float(np.max(np.abs(h - h.conj().T))) < HERMITICITY_TOL for h, _ in segs
    )
    return OperatorMatrix(u) if hermitian_inputs else OperatorMatrix(u, hermitian=False)


def evolve_open(h, decay_rates, psi0, span: tuple[float, float], tol: float = 1e-10,
                n_store: int = 2) -> tuple[NDArray[np.complexfloating], float, Trajectory]:
    """Non-Hermitian norm-loss evolution.

    Evolves under H - (i/2) sum_l Gamma_l |l><l| and returns
    (final state, survival probability, trajectory).  The survival is
    the final squared norm; 1 - survival is the accumulated decay
    probability.
    """
    rates = np.asarray(decay_rates, dtype=float).reshape(-1)
    if (rates < 0).any():
        raise ValueError("decay rates must be nonnegative")
    if isinstance(h, HamiltonianModel):
        haug = h.with_decay(rates)
    else:
        hfun, dim, const = _h_callable(h)
        if rates.size != dim:
            raise ValueError(f"need {dim} rates, got {rates.size}")
        dec = -0.5j * np.diag(rates.astype(complex))
        if const:
            haug = hfun(0.0) + dec
        else:
            haug = lambda t: hfun(t) + dec  # noqa: E731
    traj = evolve(haug, psi0, span, tol=tol, n_store=n_store)
    survival = float(np.linalg.norm(traj.final) ** 2)
    return traj.final, survival, traj


def evolve_lindblad(h, collapse_ops, rho0, span: tuple[float, float], tol: float = 1e-8,
                    n_store: int = 2) -> tuple[NDArray[np.floating], NDArray[np.complexfloating]]:
    """Dense Lindblad master equation for dimensions up to 256.

    d rho/dt = -i[H, rho] + sum_k (L_k rho L_k^dag - {L_k^dag L_k, rho}/2)

    Returns (times, rhos) with rhos of shape (n_times, dim, dim).
    """
    hfun, dim, _ = _h_callable(h)
    if dim > LINDBLAD_DIM_LIMIT:
        raise ValueError(f"dimension {dim} exceeds dense master-equation limit "
                         f"{LINDBLAD_DIM_LIMIT}")
    rho = _as_array(rho0)
    if rho.shape != (dim, dim):
        raise ValueError(f"rho0 shape {rho.shape} does not match dimension {dim}")
    ls = [_as_array(L) for L in collapse_ops]
    ldl = [L.conj().T @ L for L in ls]

    def rhs(t, y):
        r = y.reshape(dim, dim)
        hm = hfun(t)
        dr = -1j * (hm @ r - r @ hm)
        for L, LdL in zip(ls, ldl):
            dr += L @ r @ L.conj().T - 0.5 * (LdL @ r + r @ LdL)
        return dr.reshape(-1)

    t0, t1 = float(span[0]), float(span[1])
    t_eval = np.linspace(t0, t1, max(2, int(n_store)))
    sol = solve_ivp(rhs, (t0, t1), rho.reshape(-1).astype(complex), method="DOP853",
                    rtol=tol, atol=tol * 1e-2, t_eval=t_eval)
    if not sol.success:
        last = float(sol.t[-1]) if sol.t.size else t0
        raise EvolveError(f"Lindblad integration failed; last accepted time {last:.6g} us",
                          last_time=last)
    rhos = sol.y.T.reshape(-1, dim, dim)
    return sol.t, rhos
