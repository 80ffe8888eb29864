"""Registers, drive records, and Hamiltonian builders.

A `Register` fixes the product basis: per-atom level catalogs, per-level
decay rates, and pairwise interaction terms (diagonal shifts and
off-diagonal flip couplings).  Builders assemble `HamiltonianModel`
instances for the excitation schemes and gate configurations used by the
protocol layer.  All couplings follow the (Omega/2)|upper><lower| + h.c.
convention and all diagonal terms are rotating-frame detunings, so every
builder output is H/hbar in rad/us.

Interaction tables are commonly quoted in h*GHz; convert with
`interact.interaction_at` (or multiply by 2*pi*1e3) at ingestion, never
inside a builder.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from numpy.typing import NDArray

from .qcore import HamiltonianModel, OperatorMatrix

__all__ = [
    "Register",
    "DriveSpec",
    "TwoPhotonSpec",
    "EffectiveDrive",
    "one_photon",
    "two_photon_full",
    "ac_stark_shifts",
    "adiabatic_eliminate",
    "pair_blockade",
    "tsd_three_state",
    "tsd_pair_full",
    "dark_state_forster",
    "modulated_drive_effective",
    "ensemble_two_level",
]

ELEMENTARY_CHARGE = 1.602176634e-19   # C
ELECTRON_MASS = 9.1093837015e-31      # kg
HBAR = 1.054571817e-34                # J s


# ======================================================================
# Register: product basis, interactions, decay bookkeeping
# ======================================================================


class Register:
    """Atom list with level catalogs and pairwise interactions.

    Parameters
    ----------
    levels : sequence of level-label tuples, one per atom
        e.g. ``[("0", "1", "r"), ("0", "1", "r")]``.  The first atom is
        the most significant index of the product basis.
    decay : mapping label -> rate (rad/us)
        Decay rate of every atom's level with that label; absent labels
        do not decay.
    interactions : sequence of (atom_a, atom_b, terms)
        ``terms`` maps ``((la, lb), (lc, ld))`` to a coupling V/hbar in
        rad/us, contributing V |la lb><lc ld| (+ h.c. for off-diagonal
        pairs) on the two atoms.  Diagonal entries (equal label pairs)
        are pure shifts; unequal pairs are state-flip couplings.
    excited_levels : set of labels counted as "excited" for residence
        and leakage bookkeeping.  Defaults to the decay keys if decay is
        given, else to every label not in {"0", "1", "g"}.
    """

    def __init__(self, levels, decay: Mapping[str, float] | None = None,
                 interactions=(), excited_levels=None, infinite_blockade: bool = False):
        self.levels: tuple[tuple[str, ...], ...] = tuple(tuple(l) for l in levels)
        self.decay = dict(decay or {})
        self.interactions = [(a, b, dict(t)) for a, b, t in interactions]
        # With an infinite blockade the simulator removes every state
        # holding two or more excited atoms instead of shifting it.
        self.infinite_blockade = bool(infinite_blockade)
        if excited_levels is not None:
            self.excited_levels = set(excited_levels)
        elif self.decay:
            self.excited_levels = set(self.decay)
        else:
            self.excited_levels = {
                lab for atom in self.levels for lab in atom if lab not in ("0", "1", "g")
            }
        for rate in self.decay.values():
            if rate < 0:
                raise ValueError("decay rates must be nonnegative")
        self._dims = tuple(len(a) for a in self.levels)
        self._strides = tuple(
            int(np.prod(self._dims[k + 1:], initial=1)) for k in range(len(self._dims))
        )

    @property
    def n_atoms(self) -> int:
        return len(self.levels)

    @property
    def dim(self) -> int:
        return int(np.prod(self._dims, initial=1))

    def level_index(self, atom: int, label: str) -> int:
        try:
            return self.levels[atom].index(label)
        except ValueError:
            raise KeyError(f"atom {atom} has no level {label!r}") from None

    def index(self, labels: Sequence[str]) -> int:
        if len(labels) != self.n_atoms:
            raise ValueError(f"need {self.n_atoms} labels, got {len(labels)}")
        return sum(self.level_index(k, lab) * self._strides[k]
                   for k, lab in enumerate(labels))

    def basis_labels(self) -> tuple[tuple[str, ...], ...]:
        out = []
        for i in range(self.dim):
            labs = []
            for k in range(self.n_atoms):
                labs.append(self.levels[k][(i // self._strides[k]) % self._dims[k]])
            out.append(tuple(labs))
        return tuple(out)

    def basis_state(self, labels: Sequence[str]) -> NDArray[np.complexfloating]:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(labels)] = 1.0
        return v

    def _embed(self, op1: NDArray, atom: int) -> NDArray:
        out = np.array([[1.0 + 0.0j]])
        for k, d in enumerate(self._dims):
            out = np.kron(out, op1 if k == atom else np.eye(d, dtype=complex))
        return out

    def transition(self, atom: int, lower: str, upper: str) -> NDArray[np.complexfloating]:
        """|upper><lower| on one atom, embedded in the product space."""
        d = self._dims[atom]
        m = np.zeros((d, d), dtype=complex)
        m[self.level_index(atom, upper), self.level_index(atom, lower)] = 1.0
        return self._embed(m, atom)

    def projector(self, atom: int, label: str) -> NDArray[np.complexfloating]:
        d = self._dims[atom]
        m = np.zeros((d, d), dtype=complex)
        i = self.level_index(atom, label)
        m[i, i] = 1.0
        return self._embed(m, atom)

    def pair_op(self, atom_a: int, atom_b: int, bra: tuple[str, str],
                ket: tuple[str, str]) -> NDArray[np.complexfloating]:
        """|bra_a bra_b><ket_a ket_b| acting on the two given atoms."""
        def one(atom, b, k):
            d = self._dims[atom]
            m = np.zeros((d, d), dtype=complex)
            m[self.level_index(atom, b), self.level_index(atom, k)] = 1.0
            return m
        out = np.array([[1.0 + 0.0j]])
        for at, d in enumerate(self._dims):
            if at == atom_a:
                out = np.kron(out, one(at, bra[0], ket[0]))
            elif at == atom_b:
                out = np.kron(out, one(at, bra[1], ket[1]))
            else:
                out = np.kron(out, np.eye(d, dtype=complex))
        return out

    def interaction_matrix(self, scale: float = 1.0) -> NDArray[np.complexfloating]:
        """Sum of all pairwise interaction terms, optionally scaled (used
        for per-trajectory interaction fluctuation)."""
        h = np.zeros((self.dim, self.dim), dtype=complex)
        for a, b, terms in self.interactions:
            for (bra, ket), v in terms.items():
                op = self.pair_op(a, b, bra, ket)
                h += scale * v * op
                if bra != ket:
                    h += scale * np.conj(v) * op.conj().T
        return h

    def decay_vector(self) -> NDArray[np.floating]:
        """Total decay rate of every product-basis state."""
        rates = np.zeros(self.dim)
        for atom in range(self.n_atoms):
            for lab, rate in self.decay.items():
                if lab in self.levels[atom]:
                    rates += rate * np.real(np.diag(self.projector(atom, lab)))
        return rates

    def excited_indices(self) -> list[int]:
        """Basis states in which at least one atom occupies an excited level."""
        out = []
        for i, labs in enumerate(self.basis_labels()):
            if any(l in self.excited_levels for l in labs):
                out.append(i)
        return out

    def hamiltonian(self) -> HamiltonianModel:
        h = HamiltonianModel(self.dim, basis_labels=self.basis_labels())
        h.add_term(1.0, self.interaction_matrix())
        return h


# ======================================================================
# Drive records
# ======================================================================


@dataclass(frozen=True)
class DriveSpec:
    """One coherent drive on one atomic transition.

    rabi is a complex amplitude (rad/us; its phase is the laser phase) or
    a callable of time returning one; detuning likewise (real).  k_eff,
    when set, is the signed effective wavevector (rad/um) picked up by
    this transition, used by the Doppler noise model.
    """

    atom: int
    lower: str
    upper: str
    rabi: complex | Callable[[float], complex]
    detuning: float | Callable[[float], float] = 0.0
    k_eff: float | None = None

    def rabi_at(self, t: float) -> complex:
        return complex(self.rabi(t)) if callable(self.rabi) else complex(self.rabi)

    def detuning_at(self, t: float) -> float:
        return float(self.detuning(t)) if callable(self.detuning) else float(self.detuning)

    @property
    def is_static(self) -> bool:
        return not (callable(self.rabi) or callable(self.detuning))


def add_drive(model: HamiltonianModel, register: Register, drive: DriveSpec,
              extra_detuning: float = 0.0) -> None:
    """Add (rabi/2)|upper><lower| + h.c. + detuning*P_upper to a model."""
    up = register.transition(drive.atom, drive.lower, drive.upper)
    down = up.conj().T
    proj = register.projector(drive.atom, drive.upper)
    if callable(drive.rabi):
        model.add_term(lambda t, f=drive.rabi: complex(f(t)) / 2.0, up)
        model.add_term(lambda t, f=drive.rabi: np.conj(complex(f(t))) / 2.0, down)
    else:
        r = complex(drive.rabi)
        model.add_term(r / 2.0, up)
        model.add_term(np.conj(r) / 2.0, down)
    if callable(drive.detuning):
        model.add_term(lambda t, f=drive.detuning, e=extra_detuning: float(f(t)) + e, proj)
    else:
        d = float(drive.detuning) + extra_detuning
        if d != 0.0:
            model.add_term(d, proj)


# ======================================================================
# Excitation-scheme builders
# ======================================================================


def one_photon(rabi: complex, levels: tuple[str, str] = ("g", "r")) -> HamiltonianModel:
    """Single-atom one-photon excitation: (Omega/2)|r><g| + h.c.

    A resonant pulse of area pi transfers |g> to -i|r>; a 2*pi pulse
    returns |g> with a pi phase, the sign at the heart of the blockade
    gate.
    """
    reg = Register([levels], excited_levels={levels[1]})
    h = HamiltonianModel(2, basis_labels=reg.basis_labels())
    add_drive(h, reg, DriveSpec(0, levels[0], levels[1], rabi))
    return h


@dataclass(frozen=True)
class TwoPhotonSpec:
    """Two-photon excitation via an intermediate level.

    omega1 and omega2 are the lower (g-p) and upper (p-r) Rabi
    frequencies, `delta` the intermediate-state detuning, and stark_r /
    stark_g the nonresonant ac Stark shifts of the Rydberg and ground
    states, all in rad/us.  The Stark shifts are inputs; `ac_stark_shifts`
    computes them from field amplitudes when needed.
    """

    omega1: float
    omega2: float
    delta: float
    stark_r: float = 0.0
    stark_g: float = 0.0


def two_photon_full(spec: TwoPhotonSpec) -> HamiltonianModel:
    """Full three-level ladder g-p-r of a two-photon Rydberg excitation.

    Couplings omega1/2 on g-p and omega2/2 on p-r, detuning `delta` on
    the intermediate state, and the ac Stark shifts on r and g.
    """
    reg = Register([("g", "p", "r")], excited_levels={"p", "r"})
    h = HamiltonianModel(3, basis_labels=reg.basis_labels())
    add_drive(h, reg, DriveSpec(0, "g", "p", spec.omega1, spec.delta))
    # The p-r leg closes the two-photon resonance: no extra diagonal on r
    # beyond its Stark shift.
    up = reg.transition(0, "p", "r")
    h.add_term(spec.omega2 / 2.0, up)
    h.add_term(np.conj(complex(spec.omega2)) / 2.0, up.conj().T)
    if spec.stark_r:
        h.add_term(spec.stark_r, reg.projector(0, "r"))
    if spec.stark_g:
        h.add_term(spec.stark_g, reg.projector(0, "g"))
    return h


def ac_stark_shifts(e1: float, e2: float, omega1: float, omega2: float,
                    alpha1: float, alpha2: float) -> tuple[float, float]:
    """Nonresonant ac Stark shifts (stark_r, stark_g) in rad/s from SI
    field amplitudes.

    stark_r = -e^2/(4 m_e hbar) (E1^2/w1^2 + E2^2/w2^2)
    stark_g = -(alpha1 E1^2 + alpha2 E2^2)/(4 hbar)

    e1, e2 in V/m; omega1, omega2 are the optical angular frequencies in
    rad/s; alpha1, alpha2 are ground-state polarizabilities in SI units
    (C m^2 / V).  Divide by 1e6 for rad/us.
    """
    q = ELEMENTARY_CHARGE
    shift_r = -(q * q) / (4.0 * ELECTRON_MASS * HBAR) * (
        e1 * e1 / (omega1 * omega1) + e2 * e2 / (omega2 * omega2)
    )
    shift_g = -(alpha1 * e1 * e1 + alpha2 * e2 * e2) / (4.0 * HBAR)
    return shift_r, shift_g


@dataclass(frozen=True)
class EffectiveDrive:
    """Result of adiabatically eliminating the intermediate state."""

    omega_eff: float
    delta_r: float
    delta_g: float
    validity_ratio: float  # max(|omega1|, |omega2|) / |delta|


def adiabatic_eliminate(spec: TwoPhotonSpec) -> EffectiveDrive:
    """Effective ground-Rydberg drive of a far-detuned two-photon ladder.

        Omega_eff = -omega1 * omega2 / (2 delta)
        Delta_r   = -omega2^2 / (4 delta) + stark_r
        Delta_g   = -omega1^2 / (4 delta) + stark_g

    The elimination is undefined at delta = 0.  The returned
    validity_ratio reports max(omega)/|delta|; the caller decides whether
    it is small enough.
    """
    if spec.delta == 0.0:
        raise ValueError("adiabatic elimination undefined at zero intermediate detuning")
    return EffectiveDrive(
        omega_eff=-spec.omega1 * spec.omega2 / (2.0 * spec.delta),
        delta_r=-spec.omega2 ** 2 / (4.0 * spec.delta) + spec.stark_r,
        delta_g=-spec.omega1 ** 2 / (4.0 * spec.delta) + spec.stark_g,
        validity_ratio=max(abs(spec.omega1), abs(spec.omega2)) / abs(spec.delta),
    )


# ======================================================================
# Two-atom gate configurations
# ======================================================================


def two_qubit_register(v_rr: float | None, tau: float | None = None,
                       levels: tuple[str, ...] = ("0", "1", "r")) -> Register:
    """Two atoms with a diagonal shift V on every doubly excited state.

    v_rr = None declares an infinite blockade: the simulator then removes
    the doubly excited states instead of shifting them.
    """
    ryd = tuple(l for l in levels if l not in ("0", "1"))
    decay = {l: 1.0 / tau for l in ryd} if tau else None
    interactions = []
    if v_rr is not None:
        terms = {((a, b), (a, b)): v_rr for a in ryd for b in ryd}
        interactions = [(0, 1, terms)]
    return Register(
        [levels, levels],
        decay=decay,
        interactions=interactions,
        excited_levels=set(ryd),
        infinite_blockade=v_rr is None,
    )


def pair_blockade(rabi_c: complex, rabi_t: complex, delta: float,
                  v_rr: float) -> HamiltonianModel:
    """Two driven atoms with a diagonal interaction on |rr>.

    Both atoms are driven on |1> <-> |r> (control with rabi_c, target
    with rabi_t), both with the same detuning, over the 9-dimensional
    {0,1,r}x{0,1,r} basis.  Restricted to one input sector the model is
    an exact driven two-level block: the |01> sector has eigenvalues
    (delta +- sqrt(|rabi|^2 + delta^2))/2, and the |11> sector couples to
    the symmetric singly-excited state with strength sqrt(2)*rabi.
    """
    reg = two_qubit_register(v_rr)
    h = reg.hamiltonian()
    if rabi_c != 0:
        add_drive(h, reg, DriveSpec(0, "1", "r", rabi_c, delta))
    elif delta != 0.0:
        h.add_term(delta, reg.projector(0, "r"))
    if rabi_t != 0:
        add_drive(h, reg, DriveSpec(1, "1", "r", rabi_t, delta))
    elif delta != 0.0:
        h.add_term(delta, reg.projector(1, "r"))
    return h


TSD_BASIS = ("1r", "r1", "r0", "11", "10")


def tsd_three_state(rabi_c: float, rabi_t: float) -> OperatorMatrix:
    """Coupling matrix of the three-state transition slow-down.

    Ordered basis {|1r>, |r1>, |r0>, |11>, |10>}; the target drives the
    chain |0> <-> |r> <-> |1> with rabi_t while the control drives
    |1> <-> |r> with rabi_c; the doubly excited state is omitted, valid
    deep in the strong-interaction regime.  The spectrum is symmetric
    about zero and contains +-rabi_c/2 and +-obar/2 with
    obar = sqrt(rabi_c^2 + 2 rabi_t^2).
    """
    if rabi_c <= 0 or rabi_t <= 0:
        raise ValueError("Rabi frequencies must be positive")
    h = np.zeros((5, 5), dtype=complex)
    h[0, 3] = h[0, 4] = rabi_t / 2.0   # |1r><11|, |1r><10|
    h[1, 3] = rabi_c / 2.0             # |r1><11|
    h[2, 4] = rabi_c / 2.0             # |r0><10|
    h = h + h.conj().T
    return OperatorMatrix(h, hermitian=True)


def tsd_pair_full(rabi_c: float, rabi_t: float, v_rr: float) -> tuple[Register, HamiltonianModel]:
    """Full two-atom model behind the three-state slow-down.

    Control drives |1> <-> |r>; the target drives both |0> <-> |r> and
    |1> <-> |r| with the same amplitude; all doubly excited pair states
    carry the diagonal shift v_rr.  Used to quantify the residual
    blockade error ~ (rabi/v)^2 that the truncated model ignores.
    """
    reg = two_qubit_register(v_rr)
    h = reg.hamiltonian()
    add_drive(h, reg, DriveSpec(0, "1", "r", rabi_c))
    add_drive(h, reg, DriveSpec(1, "1", "r", rabi_t))
    add_drive(h, reg, DriveSpec(1, "0", "r", rabi_t))
    return reg, h


def dark_state_forster(rabi, v: float) -> HamiltonianModel:
    """Three-state model of the defect-free Foerster dark state.

    Basis {|r1 1>, |r1 r2>, |r3 r4>}: the target drive couples the first
    pair with rabi/2 (scalar or callable envelope) and the resonant
    dipole-dipole flip couples |r1 r2> <-> |r3 r4> with strength v.  For
    any (rabi, v) the state 2v|r1 1> - rabi|r3 r4> is an exact
    zero-eigenvalue eigenstate; slowly shaping the envelope from zero and
    back transports |r1 1> through the doubly excited manifold and back
    with no accumulated phase.
    """
    if v == 0.0:
        raise ValueError("dark-state model needs a nonzero flip coupling")
    labels = (("r1_1",), ("r1_r2",), ("r3_r4",))
    h = HamiltonianModel(3, basis_labels=labels)
    up = np.zeros((3, 3), dtype=complex)
    up[1, 0] = 1.0
    if callable(rabi):
        h.add_term(lambda t, f=rabi: complex(f(t)) / 2.0, up)
        h.add_term(lambda t, f=rabi: np.conj(complex(f(t))) / 2.0, up.conj().T)
    else:
        h.add_term(complex(rabi) / 2.0, up)
        h.add_term(np.conj(complex(rabi)) / 2.0, up.conj().T)
    flip = np.zeros((3, 3), dtype=complex)
    flip[1, 2] = 1.0
    h.add_term(v, flip + flip.conj().T)
    return h


def modulated_drive_effective(rabi_mod: float, mod_freq: float) -> HamiltonianModel:
    """Rotating-frame model of an amplitude-modulated resonant drive.

    For a drive Omega(t) = rabi_mod * cos(mod_freq * t) and fast
    modulation, one co-rotating sideband survives:

        (rabi_mod/4)|r><1| + h.c. + mod_freq |r><r|

    The diagonal term acts as an engineered detuning that can compensate
    a Rydberg interaction (antiblockade by periodic driving).
    """
    if rabi_mod <= 0 or mod_freq <= 0:
        raise ValueError("modulation parameters must be positive")
    h = HamiltonianModel(2, basis_labels=(("1",), ("r",)))
    up = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
    h.add_term(rabi_mod / 4.0, up)
    h.add_term(rabi_mod / 4.0, up.conj().T)
    h.add_term(mod_freq, np.diag([0.0, 1.0]).astype(complex))
    return h


def ensemble_two_level(n_atoms: int, rabi_env, detuning_env) -> HamiltonianModel:
    """Symmetric-subspace model of a blockaded N-atom ensemble.

    One shared excitation: collective states {|1bar>, |rbar>} with the
    coupling enhanced to sqrt(N)*rabi(t) and a symmetric detuning split
    +-delta(t)/2 between the two states.
    """
    if n_atoms < 1:
        raise ValueError("need at least one atom")
    root_n = np.sqrt(float(n_atoms))
    h = HamiltonianModel(2, basis_labels=(("1bar",), ("rbar",)))
    up = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
    sz = np.diag([-0.5, 0.5]).astype(complex)
    if callable(rabi_env):
        h.add_term(lambda t, f=rabi_env: root_n * complex(f(t)) / 2.0, up)
        h.add_term(lambda t, f=rabi_env: root_n * np.conj(complex(f(t))) / 2.0, up.conj().T)
    else:
        h.add_term(root_n * complex(rabi_env) / 2.0, up)
        h.add_term(root_n * np.conj(complex(rabi_env)) / 2.0, up.conj().T)
    if callable(detuning_env):
        h.add_term(lambda t, f=detuning_env: float(f(t)), sz)
    else:
        h.add_term(float(detuning_env), sz)
    return h
