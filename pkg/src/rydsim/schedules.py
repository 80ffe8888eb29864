"""Pulse schedules and their simulation.

A `PulseSchedule` is an ordered set of drive segments over a `Register`,
plus the exact target (a unitary on the computational labels or a target
state) and the declared input-state set.  `simulate` compiles the
segments into breakpoint intervals, propagates every input state with
the qcore engines (exact exponentials for static intervals, adaptive
integration otherwise), and returns a `GateResult` carrying the realized
map, survivals, excited-state residence times, and an error budget.

Interactions declared on the register are always on; decay, Doppler
detunings, and interaction scaling are per-run options so the same
schedule object can be scored noiselessly and under Monte Carlo noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from . import metrics
from .ham import DriveSpec, Register
from .noise import ErrorBudget
from .qcore import EvolveError, HamiltonianModel, _segment_expm, evolve

__all__ = ["Segment", "MapSegment", "PulseSchedule", "GateResult", "simulate"]


@dataclass(frozen=True)
class Segment:
    """Drives applied over one window.  `extra_terms` are raw
    (coefficient, matrix-builder) Hamiltonian contributions for physics
    that is not an optical drive (swept defects, engineered couplings);
    each matrix-builder is a callable of the register returning a full
    matrix.  Windows of different segments may overlap; overlapping the
    same atomic transition requires the `simultaneous` flag."""

    t0: float
    t1: float
    drives: tuple[DriveSpec, ...] = ()
    extra_terms: tuple = ()
    simultaneous: bool = False

    def __post_init__(self):
        if self.t1 < self.t0:
            raise ValueError(f"segment window [{self.t0}, {self.t1}] has negative length")


@dataclass(frozen=True)
class MapSegment:
    """An instantaneous unitary (e.g. a fast microwave state flip),
    applied at one instant between evolution intervals."""

    time: float
    operator: NDArray[np.complexfloating]
    label: str = ""


class PulseSchedule:
    """Ordered drive segments plus the ideal target and input set."""

    def __init__(self, register: Register, segments: Sequence,
                 input_labels: Sequence[tuple[str, ...]],
                 ideal_map: NDArray | None = None,
                 ideal_state: NDArray | None = None,
                 annotations: dict | None = None):
        self.register = register
        self.segments = list(segments)
        self.input_labels = [tuple(l) for l in input_labels]
        self.ideal_map = None if ideal_map is None else np.asarray(ideal_map, dtype=complex)
        self.ideal_state = None if ideal_state is None else np.asarray(ideal_state, dtype=complex)
        self.annotations = dict(annotations or {})
        if self.ideal_map is not None:
            u = self.ideal_map
            if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > 1e-12:
                raise ValueError("ideal map is not unitary")
        if self.ideal_state is not None:
            if abs(np.linalg.norm(self.ideal_state) - 1.0) > 1e-12:
                raise ValueError("ideal state is not normalized")
        self._check_overlaps()

    def _check_overlaps(self):
        windows: dict[tuple, list[tuple[float, float, bool]]] = {}
        for seg in self.segments:
            if not isinstance(seg, Segment):
                continue
            for d in seg.drives:
                key = (d.atom, d.lower, d.upper)
                for (a, b, simflag) in windows.get(key, ()):
                    if seg.t0 < b and a < seg.t1 and not (simflag and seg.simultaneous):
                        raise ValueError(
                            f"overlapping drives on atom {d.atom} "
                            f"{d.lower}-{d.upper} without the simultaneous flag"
                        )
                windows.setdefault(key, []).append((seg.t0, seg.t1, seg.simultaneous))

    @property
    def duration(self) -> float:
        t = 0.0
        for seg in self.segments:
            t = max(t, seg.t1 if isinstance(seg, Segment) else seg.time)
        return t

    def input_states(self) -> dict[tuple[str, ...], NDArray]:
        return {lab: self.register.basis_state(lab) for lab in self.input_labels}


# ======================================================================
# Compilation and simulation
# ======================================================================


def _kept_indices(register: Register) -> list[int] | None:
    """Indices kept when the register declares an infinite blockade:
    every state with two or more excited atoms is projected out."""
    if not getattr(register, "infinite_blockade", False):
        return None
    kept = []
    for i, labs in enumerate(register.basis_labels()):
        n_exc = sum(1 for l in labs if l in register.excited_levels)
        if n_exc < 2:
            kept.append(i)
    return kept


def _atom_doppler_shifts(schedule: PulseSchedule, velocities) -> dict[int, float]:
    """Per-atom Doppler detuning k_eff * v, validating that every drive
    touching an excited level carries a consistent k_eff."""
    if velocities is None:
        return {}
    v = np.asarray(velocities, dtype=float)
    reg = schedule.register
    per_atom: dict[int, float] = {}
    for seg in schedule.segments:
        if not isinstance(seg, Segment):
            continue
        for d in seg.drives:
            if d.upper not in reg.excited_levels:
                continue
            if d.k_eff is None:
                raise ValueError(
                    f"drive {d.lower}-{d.upper} on atom {d.atom} couples an excited "
                    "level but carries no k_eff; Doppler sampling needs one"
                )
            prev = per_atom.get(d.atom)
            if prev is not None and abs(prev - d.k_eff * v[d.atom]) > 1e-12:
                raise ValueError(f"conflicting k_eff values on atom {d.atom}")
            per_atom[d.atom] = d.k_eff * v[d.atom]
    return per_atom


@dataclass
class GateResult:
    """Realized evolution of a schedule over its declared input set."""

    schedule: PulseSchedule
    outputs: dict[tuple, NDArray[np.complexfloating]]
    gate_map: NDArray[np.complexfloating]   # computational-subspace projection
    survivals: dict[tuple, float]
    residence: dict[tuple, float]           # integral of excited population, us
    trajectories: dict[tuple, tuple[NDArray, NDArray]] = field(default_factory=dict)

    @property
    def mean_survival(self) -> float:
        return float(np.mean(list(self.survivals.values())))

    @property
    def mean_residence(self) -> float:
        return float(np.mean(list(self.residence.values())))

    def pedersen_fidelity(self, ideal=None) -> float:
        u = self.schedule.ideal_map if ideal is None else np.asarray(ideal)
        if u is None:
            raise ValueError("schedule has no ideal map")
        return metrics.pedersen_fidelity(self.gate_map, u)

    def truth_table_fidelity(self, ideal=None) -> float:
        u = self.schedule.ideal_map if ideal is None else np.asarray(ideal)
        return metrics.truth_table_fidelity(
            metrics.truth_table(self.gate_map), metrics.truth_table(u)
        )

    def nielsen_fidelity(self, ideal=None) -> float:
        u = self.schedule.ideal_map if ideal is None else np.asarray(ideal)
        n_q = int(round(math.log2(u.shape[0])))
        m = self.gate_map

        def channel(x):
            return m @ x @ m.conj().T

        return metrics.nielsen_fidelity(channel, u, n_q)

    def conditional_phase(self) -> float:
        return metrics.conditional_phase(self.gate_map)

    def state_fidelity(self, target=None, input_label=None) -> float:
        """Overlap of one realized output with the target state."""
        tgt = self.schedule.ideal_state if target is None else np.asarray(target, complex)
        if tgt is None:
            raise ValueError("schedule has no ideal state")
        lab = tuple(input_label) if input_label else self.schedule.input_labels[0]
        out = self.outputs[lab]
        return float(abs(np.vdot(tgt, out)) ** 2)

    def leakage(self, input_label) -> float:
        """Norm remaining outside the computational (input-label) span."""
        lab = tuple(input_label)
        out = self.outputs[lab]
        comp = sum(abs(np.vdot(self.schedule.register.basis_state(l), out)) ** 2
                   for l in self.schedule.input_labels)
        return float(np.linalg.norm(out) ** 2 - comp)

    def error_budget(self) -> ErrorBudget:
        decay = 1.0 - self.mean_survival
        leak = float(np.mean([self.leakage(l) for l in self.schedule.input_labels]))
        ped = None
        if self.schedule.ideal_map is not None:
            ped = self.pedersen_fidelity()
        residual = max(0.0, (1.0 - ped) - decay - leak) if ped is not None else 0.0
        return ErrorBudget(
            decay=min(max(decay, 0.0), 1.0),
            blockade_leak=min(max(leak, 0.0), 1.0),
            dephasing=0.0,
            residual=min(max(residual, 0.0), 1.0),
        )


def simulate(schedule: PulseSchedule, *, decay: bool = False,
             velocities=None, interaction_scale: float = 1.0,
             tol: float = 1e-10, keep_trajectories: bool = False,
             trajectory_points: int = 200,
             track_residence: bool = True) -> GateResult:
    """Propagate every declared input state through the schedule.

    Parameters
    ----------
    decay : bool
        Apply the register's per-level decay rates as a non-Hermitian
        norm-loss term.
    velocities : per-atom array, optional
        Atomic velocities (um/us); every drive on an excited level then
        contributes a Doppler detuning k_eff * v on all excited levels of
        its atom.
    interaction_scale : float
        Multiplies every pairwise interaction (position-fluctuation
        Monte Carlo feeds per-trajectory scales here).
    keep_trajectories / trajectory_points
        Store sampled trajectories per input (for population plots).
    track_residence : bool
        Integrate the excited-state population along the way (needed for
        decay accounting; disable for speed in inner optimization loops).
    """
    reg = schedule.register
    kept = _kept_indices(reg)
    dim_full = reg.dim

    def reduce_m(m):
        return m if kept is None else m[np.ix_(kept, kept)]

    def reduce_v(v):
        return v if kept is None else v[kept]

    dim = dim_full if kept is None else len(kept)
    h_int = reduce_m(reg.interaction_matrix(interaction_scale))
    decay_vec = reduce_v(reg.decay_vector()) if decay else None
    doppler = _atom_doppler_shifts(schedule, velocities)

    exc_full = set(reg.excited_indices())
    if kept is None:
        exc_idx = sorted(exc_full)
    else:
        exc_idx = [k for k, i in enumerate(kept) if i in exc_full]

    # --- breakpoints -------------------------------------------------
    times = {0.0}
    for seg in schedule.segments:
        if isinstance(seg, Segment):
            times.update((seg.t0, seg.t1))
        else:
            times.add(seg.time)
    breakpoints = sorted(times)

    def interval_model(t0: float, t1: float):
        """(HamiltonianModel or static matrix, static?) for (t0, t1)."""
        tm = 0.5 * (t0 + t1)
        model = HamiltonianModel(dim)
        model.add_term(1.0, h_int)
        static = True
        for seg in schedule.segments:
            if not isinstance(seg, Segment) or not (seg.t0 <= tm < seg.t1):
                continue
            for d in seg.drives:
                up = reduce_m(reg.transition(d.atom, d.lower, d.upper))
                proj = reduce_m(reg.projector(d.atom, d.upper))
                if callable(d.rabi):
                    static = False
                    model.add_term(lambda t, f=d.rabi: complex(f(t)) / 2.0, up)
                    model.add_term(lambda t, f=d.rabi: np.conj(complex(f(t))) / 2.0,
                                   up.conj().T)
                else:
                    r = complex(d.rabi)
                    model.add_term(r / 2.0, up)
                    model.add_term(np.conj(r) / 2.0, up.conj().T)
                if callable(d.detuning):
                    static = False
                    model.add_term(lambda t, f=d.detuning: float(f(t)), proj)
                elif d.detuning != 0.0:
                    model.add_term(float(d.detuning), proj)
            for coef, matfun in seg.extra_terms:
                mat = reduce_m(np.asarray(matfun(reg), dtype=complex))
                if callable(coef):
                    static = False
                model.add_term(coef, mat)
        for atom, shift in doppler.items():
            if shift == 0.0:
                continue
            p = np.zeros((dim_full, dim_full), dtype=complex)
            for lab in reg.excited_levels:
                if lab in reg.levels[atom]:
                    p += reg.projector(atom, lab)
            model.add_term(shift, reduce_m(p))
        if decay_vec is not None:
            model.add_term(1.0, -0.5j * np.diag(decay_vec.astype(complex)))
        return model, static

    maps_at = {seg.time: reduce_m(np.asarray(seg.operator, dtype=complex))
               for seg in schedule.segments if isinstance(seg, MapSegment)}

    def propagate(y0):
        y = y0.copy()
        acc = 0.0
        ts_all, ys_all = [np.array([0.0])], [y0.reshape(-1, 1)]
        for a, b in zip(breakpoints[:-1], breakpoints[1:]):
            if a in maps_at:
                y = maps_at[a] @ y
            if b <= a:
                continue
            model, static = interval_model(a, b)
            if static and not (track_residence or keep_trajectories):
                y = _segment_expm(model.static_matrix(), b - a) @ y
            else:
                n_store = trajectory_points if keep_trajectories else 40
                try:
                    traj = evolve(model, y, (a, b), tol=tol, n_store=n_store)
                except EvolveError:
                    raise
                if track_residence and exc_idx:
                    acc += traj.residence_time(exc_idx)
                if keep_trajectories:
                    ts_all.append(traj.times)
                    ys_all.append(traj.states)
                y = traj.final
        if breakpoints and breakpoints[-1] in maps_at:
            y = maps_at[breakpoints[-1]] @ y
        return y, acc, (np.concatenate(ts_all), np.hstack(ys_all)) if keep_trajectories else None

    # --- run every declared input ------------------------------------
    outputs: dict[tuple, NDArray] = {}
    survivals: dict[tuple, float] = {}
    residence: dict[tuple, float] = {}
    trajectories: dict[tuple, tuple] = {}
    comp_index = {}
    for lab in schedule.input_labels:
        i = reg.index(lab)
        comp_index[lab] = i if kept is None else kept.index(i)
    n_in = len(schedule.input_labels)
    gate_map = np.zeros((n_in, n_in), dtype=complex)
    for col, lab in enumerate(schedule.input_labels):
        y0 = np.zeros(dim, dtype=complex)
        y0[comp_index[lab]] = 1.0
        y, acc, traj = propagate(y0)
        out_full = y
        if kept is not None:
            full = np.zeros(dim_full, dtype=complex)
            full[kept] = y
            out_full = full
        outputs[lab] = out_full
        survivals[lab] = float(np.linalg.norm(y) ** 2)
        residence[lab] = acc
        if traj is not None:
            trajectories[lab] = traj
        for row, lab2 in enumerate(schedule.input_labels):
            gate_map[row, col] = y[comp_index[lab2]]
    return GateResult(schedule, outputs, gate_map, survivals, residence, trajectories)
