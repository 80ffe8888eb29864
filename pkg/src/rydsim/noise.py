"""Stochastic and analytic error models.

Doppler dephasing is modelled as a random constant velocity per
trajectory (free flight during the pulses): each Rydberg-coupled drive
picks up a detuning k_eff * v on its atom.  The thermal velocity spread
along the drive axis is sigma_v = sqrt(kB * T / m); the ensemble-averaged
coherence of a drifting Rydberg phase then decays as exp(-(t/T_D)^2)
with T_D = sqrt(2)/(k * sigma_v).

Interaction fluctuation is sampled classically from the thermal
harmonic-oscillator position distribution; photon-recoil changes of the
motional state are out of scope.  All sampling is bit-reproducible under
a fixed seed and count, with per-trajectory child seeds so parallel
execution cannot change results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "ThermalSpec",
    "ErrorBudget",
    "NoiseStats",
    "effective_wavevector",
    "doppler_samples",
    "apply_doppler",
    "position_fluctuation",
    "interaction_scales",
    "blockade_error_analytic",
    "blockade_error_mean",
    "doppler_time",
    "decay_error",
    "decay_error_residence",
]

_KB = 1.380649e-23      # J/K
_AMU = 1.66053906660e-27  # kg


@dataclass(frozen=True)
class ThermalSpec:
    """Atomic temperature (uK), mass (amu) and the signed effective
    wavevector along the drive axis (rad/um)."""

    temperature_uk: float
    mass_amu: float
    k_eff: float = 0.0

    def __post_init__(self):
        if self.temperature_uk < 0:
            raise ValueError("temperature must be nonnegative")
        if self.mass_amu <= 0:
            raise ValueError("mass must be positive")

    @property
    def sigma_v(self) -> float:
        """One-dimensional thermal velocity spread sqrt(kB T / m), um/us.

        Note the 1/sqrt(m): a heavier atom moves less.  (1 um/us = 1 m/s.)
        """
        t_k = self.temperature_uk * 1e-6
        return math.sqrt(_KB * t_k / (self.mass_amu * _AMU))


@dataclass(frozen=True)
class ErrorBudget:
    """Reported error components; these are diagnostics and are not
    claimed to sum to the total infidelity."""

    decay: float = 0.0
    blockade_leak: float = 0.0
    dephasing: float = 0.0
    residual: float = 0.0

    def __post_init__(self):
        for name in ("decay", "blockade_leak", "dephasing", "residual"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} = {v} outside [0, 1]")

    def as_dict(self) -> dict[str, float]:
        return {
            "decay": self.decay,
            "blockade_leak": self.blockade_leak,
            "dephasing": self.dephasing,
            "residual": self.residual,
        }


def effective_wavevector(wavelengths_nm, directions) -> NDArray[np.floating]:
    """Vector sum of photon wavevectors, rad/um.

    Each beam contributes (2 pi / lambda) * d_hat with the caller-chosen
    propagation direction (signs included in the unit vectors).  Beam
    geometries that null this sum remove Doppler dephasing and photon
    recoil at the same time.
    """
    wl = np.asarray(wavelengths_nm, dtype=float)
    if (wl <= 0).any():
        raise ValueError("wavelengths must be positive")
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    if dirs.shape[0] != wl.size:
        raise ValueError("need one direction per wavelength")
    norms = np.linalg.norm(dirs, axis=1)
    if np.max(np.abs(norms - 1.0)) > 1e-8:
        raise ValueError("directions must be unit vectors")
    k = 2.0 * math.pi / (wl * 1e-3)  # nm -> um
    return (dirs * k[:, None]).sum(axis=0)


def doppler_samples(spec: ThermalSpec, count: int, seed) -> NDArray[np.floating]:
    """One-dimensional thermal velocity samples (um/us), deterministic
    under a fixed seed."""
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(seed)
    if spec.temperature_uk == 0.0:
        return np.zeros(count)
    return rng.normal(0.0, spec.sigma_v, size=count)


def doppler_time(spec: ThermalSpec) -> float:
    """Gaussian dephasing time T_D = sqrt(2)/(k sigma_v) of the
    ensemble-averaged coherence exp(-(t/T_D)^2)."""
    ks = abs(spec.k_eff) * spec.sigma_v
    return math.inf if ks == 0.0 else math.sqrt(2.0) / ks


@dataclass
class NoiseStats:
    """Mean and standard error of each requested metric over trajectories."""

    samples: int
    metrics: dict[str, tuple[float, float]]

    def mean(self, name: str) -> float:
        return self.metrics[name][0]

    def stderr(self, name: str) -> float:
        return self.metrics[name][1]


def _child_seeds(seed, count: int):
    return np.random.SeedSequence(seed).spawn(count)


def apply_doppler(schedule, spec: ThermalSpec, count: int, seed,
                  metric_fns=None, decay: bool = False,
                  interaction_sigma: float = 0.0, tol: float = 1e-10) -> NoiseStats:
    """Monte Carlo average of schedule metrics over thermal velocities.

    Each trajectory draws an independent velocity per atom; every
    Rydberg-coupled drive must carry a k_eff assignment (the simulator
    rejects the run otherwise).  `metric_fns` maps metric names to
    callables GateResult -> float; the default scores the Pedersen
    fidelity when the schedule has an ideal map, else the target-state
    overlap.  `interaction_sigma`, when nonzero, additionally scales the
    register interactions per trajectory by N(1, sigma) (relative r.m.s.
    fluctuation).

    The reduction is an ordered mean over trajectory index, so worker-
    pool execution cannot change the result.
    """
    from .schedules import simulate  # local import to avoid a cycle

    if metric_fns is None:
        if schedule.ideal_map is not None:
            metric_fns = {"pedersen": lambda r: r.pedersen_fidelity()}
        else:
            metric_fns = {"state_fidelity": lambda r: r.state_fidelity()}
    n_atoms = schedule.register.n_atoms
    values = {name: np.zeros(count) for name in metric_fns}
    for i, ss in enumerate(_child_seeds(seed, count)):
        rng = np.random.default_rng(ss)
        v = (rng.normal(0.0, spec.sigma_v, size=n_atoms)
             if spec.temperature_uk > 0 else np.zeros(n_atoms))
        scale = 1.0
        if interaction_sigma > 0.0:
            scale = float(rng.normal(1.0, interaction_sigma))
        res = simulate(schedule, decay=decay, velocities=v,
                       interaction_scale=scale, tol=tol, track_residence=False)
        for name, fn in metric_fns.items():
            values[name][i] = fn(res)
    out = {}
    for name, arr in values.items():
        se = float(arr.std(ddof=1) / math.sqrt(count)) if count > 1 else 0.0
        out[name] = (float(arr.mean()), se)
    return NoiseStats(samples=count, metrics=out)


def position_fluctuation(trap_freqs_khz, temperature_uk: float, mass_amu: float,
                         count: int, seed) -> NDArray[np.floating]:
    """Per-trajectory interatomic-separation offsets delta-L (um).

    Positions are drawn classically from the thermal harmonic-oscillator
    distribution, sigma_x = sqrt(kB T / (m omega^2)) per atom along the
    separation axis; the offset is the difference of the two atoms'
    longitudinal displacements.  `trap_freqs_khz` is (f_atom1, f_atom2)
    or a scalar shared by both.
    """
    freqs = np.atleast_1d(np.asarray(trap_freqs_khz, dtype=float))
    if (freqs <= 0).any():
        raise ValueError("trap frequencies must be positive")
    if freqs.size == 1:
        freqs = np.repeat(freqs, 2)
    rng = np.random.default_rng(seed)
    if temperature_uk == 0.0:
        return np.zeros(count)
    t_k = temperature_uk * 1e-6
    m = mass_amu * _AMU
    omegas = 2.0 * math.pi * freqs * 1e3  # kHz -> rad/s
    sig_m = np.sqrt(_KB * t_k / m) / omegas  # meters
    sig_um = sig_m * 1e6
    x1 = rng.normal(0.0, sig_um[0], size=count)
    x2 = rng.normal(0.0, sig_um[1], size=count)
    return x2 - x1


def interaction_scales(kind: str, delta_l: NDArray, L: float) -> NDArray[np.floating]:
    """Per-trajectory interaction scale factors V(L + dL)/V(L) for a C6
    or C3 law; to first order 1 - 6 dL/L and 1 - 3 dL/L respectively."""
    power = {"c6": 6, "c3": 3}[kind.lower()]
    return (L / (L + np.asarray(delta_l, dtype=float))) ** power


def blockade_error_analytic(rabi: float, v_over_hbar: float) -> float:
    """Doubly-excited population left by a 2*pi pulse at finite blockade,

        eps = rabi^2/(v^2 + rabi^2) * sin^2(pi sqrt(v^2 + rabi^2)/rabi),

    the exact two-level result for the driven |r1> <-> |rr> block.
    Always in [0, 1]; vanishes whenever sqrt(v^2 + rabi^2)/rabi is an
    integer and falls off as (rabi/v)^2 deep in the blockade regime.
    """
    if v_over_hbar == 0.0:
        raise ValueError("blockade error undefined at zero interaction")
    gen = math.sqrt(v_over_hbar ** 2 + rabi ** 2)
    return (rabi / gen) ** 2 * math.sin(math.pi * gen / rabi) ** 2


def blockade_error_mean(rabi: float, v_over_hbar: float) -> float:
    """Interaction-fluctuation average of the blockade error,
    eps_bar = rabi^2 / (2 v^2)."""
    if v_over_hbar == 0.0:
        raise ValueError("blockade error undefined at zero interaction")
    return rabi ** 2 / (2.0 * v_over_hbar ** 2)


def decay_error(times, excited_population, tau: float) -> float:
    """Decay probability (1/tau) * integral of the excited population.

    Agrees with 1 - survival from the non-Hermitian engine to order
    eps^2 in the small-decay limit.
    """
    if tau <= 0:
        raise ValueError("lifetime must be positive")
    t = np.asarray(times, dtype=float)
    p = np.asarray(excited_population, dtype=float)
    return float(np.trapezoid(p, t) / tau)


def decay_error_residence(residence_time: float, tau: float) -> float:
    """Decay probability from a precomputed excited-state residence time
    (the T_R / tau bookkeeping used for analytic gate-error estimates)."""
    if tau <= 0:
        raise ValueError("lifetime must be positive")
    return residence_time / tau
