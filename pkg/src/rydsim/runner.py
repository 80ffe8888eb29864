"""Config-driven experiment runner.

An `ExperimentConfig` names a protocol, parameter values (frequencies in
plain MHz; the single 2*pi conversion to angular units happens here, at
ingestion), optional sweep axes, requested metrics, and an optional
noise block.  `run_experiment` expands the sweep, simulates every point
(optionally Monte Carlo averaged over Doppler velocities and interaction
fluctuation), and returns one record per sweep point with deterministic
column ordering.  Identical config + seed gives identical records;
anything wall-clock-dependent stays out of them.

Sweep points are dispatched to a thread pool sized by the
RYDSIM_WORKERS environment variable (default 1); records are assembled
in sweep order so parallelism never changes output bytes.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from pydantic import BaseModel, Field, field_validator

from . import protocols
from .noise import ThermalSpec, apply_doppler
from .schedules import GateResult, simulate

__all__ = [
    "ConfigError",
    "NumericalError",
    "SweepAxis",
    "NoiseConfig",
    "OutputSpec",
    "ExperimentConfig",
    "RunOutput",
    "run_experiment",
    "ingest_params",
]

TWO_PI = 2.0 * math.pi


class ConfigError(ValueError):
    """Config rejected before any simulation ran."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class NumericalError(RuntimeError):
    pass


class SweepAxis(BaseModel):
    parameter: str
    values: list[float]

    @field_validator("values")
    @classmethod
    def _finite(cls, v):
        if not v:
            raise ValueError("sweep axis needs at least one value")
        if not all(math.isfinite(x) for x in v):
            raise ValueError("sweep values must be finite")
        return v


class NoiseConfig(BaseModel):
    """Noise block: thermal Doppler sampling and interaction fluctuation.

    temperature_uk / mass_amu / k_eff_rad_um drive the Doppler model
    (k_eff is forwarded to the protocol's Rydberg drives unless the
    params set one).  Interaction fluctuation is either a direct
    relative r.m.s. (`v_sigma_rel`) or derived from a trap
    (`trap_freq_khz` + `separation_um` + `interaction_kind`).
    """

    temperature_uk: float = 0.0
    mass_amu: float = 87.0
    k_eff_rad_um: float | None = None
    trap_freq_khz: float | None = None
    separation_um: float | None = None
    interaction_kind: str | None = None   # "c6" or "c3"
    v_sigma_rel: float | None = None
    samples: int = Field(default=100, ge=1)
    seed: int | None = None

    @property
    def active(self) -> bool:
        return self.temperature_uk > 0.0 or (self.v_sigma_rel or 0.0) > 0.0 \
            or self.trap_freq_khz is not None


class OutputSpec(BaseModel):
    csv: str | None = None
    json_path: str | None = Field(default=None, alias="json")

    model_config = {"populate_by_name": True}


class ExperimentConfig(BaseModel):
    protocol: str
    params: dict = Field(default_factory=dict)
    sweep: list[SweepAxis] = Field(default_factory=list)
    metrics: list[str] | None = None
    noise: NoiseConfig | None = None
    output: OutputSpec = Field(default_factory=OutputSpec)


class RunOutput(BaseModel):
    protocol: str
    columns: list[str]
    records: list[dict]


# ----------------------------------------------------------------------
# Validation and unit ingestion
# ----------------------------------------------------------------------


def _protocol_info(name: str) -> protocols.ProtocolInfo:
    try:
        return protocols.PROTOCOLS[name]
    except KeyError:
        known = ", ".join(sorted(protocols.PROTOCOLS))
        raise ConfigError("unknown_protocol",
                          f"unknown protocol {name!r}; known: {known}") from None


def ingest_params(info: protocols.ProtocolInfo, raw: dict) -> dict:
    """Convert config-unit parameters to builder units.

    Frequencies arrive in ordinary MHz and are multiplied by 2*pi here,
    exactly once; everything else passes through.
    """
    out = {}
    for key, value in raw.items():
        spec = info.params.get(key)
        if spec is None:
            raise ConfigError("schema_violation",
                              f"protocol {info.name!r} has no parameter {key!r}")
        if value is None:
            out[key] = None
        elif spec.kind == "mhz":
            out[key] = TWO_PI * float(value)
        elif spec.kind == "int":
            out[key] = int(value)
        elif spec.kind == "rad":
            out[key] = float(value)
        else:
            out[key] = value
    for key, spec in info.params.items():
        if key not in out and spec.default is not None:
            out[key] = (TWO_PI * spec.default if spec.kind == "mhz" and
                        isinstance(spec.default, (int, float)) else spec.default)
    return out


def validate_config(cfg: ExperimentConfig) -> protocols.ProtocolInfo:
    info = _protocol_info(cfg.protocol)
    for key in cfg.params:
        if key not in info.params:
            raise ConfigError("schema_violation",
                              f"protocol {cfg.protocol!r} has no parameter {key!r}")
    for axis in cfg.sweep:
        if axis.parameter not in info.params:
            raise ConfigError("schema_violation",
                              f"sweep parameter {axis.parameter!r} unknown to "
                              f"protocol {cfg.protocol!r}")
    for m in cfg.metrics or []:
        if m not in info.metrics:
            raise ConfigError(
                "schema_violation",
                f"metric {m!r} not available for {cfg.protocol!r}; "
                f"choose from {info.metrics}")
    if cfg.noise is not None and cfg.noise.active and cfg.noise.seed is None:
        raise ConfigError("schema_violation",
                          "noise sampling is on but no seed is set")
    return info


# ----------------------------------------------------------------------
# Metric extraction
# ----------------------------------------------------------------------

_METRIC_FNS = {
    "pedersen": lambda r: r.pedersen_fidelity(),
    "nielsen": lambda r: r.nielsen_fidelity(),
    "truth_table": lambda r: r.truth_table_fidelity(),
    "conditional_phase": lambda r: r.conditional_phase(),
    "survival": lambda r: r.mean_survival,
    "leak": lambda r: float(np.mean([r.leakage(l) for l in r.schedule.input_labels])),
    "state_fidelity": lambda r: r.state_fidelity(),
}


def _noise_scale_sigma(noise: NoiseConfig) -> float:
    if noise.v_sigma_rel:
        return float(noise.v_sigma_rel)
    if noise.trap_freq_khz and noise.separation_um and noise.interaction_kind:
        from .noise import _AMU, _KB  # reuse the shared constants
        t_k = noise.temperature_uk * 1e-6
        omega = TWO_PI * noise.trap_freq_khz * 1e3
        sig_um = math.sqrt(_KB * t_k / (noise.mass_amu * _AMU)) / omega * 1e6
        power = {"c6": 6.0, "c3": 3.0}[noise.interaction_kind.lower()]
        # relative V spread of the separation difference, linearized
        return power * math.sqrt(2.0) * sig_um / noise.separation_um
    return 0.0


def _run_point(info: protocols.ProtocolInfo, params: dict, metric_names: list[str],
               noise: NoiseConfig | None, point_seed) -> dict:
    try:
        schedule = info.builder(params)
    except protocols.ResourceLimitError as exc:
        raise ConfigError("resource_limit", str(exc)) from exc
    except (KeyError, TypeError) as exc:
        raise ConfigError("schema_violation", f"cannot build {info.name}: {exc}") from exc
    decay = bool(schedule.register.decay)
    record: dict = {}
    if noise is not None and noise.active:
        spec = ThermalSpec(noise.temperature_uk, noise.mass_amu,
                           noise.k_eff_rad_um or 0.0)
        fns = {m: _METRIC_FNS[m] for m in metric_names}
        stats = apply_doppler(schedule, spec, noise.samples, point_seed,
                              metric_fns=fns, decay=decay,
                              interaction_sigma=_noise_scale_sigma(noise), tol=1e-8)
        for m in metric_names:
            record[f"{m}_mean"], record[f"{m}_stderr"] = stats.metrics[m]
        ref = simulate(schedule, decay=decay)
        budget = ref.error_budget().as_dict()
        lead = metric_names[0]
        budget["dephasing"] = max(0.0, _METRIC_FNS[lead](ref) - record[f"{lead}_mean"])
        record.update(budget)
    else:
        result = simulate(schedule, decay=decay)
        for m in metric_names:
            record[m] = _METRIC_FNS[m](result)
        record.update(result.error_budget().as_dict())
    return record


def run_experiment(cfg: ExperimentConfig) -> RunOutput:
    info = validate_config(cfg)
    metric_names = list(cfg.metrics) if cfg.metrics else [info.metrics[0]]
    axes = [(a.parameter, a.values) for a in cfg.sweep]
    points = list(itertools.product(*[vals for _, vals in axes])) if axes else [()]

    def point_params(raw_point) -> tuple[dict, dict]:
        raw = dict(cfg.params)
        swept = {}
        for (name, _), val in zip(axes, raw_point):
            raw[name] = val
            swept[name] = val
        # the Doppler model needs k_eff on the drives; inject it from the
        # noise block when the protocol supports it
        if (cfg.noise is not None and cfg.noise.k_eff_rad_um is not None
                and "k_eff" in info.params and raw.get("k_eff") is None):
            raw["k_eff"] = cfg.noise.k_eff_rad_um
        return ingest_params(info, raw), swept

    def job(idx_point):
        idx, raw_point = idx_point
        params, swept = point_params(raw_point)
        seed = None
        if cfg.noise is not None and cfg.noise.seed is not None:
            seed = np.random.SeedSequence([cfg.noise.seed, idx])
        try:
            rec = _run_point(info, params, metric_names, cfg.noise, seed)
        except ConfigError:
            raise
        except Exception as exc:
            raise NumericalError(
                f"sweep point {idx} of {cfg.protocol} failed: {exc}") from exc
        return {"sweep_index": idx, **swept, **rec}

    workers = max(1, int(os.environ.get("RYDSIM_WORKERS", "1")))
    jobs = list(enumerate(points))
    if workers == 1 or len(jobs) == 1:
        records = [job(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(job, jobs))

    columns = ["sweep_index"] + [name for name, _ in axes]
    if cfg.noise is not None and cfg.noise.active:
        for m in metric_names:
            columns += [f"{m}_mean", f"{m}_stderr"]
    else:
        columns += metric_names
    columns += ["decay", "blockade_leak", "dephasing", "residual"]
    return RunOutput(protocol=cfg.protocol, columns=columns, records=records)
