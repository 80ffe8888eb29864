"""Gate and entanglement protocol builders and their dedicated solvers.

Every builder returns a `PulseSchedule` carrying the drive segments, the
exact ideal target (unitary or state), the declared input set, and
protocol annotations, ready for `schedules.simulate` and the metric
layer.  Solvers (the detuned-phase closure solver and the
transition-slow-down condition search) live next to the builders that
consume them.

Conventions: Rabi frequencies and interactions are rad/us, times us;
drives follow (Omega/2)|upper><lower| + h.c. with rotating-frame
detunings on the upper level, so a resonant pi pulse maps
|1> -> -i|r> and a 2*pi pulse contributes a -1 phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import quad
from scipy.optimize import brentq, minimize_scalar

from .ham import DriveSpec, Register, tsd_three_state, two_qubit_register
from .interact import interaction_at
from .noise import blockade_error_analytic
from .qcore import _segment_expm
from .schedules import MapSegment, PulseSchedule, Segment, simulate

__all__ = [
    "ResourceLimitError",
    "blockade_cz",
    "PhaseGateSolution",
    "detuned_phase_solve",
    "detuned_phase_schedule",
    "tsd_two_pulse_alpha",
    "tsd_cnot_two_pulse",
    "tsd_cnot_one_shot",
    "tsd_conditions",
    "TsdSearchResult",
    "tsd_condition_search",
    "dark_state_gate",
    "ghz_asymmetric",
    "spin_echo_cz",
    "antiblockade_cz",
    "wait_phase_gate",
    "ensemble_adiabatic_excitation",
    "swept_forster_transfer",
    "berry_phases",
    "PROTOCOLS",
    "protocol_catalog",
    "build_protocol",
]

CZ_IDEAL = np.diag([1.0, -1.0, -1.0, -1.0]).astype(complex)
CNOT_IDEAL = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
COMP_LABELS = (("0", "0"), ("0", "1"), ("1", "0"), ("1", "1"))

GHZ_DIM_LIMIT = 1024


class ResourceLimitError(ValueError):
    """A requested build exceeds a hard resource bound."""


def _wrap(x: float) -> float:
    return (x + math.pi) % (2.0 * math.pi) - math.pi


# ======================================================================
# Three-pulse blockade controlled-Z
# ======================================================================


def blockade_cz(rabi: float, v_over_hbar: float | None, detuning: float = 0.0,
                tau: float | None = None, k_eff: float | None = None) -> PulseSchedule:
    """Three-pulse blockade C_Z: pi (control) - 2*pi (target) - pi (control).

    In the strong-blockade limit the sequence maps the computational
    basis to diag(1, -1, -1, -1).  At finite interaction the 2*pi pulse
    leaks population into the doubly excited state; the leak equals the
    closed-form blockade error, recorded in the annotations.
    v_over_hbar = None simulates the infinite-blockade truncation.
    """
    if rabi <= 0:
        raise ValueError("Rabi frequency must be positive")
    reg = two_qubit_register(v_over_hbar, tau=tau)
    t_pi = math.pi / rabi
    mk = lambda atom, t0, dt: Segment(  # noqa: E731
        t0, t0 + dt, (DriveSpec(atom, "1", "r", rabi, detuning, k_eff=k_eff),)
    )
    segments = [mk(0, 0.0, t_pi), mk(1, t_pi, 2 * t_pi), mk(0, 3 * t_pi, t_pi)]
    ann = {"t_pi": t_pi}
    if v_over_hbar is not None:
        ann["blockade_error"] = blockade_error_analytic(rabi, v_over_hbar)
    return PulseSchedule(reg, segments, COMP_LABELS, ideal_map=CZ_IDEAL, annotations=ann)


# ======================================================================
# Detuned-Rabi controlled-phase gate (two simultaneous pulses)
# ======================================================================


@dataclass(frozen=True)
class PhaseGateSolution:
    """Closure solution of the two-pulse detuned controlled-phase gate.

    The pulse duration is fixed by the full detuned cycle of the doubly
    driven branch, t = 2*pi/obar with obar = sqrt(delta^2 + 2 rabi^2);
    delta_over_omega then makes the single-atom branch return with the
    phase alpha demanded by the target conditional phase, and xi is the
    unique laser-phase twist of the second pulse that closes the
    single-atom trajectory.
    """

    theta: float
    delta_over_omega: float
    xi: float
    t_omega: float
    k: int
    alpha: float
    beta: float
    blockade_shift: float = 0.0
    residuals: tuple[float, float] = (0.0, 0.0)


def _lp_parts(dor: float, theta: float, k: int, shift_ratio: float):
    """Closure ingredients at a trial detuning ratio.

    shift_ratio renormalizes the doubly driven branch's detuning by the
    second-order repulsion from the doubly excited state (finite
    blockade), delta_11 = delta - rabi^2/(2 v); everything is expressed
    in units of the Rabi frequency.
    """
    d11 = dor - shift_ratio
    obar = math.sqrt(d11 * d11 + 2.0)
    t = 2.0 * math.pi / obar
    ep = (dor + math.sqrt(1.0 + dor * dor)) / 2.0
    em = (dor - math.sqrt(1.0 + dor * dor)) / 2.0
    z = em * np.exp(1j * t * ep) - ep * np.exp(1j * t * em)
    w = np.exp(1j * t * ep) - np.exp(1j * t * em)
    alpha_target = (theta + 2.0 * k * math.pi - 2.0 * math.pi * (1.0 + d11 / obar)) / 2.0
    return t, z, w, alpha_target


def detuned_phase_solve(theta: float, k: int | None = None, *,
                        blockade_shift_ratio: float = 0.0,
                        scan_resolution: float = 1e-3) -> PhaseGateSolution:
    """Solve the two-pulse closure for a target conditional phase theta.

    Root-finds delta/rabi in (0, 2] so that the phase alpha returned by
    the single-atom branch (read off the time-reversal identity of its
    two-level evolution) equals the alpha demanded by the conditional
    phase relation 2 alpha - beta = theta + 2 k pi, with
    beta = -2 pi (1 + delta/obar) accumulated by the doubly driven
    branch over its full detuned cycle.  xi follows from the unimodular
    closure ratio.  With k = None the smallest integer placing alpha in
    (-2 pi, 0] is chosen.

    blockade_shift_ratio = rabi/(2 v) * rabi shifts the doubly driven
    branch's detuning to absorb the finite-blockade renormalization.
    """
    if not (0.0 < theta <= 2.0 * math.pi):
        raise ValueError("theta must lie in (0, 2*pi]")
    k_solve = 0 if k is None else int(k)

    def resid(dor: float) -> float:
        t, z, w, alpha_t = _lp_parts(dor, theta, k_solve, blockade_shift_ratio)
        return _wrap(float(np.angle(np.conj(z) / z)) - alpha_t)

    lo, hi = scan_resolution, 2.0
    xs = np.arange(lo, hi + scan_resolution / 2, scan_resolution)
    rs = [resid(x) for x in xs]
    root = None
    for i in range(len(xs) - 1):
        # skip the branch-cut jumps of the wrapped residual
        if rs[i] * rs[i + 1] < 0 and abs(rs[i] - rs[i + 1]) < math.pi:
            root = brentq(resid, xs[i], xs[i + 1], xtol=1e-15, rtol=8.9e-16)
            break
    if root is None:
        raise ValueError(
            f"no closure root for theta = {theta:.6g}, k = {k_solve} in the "
            f"scanned interval delta/rabi in ({lo:.3g}, {hi:.3g}]"
        )
    t, z, w, alpha = _lp_parts(root, theta, k_solve, blockade_shift_ratio)
    xi = (float(np.angle(np.conj(w) / w)) - alpha) % (2.0 * math.pi)
    if k is None:
        # canonicalize: shift alpha into (-2 pi, 0] by even steps of k
        k_out = k_solve
        while alpha <= -2.0 * math.pi:
            alpha += 2.0 * math.pi
            k_out += 2
        while alpha > 0.0:
            alpha -= 2.0 * math.pi
            k_out -= 2
    else:
        k_out = k_solve
    d11 = root - blockade_shift_ratio
    obar = math.sqrt(d11 * d11 + 2.0)
    beta = -2.0 * math.pi * (1.0 + d11 / obar)
    res_alpha = abs(_wrap(float(np.angle(np.conj(z) / z)) - alpha))
    res_xi = abs(_wrap(float(np.angle(np.conj(w) / w)) - alpha - xi))
    return PhaseGateSolution(
        theta=theta, delta_over_omega=root, xi=xi, t_omega=t, k=k_out,
        alpha=alpha, beta=beta, blockade_shift=blockade_shift_ratio,
        residuals=(res_alpha, res_xi),
    )


def detuned_phase_schedule(sol: PhaseGateSolution, rabi: float,
                           v_over_hbar: float | None = None,
                           correct_blockade: bool = True,
                           tau: float | None = None,
                           k_eff: float | None = None) -> PulseSchedule:
    """Two simultaneous equal-duration pulses on both atoms, the second
    with the laser phase twisted by xi.

    With a finite interaction and correct_blockade on, the closure is
    re-solved with the doubly driven branch's detuning renormalized by
    rabi^2/(2 v) (the second-order repulsion from the doubly excited
    state), which restores the conditional phase to theta up to
    (rabi/v)^2 corrections.  The ideal target is
    diag(1, e^{i alpha}, e^{i alpha}, e^{i beta}) with 2 alpha - beta =
    theta (mod 2 pi).
    """
    if rabi <= 0:
        raise ValueError("Rabi frequency must be positive")
    if v_over_hbar is not None and correct_blockade:
        shift = rabi / (2.0 * v_over_hbar)  # in units of rabi
        sol = detuned_phase_solve(sol.theta, sol.k, blockade_shift_ratio=shift)
    reg = two_qubit_register(v_over_hbar, tau=tau)
    delta = sol.delta_over_omega * rabi
    t = sol.t_omega / rabi
    def both(phase: float, t0: float) -> Segment:
        r = rabi * np.exp(1j * phase)
        return Segment(t0, t0 + t, (
            DriveSpec(0, "1", "r", r, delta, k_eff=k_eff),
            DriveSpec(1, "1", "r", r, delta, k_eff=k_eff),
        ))
    ideal = np.diag([1.0, np.exp(1j * sol.alpha), np.exp(1j * sol.alpha),
                     np.exp(1j * sol.beta)]).astype(complex)
    ann = {"solution": sol, "pulse_time": t}
    return PulseSchedule(reg, [both(0.0, 0.0), both(sol.xi, t)], COMP_LABELS,
                         ideal_map=ideal, annotations=ann)


# ======================================================================
# Transition slow-down CNOT gates
# ======================================================================


def tsd_two_pulse_alpha(k: int = 1) -> float:
    """Admissible control/target Rabi ratios of the two-pulse CNOT:
    the slowed-down interval must close, obar * t_pi = 4 k pi, giving
    alpha = sqrt(16 k^2 - 1); the smallest is sqrt(15)."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    return math.sqrt(16.0 * k * k - 1.0)


def _check_two_pulse_alpha(alpha: float) -> int:
    k = math.sqrt(alpha * alpha + 1.0) / 4.0
    if abs(k - round(k)) > 1e-9 or round(k) < 1:
        lo = max(1, int(k))
        nearest = ", ".join(f"sqrt({16 * j * j - 1}) = {tsd_two_pulse_alpha(j):.6f}"
                            for j in (lo, lo + 1))
        raise ValueError(
            f"alpha = {alpha} does not satisfy the closure condition "
            f"obar*t_pi = 4k*pi; nearest admissible values: {nearest}"
        )
    return int(round(k))


def tsd_cnot_two_pulse(rabi_t: float, alpha: float | None = None,
                       v_over_hbar: float | None = None,
                       tau: float | None = None,
                       k_eff: float | None = None) -> PulseSchedule:
    """Two-step CNOT by two-fold transition slow-down.

    Each step drives the target for a 2*pi area on both legs
    {|1>-|r>, |0>-|r'>} while the control is driven for alpha*pi on
    |1>-|r> during the first half of the step; the slowed-down interval
    closes when alpha = sqrt(16 k^2 - 1).  The second step swaps the
    target legs and flips the drive sign, deexciting the Rydberg
    population so the net map is exactly CNOT.

    Annotations carry the published residence-time bookkeeping
    t_r = 3*pi/(4*rabi_t) used for the headline decay estimate
    (`residence_bookkeeping`); the simulator's per-input residence
    integrals are larger and are reported separately by GateResult.
    """
    if rabi_t <= 0:
        raise ValueError("rabi_t must be positive")
    if alpha is None:
        alpha = tsd_two_pulse_alpha(1)
    k = _check_two_pulse_alpha(alpha)
    rabi_c = alpha * rabi_t
    t_pi = math.pi / rabi_t
    reg = two_qubit_register(v_over_hbar, tau=tau, levels=("0", "1", "r", "rp"))
    segs = []
    for step, (leg1, leg0, sgn) in enumerate((( "r", "rp", 1.0), ("rp", "r", -1.0))):
        t0 = 2 * step * t_pi
        segs.append(Segment(t0, t0 + 2 * t_pi, (
            DriveSpec(1, "1", leg1, sgn * rabi_t, k_eff=k_eff),
            DriveSpec(1, "0", leg0, sgn * rabi_t, k_eff=k_eff),
        )))
        segs.append(Segment(t0, t0 + t_pi,
                            (DriveSpec(0, "1", "r", rabi_c, k_eff=k_eff),)))
    ann = {
        "alpha": alpha, "k": k, "t_pi": t_pi,
        "residence_bookkeeping": 3.0 * math.pi / (4.0 * rabi_t),
    }
    return PulseSchedule(reg, segs, COMP_LABELS, ideal_map=CNOT_IDEAL, annotations=ann)


def tsd_two_pulse_decay_fidelity(rabi_t: float, tau: float,
                                 alpha: float | None = None) -> float:
    """Headline decay-limited fidelity of the two-pulse CNOT.

    The noiseless truncated map fidelity multiplied by the survival of
    the published bookkeeping, 1 - t_r/tau with t_r = 3*pi/(4*rabi_t).
    A full non-Hermitian simulation distributes more residence over the
    inputs (about 3x); use `simulate(..., decay=True)` for that number.
    """
    sched = tsd_cnot_two_pulse(rabi_t, alpha=alpha, v_over_hbar=None)
    f_map = simulate(sched, track_residence=False).pedersen_fidelity()
    return f_map * (1.0 - sched.annotations["residence_bookkeeping"] / tau)


ONE_SHOT_IDEAL = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, -1], [0, 0, -1, 0]], dtype=complex
)


def tsd_conditions(ratio: float, k1: int, rabi_t: float = 1.0) -> tuple[float, float, float]:
    """Pulse time and implied (k2, k3) of the one-shot CNOT conditions

        rabi_t * t = 2 sqrt(2) k1 pi,   rabi_c * t = 4 k2 pi,
        obar * t = 2 (2 k3 + 1) pi,     obar = sqrt(rabi_c^2 + 2 rabi_t^2).

    k2 and k3 are generally not integers; their distance to the nearest
    integers is the closure residual of the chosen ratio.
    """
    t = 2.0 * math.sqrt(2.0) * k1 * math.pi / rabi_t
    k2 = ratio * rabi_t * t / (4.0 * math.pi)
    obar = math.sqrt((ratio * rabi_t) ** 2 + 2.0 * rabi_t ** 2)
    k3 = (obar * t / (2.0 * math.pi) - 1.0) / 2.0
    return t, k2, k3


def _one_shot_map(ratio: float, k1: int, rabi_t: float = 1.0) -> NDArray:
    """Computational-basis map of the one-shot CNOT in the truncated
    (doubly-excited-state-free) model; fast path for the search."""
    rabi_c = ratio * rabi_t
    t = 2.0 * math.sqrt(2.0) * k1 * math.pi / rabi_t
    u5 = _segment_expm(tsd_three_state(rabi_c, rabi_t).array, t)
    h3 = np.zeros((3, 3), dtype=complex)  # {|00>, |01>, |0r>}
    h3[2, 0] = h3[2, 1] = rabi_t / 2.0
    h3 = h3 + h3.conj().T
    u3 = _segment_expm(h3, t)
    m = np.zeros((4, 4), dtype=complex)
    m[:2, :2] = u3[:2, :2]
    m[2, 2], m[2, 3] = u5[4, 4], u5[4, 3]   # basis (1r, r1, r0, 11, 10)
    m[3, 2], m[3, 3] = u5[3, 4], u5[3, 3]
    return m


def tsd_cnot_one_shot(rabi_t: float, ratio: float, k1: int = 3,
                      v_over_hbar: float | None = None,
                      tau: float | None = None,
                      k_eff: float | None = None) -> PulseSchedule:
    """One-shot CNOT by three-state transition slow-down.

    A single simultaneous pulse of duration 2 sqrt(2) k1 pi / rabi_t:
    the target drives the swap chain |0> <-> |r> <-> |1> with rabi_t
    while the control drives |1> <-> |r> with ratio*rabi_t.  The
    {|00>, |01>} sector returns exactly for integer k1; the slowed-down
    sector realizes {|10>, |11>} -> -{|11>, |10>} up to the residual of
    the (k2, k3) conditions.  Imperfect ratios are not rejected; they
    simply score lower.
    """
    if ratio <= 0:
        raise ValueError("ratio must be positive")
    t, k2, k3 = tsd_conditions(ratio, k1, rabi_t)
    reg = two_qubit_register(v_over_hbar, tau=tau)
    seg = Segment(0.0, t, (
        DriveSpec(0, "1", "r", ratio * rabi_t, k_eff=k_eff),
        DriveSpec(1, "0", "r", rabi_t, k_eff=k_eff),
        DriveSpec(1, "1", "r", rabi_t, k_eff=k_eff),
    ), simultaneous=True)
    ann = {"k1": k1, "k2": k2, "k3": k3, "ratio": ratio, "pulse_time": t,
           "k_residuals": (abs(k2 - round(k2)), abs(k3 - round(k3)))}
    return PulseSchedule(reg, [seg], COMP_LABELS, ideal_map=ONE_SHOT_IDEAL,
                         annotations=ann)


@dataclass(frozen=True)
class TsdSearchResult:
    k1: int
    ratio: float
    k2: float
    k3: float
    residuals: tuple[float, float]
    fidelity: float


def tsd_condition_search(k1_max: int, ratio_bracket: tuple[float, float] = (1.0, 6.0),
                         rabi_t: float = 1.0, objective: str = "fidelity",
                         kj_max: int = 10) -> TsdSearchResult:
    """Search the one-shot closure conditions over k1 and the Rabi ratio.

    For every k1 <= k1_max the simulated truncated map fidelity (or, in
    "residual" mode, minus the squared distance of (k2, k3) to the
    nearest integers) is maximized over the ratio, restricted so that
    the implied k2 and k3 stay below kj_max.  Deterministic tie-break:
    smallest k1, then smallest ratio.
    """
    if k1_max < 1:
        raise ValueError("k1_max must be at least 1")
    lo_user, hi_user = float(ratio_bracket[0]), float(ratio_bracket[1])
    if not (hi_user > lo_user > 0):
        raise ValueError(f"empty or invalid ratio bracket {ratio_bracket}")
    if objective not in ("fidelity", "residual"):
        raise ValueError("objective must be 'fidelity' or 'residual'")

    def score(ratio: float, k1: int) -> float:
        if objective == "fidelity":
            from .metrics import pedersen_fidelity
            return pedersen_fidelity(_one_shot_map(ratio, k1, rabi_t), ONE_SHOT_IDEAL)
        _, k2, k3 = tsd_conditions(ratio, k1, rabi_t)
        return -((k2 - round(k2)) ** 2 + (k3 - round(k3)) ** 2)

    best: TsdSearchResult | None = None
    for k1 in range(1, k1_max + 1):
        # keep k2 = ratio*k1/sqrt(2) and k3 below kj_max
        hi = min(hi_user, math.sqrt(2.0) * kj_max / k1)
        lim3 = (2.0 * kj_max + 1.0) / (math.sqrt(2.0) * k1)
        if lim3 > math.sqrt(2.0):
            hi = min(hi, math.sqrt(lim3 * lim3 - 2.0))
        else:
            continue
        if hi <= lo_user:
            continue
        grid = np.linspace(lo_user, hi, 400)
        vals = [score(r, k1) for r in grid]
        i = int(np.argmax(vals))
        a = grid[max(0, i - 1)]
        b = grid[min(len(grid) - 1, i + 1)]
        res = minimize_scalar(lambda r: -score(r, k1), bounds=(a, b),
                              method="bounded", options={"xatol": 1e-10})
        ratio = float(res.x)
        fid = score(ratio, k1)
        if best is None or fid > best.fidelity + 1e-12:
            _, k2, k3 = tsd_conditions(ratio, k1, rabi_t)
            best = TsdSearchResult(
                k1=k1, ratio=ratio, k2=k2, k3=k3,
                residuals=(abs(k2 - round(k2)), abs(k3 - round(k3))),
                fidelity=fid if objective == "fidelity"
                else -score(ratio, k1),
            )
    if best is None:
        raise ValueError("no k1 admits a nonempty ratio range under the k_j bound")
    return best


# ======================================================================
# Dark-state adiabatic controlled-Z (defect-free Foerster pair)
# ======================================================================


def shifted_gaussian(rabi_max: float, t_total: float, sigma: float):
    """Envelope rabi_max * [exp(-(t - T/2)^2/(2 sigma^2)) - exp(-T^2/(8 sigma^2))];
    the end-value subtraction zeroes the drive at both edges for any sigma."""
    off = math.exp(-t_total ** 2 / (8.0 * sigma ** 2))

    def env(t: float) -> float:
        return rabi_max * (math.exp(-(t - t_total / 2.0) ** 2 / (2.0 * sigma ** 2)) - off)

    return env


def dark_state_gate(rabi_max: float, t_total: float, sigma: float | None = None,
                    c3_ghz_um3: float = -33.0, separation_um: float = 8.0,
                    pi_rabi: float | None = None, tau: float | None = None,
                    k_eff: float | None = None) -> PulseSchedule:
    """Controlled-Z via adiabatic following of a Foerster dark state.

    pi (control |1> -> |r1>) - shifted-Gaussian adiabatic pulse (target
    |1> -> |r2>) - pi (control).  During the middle pulse the input
    |r1 1> follows the zero-energy dark state
    2V|r1 1> - Omega(t)|r3 r4> and returns with no phase for any V,
    while |01> sees a plain resonant pulse of area 2*pi and acquires pi.

    sigma defaults to t_total/5: with that width the default amplitude
    (2*pi x 7.643 rad/us at t_total = 0.29 us) makes the envelope area
    exactly 2*pi.  The dipole-dipole flip strength is C3/L^3.
    """
    if sigma is None:
        sigma = t_total / 5.0
    if pi_rabi is None:
        pi_rabi = rabi_max
    v = interaction_at("c3", c3_ghz_um3, separation_um)
    reg = Register(
        [("0", "1", "r1", "r3"), ("0", "1", "r2", "r4")],
        decay=({"r1": 1 / tau, "r2": 1 / tau, "r3": 1 / tau, "r4": 1 / tau} if tau else None),
        interactions=[(0, 1, {(("r1", "r2"), ("r3", "r4")): v})],
        excited_levels={"r1", "r2", "r3", "r4"},
    )
    t_pi = math.pi / pi_rabi
    env = shifted_gaussian(rabi_max, t_total, sigma)
    area = quad(env, 0.0, t_total, limit=200)[0]
    segs = [
        Segment(0.0, t_pi, (DriveSpec(0, "1", "r1", pi_rabi, k_eff=k_eff),)),
        Segment(t_pi, t_pi + t_total,
                (DriveSpec(1, "1", "r2", lambda t, t1=t_pi: env(t - t1), k_eff=k_eff),)),
        Segment(t_pi + t_total, 2 * t_pi + t_total,
                (DriveSpec(0, "1", "r1", pi_rabi, k_eff=k_eff),)),
    ]
    ann = {"v_flip": v, "sigma": sigma, "envelope_area": area,
           "dark_state_gap": math.sqrt(rabi_max ** 2 / 4.0 + v * v)}
    return PulseSchedule(reg, segs, COMP_LABELS, ideal_map=CZ_IDEAL, annotations=ann)


# ======================================================================
# GHZ preparation with asymmetric interactions
# ======================================================================


def ghz_asymmetric(n_atoms: int, rabi: float, v_ss: float, v_sp: float,
                   v_pp: float = 0.0, tau: float | None = None,
                   k_eff: float | None = None) -> PulseSchedule:
    """N-atom GHZ state in three steps using two Rydberg species.

    Step durations pi/(sqrt(N) rabi), sqrt(2) pi / rabi, and
    pi/(sqrt(N) rabi); total pi/rabi (2/sqrt(N) + sqrt(2)).  The first
    pulse drives |0> -> |s> at half amplitude so its window realizes the
    collective pi/2 rotation that splits off the symmetric
    one-excitation branch; a full-amplitude drive over the same window
    would complete the collective cycle and no superposition (hence no
    GHZ state) would form.  The middle pulse swaps |0> -> |p> -> -|1> on
    every atom (unblockaded since v_pp is small) while the s excitation
    blocks it in the branch holding one |s>; the last pulse is the
    collective pi rotation returning that branch.  Ideal target
    (-|0...0> + (-1)^N |1...1>)/sqrt(2); requires v_pp << rabi << v_ss,
    v_sp (declared by the caller, not enforced).
    """
    if n_atoms < 2:
        raise ValueError("need at least two atoms")
    if 4 ** n_atoms > GHZ_DIM_LIMIT:
        raise ResourceLimitError(
            f"Hilbert dimension 4^{n_atoms} exceeds the limit {GHZ_DIM_LIMIT}")
    levels = ("0", "1", "s", "p")
    decay = {"s": 1 / tau, "p": 1 / tau} if tau else None
    interactions = []
    for a in range(n_atoms):
        for b in range(a + 1, n_atoms):
            interactions.append((a, b, {
                (("s", "s"), ("s", "s")): v_ss,
                (("s", "p"), ("s", "p")): v_sp,
                (("p", "s"), ("p", "s")): v_sp,
                (("p", "p"), ("p", "p")): v_pp,
            }))
    reg = Register([levels] * n_atoms, decay=decay, interactions=interactions,
                   excited_levels={"s", "p"})
    t1 = math.pi / (math.sqrt(n_atoms) * rabi)
    t2 = math.sqrt(2.0) * math.pi / rabi
    segs = [
        Segment(0.0, t1, tuple(
            DriveSpec(a, "0", "s", rabi / 2.0, k_eff=k_eff) for a in range(n_atoms))),
        Segment(t1, t1 + t2, tuple(
            d for a in range(n_atoms)
            for d in (DriveSpec(a, "0", "p", rabi, k_eff=k_eff),
                      DriveSpec(a, "1", "p", rabi, k_eff=k_eff)))),
        Segment(t1 + t2, 2 * t1 + t2, tuple(
            DriveSpec(a, "0", "s", rabi, k_eff=k_eff) for a in range(n_atoms))),
    ]
    ghz = np.zeros(reg.dim, dtype=complex)
    ghz[reg.index(("0",) * n_atoms)] = -1.0 / math.sqrt(2.0)
    ghz[reg.index(("1",) * n_atoms)] = (-1.0) ** n_atoms / math.sqrt(2.0)
    ann = {"total_time": 2 * t1 + t2,
           "duration_formula": math.pi / rabi * (2.0 / math.sqrt(n_atoms) + math.sqrt(2.0))}
    return PulseSchedule(reg, segs, [("0",) * n_atoms], ideal_state=ghz, annotations=ann)


# ======================================================================
# Spin-echo suppression of the blockade error
# ======================================================================


def spin_echo_cz(rabi: float, v0: float, v0_prime: float,
                 microwave_rabi: float | None = None) -> PulseSchedule:
    """Echoed replacement of the blockade gate's 2*pi pulse.

    pi pulse (target, |1> -> |r>, Rabi rabi) - Rydberg flip r -> r'
    on both atoms - pi pulse (target, |r'> -> |1>, Rabi
    rabi' = rabi * v0'/v0).  With the flip instantaneous and the
    interaction frozen, H' t' = -H t exactly (v0 and v0' of opposite
    sign make rabi' negative), so the doubly occupied sector returns to
    its flipped image identically, with no blockade error left.

    microwave_rabi, when given, replaces the instantaneous flip by a
    finite pi pulse with Rabi i*Omega_mu on r -> r' of both atoms (the
    i makes the flip phase-free); use it for sensitivity studies.
    """
    if v0 == 0:
        raise ValueError("v0 must be nonzero")
    rabi_p = rabi * v0_prime / v0
    reg = Register(
        [("0", "1", "r", "rp")] * 2,
        interactions=[(0, 1, {(("r", "r"), ("r", "r")): v0,
                              (("rp", "rp"), ("rp", "rp")): v0_prime})],
        excited_levels={"r", "rp"},
    )
    t1 = math.pi / abs(rabi)
    t2 = math.pi / abs(rabi_p)
    segs: list = [Segment(0.0, t1, (DriveSpec(1, "1", "r", rabi),))]
    if microwave_rabi is None:
        flip1 = np.eye(4, dtype=complex)[[0, 1, 3, 2]]  # swap r <-> rp
        segs.append(MapSegment(t1, np.kron(flip1, flip1), label="r<->r' flip"))
        t_mid = t1
    else:
        t_mw = math.pi / microwave_rabi
        segs.append(Segment(t1, t1 + t_mw, (
            DriveSpec(0, "r", "rp", 1j * microwave_rabi),
            DriveSpec(1, "r", "rp", 1j * microwave_rabi),
        )))
        t_mid = t1 + t_mw
    segs.append(Segment(t_mid, t_mid + t2, (DriveSpec(1, "1", "rp", rabi_p),)))
    ideal = reg.basis_state(("rp", "1"))
    ann = {"rabi_prime": rabi_p, "echo_exact": v0 * v0_prime < 0}
    return PulseSchedule(reg, segs, [("r", "1")], ideal_state=ideal, annotations=ann)


# ======================================================================
# Antiblockade controlled phase
# ======================================================================


def antiblockade_cz(rabi: float, v_over_hbar: float, mode: str = "detuning-match",
                    tau: float | None = None, k_eff: float | None = None) -> PulseSchedule:
    """Conditional phase by resonant two-atom excitation (antiblockade).

    "detuning-match": both atoms driven with detuning delta = -V/2 so the
    doubly excited state is two-photon resonant; |11> <-> |rr> flops at
    the second-order rate rabi^2 / (|V|/2).  "modulation": both drives
    resonant but amplitude-modulated, rabi(t) = rabi * cos(w t) with
    w = |V|/2; the engineered sideband detuning replaces the laser
    detuning and the flop rate is rabi^2/(4 w).  The schedule runs one
    full flop (out and back), which imprints the conditional pi phase;
    single-atom branches pick up the second-order light shifts recorded
    in the ideal target.
    """
    if v_over_hbar == 0:
        raise ValueError("antiblockade needs a nonzero interaction")
    reg = two_qubit_register(v_over_hbar, tau=tau)
    if mode == "detuning-match":
        delta = -v_over_hbar / 2.0
        rate = rabi * rabi / abs(delta)
        duration = 2.0 * math.pi / rate
        drives = tuple(DriveSpec(a, "1", "r", rabi, delta, k_eff=k_eff) for a in (0, 1))
        phi1 = rabi * rabi * duration / (4.0 * delta)
        validity = rabi / abs(delta)
    elif mode == "modulation":
        w = abs(v_over_hbar) / 2.0
        rate = rabi * rabi / (4.0 * w)
        duration = 2.0 * math.pi / rate
        env = lambda t, r=rabi, w_=w: r * math.cos(w_ * t)  # noqa: E731
        drives = tuple(DriveSpec(a, "1", "r", env, 0.0, k_eff=k_eff) for a in (0, 1))
        # single-atom branch: effective coupling rabi/2 against detuning w
        phi1 = (rabi / 2.0) ** 2 * duration / (4.0 * w)
        validity = rabi / w
    else:
        raise ValueError(f"unknown antiblockade mode {mode!r}")
    ideal = np.diag([1.0, np.exp(1j * phi1), np.exp(1j * phi1),
                     -np.exp(2j * phi1)]).astype(complex)
    ann = {"mode": mode, "effective_rate": rate, "flop_period": 2.0 * math.pi / rate,
           "validity_ratio": validity, "duration": duration}
    return PulseSchedule(reg, [Segment(0.0, duration, drives)], COMP_LABELS,
                         ideal_map=ideal, annotations=ann)


# ======================================================================
# Wait-phase gate (weak-interaction regime)
# ======================================================================


def wait_phase_gate(rabi: float, v_over_hbar: float, phase: float,
                    compensate_pulse_phase: bool = True,
                    tau: float | None = None, k_eff: float | None = None) -> PulseSchedule:
    """Simultaneous pi - wait - simultaneous pi, conditional phase from
    the interaction accrued while both atoms sit in |rr>.

    The wait is T = |phase / V|; the doubly excited population during
    the finite pi pulses accrues an extra conditional phase
    -V * 3 pi/(4 rabi), which the default compensation subtracts from
    the wait (the annotation keeps the uncompensated value).  A C_Z
    gate is phase = -+ pi for repulsive/attractive V.
    """
    if v_over_hbar == 0:
        raise ValueError("wait-phase gate needs a nonzero interaction")
    t_pi = math.pi / rabi
    wait_nominal = abs(phase / v_over_hbar) if phase != 0.0 else 0.0
    pulse_residence = 3.0 * math.pi / (4.0 * rabi)  # integral of P_rr over both pulses
    wait = wait_nominal
    if compensate_pulse_phase and phase != 0.0:
        wait = max(wait_nominal - pulse_residence, 0.0)
    reg = two_qubit_register(v_over_hbar, tau=tau)
    both = lambda t0: Segment(t0, t0 + t_pi, tuple(  # noqa: E731
        DriveSpec(a, "1", "r", rabi, k_eff=k_eff) for a in (0, 1)))
    segs = [both(0.0), Segment(t_pi, t_pi + wait), both(t_pi + wait)]
    phi_cond = -np.sign(v_over_hbar) * abs(phase)
    ideal = np.diag([1.0, -1.0, -1.0, np.exp(1j * phi_cond)]).astype(complex)
    ann = {"wait": wait, "wait_nominal": wait_nominal,
           "pulse_residence": pulse_residence, "conditional_phase": phi_cond}
    return PulseSchedule(reg, segs, COMP_LABELS, ideal_map=ideal, annotations=ann)


# ======================================================================
# Ensemble adiabatic excitation
# ======================================================================


def ensemble_adiabatic_excitation(n_atoms: int, rabi_env, detuning_env,
                                  duration: float,
                                  k_eff: float | None = None) -> PulseSchedule:
    """Adiabatic excitation of the symmetric ensemble Rydberg state.

    Two collective states {|1bar>, |rbar>} with the coupling enhanced to
    sqrt(N) * rabi(t) and the detuning split symmetrically,
    +-delta(t)/2.  A smooth rabi envelope under a detuning that sweeps
    through zero transfers |1bar> to |rbar> regardless of the pulse area
    or N, which is what makes it usable when the atom number inside the
    blockade radius is unknown.  Adiabaticity diagnostics
    max |dX/dt| / (rabi_N^2 + delta^2)^(1/2), X in {rabi_N, delta}, are
    logged in the annotations.
    """
    if n_atoms < 1:
        raise ValueError("need at least one atom")
    root_n = math.sqrt(float(n_atoms))
    reg = Register([("1bar", "rbar")], excited_levels={"rbar"})
    rabi_n = (lambda t: root_n * rabi_env(t)) if callable(rabi_env) \
        else (lambda t, r=rabi_env: root_n * r)
    det = detuning_env if callable(detuning_env) else (lambda t, d=detuning_env: d)

    def sz(register):
        return np.diag([-0.5, 0.5]).astype(complex)

    seg = Segment(0.0, duration,
                  (DriveSpec(0, "1bar", "rbar", rabi_n, 0.0, k_eff=k_eff),),
                  extra_terms=((lambda t: det(t), sz),))
    # sampled adiabaticity diagnostics
    ts = np.linspace(0.0, duration, 801)
    om = np.array([rabi_n(t) for t in ts])
    dl = np.array([det(t) for t in ts])
    gap = np.sqrt(om * om + dl * dl)
    dom = np.gradient(om, ts)
    ddl = np.gradient(dl, ts)
    with np.errstate(divide="ignore", invalid="ignore"):
        adiab = {
            "max_rabi_rate_ratio": float(np.nanmax(np.abs(dom) / np.where(gap > 0, gap, np.nan))),
            "max_detuning_rate_ratio": float(np.nanmax(np.abs(ddl) / np.where(gap > 0, gap, np.nan))),
        }
    ideal = reg.basis_state(("rbar",))
    return PulseSchedule(reg, [seg], [("1bar",)], ideal_state=ideal,
                         annotations={"n_atoms": n_atoms, **adiab})


# ======================================================================
# Swept-defect Foerster transfer
# ======================================================================


def swept_forster_transfer(v: float, defect_env, duration: float) -> PulseSchedule:
    """Adiabatic pi transfer between two dipole-coupled pair states.

    Two-channel model {|r1 r2>, |r3 r4>} with constant flip coupling v
    and a tunable energy defect on the second channel.  Sweeping the
    defect from far above to far below resonance (one zero crossing)
    drags the populated channel across and realizes a full transfer with
    a Landau-Zener error exp(-2 pi v^2 / |d defect/dt|); two successive
    sweeps restore the initial state up to the accumulated phase.
    """
    if v == 0:
        raise ValueError("transfer needs a nonzero flip coupling")
    reg = Register([("rr12", "rr34")], excited_levels=set())
    flip = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    proj2 = np.diag([0.0, 1.0]).astype(complex)
    env = defect_env if callable(defect_env) else (lambda t, d=defect_env: d)
    seg = Segment(0.0, duration, (), extra_terms=(
        (v, lambda r: flip),
        (lambda t: env(t), lambda r: proj2),
    ))
    d0, d1 = env(0.0), env(duration)
    ann = {"v": v, "defect_endpoints": (d0, d1),
           "sweep_rate_mid": abs((d1 - d0) / duration)}
    ideal = reg.basis_state(("rr34",))
    return PulseSchedule(reg, [seg], [("rr12",)], ideal_state=ideal, annotations=ann)


# ======================================================================
# Berry phases of the driven dark-state loop
# ======================================================================


def berry_phases(loop, steps: int = 200) -> tuple[float, float]:
    """Geometric phases accumulated around a closed (theta, phi_r) loop.

        phi1 = -closed-integral sin^2(theta) d phi_r
        phi2 = -closed-integral sin^2 cos^2 / (cos^4 + 2 sin^4) d phi_r

    phi1 is picked up by the singly driven branch following its dark
    state; phi2 by the doubly driven branch under strong blockade.
    `loop` maps s in [0, 1] to (theta, phi_r); it must close in phi_r
    (the winding may be any whole number of turns) and in theta.
    Evaluated by adaptive quadrature to 1e-8; `steps` bounds the
    subdivision limit.
    """
    th0, ph0 = loop(0.0)
    th1, ph1 = loop(1.0)
    winding = (ph1 - ph0) / (2.0 * math.pi)
    if abs(winding - round(winding)) > 1e-9 or abs(th1 - th0) > 1e-9:
        raise ValueError(
            f"loop is not closed: delta phi_r = {ph1 - ph0:.6g} "
            f"(need a whole number of turns), delta theta = {th1 - th0:.3g}"
        )
    h = 1e-6

    def dphi(s: float) -> float:
        a = max(0.0, s - h)
        b = min(1.0, s + h)
        return (loop(b)[1] - loop(a)[1]) / (b - a)

    def f1(s: float) -> float:
        th = loop(s)[0]
        return math.sin(th) ** 2 * dphi(s)

    def f2(s: float) -> float:
        th = loop(s)[0]
        s2, c2 = math.sin(th) ** 2, math.cos(th) ** 2
        return (s2 * c2 / (c2 * c2 + 2.0 * s2 * s2)) * dphi(s)

    lim = max(50, int(steps))
    phi1 = -quad(f1, 0.0, 1.0, epsabs=1e-10, epsrel=1e-10, limit=lim)[0]
    phi2 = -quad(f2, 0.0, 1.0, epsabs=1e-10, epsrel=1e-10, limit=lim)[0]
    return phi1, phi2


# ======================================================================
# Protocol catalog (drives the CLI and the service)
# ======================================================================


@dataclass(frozen=True)
class ParamSpec:
    kind: str              # "mhz" (x 2*pi at ingestion), "float", "int", "rad"
    default: object = None
    help: str = ""


@dataclass(frozen=True)
class ProtocolInfo:
    name: str
    anchor: str            # stable grouping anchor for the catalog
    builder: object
    params: dict
    metrics: tuple
    description: str = ""


def _build_blockade_cz(p):
    return blockade_cz(p["rabi"], p.get("v_over_hbar"), p.get("detuning", 0.0),
                       tau=p.get("tau"), k_eff=p.get("k_eff"))


def _build_detuned_phase(p):
    sol = detuned_phase_solve(p.get("theta", math.pi), p.get("k"))
    return detuned_phase_schedule(sol, p["rabi"], p.get("v_over_hbar"),
                                  correct_blockade=p.get("correct_blockade", True),
                                  tau=p.get("tau"), k_eff=p.get("k_eff"))


def _build_tsd_two(p):
    return tsd_cnot_two_pulse(p["rabi"], p.get("alpha"), p.get("v_over_hbar"),
                              tau=p.get("tau"), k_eff=p.get("k_eff"))


def _build_tsd_one(p):
    return tsd_cnot_one_shot(p["rabi"], p.get("ratio", 4.245739), int(p.get("k1", 3)),
                             p.get("v_over_hbar"), tau=p.get("tau"), k_eff=p.get("k_eff"))


def _build_dark_state(p):
    return dark_state_gate(p["rabi"], p["t_total"], p.get("sigma"),
                           p.get("c3_ghz_um3", -33.0), p.get("separation_um", 8.0),
                           tau=p.get("tau"), k_eff=p.get("k_eff"))


def _build_ghz(p):
    return ghz_asymmetric(int(p["n_atoms"]), p["rabi"], p["v_ss"], p["v_sp"],
                          p.get("v_pp", 0.0), tau=p.get("tau"), k_eff=p.get("k_eff"))


def _build_spin_echo(p):
    return spin_echo_cz(p["rabi"], p["v0"], p["v0_prime"], p.get("microwave_rabi"))


def _build_antiblockade(p):
    return antiblockade_cz(p["rabi"], p["v_over_hbar"], p.get("mode", "detuning-match"),
                           tau=p.get("tau"), k_eff=p.get("k_eff"))


def _build_wait_phase(p):
    return wait_phase_gate(p["rabi"], p["v_over_hbar"], p.get("phase", math.pi),
                           p.get("compensate_pulse_phase", True),
                           tau=p.get("tau"), k_eff=p.get("k_eff"))


def _build_ensemble(p):
    rabi, delta0, T = p["rabi"], p["detuning_span"], p["duration"]
    sigma = T / 8.0
    env = lambda t: rabi * math.exp(-(t - T / 2.0) ** 2 / (2.0 * sigma ** 2))  # noqa: E731
    det = lambda t: delta0 * (2.0 * t / T - 1.0)  # noqa: E731
    return ensemble_adiabatic_excitation(int(p["n_atoms"]), env, det, T,
                                         k_eff=p.get("k_eff"))


def _build_swept_forster(p):
    span, T = p["defect_span"], p["duration"]
    env = lambda t: span * (1.0 - 2.0 * t / T)  # noqa: E731
    return swept_forster_transfer(p["v_over_hbar"], env, T)


_MAP_METRICS = ("pedersen", "nielsen", "truth_table", "conditional_phase",
                "survival", "leak")
_STATE_METRICS = ("state_fidelity", "survival")

PROTOCOLS: dict[str, ProtocolInfo] = {}


def _register_protocol(info: ProtocolInfo):
    PROTOCOLS[info.name] = info


_register_protocol(ProtocolInfo(
    "blockade_cz", "blockade/three-pulse", _build_blockade_cz,
    {
        "rabi": ParamSpec("mhz", help="Rydberg Rabi frequency"),
        "v_over_hbar": ParamSpec("mhz", None, "blockade shift; omit for infinite"),
        "detuning": ParamSpec("mhz", 0.0),
        "tau": ParamSpec("float", None, "Rydberg lifetime, us"),
        "k_eff": ParamSpec("float", None, "effective wavevector, rad/um"),
    },
    _MAP_METRICS, "pi (control) - 2*pi (target) - pi (control) controlled-Z",
))
_register_protocol(ProtocolInfo(
    "detuned_phase_gate", "blockade/detuned-rabi", _build_detuned_phase,
    {
        "rabi": ParamSpec("mhz"),
        "theta": ParamSpec("rad", math.pi, "target conditional phase"),
        "k": ParamSpec("int", None, "closure branch"),
        "v_over_hbar": ParamSpec("mhz", None),
        "correct_blockade": ParamSpec("float", True),
        "tau": ParamSpec("float", None),
        "k_eff": ParamSpec("float", None),
    },
    _MAP_METRICS, "two simultaneous detuned pulses with a laser-phase twist",
))
_register_protocol(ProtocolInfo(
    "tsd_cnot_two_pulse", "tsd/two-pulse", _build_tsd_two,
    {
        "rabi": ParamSpec("mhz", help="target Rabi frequency"),
        "alpha": ParamSpec("float", None, "control/target ratio, sqrt(16k^2-1)"),
        "v_over_hbar": ParamSpec("mhz", None),
        "tau": ParamSpec("float", None),
        "k_eff": ParamSpec("float", None),
    },
    _MAP_METRICS, "two-step CNOT by two-fold transition slow-down",
))
_register_protocol(ProtocolInfo(
    "tsd_cnot_one_shot", "tsd/one-shot", _build_tsd_one,
    {
        "rabi": ParamSpec("mhz", help="target Rabi frequency"),
        "ratio": ParamSpec("float", 4.245739, "control/target Rabi ratio"),
        "k1": ParamSpec("int", 3),
        "v_over_hbar": ParamSpec("mhz", None),
        "tau": ParamSpec("float", None),
        "k_eff": ParamSpec("float", None),
    },
    _MAP_METRICS, "single simultaneous pulse CNOT by three-state slow-down",
))
_register_protocol(ProtocolInfo(
    "dark_state_gate", "forster/dark-state", _build_dark_state,
    {
        "rabi": ParamSpec("mhz", 7.643, "peak envelope amplitude"),
        "t_total": ParamSpec("float", 0.29, "adiabatic pulse length, us"),
        "sigma": ParamSpec("float", None, "envelope width, us (default t_total/5)"),
        "c3_ghz_um3": ParamSpec("float", -33.0),
        "separation_um": ParamSpec("float", 8.0),
        "tau": ParamSpec("float", None),
        "k_eff": ParamSpec("float", None),
    },
    _MAP_METRICS, "controlled-Z by adiabatic following of a Foerster dark state",
))
_register_protocol(ProtocolInfo(
    "ghz_asymmetric", "blockade/asymmetric-ghz", _build_ghz,
    {
        "n_atoms": ParamSpec("int", 2),
        "rabi": ParamSpec("mhz"),
        "v_ss": ParamSpec("mhz"),
        "v_sp": ParamSpec("mhz"),
        "v_pp": ParamSpec("mhz", 0.0),
        "tau": ParamSpec("float", None),
        "k_eff": ParamSpec("float", None),
    },
    _STATE_METRICS, "three-step GHZ preparation with two Rydberg species",
))
_register_protocol(ProtocolInfo(
    "spin_echo_cz", "blockade/spin-echo", _build_spin_echo,
    {
        "rabi": ParamSpec("mhz"),
        "v0": ParamSpec("mhz"),
        "v0_prime": ParamSpec("mhz"),
        "microwave_rabi": ParamSpec("mhz", None, "finite flip pulse; omit for instantaneous"),
    },
    _STATE_METRICS, "echoed 2*pi pulse cancelling the blockade error",
))
_register_protocol(ProtocolInfo(
    "antiblockade_cz", "antiblockade/resonant-pair", _build_antiblockade,
    {
        "rabi": ParamSpec("mhz"),
        "v_over_hbar": ParamSpec("mhz"),
        "mode": ParamSpec("float", "detuning-match", "'detuning-match' or 'modulation'"),
        "tau": ParamSpec("float", None),
        "k_eff": ParamSpec("float", None),
    },
    _MAP_METRICS, "conditional phase by resonant |11> <-> |rr> flopping",
))
_register_protocol(ProtocolInfo(
    "wait_phase_gate", "frozen-interaction/wait", _build_wait_phase,
    {
        "rabi": ParamSpec("mhz"),
        "v_over_hbar": ParamSpec("mhz"),
        "phase": ParamSpec("rad", math.pi),
        "compensate_pulse_phase": ParamSpec("float", True),
        "tau": ParamSpec("float", None),
        "k_eff": ParamSpec("float", None),
    },
    _MAP_METRICS, "pi - wait - pi gate with the interaction phase of |rr>",
))
_register_protocol(ProtocolInfo(
    "ensemble_excitation", "ensemble/adiabatic", _build_ensemble,
    {
        "n_atoms": ParamSpec("int", 1),
        "rabi": ParamSpec("mhz", help="peak single-atom Rabi frequency"),
        "detuning_span": ParamSpec("mhz", help="sweep endpoint magnitude"),
        "duration": ParamSpec("float", help="sweep length, us"),
        "k_eff": ParamSpec("float", None),
    },
    _STATE_METRICS, "N-independent adiabatic transfer to the collective Rydberg state",
))
_register_protocol(ProtocolInfo(
    "swept_forster", "forster/swept-defect", _build_swept_forster,
    {
        "v_over_hbar": ParamSpec("mhz", help="flip coupling"),
        "defect_span": ParamSpec("mhz", help="defect endpoint magnitude"),
        "duration": ParamSpec("float", help="sweep length, us"),
    },
    _STATE_METRICS, "adiabatic pi transfer between two dipole-coupled pair states",
))


def protocol_catalog() -> list[ProtocolInfo]:
    """Catalog entries in deterministic (name) order."""
    return [PROTOCOLS[k] for k in sorted(PROTOCOLS)]


def build_protocol(name: str, params: dict) -> PulseSchedule:
    try:
        info = PROTOCOLS[name]
    except KeyError:
        raise KeyError(f"unknown protocol {name!r}") from None
    return info.builder(params)
