"""Angular-momentum algebra and Rydberg pair-interaction assembly.

Clebsch-Gordan coefficients are evaluated by the explicit Racah sum in
exact rational arithmetic (the only rounding is one final square root),
which keeps cancellation error out of the dipole-dipole tensor
contraction.  Interaction strengths are assembled from caller-supplied
channel data: reduced dipole matrix elements in units of e*a0 and energy
defects in rad/us.  Computing those atomic inputs from first principles
is out of scope here.

Sign convention: the dipole-dipole matrix element carries the -sqrt(6)
prefactor of the rank-2 tensor contraction as written; any overall-sign
difference versus other conventions in the literature is absorbed into
the shipped fixtures rather than silently normalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from .qcore import OperatorMatrix

__all__ = [
    "QuantumNumbers",
    "ChannelSpec",
    "Geometry",
    "clebsch_gordan",
    "spherical_tensor_rank2",
    "dipole_dipole_element",
    "vdw_matrix",
    "interaction_at",
    "load_channels",
    "PAIR_INTERACTION_FIXTURES",
    "DIPOLE_UNIT",
]

# (e*a0)^2 / (4 pi eps0 hbar), expressed in rad/us * um^3: multiplying by
# d_A*d_B [e*a0]^2 / L^3 [um^3] gives an interaction in rad/us.
_E = 1.602176634e-19        # C
_A0 = 5.29177210903e-11     # m
_EPS0_4PI = 1.11265005545e-10  # C^2 / (J m)
_HBAR = 1.054571817e-34     # J s
DIPOLE_UNIT = (_E * _A0) ** 2 / (_EPS0_4PI * _HBAR) * 1e12  # rad/us * um^3

_KB = 1.380649e-23          # J/K (re-exported for the noise module)


def _half_int(x: float, name: str) -> int:
    """Return 2x as an exact integer; reject non-half-integer input."""
    two = 2.0 * x
    if abs(two - round(two)) > 1e-9:
        raise ValueError(f"{name} = {x} is not half-integer")
    return int(round(two))


@lru_cache(maxsize=None)
def _fact(n: int) -> int:
    if n < 0:
        raise ValueError("factorial of negative number")
    return math.factorial(n)


def clebsch_gordan(j1: float, m1: float, j2: float, m2: float, J: float, M: float) -> float:
    """Condon-Shortley Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M>.

    Evaluated with the Racah sum in exact rational arithmetic and
    converted to float at the end, so results are accurate to one ulp of
    the final square root for j up to at least 20.

    Returns 0 when M != m1 + m2, when the triangle rule fails, or when
    any |m| exceeds its j.  Raises for arguments that are not mutually
    half-integer consistent.
    """
    tj1, tm1 = _half_int(j1, "j1"), _half_int(m1, "m1")
    tj2, tm2 = _half_int(j2, "j2"), _half_int(m2, "m2")
    tJ, tM = _half_int(J, "J"), _half_int(M, "M")
    for tj, tm, nm in ((tj1, tm1, "m1"), (tj2, tm2, "m2"), (tJ, tM, "M")):
        if tj < 0:
            raise ValueError("angular momentum must be nonnegative")
        if (tj - tm) % 2 != 0:
            raise ValueError(f"{nm} must differ from its j by an integer")
    if abs(tm1) > tj1 or abs(tm2) > tj2 or abs(tM) > tJ:
        return 0.0
    if tM != tm1 + tm2:
        return 0.0
    if tJ > tj1 + tj2 or tJ < abs(tj1 - tj2) or (tj1 + tj2 - tJ) % 2 != 0:
        return 0.0

    # All of the following combinations are guaranteed integers (twice-j
    # bookkeeping); Fraction keeps the sum exact.
    def f(two_n: int) -> int:
        if two_n % 2 != 0:
            raise AssertionError("non-integer factorial argument")
        return _fact(two_n // 2)

    pref = Fraction(
        (tJ + 1)
        * f(tJ + tj1 - tj2) * f(tJ - tj1 + tj2) * f(tj1 + tj2 - tJ)
        * f(tJ + tM) * f(tJ - tM),
        f(tj1 + tj2 + tJ + 2)
        * f(tj1 - tm1) * f(tj1 + tm1)
        * f(tj2 - tm2) * f(tj2 + tm2),
    )
    kmin = max(0, (tj2 - tJ - tm1) // 2, (tj1 + tm2 - tJ) // 2)
    kmax = min((tj1 + tj2 - tJ) // 2, (tj1 - tm1) // 2, (tj2 + tm2) // 2)
    s = Fraction(0)
    for k in range(kmin, kmax + 1):
        den = (
            _fact(k)
            * f(tj1 + tj2 - tJ - 2 * k)
            * f(tj1 - tm1 - 2 * k)
            * f(tj2 + tm2 - 2 * k)
            * f(tJ - tj2 + tm1 + 2 * k)
            * f(tJ - tj1 - tm2 + 2 * k)
        )
        s += Fraction(-1 if k % 2 else 1, den)
    if s == 0:
        return 0.0
    # pref * s^2 is the exact squared coefficient; carry the sign of s.
    value_sq = pref * s * s
    sign = 1.0 if s > 0 else -1.0
    return sign * math.sqrt(float(value_sq))


def spherical_tensor_rank2(M: int, theta: float, phi: float) -> complex:
    """Rank-2 orientation tensor: sqrt(4 pi / 5) * Y_2M(theta, phi).

    All components except M = 0 vanish at theta = 0, which is what makes
    the dipole-dipole coupling conserve the total magnetic projection
    when the interatomic axis lies along the quantization axis.
    """
    if M not in (-2, -1, 0, 1, 2):
        raise ValueError(f"M = {M} outside the rank-2 range")
    st, ct = math.sin(theta), math.cos(theta)
    if M == 0:
        return complex((3.0 * ct * ct - 1.0) / 2.0)
    if abs(M) == 1:
        mag = math.sqrt(1.5) * st * ct
        return complex(-np.sign(M) * mag) * np.exp(1j * M * phi)
    mag = math.sqrt(3.0 / 8.0) * st * st
    return complex(mag) * np.exp(1j * M * phi)


# ======================================================================
# Channel data structures
# ======================================================================


@dataclass(frozen=True)
class QuantumNumbers:
    """Single-atom Rydberg-state labels (n, l, j, m); m may be left None
    when the magnetic quantum number is summed over or supplied later."""

    n: int
    l: int
    j: float
    m: float | None = None

    def with_m(self, m: float) -> "QuantumNumbers":
        return QuantumNumbers(self.n, self.l, self.j, m)


@dataclass(frozen=True)
class ChannelSpec:
    """One dipole-coupled intermediate pair channel.

    bra_a/bra_b are the manifold states of atoms A and B; ket_a/ket_b the
    intermediate pair multiplet they couple to.  d_a and d_b are the
    reduced dipole matrix elements <bra||D||ket> per atom in e*a0, and
    `defect` is the pair energy defect in rad/us (intermediate energy
    minus manifold energy).
    """

    bra_a: QuantumNumbers
    bra_b: QuantumNumbers
    ket_a: QuantumNumbers
    ket_b: QuantumNumbers
    d_a: float
    d_b: float
    defect: float

    def __post_init__(self):
        for bra, ket, nm in ((self.bra_a, self.ket_a, "A"), (self.bra_b, self.ket_b, "B")):
            for qn in (bra, ket):
                if qn.m is not None and abs(qn.m) > qn.j + 1e-9:
                    raise ValueError(f"|m| > j for atom {nm}")
            if abs(bra.l - ket.l) != 1 and (self.d_a if nm == "A" else self.d_b) != 0.0:
                raise ValueError(
                    f"atom {nm}: dipole selection rule requires delta-l = +-1 "
                    f"(got l={bra.l} -> l={ket.l}); the reduced element must be zero"
                )


@dataclass(frozen=True)
class Geometry:
    """Interatomic separation L (um) and orientation (theta, phi) of the
    interatomic axis relative to the quantization axis."""

    L: float
    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError(f"separation L = {self.L} must be positive")


def dipole_dipole_element(channel: ChannelSpec, geom: Geometry) -> complex:
    """First-order dipole-dipole matrix element between two pair states.

    Implements the rank-2 tensor contraction

        -sqrt(6)/(4 pi eps0 L^3) * <A||D||a><B||D||b>
          * sum_M Psi_{-M}(theta, phi)
          * sum_{alpha,beta} C^{1 1 2}_{alpha beta M}
            C^{ja 1 jA}_{ma alpha mA} C^{jb 1 jB}_{mb beta mB}

    with reduced elements in e*a0 and the result in rad/us.  All four
    magnetic quantum numbers must be set on the channel.
    """
    for qn in (channel.bra_a, channel.bra_b, channel.ket_a, channel.ket_b):
        if qn.m is None:
            raise ValueError("dipole_dipole_element needs all magnetic quantum numbers")
    A, B, a, b = channel.bra_a, channel.bra_b, channel.ket_a, channel.ket_b
    if abs(A.l - a.l) != 1 or abs(B.l - b.l) != 1:
        return 0.0 + 0.0j
    angular = 0.0 + 0.0j
    for M in range(-2, 3):
        psi = spherical_tensor_rank2(-M, geom.theta, geom.phi)
        if psi == 0:
            continue
        acc = 0.0
        for alpha in (-1, 0, 1):
            beta = M - alpha
            if abs(beta) > 1:
                continue
            c12 = clebsch_gordan(1, alpha, 1, beta, 2, M)
            if c12 == 0.0:
                continue
            ca = clebsch_gordan(a.j, a.m, 1, alpha, A.j, A.m)
            if ca == 0.0:
                continue
            cb = clebsch_gordan(b.j, b.m, 1, beta, B.j, B.m)
            if cb == 0.0:
                continue
            acc += c12 * ca * cb
        angular += psi * acc
    pref = -math.sqrt(6.0) * DIPOLE_UNIT / geom.L ** 3
    return pref * channel.d_a * channel.d_b * angular


def vdw_matrix(pair_states, channels, geom: Geometry) -> OperatorMatrix:
    """Second-order van der Waals matrix over a degenerate pair manifold.

    H_vdW = - sum_channels  V V^dag / defect,  restricted to the manifold
    spanned by `pair_states`, a sequence of (m_A, m_B) pairs sharing the
    channels' bra quantum numbers.  The intermediate magnetic quantum
    numbers are summed internally.  Diagonal entries are pure energy
    shifts; off-diagonal entries are state-flip couplings.  Scales as
    1/L^6.

    Raises if any channel has zero defect: the pair is then
    Foerster-degenerate and second-order perturbation theory is invalid.
    """
    manifold = [tuple(ms) for ms in pair_states]
    dim = len(manifold)
    out = np.zeros((dim, dim), dtype=complex)
    for ci, ch in enumerate(channels):
        if ch.defect == 0.0:
            raise ValueError(
                f"channel {ci} ({ch.ket_a.n}{ch.ket_a.l}{ch.ket_a.j}, "
                f"{ch.ket_b.n}{ch.ket_b.l}{ch.ket_b.j}) has zero energy defect: "
                "Foerster-degenerate, second-order treatment invalid"
            )
        two_ja = _half_int(ch.ket_a.j, "ja")
        two_jb = _half_int(ch.ket_b.j, "jb")
        ms_a = [ma / 2.0 for ma in range(-two_ja, two_ja + 1, 2)]
        ms_b = [mb / 2.0 for mb in range(-two_jb, two_jb + 1, 2)]
        # V restricted to manifold rows x intermediate columns.
        v = np.zeros((dim, len(ms_a) * len(ms_b)), dtype=complex)
        for i, (m_A, m_B) in enumerate(manifold):
            for ka, ma in enumerate(ms_a):
                for kb, mb in enumerate(ms_b):
                    sub = ChannelSpec(
                        ch.bra_a.with_m(m_A), ch.bra_b.with_m(m_B),
                        ch.ket_a.with_m(ma), ch.ket_b.with_m(mb),
                        ch.d_a, ch.d_b, ch.defect,
                    )
                    v[i, ka * len(ms_b) + kb] = dipole_dipole_element(sub, geom)
        out -= (v @ v.conj().T) / ch.defect
    # The construction is Hermitian by symmetry; symmetrize away rounding.
    out = 0.5 * (out + out.conj().T)
    return OperatorMatrix(out, hermitian=True)


def interaction_at(kind: str, coefficient: float, L: float) -> float:
    """Interaction strength V/hbar in rad/us at separation L (um).

    kind "c6": van der Waals, coefficient in h*GHz*um^6, V = C6/L^6.
    kind "c3": resonant dipole-dipole, coefficient in h*GHz*um^3,
    V = C3/L^3.
    """
    if L <= 0:
        raise ValueError("L must be positive")
    k = kind.lower()
    if k == "c6":
        power = 6
    elif k == "c3":
        power = 3
    else:
        raise ValueError(f"unknown interaction kind {kind!r}; use 'c6' or 'c3'")
    # h*GHz -> rad/us: multiply by 2*pi*1000 (GHz -> MHz -> angular).
    return 2.0 * math.pi * coefficient * 1e3 / L ** power


# ======================================================================
# Channel table ingestion
# ======================================================================

_CHANNEL_HEADER = "# manifold:"


def load_channels(path) -> list[ChannelSpec]:
    """Read a whitespace-separated channel table.

    The file declares the degenerate manifold once in a header line

        # manifold: nA lA jA nB lB jB

    and then one channel per row:

        na la ja nb lb jb d_a d_b defect_mhz

    with reduced elements in e*a0 and defects in plain MHz (converted to
    rad/us here, the single place frequencies enter angular units).
    Lines starting with '#' other than the manifold header are comments.
    """
    text = Path(path).read_text().splitlines()
    manifold: tuple[QuantumNumbers, QuantumNumbers] | None = None
    channels: list[ChannelSpec] = []
    for lineno, raw in enumerate(text, 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith(_CHANNEL_HEADER):
            vals = line[len(_CHANNEL_HEADER):].split()
            if len(vals) != 6:
                raise ValueError(f"{path}:{lineno}: manifold header needs 6 numbers")
            manifold = (
                QuantumNumbers(int(vals[0]), int(vals[1]), float(vals[2])),
                QuantumNumbers(int(vals[3]), int(vals[4]), float(vals[5])),
            )
            continue
        if line.startswith("#"):
            continue
        if manifold is None:
            raise ValueError(f"{path}:{lineno}: channel row before the manifold header")
        vals = line.split()
        if len(vals) != 9:
            raise ValueError(f"{path}:{lineno}: expected 9 columns, got {len(vals)}")
        channels.append(
            ChannelSpec(
                bra_a=manifold[0],
                bra_b=manifold[1],
                ket_a=QuantumNumbers(int(vals[0]), int(vals[1]), float(vals[2])),
                ket_b=QuantumNumbers(int(vals[3]), int(vals[4]), float(vals[5])),
                d_a=float(vals[6]),
                d_b=float(vals[7]),
                defect=2.0 * math.pi * float(vals[8]),
            )
        )
    return channels


# ======================================================================
# Published pair-interaction fixtures
# ======================================================================

def _fixture(diag, off):
    m = np.diag(np.asarray(diag, dtype=float))
    for (i, j), v in off.items():
        m[i, j] = m[j, i] = v
    return m


# Effective van der Waals matrices over Zeeman pair manifolds, in
# h * GHz * um^6 (divide by L^6 in um and convert with 2*pi*1e3 to get
# rad/us; `fixture_interaction` does this).  Basis ordering for the 4x4
# entries: {|++>, |+->, |-+>, |-->} in the m_j = +-1/2 labels; the 8x8
# fixture is the two-species 97s/100s manifold ordered as
# {R+r+, R-r+, R+r-, R-r-, r+R+, r-R+, r+R-, r-R-}.
PAIR_INTERACTION_FIXTURES: dict[str, dict[float, NDArray[np.floating]]] = {
    "rb_100s_100s": {
        0.0: _fixture([56200.0, 56980.0, 56980.0, 56200.0], {(1, 2): 1573.0}),
        math.pi / 4: _fixture(
            [56790.0, 56400.0, 56400.0, 56790.0],
            {(0, 1): 590.0, (0, 2): 590.0, (0, 3): -590.0,
             (1, 2): 983.0, (1, 3): -590.0, (2, 3): -590.0},
        ),
        math.pi / 2: _fixture(
            [57380.0, 55800.0, 55800.0, 57380.0],
            {(0, 3): -1180.0, (1, 2): 393.0},
        ),
    },
    "rb_97s_100s": {
        0.0: np.block([
            [_fixture([-89180.0, -59780.0, -59780.0, -89180.0], {(1, 2): 58800.0}),
             _fixture([-537.0, -375.0, -375.0, -537.0], {(1, 2): 324.0})],
            [_fixture([-537.0, -375.0, -375.0, -537.0], {(1, 2): 324.0}),
             _fixture([-89180.0, -59780.0, -59780.0, -89180.0], {(1, 2): 58800.0})],
        ]),
    },
    "rb_100p12_100p12": {
        0.0: _fixture([2108.0, -3492.0, -3492.0, 2108.0], {(1, 2): -11200.0}),
        math.pi / 2: _fixture(
            [-6292.0, 4908.0, 4908.0, -6292.0],
            {(0, 3): 8400.0, (1, 2): -2800.0},
        ),
    },
}


def fixture_interaction(name: str, L: float, theta: float = 0.0) -> OperatorMatrix:
    """A shipped pair-interaction fixture evaluated at separation L (um),
    as an operator in rad/us."""
    try:
        by_theta = PAIR_INTERACTION_FIXTURES[name]
        mat = by_theta[theta]
    except KeyError:
        raise KeyError(f"no fixture {name!r} at theta = {theta}") from None
    return OperatorMatrix(2.0 * math.pi * 1e3 * mat / L ** 6, hermitian=True)
