"""Hamiltonian builders for the double quantum dot (DQD) and linear chains.

Basis ordering and sign conventions follow the RWA DQD matrix: states
``|uu>, |ud>, |du>, |dd>``, drive entries ``-i exp(-i phi) B / 4`` above the
diagonal, ``-J/2`` on the two antiparallel states.
"""

import math
import warnings
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .operators import OperatorError, spin_op

RWA_EXCHANGE_RATIO = 0.1  # J / (2 |dBz|) above this warns
OFF_RESONANT_RATIO = 10.0  # |w_i - w_j| / J_ij at or above this is "far off-resonant"


class RwaWarning(UserWarning):
    """A rotating-wave approximation is being used near its validity limit."""


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class DqdParams:
    """Double-dot parameters; every field in rad/s (phases in rad).

    ``omega1``/``omega2`` default to the resonant choices ``bzL``/``bzR``.
    Drive 1 is the left-qubit drive, drive 2 the right-qubit drive.
    """

    bzL: float = 0.0
    bzR: float = 0.0
    by0L: float = 0.0
    by0R: float = 0.0
    by1L: float = 0.0
    by1R: float = 0.0
    by2L: float = 0.0
    by2R: float = 0.0
    phi1: float = 0.0
    phi2: float = 0.0
    omega1: float | None = None
    omega2: float | None = None
    j: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if v is not None and not math.isfinite(v):
                raise ModelError(f"DqdParams.{f.name} must be finite, got {v}")

    @property
    def w1(self):
        return self.bzL if self.omega1 is None else self.omega1

    @property
    def w2(self):
        return self.bzR if self.omega2 is None else self.omega2

    @property
    def dbz(self):
        return self.bzR - self.bzL

    @property
    def dby(self):
        return self.by2R - self.by1L

    @property
    def ey(self):
        return self.by2R + self.by1L

    @property
    def omega(self):
        return math.hypot(self.dbz, self.j)

    @property
    def omega_y_plus(self):
        return math.hypot(self.ey, self.j)

    @property
    def omega_y_minus(self):
        return math.hypot(self.dby, self.j)

    @property
    def omega_2(self):
        return math.hypot(self.by2R, self.j)

    def with_(self, **kw):
        return replace(self, **kw)

    def to_chain(self):
        """Two-site chain with the left/right drives placed on sites 0/1."""
        return ChainParams(
            n=2,
            bz=(self.bzL, self.bzR),
            by1=(self.by1L, self.by2R),
            phi=(self.phi1, self.phi2),
            omega=(self.w1, self.w2),
            jlist=(self.j,),
            by0=(self.by0L, self.by0R),
        )


def _tuple(x, n, name, default=0.0):
    if x is None:
        return (default,) * n
    x = tuple(float(v) for v in x)
    if len(x) != n:
        raise ModelError(f"{name} must have length {n}, got {len(x)}")
    return x


@dataclass(frozen=True)
class ChainParams:
    """Linear-chain parameters (rad/s, phases in rad), sites indexed from 0.

    ``omega`` defaults to ``bz`` (every qubit driven at its own frequency);
    ``jlist[i]`` couples sites ``i`` and ``i + 1``.
    """

    n: int
    bz: tuple = None
    by1: tuple = None
    phi: tuple = None
    omega: tuple = None
    jlist: tuple = None
    by0: tuple = None

    def __post_init__(self):
        if not 2 <= self.n <= 10:
            raise ModelError(f"chain length must be in 2..10, got {self.n}")
        n = self.n
        object.__setattr__(self, "bz", _tuple(self.bz, n, "bz"))
        object.__setattr__(self, "by1", _tuple(self.by1, n, "by1"))
        object.__setattr__(self, "phi", _tuple(self.phi, n, "phi"))
        object.__setattr__(self, "omega", _tuple(self.omega, n, "omega") if self.omega is not None else self.bz)
        object.__setattr__(self, "jlist", _tuple(self.jlist, n - 1, "jlist"))
        object.__setattr__(self, "by0", _tuple(self.by0, n, "by0"))
        for name in ("bz", "by1", "phi", "omega", "jlist", "by0"):
            if not all(math.isfinite(v) for v in getattr(self, name)):
                raise ModelError(f"ChainParams.{name} must be finite")

    @property
    def dim(self):
        return 2**self.n

    def with_(self, **kw):
        return replace(self, **kw)

    def bond(self, i, j):
        """Exchange on the bond between neighbouring sites, 0 if absent."""
        a, b = min(i, j), max(i, j)
        if b != a + 1 or a < 0 or b >= self.n:
            return 0.0
        return self.jlist[a]

    def e_j(self, k):
        return self.bond(k - 1, k) + self.bond(k, k + 1)

    def delta_j(self, k):
        return self.bond(k, k + 1) - self.bond(k - 1, k)

    def omega_plus(self, k):
        return math.hypot(self.e_j(k), self.by1[k])

    def omega_minus(self, k):
        return math.hypot(self.delta_j(k), self.by1[k])


@dataclass(frozen=True)
class FrameSpec:
    """Rotating-frame choice: ``lab``, ``eigenfrequency`` or ``swap-pair``.

    ``pair`` is the left site of the swapped pair for ``swap-pair``.
    ``drive`` uses each site's drive frequency instead of its Zeeman value.
    """

    mode: str = "eigenfrequency"
    pair: int | None = None

    def __post_init__(self):
        if self.mode not in ("lab", "eigenfrequency", "swap-pair", "drive"):
            raise ModelError(f"unknown frame mode {self.mode!r}")
        if self.mode == "swap-pair" and self.pair is None:
            raise ModelError("swap-pair frame needs a pair index")

    def references(self, bz, omega=None):
        bz = np.asarray(bz, dtype=float)
        if self.mode == "lab":
            return np.zeros_like(bz)
        if self.mode == "drive":
            return np.asarray(omega if omega is not None else bz, dtype=float)
        ref = bz.copy()
        if self.mode == "swap-pair":
            k = self.pair
            if not 0 <= k < len(bz) - 1:
                raise ModelError(f"swap pair {k} outside chain of {len(bz)} sites")
            ref[k] = ref[k + 1] = 0.5 * (bz[k] + bz[k + 1])
        return ref


def _heisenberg(i, j, n):
    return sum(spin_op(s, i, n) @ spin_op(s, j, n) for s in ("Sx", "Sy", "Sz"))


def _ising(i, j, n):
    return spin_op("Sz", i, n) @ spin_op("Sz", j, n)


def _identity(n):
    return np.eye(2**n, dtype=complex)


def dqd_lab_hamiltonian(p, t):
    """Instantaneous lab-frame 4x4 Hamiltonian H(t) of the double dot."""
    n = 2
    by_l = p.by0L + p.by1L * math.cos(p.w1 * t + p.phi1) + p.by2L * math.cos(p.w2 * t + p.phi2)
    by_r = p.by0R + p.by1R * math.cos(p.w1 * t + p.phi1) + p.by2R * math.cos(p.w2 * t + p.phi2)
    h = p.j * (_heisenberg(0, 1, n) - 0.25 * _identity(n))
    h = h + by_l * spin_op("Sy", 0, n) + p.bzL * spin_op("Sz", 0, n)
    h = h + by_r * spin_op("Sy", 1, n) + p.bzR * spin_op("Sz", 1, n)
    return h


def chain_lab_hamiltonian(p, t):
    """Instantaneous lab-frame Hamiltonian of a chain (Heisenberg bonds)."""
    n = p.n
    h = np.zeros((2**n, 2**n), dtype=complex)
    for i, jv in enumerate(p.jlist):
        if jv:
            h += jv * (_heisenberg(i, i + 1, n) - 0.25 * _identity(n))
    for i in range(n):
        by = p.by0[i] + p.by1[i] * math.cos(p.omega[i] * t + p.phi[i])
        h += by * spin_op("Sy", i, n) + p.bz[i] * spin_op("Sz", i, n)
    return h


def _check_exchange_ratio(j, dbz, threshold=RWA_EXCHANGE_RATIO):
    if j == 0:
        return 0.0
    ratio = abs(j) / (2 * abs(dbz)) if dbz else math.inf
    if ratio > threshold:
        warnings.warn(f"J/(2|dBz|) = {ratio:.3g} exceeds {threshold}; RWA questionable",
                      RwaWarning, stacklevel=3)
    return ratio


def dqd_rwa_hamiltonian(p, ratio_threshold=RWA_EXCHANGE_RATIO):
    """Time-independent RWA Hamiltonian in the frame of the qubit frequencies."""
    if p.dbz == 0 and (p.by1L or p.by2R or p.j):
        raise ModelError("RWA builder needs bzL != bzR (frequency-selective addressing)")
    if not (math.isclose(p.w1, p.bzL, rel_tol=1e-12, abs_tol=1e-9)
            and math.isclose(p.w2, p.bzR, rel_tol=1e-12, abs_tol=1e-9)):
        raise ModelError("dqd_rwa_hamiltonian requires resonant drives (omega1=bzL, omega2=bzR); "
                         "use the lab-frame path for detuned drives")
    _check_exchange_ratio(p.j, p.dbz, ratio_threshold)
    b1 = p.by1L
    b2 = p.by2R
    e1 = -1j * np.exp(-1j * p.phi1) * b1
    e2 = -1j * np.exp(-1j * p.phi2) * b2
    j = p.j
    h = np.array([
        [0, e2, e1, 0],
        [np.conj(e2), -2 * j, 0, e1],
        [np.conj(e1), 0, -2 * j, e2],
        [0, np.conj(e1), np.conj(e2), 0],
    ], dtype=complex)
    return h / 4


def drive_term(b, phi, site, n):
    """Resonant RWA drive -(B/2)(sin(phi) Sx - cos(phi) Sy) on one site."""
    return -(b / 2) * (math.sin(phi) * spin_op("Sx", site, n) - math.cos(phi) * spin_op("Sy", site, n))


def classify_bonds(p, resonance_map=None, force=False, ratio=OFF_RESONANT_RATIO):
    """Label every bond ``"off"`` (Ising) or ``"resonant"`` (Heisenberg).

    ``resonance_map`` may override individual bonds by index.
    """
    resonance_map = dict(resonance_map or {})
    kinds = []
    for i, jv in enumerate(p.jlist):
        if i in resonance_map:
            kind = resonance_map[i]
            if kind not in ("off", "resonant"):
                raise ModelError(f"bond {i}: unknown resonance label {kind!r}")
            kinds.append(kind)
            continue
        dw = abs(p.omega[i] - p.omega[i + 1])
        if dw <= 1e-12 * max(abs(p.omega[i]), abs(p.omega[i + 1]), 1.0):
            kinds.append("resonant")
            continue
        if jv == 0 or dw / abs(jv) >= ratio:
            kinds.append("off")
            continue
        r = dw / abs(jv)
        if not force:
            raise ModelError(
                f"bond ({i},{i + 1}): |w_i - w_j|/J = {r:.3g} is neither far off-resonant "
                f"(>= {ratio}) nor resonant; pass force=True or a resonance_map entry")
        warnings.warn(f"bond ({i},{i + 1}) forced at ambiguous ratio {r:.3g}",
                      RwaWarning, stacklevel=2)
        kinds.append("off" if r >= 1 else "resonant")
    return kinds


def chain_rwa_hamiltonian(p, resonance_map=None, force=False):
    """RWA chain Hamiltonian H_J + H_B + H_z in the frame of the drive frequencies."""
    n = p.n
    kinds = classify_bonds(p, resonance_map, force)
    h = np.zeros((2**n, 2**n), dtype=complex)
    eye = _identity(n)
    for i, (jv, kind) in enumerate(zip(p.jlist, kinds)):
        if jv == 0:
            continue
        coupling = _heisenberg(i, i + 1, n) if kind == "resonant" else _ising(i, i + 1, n)
        h += jv * (coupling - 0.25 * eye)
    for i in range(n):
        if p.by1[i]:
            h += drive_term(p.by1[i], p.phi[i], i, n)
        detuning = p.bz[i] - p.omega[i]
        if detuning:
            h += detuning * spin_op("Sz", i, n)
    return h


def swap_rwa_hamiltonian(p, k, allow_edge=False):
    """RWA Hamiltonian for an exchange pulse on the pair (k, k+1).

    Frame: every site at its own Zeeman frequency except the pair, which
    rotates at the averaged frequency and keeps a -/+ dBz/2 detuning.
    """
    n = p.n
    if not 0 <= k < n - 1:
        raise ModelError(f"pair ({k},{k + 1}) outside chain of {n} sites")
    if (k < 1 or k + 2 > n - 1) and not allow_edge:
        raise ModelError(f"pair ({k},{k + 1}) lacks two flanking neighbours; pass allow_edge=True")
    if any(p.by1):
        raise ModelError("swap_rwa_hamiltonian expects all drives off")
    eye = _identity(n)
    h = np.zeros((2**n, 2**n), dtype=complex)
    for i, jv in enumerate(p.jlist):
        if jv == 0:
            continue
        coupling = _heisenberg(i, i + 1, n) if i == k else _ising(i, i + 1, n)
        h += jv * (coupling - 0.25 * eye)
    dbz = p.bz[k + 1] - p.bz[k]
    h += -0.5 * dbz * spin_op("Sz", k, n) + 0.5 * dbz * spin_op("Sz", k + 1, n)
    return h


def swap_target(n, k):
    """SWAP on sites (k, k+1) embedded in an n-qubit register."""
    d = 2**n
    out = np.zeros((d, d), dtype=complex)
    for idx in range(d):
        bk = (idx >> (n - 1 - k)) & 1
        bk1 = (idx >> (n - 2 - k)) & 1
        jdx = idx
        if bk != bk1:
            jdx = idx ^ (1 << (n - 1 - k)) ^ (1 << (n - 2 - k))
        out[jdx, idx] = 1
    return out
