"""Closed-form propagators and a brute-force lab-frame integrator.

All closed forms live in the rotating frame of the qubit (or drive)
frequencies unless stated otherwise.  ``propagate_lab`` integrates the full
lab-frame Hamiltonian and is the numerical oracle the closed forms are
checked against.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .models import (
    ChainParams,
    DqdParams,
    FrameSpec,
    ModelError,
    chain_rwa_hamiltonian,
    dqd_rwa_hamiltonian,
)
from .operators import (
    expm_hermitian,
    pauli_matrix,
    single_site_word,
    spin_op,
)

MAX_STEPS = 10**8
MAX_PHASE_PER_STEP = 0.05


class PropagationError(RuntimeError):
    pass


def _words(terms, n=2):
    """Sum of ``coeff * P_word`` for a dict {word: coeff}."""
    d = 2**n
    out = np.zeros((d, d), dtype=complex)
    for word, c in terms.items():
        if c != 0:
            out += c * pauli_matrix(word)
    return out


def u0_dqd(j, t):
    """Undriven DQD evolution: CPHASE-like mix of II and ZZ."""
    e = np.exp(0.5j * j * t)
    return _words({"II": 0.5 * (1 + e), "ZZ": 0.5 * (1 - e)})


def u0_dqd_full(j, dbz, t):
    """Undriven DQD evolution in the averaged frame, valid for any J/dBz."""
    om = math.hypot(dbz, j)
    e = np.exp(0.5j * j * t)
    c = math.cos(0.5 * om * t)
    s_over = 0.5 * t if om == 0 else math.sin(0.5 * om * t) / om
    return _words({
        "ZI": 0.5j * e * dbz * s_over,
        "IZ": -0.5j * e * dbz * s_over,
        "II": 0.5 * (1 + e * c),
        "ZZ": 0.5 * (1 - e * c),
        "XX": -0.5j * e * j * s_over,
        "YY": -0.5j * e * j * s_over,
    })


def _fg(omega, t):
    # f = sin(omega t / 4) / omega, continuous at omega -> 0
    x = 0.25 * omega * t
    f = 0.25 * t if omega == 0 else math.sin(x) / omega
    return f, math.cos(x)


def u_two_drive(p, t):
    """Two resonant drives with arbitrary phases (10-term Pauli form)."""
    j, ey, dby = p.j, p.ey, p.dby
    fp, gp = _fg(p.omega_y_plus, t)
    fm, gm = _fg(p.omega_y_minus, t)
    s1, c1 = math.sin(p.phi1), math.cos(p.phi1)
    s2, c2 = math.sin(p.phi2), math.cos(p.phi2)
    a_left = ey * fp - dby * fm
    a_right = ey * fp + dby * fm
    dg = gp - gm
    df = fp - fm
    terms = {
        "XI": 1j * s1 * a_left,
        "IX": 1j * s2 * a_right,
        "YI": -1j * c1 * a_left,
        "IY": -1j * c2 * a_right,
        "XX": s1 * s2 * dg + 1j * j * c1 * c2 * df,
        "YY": c1 * c2 * dg + 1j * j * s1 * s2 * df,
        "XY": -s1 * c2 * dg + 1j * j * c1 * s2 * df,
        "YX": -c1 * s2 * dg + 1j * j * s1 * c2 * df,
        # II and ZZ commute with the z-rotations that generate the phases,
        # so their coefficients carry no phase dependence
        "ZZ": -1j * j * (fp + fm),
        "II": gp + gm,
    }
    return 0.5 * np.exp(0.25j * j * t) * _words(terms)


def u_single_drive(p, t):
    """Right-qubit drive only: exp(iJt/4) (g II - i f (B IY + J ZZ)).

    At ``t = 2 pi (2n+1) / Omega_2`` this is the IY-plus-ZZ gate
    ``(-1)^(n+1) i exp(i pi (2n+1) J / (2 Omega_2)) (B IY + J ZZ) / Omega_2``.
    Agrees with :func:`u_two_drive` at ``by1L = 0``.
    """
    if p.by1L or p.by1R:
        raise ModelError("u_single_drive expects drive 1 switched off")
    b, j = p.by2R, p.j
    f, g = _fg(p.omega_2, t)
    s2, c2 = math.sin(p.phi2), math.cos(p.phi2)
    terms = {"II": g, "IY": -1j * f * b * c2, "IX": 1j * f * b * s2, "ZZ": -1j * f * j}
    return np.exp(0.25j * j * t) * _words(terms)


def _diag_sz(n):
    """Sz eigenvalues (+-1/2) of every site for all basis states, shape (n, 2**n)."""
    idx = np.arange(2**n)
    bits = (idx[None, :] >> (n - 1 - np.arange(n))[:, None]) & 1
    return 0.5 - bits


def chain_exchange_phases(jlist, t, skip_site=None):
    """Diagonal of the Ising-only propagator (product over bonds)."""
    n = len(jlist) + 1
    sz = _diag_sz(n)
    phase = np.zeros(2**n)
    for i, jv in enumerate(jlist):
        if jv == 0 or skip_site in (i, i + 1):
            continue
        phase += jv * (sz[i] * sz[i + 1] - 0.25)
    return np.exp(-1j * phase * t)


def u_chain_exchange(jlist, t):
    """Undriven chain evolution: product of per-bond CPHASE-like factors."""
    return np.diag(chain_exchange_phases(jlist, t))


def u_chain_driven_block(p, k, t):
    """U_k: the driven site k together with its Z-coupled neighbours."""
    n = p.n
    b = p.by1[k]
    phi = p.phi[k]
    ej, dj = p.e_j(k), p.delta_j(k)
    fp, gp = _fg(p.omega_plus(k), t)
    fm, gm = _fg(p.omega_minus(k), t)
    s, c = math.sin(phi), math.cos(phi)
    left = k - 1 if k > 0 else None
    right = k + 1 if k < n - 1 else None

    def word(**letters):
        sites = {}
        for site, letter in letters.items():
            pos = {"l": left, "k": k, "r": right}[site]
            if pos is None:
                continue
            sites[pos] = letter
        return single_site_word(sites, n)

    terms = {}

    def add(w, coeff):
        terms[w] = terms.get(w, 0) + coeff

    add(word(k="X"), 1j * b * (fp + fm) * s)
    add(word(k="Y"), -1j * b * (fp + fm) * c)
    add(word(l="Z", k="X", r="Z"), 1j * b * (fp - fm) * s)
    add(word(l="Z", k="Y", r="Z"), -1j * b * (fp - fm) * c)
    add(word(l="Z", k="Z"), -1j * (ej * fp - dj * fm))
    add(word(k="Z", r="Z"), -1j * (ej * fp + dj * fm))
    add(word(l="Z", r="Z"), gp - gm)
    add(word(), gp + gm)
    return 0.5 * np.exp(0.25j * ej * t) * _words(terms, n)


def u_chain_driven(p, k, t):
    """Chain with a single resonant drive on site k (0-based).

    Returns ``U_rest(t) @ U_k(t)`` where ``U_rest`` collects the Ising phases
    of bonds not touching k.
    """
    others = [i for i in range(p.n) if p.by1[i] and i != k]
    if others:
        raise ModelError(f"u_chain_driven expects a single drive, also found sites {others}")
    if not np.allclose(p.omega, p.bz, rtol=0, atol=1e-9 * max(1.0, max(map(abs, p.bz)))):
        raise ModelError("u_chain_driven expects every site driven/rotating at its Zeeman frequency")
    rest = chain_exchange_phases(p.jlist, t, skip_site=k)
    return rest[:, None] * u_chain_driven_block(p, k, t)


def u_rwa_chain(p, t, **kw):
    """Numerical propagator of the RWA chain Hamiltonian."""
    return expm_hermitian(chain_rwa_hamiltonian(p, **kw), t)


def u_rwa_dqd(p, t):
    return expm_hermitian(dqd_rwa_hamiltonian(p), t)


# ---------------------------------------------------------------------------
# lab-frame oracle


@dataclass(frozen=True)
class PropagationConfig:
    """Settings for :func:`propagate_lab`.

    ``dt`` is an upper bound; the step is refined until
    ``dt * ||H|| <= max_phase``.  ``method`` is ``midpoint-expm`` (second
    order) or ``magnus2`` (two-node Gauss-Legendre Magnus with the
    commutator term, fourth order).
    """

    dt: float | None = None
    method: str = "midpoint-expm"
    frame: FrameSpec = field(default_factory=FrameSpec)
    max_phase: float = MAX_PHASE_PER_STEP
    max_steps: int = MAX_STEPS
    chunk: int = 1 << 15

    def __post_init__(self):
        if self.method not in ("midpoint-expm", "magnus2"):
            raise ValueError(f"unknown propagation method {self.method!r}")


class _LabModel:
    """H(t) = H0 + sum_m a_m(t) K_m with a_m(t) = sum amp cos(w t + phi)."""

    def __init__(self, p):
        if isinstance(p, DqdParams):
            p = _dqd_as_lab_chain(p)
        self.n = n = p.n
        eye = np.eye(2**n, dtype=complex)
        h0 = np.zeros((2**n, 2**n), dtype=complex)
        for i, jv in enumerate(p.jlist):
            if jv:
                ss = sum(spin_op(s, i, n) @ spin_op(s, i + 1, n) for s in ("Sx", "Sy", "Sz"))
                h0 += jv * (ss - 0.25 * eye)
        for i in range(n):
            h0 += p.bz[i] * spin_op("Sz", i, n) + p.by0[i] * spin_op("Sy", i, n)
        self.h0 = h0
        self.bz = np.array(p.bz)
        self.omega = np.array(p.omega)
        self.ops = []
        self.tones = []
        for i in range(n):
            tones = [tone for tone in p.tones[i] if tone[0]] if hasattr(p, "tones") else (
                [(p.by1[i], p.omega[i], p.phi[i])] if p.by1[i] else [])
            if tones:
                self.ops.append(spin_op("Sy", i, n))
                self.tones.append(tones)
        self.norm_bound = np.linalg.norm(h0, 2) + sum(
            0.5 * sum(abs(a) for a, _, _ in tones) for tones in self.tones)

    def stack(self, times):
        hs = np.broadcast_to(self.h0, (len(times),) + self.h0.shape).copy()
        for op, tones in zip(self.ops, self.tones):
            amp = np.zeros(len(times))
            for a, w, ph in tones:
                amp += a * np.cos(w * times + ph)
            hs += amp[:, None, None] * op
        return hs


@dataclass(frozen=True)
class _LabChain:
    n: int
    bz: tuple
    by0: tuple
    jlist: tuple
    omega: tuple
    tones: tuple


def _dqd_as_lab_chain(p):
    tones_l = ((p.by1L, p.w1, p.phi1), (p.by2L, p.w2, p.phi2))
    tones_r = ((p.by1R, p.w1, p.phi1), (p.by2R, p.w2, p.phi2))
    return _LabChain(n=2, bz=(p.bzL, p.bzR), by0=(p.by0L, p.by0R), jlist=(p.j,),
                     omega=(p.w1, p.w2), tones=(tones_l, tones_r))


def _expm_stack(hs, dt):
    w, v = np.linalg.eigh(hs)
    return (v * np.exp(-1j * w * dt)[:, None, :]) @ np.conj(np.swapaxes(v, -1, -2))


def _ordered_product(us):
    """U[-1] @ ... @ U[0] by pairwise reduction."""
    while len(us) > 1:
        if len(us) % 2:
            us = np.concatenate([us, np.eye(us.shape[-1], dtype=complex)[None]])
        us = us[1::2] @ us[0::2]
    return us[0]


def step_count(p, t_final, cfg=PropagationConfig()):
    model = _LabModel(p)
    return _steps(model, t_final, cfg)[0]


def _steps(model, t_final, cfg):
    if t_final == 0:
        return 0, 0.0
    dt = cfg.dt if cfg.dt else t_final
    dt_max = cfg.max_phase / model.norm_bound if model.norm_bound else dt
    dt = min(dt, dt_max)
    nsteps = math.ceil(t_final / dt - 1e-9)
    if nsteps > cfg.max_steps:
        raise PropagationError(
            f"need {nsteps} steps (dt = {dt:.3e} s, ||H|| <= {model.norm_bound:.3e} rad/s, "
            f"t = {t_final:.3e} s) but the cap is {cfg.max_steps}")
    return nsteps, t_final / nsteps


def frame_rotation(refs, n, t):
    """Diagonal of R(t) = exp(-i t sum_i w_i Sz_i)."""
    sz = _diag_sz(n)
    return np.exp(-1j * t * (np.asarray(refs)[:, None] * sz).sum(axis=0))


def propagate_lab(p, t_final, cfg=PropagationConfig(), t_start=0.0):
    """Time-ordered lab-frame propagator, returned in ``cfg.frame``.

    Integrates from ``t_start`` to ``t_start + t_final`` and returns
    ``R^dag(t_end) U_lab R(t_start)`` with ``R(t)`` the rotation at the
    frame's reference frequencies.  A nonzero start keeps drive phases
    continuous across the segments of a schedule.
    """
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    model = _LabModel(p)
    nsteps, dt = _steps(model, t_final, cfg)
    d = 2**model.n
    total = np.eye(d, dtype=complex)
    if nsteps:
        gl = math.sqrt(3) / 6
        for start in range(0, nsteps, cfg.chunk):
            idx = np.arange(start, min(nsteps, start + cfg.chunk))
            if cfg.method == "midpoint-expm":
                hs = model.stack(t_start + (idx + 0.5) * dt)
                us = _expm_stack(hs, dt)
            else:
                h1 = model.stack(t_start + (idx + 0.5 - gl) * dt)
                h2 = model.stack(t_start + (idx + 0.5 + gl) * dt)
                comm = h2 @ h1 - h1 @ h2
                heff = 0.5 * (h1 + h2) - 1j * (math.sqrt(3) / 12) * dt * comm
                heff = 0.5 * (heff + np.conj(np.swapaxes(heff, -1, -2)))
                us = _expm_stack(heff, dt)
            total = _ordered_product(us) @ total
    refs = cfg.frame.references(model.bz, model.omega)
    r_end = frame_rotation(refs, model.n, t_start + t_final)
    r_start = frame_rotation(refs, model.n, t_start)
    return r_end.conj()[:, None] * total * r_start[None, :]
