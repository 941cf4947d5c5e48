"""Timing conditions, composite schedules and gate-time optimization.

A :class:`Schedule` keeps parameter overrides per segment rather than
matrices, so the same schedule can be re-evaluated with perturbed exchange
values (see :mod:`resex.noise`) or handed to the lab-frame integrator.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np
from scipy.optimize import minimize_scalar

from .evolution import (
    PropagationConfig,
    frame_rotation,
    propagate_lab,
    u0_dqd,
    u_chain_driven,
    u_single_drive,
    u_two_drive,
)
from .metrics import fidelity_from_overlap, trace_abs
from .models import ChainParams, DqdParams, chain_rwa_hamiltonian
from .operators import expm_hermitian, pauli_matrix, single_site_word
from .units import GHz

DEFAULT_DQD = DqdParams(bzL=20 * GHz, bzR=20.2 * GHz)
GRID_POINTS = 1000
FLAT_TOL = 1e-14


class ScheduleError(ValueError):
    pass


class FreeIdle(ScheduleError):
    """J = 0: the undriven pair is already idle at every time."""


@dataclass(frozen=True)
class PulseSegment:
    duration: float
    param_overrides: dict = field(default_factory=dict)
    label: str = ""

    def __post_init__(self):
        if not self.duration > 0 or not math.isfinite(self.duration):
            raise ScheduleError(f"segment duration must be positive, got {self.duration}")

    def to_dict(self):
        out = {"duration": self.duration, "label": self.label}
        out.update({k: list(v) if isinstance(v, tuple) else v for k, v in self.param_overrides.items()})
        return out

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        duration = float(d.pop("duration"))
        label = d.pop("label", "")
        over = {k: tuple(v) if isinstance(v, list) else v for k, v in d.items()}
        return cls(duration, over, label)


def _field_names(p):
    return {f.name for f in fields(p)}


@dataclass
class Schedule:
    """Ordered segments; the first segment acts first.

    ``target`` is the gate label and ``target_unitary`` its matrix.  For
    chain schedules ``site`` is the addressed qubit.  ``exact`` says whether
    the schedule hits its target exactly in the analytic model.
    """

    segments: list
    target: str
    target_unitary: np.ndarray
    base: object = DEFAULT_DQD
    exact: bool = True
    site: int | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        names = _field_names(self.base)
        for seg in self.segments:
            bad = set(seg.param_overrides) - names
            if bad:
                raise ScheduleError(f"segment {seg.label!r} overrides unknown fields {sorted(bad)}")

    @property
    def duration(self):
        return sum(s.duration for s in self.segments)

    def segment_params(self, base=None):
        base = self.base if base is None else base
        return [base.with_(**s.param_overrides) for s in self.segments]

    def segment_unitaries(self, base=None):
        out = []
        t0 = 0.0
        for seg, p in zip(self.segments, self.segment_params(base)):
            out.append(segment_unitary(p, seg.duration, t0))
            t0 += seg.duration
        return out

    def evaluate(self, base=None):
        """Product of per-segment propagators, last segment leftmost."""
        u = None
        for us in self.segment_unitaries(base):
            u = us if u is None else us @ u
        return u

    @property
    def predicted_unitary(self):
        return self.evaluate()

    def evaluate_lab(self, base=None, cfg=None):
        """Same product built from the lab-frame integrator."""
        cfg = cfg or PropagationConfig(method="magnus2", max_phase=0.2)
        u = None
        t0 = 0.0
        for seg, p in zip(self.segments, self.segment_params(base)):
            us = propagate_lab(p, seg.duration, cfg, t_start=t0)
            u = us if u is None else us @ u
            t0 += seg.duration
        return u

    def to_dict(self):
        return {"target": self.target, "segments": [s.to_dict() for s in self.segments]}


def segment_unitary(p, duration, t_start=0.0):
    """Analytic propagator of one constant-parameter segment."""
    if isinstance(p, DqdParams):
        if p.by1L == 0 and p.by2R == 0:
            return u0_dqd(p.j, duration)
        if p.by1L == 0:
            return u_single_drive(p, duration)
        return u_two_drive(p, duration)
    return _chain_segment(p, duration, t_start)


def _chain_segment(p, duration, t_start):
    driven = [i for i in range(p.n) if p.by1[i]]
    detuned = [i for i in range(p.n) if p.omega[i] != p.bz[i]]
    if len(driven) == 1 and not detuned:
        return u_chain_driven(p, driven[0], duration)
    # numerical RWA propagator in the drive frame, mapped to the Zeeman frame
    u = expm_hermitian(chain_rwa_hamiltonian(p), duration)
    if detuned:
        delta = np.asarray(p.omega) - np.asarray(p.bz)
        u = frame_rotation(delta, p.n, t_start + duration)[:, None] * u
        u = u * frame_rotation(delta, p.n, t_start).conj()[None, :]
    return u


# ---------------------------------------------------------------------------
# timing conditions


def tau_idle(j, n=1):
    """Waiting time 4 n pi / J after which the undriven pair is idle."""
    if n < 1:
        raise ScheduleError(f"idle multiple n must be >= 1, got {n}")
    if j == 0:
        raise FreeIdle("J = 0: the pair is idle at every time")
    return 4 * n * math.pi / abs(j)


def tau_zz(j, n=0):
    """Waiting time 2 (2n+1) pi / J producing ZZ."""
    if n < 0:
        raise ScheduleError(f"n must be >= 0, got {n}")
    if j == 0:
        raise ScheduleError("J = 0: no ZZ gate can be produced by waiting")
    return 2 * (2 * n + 1) * math.pi / abs(j)


def tau_iy(b, j, n=0):
    om2 = math.hypot(b, j)
    if om2 == 0:
        raise ScheduleError("B = J = 0: the drive does not rotate")
    return 2 * math.pi * (2 * n + 1) / om2


def _drive(b, phi, duration, label, j=None):
    over = {"by2R": b, "phi2": phi, "by1L": 0.0}
    if j is not None:
        over["j"] = j
    return PulseSegment(duration, over, label)


def _wait(duration, label="wait"):
    return PulseSegment(duration, {"by2R": 0.0, "by1L": 0.0}, label)


def schedule_zx(b, n1=0, n2=0, j=None, n_zz=0, base=None):
    """IY from two drives (second with a pi phase shift) and a ZZ wait.

    The two drives leave ZX; waiting for ZZ turns it into IY.  Requires
    J = B, where the identity component cancels.
    """
    j = b if j is None else j
    if not math.isclose(j, b, rel_tol=1e-12):
        raise ScheduleError(f"schedule_zx needs J = B (got J = {j}, B = {b})")
    base = (base or DEFAULT_DQD).with_(j=j)
    tau1, tau2 = tau_iy(b, j, n1), tau_iy(b, j, n2)
    segs = [
        _drive(b, 0.0, tau1, "drive"),
        _drive(b, math.pi, tau2, "drive-pi"),
        _wait(tau_zz(j, n_zz), "zz-wait"),
    ]
    return Schedule(segs, "IY", pauli_matrix("IY"), base)


def schedule_iy_half(b, n=0, base=None):
    """Half rotation exp(-i pi/4 IY) at J = sqrt(2) B.

    Two equal drives of opposite sign followed by a ZZ wait.
    """
    j = math.sqrt(2) * b
    om2 = math.hypot(b, j)
    # arccot(x) = atan(1/x) for x > 0
    tau = 4 * (math.atan(om2 / b) + n * math.pi) / om2
    base = (base or DEFAULT_DQD).with_(j=j)
    segs = [
        _drive(b, 0.0, tau, "drive"),
        _drive(b, math.pi, tau, "drive-pi"),
        _wait(tau_zz(j, 0), "zz-wait"),
    ]
    target = (np.eye(4) - 1j * pauli_matrix("IY")) / math.sqrt(2)
    return Schedule(segs, "IY_pi/2", target, base)


def schedule_idle_by_drive(b, j, n=1, base=None):
    """Identity from one drive of length 4 pi n / Omega_2."""
    if n < 1:
        raise ScheduleError(f"n must be >= 1, got {n}")
    base = (base or DEFAULT_DQD).with_(j=j)
    om2 = math.hypot(b, j)
    if om2 == 0:
        raise ScheduleError("B = J = 0")
    return Schedule([_drive(b, 0.0, 4 * math.pi * n / om2, "drive")], "II", np.eye(4), base)


@dataclass(frozen=True)
class YyCondition:
    j: float
    tau: float
    target: str  # "YY" or "II"


def yy_exchange_condition(ey, dby, n, m):
    """J making 4 pi n / Omega_y+ = 4 pi m / Omega_y- hold simultaneously.

    The gate produced at that time is YY when n + m is odd and the identity
    when n and m share parity.
    """
    if n == m:
        raise ScheduleError("n and m must differ")
    if n < 1 or m < 1:
        raise ScheduleError("n and m must be positive")
    rad = (m**2 * ey**2 - n**2 * dby**2) / (n**2 - m**2)
    if not rad > 0:
        if n > m:
            region = f"need m|Ey| > n|dBy|, i.e. |Ey|/|dBy| > {n / m:.6g}"
        else:
            region = f"need m|Ey| < n|dBy|, i.e. |Ey|/|dBy| < {n / m:.6g}"
        raise ScheduleError(f"no real J for (n, m) = ({n}, {m}): radicand {rad:.3e}; {region}")
    j = math.sqrt(rad)
    tau = 4 * math.pi * n / math.hypot(ey, j)
    target = "YY" if (n + m) % 2 else "II"
    return YyCondition(j, tau, target)


def schedule_yy(b1, b2, n, m, base=None):
    """Two-drive schedule at the exchange picked by :func:`yy_exchange_condition`."""
    cond = yy_exchange_condition(b1 + b2, b2 - b1, n, m)
    base = (base or DEFAULT_DQD).with_(j=cond.j)
    seg = PulseSegment(cond.tau, {"by1L": b1, "by2R": b2, "phi1": 0.0, "phi2": 0.0}, "drive")
    target = pauli_matrix("YY") if cond.target == "YY" else np.eye(4)
    return Schedule([seg], cond.target, target, base, info={"n": n, "m": m})


# ---------------------------------------------------------------------------
# three-step Y gate on a chain


def _default_chain(n_sites, j0):
    bz = tuple(20 * GHz + 0.1 * GHz * i for i in range(n_sites))
    return ChainParams(n=n_sites, bz=bz, jlist=(j0,) * (n_sites - 1))


def three_step_amplitude(j0, n=0, m=1):
    """Drive amplitude B = 2 (2n+1) J0 / sqrt(4 m^2 - (2n+1)^2)."""
    q = 4 * m**2 - (2 * n + 1) ** 2
    if q <= 0:
        raise ScheduleError(
            f"(n, m) = ({n}, {m}) infeasible: need 2m > 2n+1; nearest feasible m = {n + 1}")
    return 2 * (2 * n + 1) * j0 / math.sqrt(q)


def schedule_three_step_y(j0, n=(0, 2), m=(1, 5), l=9, base=None, k=1):
    """Y on site k by driving the three neighbour-state transitions in turn.

    Step 1 drives the transition at the bare Zeeman frequency, steps 2 and 3
    the ones shifted by +J0 and -J0.  Step 1 uses (n[0], m[0]); steps 2 and 3
    use (n[1], m[1]) and the approximate condition with ``l`` for the
    transition two detunings away.
    """
    n1, n2 = n
    m1, m2 = m
    b = three_step_amplitude(j0, n1, m1)
    # the same amplitude must also satisfy the step-2 condition
    m2_exact = m1 * (2 * n2 + 1) / (2 * n1 + 1)
    if not math.isclose(m2, m2_exact, rel_tol=1e-12):
        near = [nn for nn in range(max(0, n2 - 3), n2 + 4)
                if float(m1 * (2 * nn + 1) / (2 * n1 + 1)).is_integer()]
        raise ScheduleError(
            f"m = {m2} inconsistent with the step-1 amplitude (needs {m2_exact:.6g}); "
            f"feasible (n, m) near n = {n2}: "
            + ", ".join(f"({nn}, {m1 * (2 * nn + 1) // (2 * n1 + 1)})" for nn in near))
    tau1 = 2 * math.pi * (2 * n1 + 1) / b
    tau2 = 2 * math.pi * (2 * n2 + 1) / b
    l_exact = math.hypot(b, 4 * j0) * tau2 / (4 * math.pi)
    if abs(l - l_exact) > 0.5:
        raise ScheduleError(f"l = {l} is not the nearest integer to {l_exact:.6g}; use {round(l_exact)}")

    base = base or _default_chain(3, j0)
    bz_k = base.bz[k]

    def seg(duration, shift, label):
        by1 = [0.0] * base.n
        by1[k] = b
        omega = list(base.bz)
        omega[k] = bz_k + shift
        return PulseSegment(duration, {"by1": tuple(by1), "omega": tuple(omega)}, label)

    segs = [seg(tau1, 0.0, "center"), seg(tau2, j0, "upper"), seg(tau2, -j0, "lower")]
    target = pauli_matrix(single_site_word({k: "Y"}, base.n))
    d = base.dim
    f_est = (1 + d * math.sin(math.pi * l_exact / 2) ** 4) / (d + 1)
    info = {"amplitude": b, "l_exact": l_exact, "l_residual": l_exact - l, "fidelity_estimate": f_est}
    return Schedule(segs, single_site_word({k: "Y"}, base.n), target, base,
                    exact=False, site=k, info=info)


def schedule_bound(schedule, base=None):
    """Diagonal-invariant fidelity bound of a schedule against its target."""
    u = schedule.evaluate(base)
    d = u.shape[0]
    return fidelity_from_overlap(trace_abs(u @ schedule.target_unitary.conj().T), d)


# ---------------------------------------------------------------------------
# gate-time optimization


def optimal_time(fid, bracket, grid=GRID_POINTS, rtol=1e-6, pure=False, workers=4,
                 vectorized=False):
    """Maximize ``fid`` over ``bracket``: grid scan, then a bounded local search.

    ``vectorized=True`` evaluates the grid with a single array call;
    ``pure=True`` lets it be evaluated from a thread pool instead.
    Returns ``(t_best, fid(t_best))``.
    """
    lo, hi = map(float, bracket)
    if not hi > lo:
        raise ScheduleError(f"bad bracket {bracket}")
    ts = np.linspace(lo, hi, grid)
    if vectorized:
        vals = np.asarray(fid(ts), dtype=float)
    elif pure and workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            vals = np.array(list(ex.map(fid, ts)), dtype=float)
    else:
        vals = np.array([fid(t) for t in ts], dtype=float)
    if vals.max() - vals.min() < FLAT_TOL:
        raise ScheduleError("objective is flat over the bracket; no maximum to locate")
    i = int(np.argmax(vals))
    if i == 0 or i == grid - 1:
        return float(ts[i]), float(vals[i])
    # bounded search tolerates the ties a flat peak leaves on the grid
    res = minimize_scalar(lambda t: -fid(t), bounds=(ts[i - 1], ts[i + 1]), method="bounded",
                          options={"xatol": rtol * ts[i]})
    t_best = float(min(max(res.x, lo), hi))
    f_best = float(fid(t_best))
    if f_best < vals[i]:
        return float(ts[i]), float(vals[i])
    return t_best, f_best


def mean_time_heuristic(b, j0):
    """pi / B + pi / sqrt(B^2 + J0^2)."""
    if not b > 0:
        raise ScheduleError("drive amplitude must be positive")
    return math.pi / b + math.pi / math.hypot(b, j0)
