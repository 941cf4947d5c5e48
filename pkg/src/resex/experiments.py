"""Experiment computations behind the CLI subcommands.

Every ``run_*`` takes a :class:`~resex.config.ScenarioConfig`, a seed and an
evaluator name and returns a list of :class:`~resex.output.Table`.
"""

import math
import sys

import numpy as np

from . import config as C
from .evolution import PropagationConfig, PropagationError, propagate_lab, u_single_drive, u_two_drive
from .metrics import (
    dominant_terms,
    error_matrix_coeffs,
    fidelity_from_overlap,
    fidelity_swap,
    fidelity_y_chain,
    gate_fidelity,
    gate_report,
    rescale_fidelity,
)
from .models import ChainParams, DqdParams, chain_rwa_hamiltonian, swap_rwa_hamiltonian, swap_target
from .noise import NoiseError, NoiseSpec, mc_infidelity
from .operators import HermitianPropagator, expm_hermitian, max_abs, pauli_decompose, pauli_matrix
from .output import Table
from .scheduling import (
    PulseSegment,
    Schedule,
    mean_time_heuristic,
    optimal_time,
    schedule_zx,
    tau_iy,
)
from .units import GHz, MHz, kHz

DEFAULT_SEEDS = {"dqd-coeffs": 11, "dqd-fid": 13, "chain-y": 17, "chain-simul": 19, "swap": 23, "report": 29}
SIMUL_REPORT_DIM = 2**10
MAX_SIMUL_SITES = 7
ORACLE_CFG = PropagationConfig(method="magnus2", max_phase=0.2)

REF_DQD = dict(bzL=20 * GHz, bzR=20.2 * GHz, by2R=2 * MHz, j=200 * kHz)

DEFAULT_CONFIGS = {
    "dqd-coeffs": """
[scenario]
experiment = dqd-coeffs
output = out/dqd-coeffs
[params]
bzL = 20 GHz
bzR = 20.2 GHz
by2R = 2 MHz
j = 200 kHz
[sweep]
field = t
start = 0
stop = 6.4 us
points = 321
scale = linear
""",
    "dqd-fid": """
[scenario]
experiment = dqd-fid
output = out/dqd-fid
[params]
bzL = 20 GHz
bzR = 20.2 GHz
[sweep]
field = j
start = 10 kHz
stop = 10 MHz
points = 13
scale = log
[noise]
sigma_rel = 0.01
samples = 1000
seed = 13
[options]
b_values = 10 MHz, 100 MHz
""",
    "chain-y": """
[scenario]
experiment = chain-y
output = out/chain-y
[params]
n = 3
k = 1
b = 10 MHz
[sweep]
field = t
start = 0.3 us
stop = 1.0 us
points = 351
scale = linear
[options]
j0_values = 0.1 MHz, 0.5 MHz, 1 MHz, 2 MHz
b_values = 1 MHz, 10 MHz, 100 MHz
j0_scan = 1 kHz, 100 MHz, 41
""",
    "chain-simul": """
[scenario]
experiment = chain-simul
output = out/chain-simul
[params]
b = 10 MHz
[sweep]
field = j0
start = 10 kHz
stop = 3 MHz
points = 16
scale = log
[options]
n_values = 3, 5, 7
""",
    "swap": """
[scenario]
experiment = swap
output = out/swap
[params]
n = 4
k = 1
j = 1 GHz
dbz = 200 MHz
[sweep]
field = t
start = 2.8 ns
stop = 3.5 ns
points = 141
scale = linear
[options]
j0_values = 0, 1 MHz, 10 MHz, 30 MHz
j_values = 1 GHz, 2 GHz
""",
    "report": """
[scenario]
experiment = report
output = out/report
[params]
bzL = 20 GHz
bzR = 20.2 GHz
by2R = 2 MHz
j = 200 kHz
[options]
gate = iy-half
""",
}


def default_config(name):
    return C.loads(DEFAULT_CONFIGS[name])


def _warn(msg):
    print(f"resex: {msg}", file=sys.stderr)


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def dqd_from(cfg):
    return DqdParams(**{k: float(v) for k, v in cfg.params.items()})


# ---------------------------------------------------------------------------
# Pauli coefficients of the driven DQD


COEFF_WORDS = ("YI", "IY", "XX", "YY", "ZZ", "II")


def dqd_coefficients(p, times):
    """|c_w(t)| for the words in COEFF_WORDS, shape (len(times), 6)."""
    out = np.empty((len(times), len(COEFF_WORDS)))
    idx = [int("".join("0123"["IXYZ".index(c)] for c in w), 4) for w in COEFF_WORDS]
    for i, t in enumerate(times):
        coeffs = pauli_decompose(u_two_drive(p, t))
        out[i] = [abs(coeffs[j][1]) for j in idx]
    return out


def lab_trajectory(p, times, cfg=ORACLE_CFG):
    """Lab-frame propagators at increasing ``times`` (one sweep, no restarts)."""
    us_out = []
    u = np.eye(4, dtype=complex)
    prev = 0.0
    for t in times:
        if t > prev:
            u = propagate_lab(p, t - prev, cfg, t_start=prev) @ u
            prev = t
        us_out.append(u.copy())
    return us_out


def run_dqd_coeffs(cfg, seed, evaluator):
    p = dqd_from(cfg)
    times = cfg.sweep.values()
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise C.ConfigError(["sweep over t must be non-negative and increasing"])
    coeffs = dqd_coefficients(p, times)
    cols = ["t [s]"] + [f"|{w}| [1]" for w in COEFF_WORDS]
    rows = [[t, *c] for t, c in zip(times, coeffs)]
    if evaluator == "oracle":
        traj = lab_trajectory(p, times)
        cols += [f"|{w}| oracle [1]" for w in COEFF_WORDS] + ["max|U-U_lab| [1]"]
        idx = [int("".join("0123"["IXYZ".index(c)] for c in w), 4) for w in COEFF_WORDS]
        for row, t, u_lab in zip(rows, times, traj):
            cl = pauli_decompose(u_lab)
            row += [abs(cl[j][1]) for j in idx] + [max_abs(u_two_drive(p, t) - u_lab)]
    b = p.by2R or p.by1L
    markers = []
    if b:
        markers = [("2pi/B", 2 * math.pi / b), ("pi/2 time", math.pi / math.hypot(b, p.j))]
    mk = Table("markers", ["marker", "t [s]"], [list(m) for m in markers])
    return [Table("coeffs", cols, rows, {"markers": markers}), mk]


# ---------------------------------------------------------------------------
# single-drive versus ZX-composed IY


def schedule_single_iy(b, j, n=0, base=None):
    """One right-qubit drive for tau_IY, compared against IY."""
    base = (base or DqdParams(**{k: REF_DQD[k] for k in ("bzL", "bzR")})).with_(j=j)
    seg = PulseSegment(tau_iy(b, j, n), {"by2R": b, "phi2": 0.0, "by1L": 0.0}, "drive")
    return Schedule([seg], "IY", pauli_matrix("IY"), base)


def _noiseless(schedule, evaluator):
    try:
        u = schedule.evaluate_lab(cfg=ORACLE_CFG) if evaluator == "oracle" else schedule.evaluate()
    except PropagationError as exc:
        _warn(f"oracle skipped: {exc}")
        return math.nan
    return 1 - gate_fidelity(u, schedule.target_unitary)


def _mc(schedule, noise, evaluator):
    if noise is None:
        return math.nan, math.nan
    ev = "lab-oracle" if evaluator == "oracle" else "analytic"
    try:
        r = mc_infidelity(schedule, schedule.target_unitary, noise, ev, ORACLE_CFG)
    except (NoiseError, PropagationError) as exc:
        _warn(f"Monte Carlo skipped: {exc}")
        return math.nan, math.nan
    return r.mean_infidelity, r.stderr


def run_dqd_fidelity_scan(cfg, seed, evaluator):
    base = DqdParams(**{k: float(v) for k, v in cfg.params.items()})
    b_values = [float(b) for b in _as_list(cfg.options.get("b_values", [10 * MHz, 100 * MHz]))]
    noise = cfg.noise
    if noise is not None:
        noise = NoiseSpec(noise.sigma_rel, noise.samples, seed, noise.correlated)
    cols = ["J [rad/s]"]
    for b in b_values:
        tag = f"B={b:.6g}"
        cols += [f"tau single {tag} [s]", f"1-F single {tag} [1]",
                 f"1-F single {tag} MC [1]", f"stderr single {tag} [1]"]
    cols += ["tau ZX [s]", "1-F ZX [1]", "1-F ZX MC [1]", "stderr ZX [1]"]
    rows = []
    for j in cfg.sweep.values():
        row = [j]
        for b in b_values:
            s = schedule_single_iy(b, j, base=base)
            row += [s.duration, _noiseless(s, evaluator), *_mc(s, noise, evaluator)]
        s = schedule_zx(j, base=base)
        row += [s.duration, _noiseless(s, evaluator), *_mc(s, noise, evaluator)]
        rows.append(row)
    return [Table("scan", cols, rows, {"logx": True, "logy": True})]


# ---------------------------------------------------------------------------
# Y gate on one chain site


def chain_y_params(n, k, b, j0):
    by1 = [0.0] * n
    by1[k] = b
    bz = tuple(20 * GHz + 0.1 * GHz * i for i in range(n))
    return ChainParams(n=n, bz=bz, by1=tuple(by1), jlist=(j0,) * (n - 1))


def chain_y_optimum(p, k, d=None):
    """(t_opt, F_opt) of the closed-form Y-gate fidelity near 2 pi / B."""
    t_pi = 2 * math.pi / p.by1[k]
    return optimal_time(lambda t: fidelity_y_chain(p, k, t, d), (0.5 * t_pi, 1.5 * t_pi), vectorized=True)


def run_chain_ygate(cfg, seed, evaluator):
    n = int(cfg.params.get("n", 3))
    k = int(cfg.params.get("k", 1))
    if not 0 < k < n - 1:
        raise C.ConfigError([f"params.k = {k}: the Y-gate scan needs an interior site (1..{n - 2})"])
    b = float(cfg.params.get("b", 10 * MHz))
    j0_values = [float(v) for v in _as_list(cfg.options.get("j0_values", [1 * MHz]))]
    times = cfg.sweep.values()
    cols = ["t [s]"] + [f"1-F J0={j0:.6g} [1]" for j0 in j0_values]
    curves = []
    mrows = []
    markers = []
    for j0 in j0_values:
        p = chain_y_params(n, k, b, j0)
        curves.append(1 - fidelity_y_chain(p, k, times))
        t_mean = mean_time_heuristic(b, j0)
        t_opt, f_opt = chain_y_optimum(p, k)
        mrows.append([j0, t_mean, 1 - fidelity_y_chain(p, k, t_mean), t_opt, 1 - f_opt])
        markers += [(f"mean {j0:.3g}", t_mean), (f"opt {j0:.3g}", t_opt)]
    rows = [[t, *vals] for t, vals in zip(times, zip(*curves))]
    a = Table("a", cols, rows, {"logy": True, "markers": markers})
    m = Table("markers", ["J0 [rad/s]", "t mean [s]", "1-F mean [1]", "t opt [s]", "1-F opt [1]"], mrows)

    start, stop, points = _as_list(cfg.options.get("j0_scan", [1 * kHz, 100 * MHz, 41]))
    j0_scan = np.geomspace(float(start), float(stop), int(points))
    b_values = [float(v) for v in _as_list(cfg.options.get("b_values", [1 * MHz, 10 * MHz, 100 * MHz]))]
    bcols = ["J0 [rad/s]"]
    for bb in b_values:
        bcols += [f"t opt B={bb:.6g} [s]", f"1-F opt B={bb:.6g} [1]"]
    brows = []
    for j0 in j0_scan:
        row = [j0]
        for bb in b_values:
            t_opt, f_opt = chain_y_optimum(chain_y_params(n, k, bb, j0), k)
            row += [t_opt, 1 - f_opt]
        brows.append(row)
    bt = Table("b", bcols, brows, {"logx": True, "logy": True})
    return [a, m, bt]


# ---------------------------------------------------------------------------
# simultaneous and sequential Y gates


SIMUL_PATTERNS = ("IYI", "YYY", "YIYxIYI")


def _driven_chain(n, sites, b, j0):
    by1 = [0.0] * n
    for s in sites:
        by1[s] = b
    bz = tuple(20 * GHz + 0.1 * GHz * i for i in range(n))
    return ChainParams(n=n, bz=bz, by1=tuple(by1), jlist=(j0,) * (n - 1))


def _optimized_step(n, sites, b, j0, bracket):
    p = _driven_chain(n, sites, b, j0)
    hp = HermitianPropagator(chain_rwa_hamiltonian(p))
    target = pauli_matrix("".join("Y" if i in sites else "I" for i in range(n)))
    trace = hp.trace_fn(target.conj().T)
    d = 2**n
    t_opt, f_opt = optimal_time(lambda t: fidelity_from_overlap(np.abs(trace(t)), d), bracket,
                                vectorized=True)
    return t_opt, f_opt, hp


def simultaneous_y(n, b, j0, d_report=SIMUL_REPORT_DIM):
    """Optimized fidelities of the three drive patterns on an n-site chain.

    ``IYI`` drives the odd sites, ``YYY`` all sites at once and ``YIYxIYI``
    the odd sites followed by the even ones.  Fidelities are rescaled to
    dimension ``d_report``; returns {pattern: (time, fidelity)}.
    """
    t_pi = 2 * math.pi / b
    bracket = (0.5 * t_pi, 1.5 * t_pi)
    odd, even = range(1, n, 2), range(0, n, 2)
    t1, f1, hp1 = _optimized_step(n, odd, b, j0, bracket)
    t_all, f_all, _ = _optimized_step(n, range(n), b, j0, bracket)
    t2, _, hp2 = _optimized_step(n, even, b, j0, bracket)
    f_seq = gate_fidelity(hp2(t2) @ hp1(t1), pauli_matrix("Y" * n))
    d = 2**n
    return {
        "IYI": (t1, rescale_fidelity(f1, d, d_report)),
        "YYY": (t_all, rescale_fidelity(f_all, d, d_report)),
        "YIYxIYI": (t1 + t2, rescale_fidelity(f_seq, d, d_report)),
    }


def run_chain_simul_y(cfg, seed, evaluator):
    b = float(cfg.params.get("b", 10 * MHz))
    n_values = [int(v) for v in _as_list(cfg.options.get("n_values", [3, 5, 7]))]
    big = [n for n in n_values if n > MAX_SIMUL_SITES]
    if big and not cfg.options.get("allow_large", False):
        raise C.ConfigError([f"options.n_values: N = {big} exceeds {MAX_SIMUL_SITES} "
                             "(set allow_large = true to override)"])
    if any(n < 2 for n in n_values):
        raise C.ConfigError(["options.n_values: chains need at least 2 sites"])
    cols = ["J0 [rad/s]"]
    for n in n_values:
        cols += [f"F {pat} N={n} [1]" for pat in SIMUL_PATTERNS] + [f"t YYY N={n} [s]"]
    rows = []
    for j0 in cfg.sweep.values():
        row = [j0]
        for n in n_values:
            res = simultaneous_y(n, b, j0)
            row += [res[pat][1] for pat in SIMUL_PATTERNS] + [res["YYY"][0]]
        rows.append(row)
    return [Table("fidelity", cols, rows, {"logx": True})]


# ---------------------------------------------------------------------------
# SWAP on a four-site block


def swap_chain(n, k, j, dbz, j0):
    # only bz[k+1] - bz[k] enters the pair frame; the rest are spread apart
    bz = [20 * GHz + 0.4 * GHz * (i - k) + (dbz - 0.4 * GHz) * (i > k) for i in range(n)]
    jlist = [j0] * (n - 1)
    jlist[k] = j
    return ChainParams(n=n, bz=tuple(bz), jlist=tuple(jlist))


def swap_unitary(p, k, t):
    return expm_hermitian(swap_rwa_hamiltonian(p, k, allow_edge=True), t)


SWAP_ERROR_WORDS = ("IXXI", "IYYI", "IZZI", "IXYI", "IYXI")


def run_swap(cfg, seed, evaluator):
    n = int(cfg.params.get("n", 4))
    k = int(cfg.params.get("k", 1))
    j = float(cfg.params.get("j", 1 * GHz))
    dbz = float(cfg.params.get("dbz", 200 * MHz))
    j0_values = [float(v) for v in _as_list(cfg.options.get("j0_values", [0.0, 10 * MHz]))]
    j_values = [float(v) for v in _as_list(cfg.options.get("j_values", [j, 2 * j]))]
    times = cfg.sweep.values()
    target = swap_target(n, k)
    cols = ["t [s]"]
    curves = []
    for j0 in j0_values:
        p = swap_chain(n, k, j, dbz, j0)
        hp = HermitianPropagator(swap_rwa_hamiltonian(p, k, allow_edge=True))
        trace = hp.trace_fn(target.conj().T)
        cols += [f"F closed J0={j0:.6g} [1]", f"F numeric J0={j0:.6g} [1]", f"F printed J0={j0:.6g} [1]"]
        curves += [fidelity_swap(p, k, times), fidelity_from_overlap(np.abs(trace(times)), p.dim),
                   fidelity_swap(p, k, times, variant="printed")]
    rows = [[t, *vals] for t, vals in zip(times, zip(*curves))]
    t_swap = math.pi / j
    vrows = []
    for j0 in j0_values:
        p = swap_chain(n, k, j, dbz, j0)
        f_num = gate_fidelity(swap_unitary(p, k, t_swap), target)
        vrows.append([j0, float(fidelity_swap(p, k, t_swap)), f_num,
                      float(fidelity_swap(p, k, t_swap, variant="printed"))])
    vt = Table("j0", ["J0 [rad/s]", "F closed [1]", "F numeric [1]", "F printed [1]"], vrows, {"logx": False})

    ccols = ["word"]
    tables = {}
    for jj in j_values:
        for j0 in sorted({0.0, *j0_values}):
            p = swap_chain(n, k, jj, dbz, j0)
            coeffs = error_matrix_coeffs(swap_unitary(p, k, math.pi / jj), target)
            tables[(jj, j0)] = {w: abs(c) for w, c in coeffs}
            ccols.append(f"|c| J={jj:.6g} J0={j0:.6g} [1]")
    words = sorted({w for tab in tables.values() for w, _ in dominant_terms(tab.items(), tol=1e-9)})
    crows = [[w, *[tab[w] for tab in tables.values()]] for w in words]
    ct = Table("coeffs", ccols, crows)
    return [Table("time", cols, rows, {"markers": [("pi/J", t_swap)]}), vt, ct]


# ---------------------------------------------------------------------------
# PTM and error generator report


def report_gate(p, gate="iy-half", time=None, evaluator="analytic"):
    """(actual, ideal, label) for the report scenarios."""
    b = p.by2R
    if gate == "zx":
        s = schedule_zx(b, base=p)
        u = s.evaluate_lab(cfg=ORACLE_CFG) if evaluator == "oracle" else s.evaluate()
        return u, s.target_unitary, "IY (ZX composition)"
    if gate == "iy":
        t = tau_iy(b, p.j) if time is None else time
        ideal = pauli_matrix("IY")
        label = "IY"
    elif gate == "iy-half":
        t = math.pi / math.hypot(b, p.j) if time is None else time
        ideal = (np.eye(4) - 1j * pauli_matrix("IY")) / math.sqrt(2)
        label = "IY_pi/2"
    else:
        raise C.ConfigError([f"options.gate must be iy, iy-half or zx, got {gate!r}"])
    u = propagate_lab(p, t, ORACLE_CFG) if evaluator == "oracle" else u_single_drive(p, t)
    return u, ideal, label


def gate_report_tables(rep):
    words = rep.words
    rows = []
    for r, wr in enumerate(words):
        for c, wc in enumerate(words):
            rows.append([wr, wc, rep.ptm[r, c], rep.ptm_ideal[r, c], rep.errgen[r, c]])
    ptm_t = Table("ptm", ["row", "col", "ptm [1]", "ptm ideal [1]", "errgen [1]"], rows)
    coeff_t = Table("coeffs", ["word", "re [1]", "im [1]", "abs [1]"],
                    [[w, c.real, c.imag, abs(c)] for w, c in rep.err_coeffs])
    summ = Table("summary", ["quantity", "value [1]"],
                 [["fidelity", rep.fidelity], ["bound", rep.bound]])
    return [summ, ptm_t, coeff_t]


def run_report(cfg, seed, evaluator):
    p = dqd_from(cfg)
    if p.by1L:
        raise C.ConfigError(["params.by1L: report scenarios use the right-qubit drive only"])
    t = cfg.options.get("time")
    u, ideal, label = report_gate(p, cfg.options.get("gate", "iy-half"),
                                  None if t is None else float(t), evaluator)
    tables = gate_report_tables(gate_report(u, ideal, label))
    # the RWA drops counter-rotating terms of relative size B / (2 Bz)
    tables[0].rows.append(["drive/2Bz", p.by2R / (2 * min(abs(p.bzL), abs(p.bzR)))])
    return tables


RUNNERS = {
    "dqd-coeffs": run_dqd_coeffs,
    "dqd-fid": run_dqd_fidelity_scan,
    "chain-y": run_chain_ygate,
    "chain-simul": run_chain_simul_y,
    "swap": run_swap,
    "report": run_report,
}
