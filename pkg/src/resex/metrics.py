"""Gate-quality scores and closed-form fidelity expressions.

PTMs use the normalized Pauli basis ``P / sqrt(d)`` so a unitary channel has
an orthogonal PTM; rows and columns follow lexicographic word order
(``II, IX, IY, IZ, XI, ...``).
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .operators import (
    OperatorError,
    all_words,
    dagger,
    num_qubits,
    pauli_decompose,
    pauli_matrix,
    unitarity_error,
)

UNITARY_INPUT_TOL = 1e-8
ORTHOGONAL_TOL = 1e-6
BRANCH_TOL = 1e-9


class BranchCutError(ArithmeticError):
    """The PTM ratio has an eigenvalue at -1, so the principal log is ambiguous."""


def _check_gate_pair(u_actual, u_ideal):
    u_actual = np.asarray(u_actual, dtype=complex)
    u_ideal = np.asarray(u_ideal, dtype=complex)
    if u_actual.shape != u_ideal.shape or u_actual.ndim != 2:
        raise OperatorError(f"dimension mismatch: {u_actual.shape} vs {u_ideal.shape}")
    for name, u in (("actual", u_actual), ("ideal", u_ideal)):
        err = unitarity_error(u)
        if err > UNITARY_INPUT_TOL:
            raise OperatorError(f"{name} gate is not unitary (max |U^dag U - I| = {err:.3e})")
    return u_actual, u_ideal


def fidelity_from_overlap(overlap_abs, d):
    """(d + |Tr|^2) / (d (d + 1)), clipped at 1 against rounding."""
    return np.minimum((d + overlap_abs**2) / (d * (d + 1)), 1.0)


def gate_fidelity(u_actual, u_ideal):
    """Average gate fidelity of two unitaries; invariant under global phases."""
    u_actual, u_ideal = _check_gate_pair(u_actual, u_ideal)
    d = u_actual.shape[0]
    overlap = np.vdot(u_ideal, u_actual)  # Tr[U_ideal^dag U_actual]
    return float(fidelity_from_overlap(abs(overlap), d))


def trace_abs(m):
    """Sum of |M_kk|; unchanged by left-multiplying with a diagonal unitary."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise OperatorError(f"expected a square matrix, got shape {m.shape}")
    return float(np.sum(np.abs(np.diagonal(m))))


def fidelity_upper_bound(u_actual, u_ideal):
    """Fidelity bound that absorbs any diagonal (virtual-Z) correction."""
    u_actual, u_ideal = _check_gate_pair(u_actual, u_ideal)
    d = u_actual.shape[0]
    return float(fidelity_from_overlap(trace_abs(u_actual @ dagger(u_ideal)), d))


def rescale_fidelity(f, d_from, d_to):
    """Re-express a fidelity (1 + d x)/(d + 1) at another dimension, keeping x."""
    x = (f * (d_from + 1) - 1) / d_from
    return (1 + d_to * x) / (d_to + 1)


def ptm(u):
    """Pauli transfer matrix R[j, i] = Tr[P_j U P_i U^dag] / d."""
    u = np.asarray(u, dtype=complex)
    n = num_qubits(u.shape[0])
    words = all_words(n)
    ud = dagger(u)
    out = np.empty((len(words), len(words)))
    for i, w in enumerate(words):
        column = pauli_decompose(u @ pauli_matrix(w) @ ud)
        out[:, i] = np.real([c for _, c in column])
    return out


def error_generator(ptm_ideal, ptm_actual):
    """Principal log of ``ptm_ideal^-1 @ ptm_actual``, returned real."""
    ptm_ideal = np.asarray(ptm_ideal, dtype=float)
    ptm_actual = np.asarray(ptm_actual, dtype=float)
    eye = np.eye(ptm_ideal.shape[0])
    for name, r in (("ideal", ptm_ideal), ("actual", ptm_actual)):
        dev = np.max(np.abs(r.T @ r - eye))
        if dev > ORTHOGONAL_TOL:
            raise ValueError(f"{name} PTM is not orthogonal (deviation {dev:.3e})")
    ratio = ptm_ideal.T @ ptm_actual
    # orthogonal => normal, so the complex Schur form is diagonal
    t, z = la.schur(ratio.astype(complex), output="complex")
    lam = np.diag(t)
    if np.any(np.abs(lam + 1) < BRANCH_TOL):
        raise BranchCutError("PTM ratio has an eigenvalue at -1; principal log undefined")
    log_lam = np.log(np.abs(lam)) + 1j * np.angle(lam)
    gen = (z * log_lam) @ z.conj().T
    if np.max(np.abs(gen.imag)) > 1e-8:
        raise ValueError(f"error generator not real (max imag {np.max(np.abs(gen.imag)):.3e})")
    return gen.real


def error_matrix_coeffs(u_actual, u_ideal):
    """Pauli coefficients of the residual ``U_actual @ U_ideal^dag``."""
    u_actual, u_ideal = _check_gate_pair(u_actual, u_ideal)
    return pauli_decompose(u_actual @ dagger(u_ideal))


def dominant_terms(coeffs, count=None, tol=1e-12, skip_identity=True):
    """Coefficients sorted by magnitude, optionally dropping the identity word."""
    out = [(w, c) for w, c in coeffs
           if abs(c) > tol and not (skip_identity and set(w) == {"I"})]
    out.sort(key=lambda wc: (-abs(wc[1]), wc[0]))
    return out[:count] if count else out


@dataclass
class GateReport:
    target_name: str
    fidelity: float
    bound: float
    ptm: np.ndarray
    ptm_ideal: np.ndarray
    errgen: np.ndarray
    err_coeffs: list = field(default_factory=list)

    @property
    def words(self):
        return all_words(num_qubits(int(math.isqrt(self.ptm.shape[0]))))


def gate_report(u_actual, u_ideal, target_name="gate"):
    u_actual, u_ideal = _check_gate_pair(u_actual, u_ideal)
    r_ideal = ptm(u_ideal)
    r_actual = ptm(u_actual)
    return GateReport(
        target_name=target_name,
        fidelity=gate_fidelity(u_actual, u_ideal),
        bound=fidelity_upper_bound(u_actual, u_ideal),
        ptm=r_actual,
        ptm_ideal=r_ideal,
        errgen=error_generator(r_ideal, r_actual),
        err_coeffs=error_matrix_coeffs(u_actual, u_ideal),
    )


# ---------------------------------------------------------------------------
# closed forms


def fidelity_iy_bound(b, j):
    """Best single-drive IY fidelity (1 + 4 (B/Omega_2)^2) / 5."""
    om2 = math.hypot(b, j)
    return (1 + 4 * (b / om2) ** 2) / 5


def fidelity_iy_bound_two_drive(p):
    """Maximum of the diagonal-invariant bound for an IY target with two drives."""
    s = abs(p.dby) / p.omega_y_minus + abs(p.ey) / p.omega_y_plus
    return 0.2 + 0.2 * s**2


def trace_abs_two_drive_iy(p, t):
    """Closed form of trace_abs(U(t) IY) for the two-drive evolution."""
    om_p, om_m = p.omega_y_plus, p.omega_y_minus
    return 2 * abs(p.dby / om_m * math.sin(om_m * t / 4) + p.ey / om_p * math.sin(om_p * t / 4))


def fidelity_y_chain(p, k, t, d=None):
    """Y-gate fidelity on chain site k assuming the other bonds idle to identity.

    Needs an interior site: at an end of the chain the two neighbour
    states pick up different conditional phases, which this form drops.
    """
    if not 0 < k < p.n - 1:
        raise ValueError(f"site {k} is not interior to the {p.n}-site chain")
    d = p.dim if d is None else d
    b = p.by1[k]
    om_p, om_m = p.omega_plus(k), p.omega_minus(k)
    amp = _sin_ratio(b, om_p, t) + _sin_ratio(b, om_m, t)
    return (1 + d / 4 * amp**2) / (d + 1)


def _sin_ratio(b, om, t):
    # b/om sin(om t/4), with the om -> 0 limit b t / 4
    return b * t / 4 if om == 0 else b / om * np.sin(om * t / 4)


def fidelity_y_2d(by, j0, d, t):
    """Y-gate fidelity for a site with four equally coupled neighbours."""
    om4 = math.hypot(by, 2 * j0)
    om4t = math.hypot(by, 4 * j0)
    s = 3 * np.sin(by * t / 4) + 4 * _sin_ratio(by, om4, t) + _sin_ratio(by, om4t, t)
    return (1 + d / 2**6 * s**2) / (d + 1)


def fidelity_identity_chain(jlist, t, d=None):
    """Idle fidelity of the undriven chain, product of per-bond factors."""
    d = 2 ** (len(jlist) + 1) if d is None else d
    prod = 1.0 + 0j
    for jv in jlist:
        prod *= 0.5 * (np.exp(0.5j * jv * t) + 1)
    return float((1 + d * abs(prod) ** 2) / (d + 1))


SWAP_VARIANTS = ("derived", "printed", "printed-t4", "derived-t1")


def swap_frequencies(j, dbz, ja, jb, variant="derived"):
    """The four Omega_mu of the SWAP fidelity formula.

    ``derived`` uses sqrt(4 J^2 + (2 dBz +- Ja +- Jb)^2), which is what the
    averaged-frame Hamiltonian produces; ``printed`` uses dBz in place of
    2 dBz.
    """
    grad = 2 * dbz if variant.startswith("derived") else dbz
    return np.array([math.sqrt(4 * j**2 + (grad + sa * ja + sb * jb) ** 2)
                     for sa in (1, -1) for sb in (1, -1)])


def fidelity_swap(p, k, t, variant="derived", d=None):
    """SWAP fidelity on the pair (k, k+1) with residual flanking exchange.

    ``variant`` selects the form of the closed expression (see
    :data:`SWAP_VARIANTS`); ``derived`` agrees with the numerical propagator.
    """
    if variant not in SWAP_VARIANTS:
        raise ValueError(f"unknown SWAP formula variant {variant!r}")
    d = p.dim if d is None else d
    j = p.jlist[k]
    ja = p.bond(k - 1, k)
    jb = p.bond(k + 1, k + 2)
    dbz = p.bz[k + 1] - p.bz[k]
    om = swap_frequencies(j, dbz, ja, jb, variant)
    t = np.asarray(t, dtype=float)
    ca = np.cos(ja * t / 4)
    cb = np.cos(jb * t / 4)

    def ssum(scale):
        return sum(np.sin(o * t * scale) / o if o else t * scale for o in om)

    s4 = ssum(0.25)
    s_third = s4 if variant in ("derived", "printed-t4") else ssum(1.0)
    inner = 4 * ca**2 * cb**2 + j**2 * s4**2 + 4 * j * ca * cb * np.sin(j * t / 2) * s_third
    return 1 / (d + 1) + d / (2**4 * (d + 1)) * inner


def first_order_noise_fidelity(gate, p):
    """First-order fidelities of the IY, ZX and YY constructions (d = 4)."""
    b, j = p.by2R, p.j
    if gate == "IY":
        x = b / math.hypot(b, j)
    elif gate == "ZX":
        x = 2 * b * j / (b**2 + j**2)
    elif gate == "YY":
        x = j / math.hypot(p.ey, j) - j / math.hypot(p.dby, j)
    else:
        raise ValueError(f"unknown gate label {gate!r}; expected IY, ZX or YY")
    return 0.2 + 0.8 * abs(x) ** 2
