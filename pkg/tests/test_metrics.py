import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

from resex.evolution import u_chain_driven, u_chain_exchange, u_single_drive
from resex.experiments import swap_chain, swap_unitary
from resex.metrics import (
    BranchCutError,
    GateReport,
    dominant_terms,
    error_generator,
    error_matrix_coeffs,
    fidelity_identity_chain,
    fidelity_iy_bound,
    fidelity_swap,
    fidelity_upper_bound,
    fidelity_y_2d,
    fidelity_y_chain,
    first_order_noise_fidelity,
    gate_fidelity,
    gate_report,
    ptm,
    rescale_fidelity,
    swap_frequencies,
    trace_abs,
)
from resex.models import ChainParams, DqdParams, swap_target
from resex.operators import OperatorError, pauli_matrix, spin_op
from resex.units import GHz, MHz, kHz

IY = pauli_matrix("IY")


def haar_state_fidelity(u, v, samples, seed):
    """Average |<psi| V^dag U |psi>|^2 over Haar-random pure states."""
    rng = np.random.default_rng(seed)
    d = u.shape[0]
    psi = rng.normal(size=(samples, d)) + 1j * rng.normal(size=(samples, d))
    psi /= np.linalg.norm(psi, axis=1)[:, None]
    m = v.conj().T @ u
    amp = np.einsum("si,ij,sj->s", psi.conj(), m, psi)
    return float(np.mean(np.abs(amp) ** 2))


def test_gate_fidelity_identity_and_orthogonal():
    assert gate_fidelity(np.eye(4), np.eye(4)) == 1.0
    # traceless residual gives the floor 1 / (d + 1)
    assert gate_fidelity(pauli_matrix("ZZ"), np.eye(4)) == pytest.approx(0.2)


def test_gate_fidelity_matches_state_average():
    u = unitary_group.rvs(4, random_state=3)
    v = sla.expm(-0.3j * pauli_matrix("XY")) @ u
    est = haar_state_fidelity(u, v, 200_000, 0)
    assert gate_fidelity(u, v) == pytest.approx(est, abs=3e-3)


def test_gate_fidelity_rejects_bad_input():
    with pytest.raises(OperatorError, match="dimension"):
        gate_fidelity(np.eye(2), np.eye(4))
    with pytest.raises(OperatorError, match="unitary"):
        gate_fidelity(2 * np.eye(2), np.eye(2))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**31), st.floats(-math.pi, math.pi))
def test_fidelity_properties(n, seed, phase):
    d = 2**n
    u = unitary_group.rvs(d, random_state=seed)
    v = unitary_group.rvs(d, random_state=seed + 1)
    f = gate_fidelity(u, v)
    assert 1 / (d + 1) - 1e-12 <= f <= 1.0
    assert gate_fidelity(np.exp(1j * phase) * u, v) == pytest.approx(f, abs=1e-12)
    assert gate_fidelity(v, u) == pytest.approx(f, abs=1e-12)
    assert fidelity_upper_bound(u, v) >= f - 1e-12
    diag = np.diag(np.exp(1j * np.linspace(0, phase, d)))
    assert fidelity_upper_bound(diag @ u, v) == pytest.approx(fidelity_upper_bound(u, v), abs=1e-12)


def test_trace_abs():
    assert trace_abs(np.diag([1, -1j, 0.5])) == 2.5
    with pytest.raises(OperatorError):
        trace_abs(np.ones((2, 3)))


def test_rescale_round_trip():
    f = 0.97
    assert rescale_fidelity(rescale_fidelity(f, 8, 1024), 1024, 8) == pytest.approx(f)
    assert rescale_fidelity(1.0, 4, 64) == 1.0


def test_ptm_against_trace_formula():
    u = unitary_group.rvs(4, random_state=9)
    r = ptm(u)
    words = ["II", "IX", "XZ", "YY", "ZI"]
    idx = {"II": 0, "IX": 1, "XZ": 7, "YY": 10, "ZI": 12}
    for a in words:
        for b in words:
            want = np.trace(pauli_matrix(a) @ u @ pauli_matrix(b) @ u.conj().T).real / 4
            assert r[idx[a], idx[b]] == pytest.approx(want, abs=1e-12)
    assert np.allclose(r.T @ r, np.eye(16))


def test_ptm_of_pauli_is_signed_identity():
    r = ptm(pauli_matrix("X"))
    assert np.allclose(r, np.diag([1, 1, -1, -1]))


def test_error_generator_matches_scipy_logm():
    v = unitary_group.rvs(4, random_state=4)
    u = sla.expm(-0.2j * (pauli_matrix("IY") + 0.3 * pauli_matrix("ZZ"))) @ v
    ri, ra = ptm(v), ptm(u)
    gen = error_generator(ri, ra)
    assert np.allclose(gen, sla.logm(ri.T @ ra).real, atol=1e-10)
    assert np.allclose(sla.expm(gen), ri.T @ ra, atol=1e-10)
    assert np.allclose(gen, -gen.T, atol=1e-10)


def test_error_generator_zero_for_perfect_gate():
    r = ptm(unitary_group.rvs(4, random_state=1))
    assert np.max(np.abs(error_generator(r, r))) < 1e-12


def test_error_generator_branch_cut():
    with pytest.raises(BranchCutError):
        error_generator(ptm(np.eye(2)), ptm(pauli_matrix("X")))


def test_error_generator_rejects_non_orthogonal():
    with pytest.raises(ValueError, match="orthogonal"):
        error_generator(np.eye(4), 1.1 * np.eye(4))


def test_error_coeffs_and_dominant_terms():
    u = (np.eye(4) + 1j * pauli_matrix("ZX")) / math.sqrt(2)
    coeffs = error_matrix_coeffs(u, np.eye(4))
    assert dominant_terms(coeffs) == [("ZX", pytest.approx(1j / math.sqrt(2)))]
    assert dominant_terms(coeffs, skip_identity=False)[0][0] == "II"
    assert len(dominant_terms(coeffs, count=1, skip_identity=False)) == 1


def test_gate_report_fields():
    u = sla.expm(-0.1j * pauli_matrix("XI"))
    rep = gate_report(u, np.eye(4), "II")
    assert isinstance(rep, GateReport)
    assert rep.words[:3] == ["II", "IX", "IY"]
    assert rep.fidelity == pytest.approx(gate_fidelity(u, np.eye(4)))
    assert rep.errgen.shape == (16, 16)
    # rotation by 0.2 about XI couples P to XI.P whenever they anticommute
    xi = pauli_matrix("XI")
    for a, wa in enumerate(rep.words):
        for b, wb in enumerate(rep.words):
            pa, pb = pauli_matrix(wa), pauli_matrix(wb)
            linked = not np.allclose(pa @ xi, xi @ pa) and abs(np.trace(pb @ xi @ pa)) > 0
            assert abs(rep.errgen[a, b]) == pytest.approx(0.2 if linked else 0.0, abs=1e-12)


def test_iy_bound_is_maximum_over_time():
    b, j = 2 * MHz, 0.6 * MHz
    p = DqdParams(bzL=20 * GHz, bzR=20.2 * GHz, by2R=b, j=j)
    ts = np.linspace(0, 2 * 4 * math.pi / p.omega_2, 4001)
    best = max(fidelity_upper_bound(u_single_drive(p, t), IY) for t in ts)
    assert fidelity_iy_bound(b, j) == pytest.approx(best, rel=1e-6)
    assert first_order_noise_fidelity("IY", p) == pytest.approx(fidelity_iy_bound(b, j))
    with pytest.raises(ValueError):
        first_order_noise_fidelity("XX", p)


def test_y_chain_matches_propagator():
    b, j0 = 10 * MHz, 1 * MHz
    p = ChainParams(n=3, bz=(19.9e9, 20e9, 20.1e9), by1=(0, b, 0), jlist=(j0, j0))
    target = -1j * pauli_matrix("IYI")
    for t in (0.3e-6, 0.6e-6, 1.1e-6):
        assert fidelity_y_chain(p, 1, t) == pytest.approx(gate_fidelity(u_chain_driven(p, 1, t), target), abs=1e-12)
    ts = np.array([0.3e-6, 0.6e-6])
    assert fidelity_y_chain(p, 1, ts).shape == (2,)
    with pytest.raises(ValueError, match="interior"):
        fidelity_y_chain(p.with_(by1=(b, 0, 0)), 0, 0.6e-6)


def test_y_2d_matches_star_propagator():
    b, j0, t = 10 * MHz, 1 * MHz, 0.6e-6
    n = 5
    h = b / 2 * spin_op("Sy", 0, n)
    for i in range(1, n):
        h = h + j0 * (spin_op("Sz", 0, n) @ spin_op("Sz", i, n) - np.eye(2**n) / 4)
    u = sla.expm(-1j * h * t)
    want = gate_fidelity(u, -1j * pauli_matrix("YIIII"))
    assert fidelity_y_2d(b, j0, 32, t) == pytest.approx(want, abs=1e-12)


def test_identity_chain_matches_propagator():
    jl = (1.0, 0.4, 2.0)
    for t in (0.5, 3.0):
        assert fidelity_identity_chain(jl, t) == pytest.approx(gate_fidelity(u_chain_exchange(jl, t), np.eye(16)))


@pytest.mark.parametrize("j0", [0.0, 10 * MHz, 40 * MHz])
def test_swap_derived_matches_propagator(j0):
    p = swap_chain(4, 1, 1 * GHz, 200 * MHz, j0)
    for t in (math.pi / GHz, 0.7 * math.pi / GHz):
        want = gate_fidelity(swap_unitary(p, 1, t), swap_target(4, 1))
        assert fidelity_swap(p, 1, t) == pytest.approx(want, abs=1e-12)


def test_swap_frequencies_and_variants():
    om = swap_frequencies(1.0, 0.5, 0.1, 0.2)
    assert om[0] == pytest.approx(math.sqrt(4 + 1.3**2))
    assert swap_frequencies(1.0, 0.5, 0, 0, "printed")[0] == pytest.approx(math.sqrt(4.25))
    with pytest.raises(ValueError):
        fidelity_swap(swap_chain(4, 1, 1.0, 0.0, 0.0), 1, 1.0, variant="bogus")
