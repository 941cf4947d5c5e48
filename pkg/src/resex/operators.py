"""Dense operator and Pauli-word algebra.

Operators are plain complex ``numpy.ndarray`` objects of shape ``(d, d)`` with
``d = 2**n``.  Pauli words are read left to right: the leftmost letter acts on
qubit 0 and is the leftmost factor of the Kronecker product.  Basis states are
ordered ``|up up>, |up down>, |down up>, |down down>`` with ``S_z|up> = +1/2``.
"""

from dataclasses import dataclass
from functools import lru_cache, reduce
from itertools import product

import numpy as np

MAX_QUBITS = 10
PAULI_LETTERS = "IXYZ"

SIGMA = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_SPIN_2x2 = {
    "Sx": SIGMA["X"] / 2,
    "Sy": SIGMA["Y"] / 2,
    "Sz": SIGMA["Z"] / 2,
    "S+": np.array([[0, 1], [0, 0]], dtype=complex),
    "S-": np.array([[0, 0], [1, 0]], dtype=complex),
}

UNITARY_TOL = 1e-10
HERMITIAN_TOL = 1e-12
PHASE_TOL = 1e-8


class OperatorError(ValueError):
    """Raised for malformed operators (bad dimension, non-Hermitian, ...)."""


@dataclass(frozen=True)
class PauliString:
    word: str
    coeff: complex = 1.0

    def __post_init__(self):
        if not 1 <= len(self.word) <= MAX_QUBITS:
            raise OperatorError(
                f"Pauli word length must be in 1..{MAX_QUBITS}, got {len(self.word)}")
        bad = set(self.word) - set(PAULI_LETTERS)
        if bad:
            raise OperatorError(f"invalid Pauli letters {sorted(bad)} in {self.word!r}")

    @property
    def n(self):
        return len(self.word)

    def matrix(self):
        return pauli_matrix(self)


def num_qubits(dim):
    """Return n for a dimension d = 2**n, raising for anything else."""
    n = int(dim).bit_length() - 1
    if dim < 2 or 2**n != dim:
        raise OperatorError(f"dimension {dim} is not a power of 2")
    return n


@lru_cache(maxsize=4096)
def _word_matrix(word):
    mat = reduce(np.kron, (SIGMA[c] for c in PauliString(word).word))
    mat.flags.writeable = False
    return mat


def pauli_matrix(p):
    """Matrix of a Pauli word.  Accepts a :class:`PauliString` or a plain string.

    Plain strings return a cached read-only array.
    """
    if isinstance(p, str):
        return _word_matrix(p)
    return p.coeff * _word_matrix(p.word)


def embed(op2, site, n):
    """Place a 2x2 operator on ``site`` of an ``n``-qubit register."""
    if not 0 <= site < n:
        raise OperatorError(f"site {site} outside register of {n} qubits")
    factors = [np.eye(2, dtype=complex)] * n
    factors[site] = op2
    return reduce(np.kron, factors)


def spin_op(kind, site, n):
    """Spin operator (S = sigma/2) of the given kind on one site."""
    try:
        op2 = _SPIN_2x2[kind]
    except KeyError:
        raise OperatorError(f"unknown spin operator {kind!r}") from None
    return embed(op2, site, n)


def single_site_word(letters, n):
    """Build a word like ``"IZYZI"`` from a mapping {site: letter}."""
    chars = ["I"] * n
    for site, letter in letters.items():
        chars[site] = letter
    return "".join(chars)


def all_words(n):
    """All 4**n Pauli words in lexicographic I < X < Y < Z order."""
    return ["".join(w) for w in product(PAULI_LETTERS, repeat=n)]


def pauli_basis(n):
    """Stack of all Pauli matrices of n qubits, shape (4**n, 2**n, 2**n)."""
    return np.array([pauli_matrix(w) for w in all_words(n)])


# Row (r, c) -> letter transform: T[letter, 2r + c] = conj(sigma_letter[r, c]).
_PAULI_T = np.array([SIGMA[c].conj().reshape(4) for c in PAULI_LETTERS])


def pauli_decompose(m):
    """Normalized Pauli coefficients ``Tr[P_w^dagger M] / d`` for every word.

    Returns a list of ``(word, coeff)`` in lexicographic order; the matrix is
    recovered as ``sum(coeff * P_w)``.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise OperatorError(f"expected a square matrix, got shape {m.shape}")
    d = m.shape[0]
    n = num_qubits(d)
    if n > MAX_QUBITS:
        raise OperatorError(f"{n} qubits exceeds the supported maximum {MAX_QUBITS}")
    # interleave row/col bits per qubit, then contract each 4-dim axis with T
    t = m.reshape((2,) * (2 * n))
    t = t.transpose([ax for q in range(n) for ax in (q, n + q)]).reshape((4,) * n)
    for q in range(n):
        t = np.tensordot(_PAULI_T, t, axes=([1], [q]))
        t = np.moveaxis(t, 0, q)
    coeffs = t.reshape(-1) / d
    return list(zip(all_words(n), coeffs))


def pauli_reconstruct(terms):
    """Inverse of :func:`pauli_decompose`."""
    terms = list(terms)
    d = 2 ** len(terms[0][0])
    out = np.zeros((d, d), dtype=complex)
    for word, c in terms:
        if c != 0:
            out += c * pauli_matrix(word)
    return out


def _check_pair(a, b):
    if a.shape != b.shape:
        raise OperatorError(f"dimension mismatch: {a.shape} vs {b.shape}")


def compose(a, b):
    """Matrix product ``a @ b`` with a dimension check."""
    a = np.asarray(a)
    b = np.asarray(b)
    _check_pair(a, b)
    return a @ b


def dagger(a):
    return np.asarray(a).conj().T


def max_abs(a):
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


def hermiticity_error(h):
    h = np.asarray(h)
    return max_abs(h - h.conj().T)


def unitarity_error(u):
    u = np.asarray(u)
    return max_abs(u.conj().T @ u - np.eye(u.shape[0]))


def is_unitary(u, tol=UNITARY_TOL):
    return unitarity_error(u) <= tol


def expm_hermitian(h, t=1.0):
    """``exp(-i H t)`` for Hermitian ``H`` by eigendecomposition."""
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise OperatorError(f"expected a square matrix, got shape {h.shape}")
    if not np.isfinite(t):
        raise OperatorError(f"time must be finite, got {t}")
    asym = hermiticity_error(h)
    scale = max(1.0, max_abs(h))
    if asym > HERMITIAN_TOL * scale:
        raise OperatorError(f"matrix is not Hermitian: max |H - H^dag| = {asym:.3e}")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


class HermitianPropagator:
    """Cached eigendecomposition of a Hermitian H for repeated ``exp(-iHt)``."""

    def __init__(self, h):
        h = np.asarray(h, dtype=complex)
        asym = hermiticity_error(h)
        if asym > HERMITIAN_TOL * max(1.0, max_abs(h)):
            raise OperatorError(f"matrix is not Hermitian: max |H - H^dag| = {asym:.3e}")
        self.energies, self.vectors = np.linalg.eigh(h)

    def __call__(self, t):
        v = self.vectors
        return (v * np.exp(-1j * self.energies * t)) @ v.conj().T

    def trace_with(self, a, t):
        """``Tr[A exp(-iHt)]`` without forming the propagator."""
        return self.trace_fn(a)(t)

    def trace_fn(self, a):
        """Callable ``t -> Tr[A exp(-iHt)]`` (vectorized over t)."""
        v = self.vectors
        # Tr[A V e V^dag] = sum_k e_k (V^dag A V)_kk
        diag = np.sum(v.conj() * (np.asarray(a) @ v), axis=0)
        energies = self.energies

        def trace(t):
            t = np.asarray(t, dtype=float)
            return np.exp(-1j * np.multiply.outer(t, energies)) @ diag

        return trace


def global_phase(u, v):
    """Phase theta = arg Tr[V^dag U] aligning V onto U."""
    return float(np.angle(np.trace(dagger(v) @ u)))


def phase_distance(u, v):
    """``min_theta ||U - e^{i theta} V||_max`` at theta = arg Tr[V^dag U]."""
    u = np.asarray(u)
    v = np.asarray(v)
    _check_pair(u, v)
    theta = global_phase(u, v)
    return max_abs(u - np.exp(1j * theta) * v)


def phase_equivalent(u, v, tol=PHASE_TOL):
    return phase_distance(u, v) <= tol
