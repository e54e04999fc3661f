"""
Quantum-core module for spinchain-qst
What to learn here: Dense qubit-register primitives built on numpy: tensor
products, Pauli strings, partial traces, projective measurements and the
distance measures used to score a state transfer.

Convention used everywhere: sites are numbered 1..n and site 1 is the most
significant tensor factor, so |b_1 b_2 ... b_n> has index int("b_1...b_n", 2).
"""

import threading
from typing import Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from .config import Config
from .errors import InvalidStateError, MeasurementError, ResourceLimitError
from .utils import make_rng, setup_logging

logger = setup_logging()

# Single-site matrices
I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
T_GATE = np.diag([1.0, 1j]).astype(complex)

PAULI_MATRICES: Dict[str, np.ndarray] = {"I": I2, "X": X, "Y": Y, "Z": Z}

# letter product table: (a, b) -> (phase, letter) with a*b = phase*letter
_PAULI_PRODUCT: Dict[Tuple[str, str], Tuple[complex, str]] = {}
for _a in "IXYZ":
    _PAULI_PRODUCT[("I", _a)] = (1, _a)
    _PAULI_PRODUCT[(_a, "I")] = (1, _a)
    _PAULI_PRODUCT[(_a, _a)] = (1, "I")
for _a, _b, _c in (("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")):
    _PAULI_PRODUCT[(_a, _b)] = (1j, _c)
    _PAULI_PRODUCT[(_b, _a)] = (-1j, _c)

_PHASES = (1, -1, 1j, -1j)
_PHASE_TEXT = {1: "+", -1: "-", 1j: "+i", -1j: "-i"}

# Bumped whenever a nominal density matrix needed eigenvalue clipping
_CLIP_WARNINGS = 0
_CLIP_LOCK = threading.Lock()


def clip_warning_count() -> int:
    """Number of density matrices that were clipped to PSD so far"""
    return _CLIP_WARNINGS


def _clip_to_psd(mat: np.ndarray, evals: np.ndarray, evecs: np.ndarray) -> np.ndarray:
    """Zero the negative eigenvalues, renormalize, and count the event"""
    global _CLIP_WARNINGS
    with _CLIP_LOCK:
        _CLIP_WARNINGS += 1
    logger.warning(f"Clipping eigenvalues down to {evals.min():.3e} to restore positivity")
    evals = np.clip(evals, 0.0, None)
    evals = evals / evals.sum()
    return (evecs * evals) @ evecs.conj().T


def t_power(k: int) -> np.ndarray:
    """T^k with T = diag(1, e^{i pi/2}); exponent reduced mod 4"""
    return np.diag([1.0, 1j ** (k % 4)]).astype(complex)


def _n_qubits_for_dim(dim: int) -> int:
    n = int(round(np.log2(dim))) if dim > 0 else -1
    if n < 0 or 2 ** n != dim:
        raise InvalidStateError(f"Dimension {dim} is not a power of two")
    return n


def _check_qubit_limit(n_qubits: int):
    if n_qubits > Config.DENSE_MAX_QUBITS:
        raise ResourceLimitError(
            f"{n_qubits} qubits exceed the dense limit of {Config.DENSE_MAX_QUBITS}"
        )


class StateVector:
    """
    Pure n-qubit state.

    The amplitude array is copied and frozen on construction, so instances
    can be shared freely between threads.
    """

    def __init__(self, amplitudes: Sequence[complex], n_qubits: Optional[int] = None):
        amps = np.array(amplitudes, dtype=complex).reshape(-1)
        n = _n_qubits_for_dim(amps.size)
        if n_qubits is not None and n_qubits != n:
            raise InvalidStateError(f"Expected {2 ** n_qubits} amplitudes, got {amps.size}")
        if n < 1:
            raise InvalidStateError("A register needs at least one qubit")
        _check_qubit_limit(n)
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > Config.STRUCT_TOL:
            raise InvalidStateError(f"State is not normalized (squared norm {norm})")
        amps.setflags(write=False)
        self.n_qubits = n
        self.amplitudes = amps

    @classmethod
    def normalized(cls, amplitudes: Sequence[complex]) -> "StateVector":
        """Build a state from an unnormalized amplitude vector"""
        amps = np.array(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise InvalidStateError("Cannot normalize the zero vector")
        return cls(amps / norm)

    def to_density(self) -> "DensityMatrix":
        # rank one and Hermitian as built
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), validate=False)

    def __repr__(self) -> str:
        return f"StateVector(n_qubits={self.n_qubits})"


class DensityMatrix:
    """
    Mixed n-qubit state.

    Construction checks Hermiticity and unit trace within Config.STRUCT_TOL.
    Eigenvalues in [-Config.PSD_TOL, 0) are clipped to zero and the matrix is
    renormalized (counted by clip_warning_count()); anything more negative is
    rejected.
    """

    def __init__(self, matrix: np.ndarray, validate: bool = True):
        mat = np.array(matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise InvalidStateError(f"Density matrix must be square, got shape {mat.shape}")
        n = _n_qubits_for_dim(mat.shape[0])
        if n < 1:
            raise InvalidStateError("A register needs at least one qubit")
        _check_qubit_limit(n)
        if validate:
            mat = self._validated(mat)
        mat.setflags(write=False)
        self.n_qubits = n
        self.matrix = mat

    @classmethod
    def _trusted(cls, matrix: np.ndarray) -> "DensityMatrix":
        """
        Wrap a matrix produced by a trace/positivity preserving map (evolution,
        partial trace, thermal weights, measurement). Rounding below
        Config.ALGEBRA_TOL is left alone; larger negative eigenvalues go through
        the same clip-and-count path as user input, and anything below
        -Config.PSD_TOL is rejected.
        """
        mat = np.array(matrix, dtype=complex)
        mat = 0.5 * (mat + mat.conj().T)
        lowest = np.linalg.eigvalsh(mat).min()
        if lowest < -Config.PSD_TOL:
            raise InvalidStateError(f"Map output is not positive semidefinite (min eigenvalue {lowest:.3e})")
        if lowest < -Config.ALGEBRA_TOL:
            evals, evecs = np.linalg.eigh(mat)
            mat = _clip_to_psd(mat, evals, evecs)
        return cls(mat, validate=False)

    @staticmethod
    def _validated(mat: np.ndarray) -> np.ndarray:
        herm_dev = float(np.max(np.abs(mat - mat.conj().T)))
        if herm_dev > Config.STRUCT_TOL:
            raise InvalidStateError(f"Matrix is not Hermitian (deviation {herm_dev:.3e})")
        trace = complex(np.trace(mat))
        if abs(trace - 1.0) > Config.STRUCT_TOL:
            raise InvalidStateError(f"Trace is {trace}, expected 1")
        mat = 0.5 * (mat + mat.conj().T)
        evals, evecs = np.linalg.eigh(mat)
        if evals.min() < -Config.PSD_TOL:
            raise InvalidStateError(f"Matrix is not positive semidefinite (min eigenvalue {evals.min():.3e})")
        if evals.min() < 0:
            mat = _clip_to_psd(mat, evals, evecs)
        return mat

    @classmethod
    def maximally_mixed(cls, n_qubits: int) -> "DensityMatrix":
        _check_qubit_limit(n_qubits)
        dim = 2 ** n_qubits
        return cls(np.eye(dim, dtype=complex) / dim, validate=False)

    def __repr__(self) -> str:
        return f"DensityMatrix(n_qubits={self.n_qubits})"


class SingleQubitState(DensityMatrix):
    """A 2x2 density matrix (input state, spin-N state, protocol output)"""

    def __init__(self, matrix: np.ndarray, validate: bool = True):
        super().__init__(matrix, validate=validate)
        if self.n_qubits != 1:
            raise InvalidStateError("SingleQubitState requires a 2x2 matrix")

    @classmethod
    def from_state(cls, state: Union["StateVector", "DensityMatrix"]) -> "SingleQubitState":
        if isinstance(state, StateVector):
            return cls(np.outer(state.amplitudes, state.amplitudes.conj()))
        return cls(state.matrix, validate=False)

    def bloch_vector(self) -> np.ndarray:
        return np.array([float(np.trace(self.matrix @ P).real) for P in (X, Y, Z)])


AnyState = Union[StateVector, DensityMatrix]


class PauliString:
    """
    Phased tensor product of single-site Pauli letters.

    Letters are stored left to right for sites 1..n; phase is one of
    +1, -1, +i, -i.
    """

    def __init__(self, letters: Union[str, Sequence[str]], phase: complex = 1):
        letters = tuple(letters)
        if not letters or any(l not in PAULI_MATRICES for l in letters):
            raise InvalidStateError(f"Invalid Pauli letters: {letters}")
        phase = complex(phase)
        match = [p for p in _PHASES if abs(phase - p) < 1e-12]
        if not match:
            raise InvalidStateError(f"Pauli phase must be one of ±1, ±i, got {phase}")
        self.letters = letters
        self.phase = match[0]

    @classmethod
    def parse(cls, text: str) -> "PauliString":
        """Parse strings like 'XIZ', '-ZY', '+iXX'"""
        text = text.strip()
        phase: complex = 1
        for prefix, value in (("+i", 1j), ("-i", -1j), ("+", 1), ("-", -1)):
            if text.startswith(prefix):
                phase, text = value, text[len(prefix):]
                break
        return cls(text, phase)

    @classmethod
    def embed(cls, n_sites: int, factors: Dict[int, str], phase: complex = 1) -> "PauliString":
        """Identity everywhere except the given 1-based sites"""
        letters = ["I"] * n_sites
        for site, letter in factors.items():
            if not 1 <= site <= n_sites:
                raise InvalidStateError(f"Site {site} outside 1..{n_sites}")
            letters[site - 1] = letter
        return cls(letters, phase)

    @property
    def n_sites(self) -> int:
        return len(self.letters)

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n_sites != other.n_sites:
            raise InvalidStateError("Pauli strings act on different registers")
        phase = self.phase * other.phase
        letters = []
        for a, b in zip(self.letters, other.letters):
            p, c = _PAULI_PRODUCT[(a, b)]
            phase *= p
            letters.append(c)
        return PauliString(letters, phase)

    def __eq__(self, other) -> bool:
        return isinstance(other, PauliString) and self.letters == other.letters and self.phase == other.phase

    def __hash__(self) -> int:
        return hash((self.letters, self.phase))

    def __str__(self) -> str:
        return _PHASE_TEXT[self.phase] + "".join(self.letters)

    def __repr__(self) -> str:
        return f"PauliString('{self}')"


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product of two square operators, `a` on the more significant factor"""
    a = np.asarray(a)
    b = np.asarray(b)
    for m in (a, b):
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidStateError(f"kron expects square operators, got shape {m.shape}")
    dim = a.shape[0] * b.shape[0]
    if dim > 2 ** Config.DENSE_MAX_QUBITS:
        raise ResourceLimitError(
            f"Operator dimension {dim} exceeds the dense limit of {Config.DENSE_MAX_QUBITS} qubits"
        )
    return np.kron(a, b)


def kron_all(factors: Iterable[np.ndarray]) -> np.ndarray:
    result = np.ones((1, 1), dtype=complex)
    for factor in factors:
        result = kron(result, factor)
    return result


def pauli_to_matrix(p: PauliString) -> np.ndarray:
    """phase x (P_1 ⊗ P_2 ⊗ ... ⊗ P_n), site 1 leftmost"""
    _check_qubit_limit(p.n_sites)
    return p.phase * kron_all(PAULI_MATRICES[l] for l in p.letters)


def embed_operator(op: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    """Single-site operator acting on `site` of an n-site register"""
    if not 1 <= site <= n_sites:
        raise InvalidStateError(f"Site {site} outside 1..{n_sites}")
    return kron_all(op if k == site else I2 for k in range(1, n_sites + 1))


def ket(labels: str) -> StateVector:
    """Product state from per-site labels in {'0', '1', '+', '-'}"""
    single = {
        "0": np.array([1, 0], dtype=complex),
        "1": np.array([0, 1], dtype=complex),
        "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
        "-": np.array([1, -1], dtype=complex) / np.sqrt(2),
    }
    vec = np.ones(1, dtype=complex)
    for label in labels:
        if label not in single:
            raise InvalidStateError(f"Unknown site label '{label}'")
        vec = np.kron(vec, single[label])
    return StateVector(vec)


def bloch_state(theta: float, phi: float = 0.0) -> StateVector:
    """cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>"""
    return StateVector([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def as_density(state: AnyState) -> DensityMatrix:
    return state.to_density() if isinstance(state, StateVector) else state


def tensor(*states: AnyState) -> AnyState:
    """Tensor product of states; stays pure when every factor is pure"""
    if all(isinstance(s, StateVector) for s in states):
        vec = np.ones(1, dtype=complex)
        for s in states:
            vec = np.kron(vec, s.amplitudes)
        _check_qubit_limit(_n_qubits_for_dim(vec.size))
        return StateVector(vec)
    mat = kron_all(as_density(s).matrix for s in states)
    return DensityMatrix._trusted(mat)


def apply_local(state: AnyState, site: int, gate: np.ndarray) -> AnyState:
    """Apply a single-site unitary to one site of a state"""
    n = state.n_qubits
    if not 1 <= site <= n:
        raise InvalidStateError(f"Site {site} outside 1..{n}")
    left, right = 2 ** (site - 1), 2 ** (n - site)
    if isinstance(state, StateVector):
        psi = state.amplitudes.reshape(left, 2, right)
        return StateVector(np.einsum("ij,ajb->aib", gate, psi).reshape(-1))
    rho = state.matrix.reshape(left, 2, right, left, 2, right)
    rho = np.einsum("ij,ajbckd,lk->aibcld", gate, rho, gate.conj())
    return DensityMatrix._trusted(rho.reshape(2 ** n, 2 ** n))


def partial_trace(rho: AnyState, keep: Iterable[int]) -> DensityMatrix:
    """
    Reduced density matrix on the 1-based sites in `keep` (returned in
    increasing site order).
    """
    keep = sorted(set(keep))
    n = rho.n_qubits
    if not keep:
        raise InvalidStateError("partial_trace needs at least one site to keep")
    if keep[0] < 1 or keep[-1] > n:
        raise InvalidStateError(f"Sites {keep} outside 1..{n}")
    if isinstance(rho, StateVector):
        traced = [k for k in range(1, n + 1) if k not in keep]
        psi = rho.amplitudes.reshape([2] * n)
        psi = np.transpose(psi, [k - 1 for k in keep] + [k - 1 for k in traced])
        psi = psi.reshape(2 ** len(keep), -1)
        return DensityMatrix._trusted(psi @ psi.conj().T)

    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    rows = list(letters[:n])
    cols = list(letters[n:2 * n])
    for k in range(1, n + 1):
        if k not in keep:
            cols[k - 1] = rows[k - 1]
    out = "".join(rows[k - 1] for k in keep) + "".join(cols[k - 1] for k in keep)
    tensor_rho = rho.matrix.reshape([2] * (2 * n))
    reduced = np.einsum(f"{''.join(rows)}{''.join(cols)}->{out}", tensor_rho)
    dim = 2 ** len(keep)
    return DensityMatrix._trusted(reduced.reshape(dim, dim))


class MeasurementResult:
    """Outcome (+1/-1), renormalized post-measurement state and Born probability"""

    def __init__(self, outcome: int, post_state: AnyState, probability: float):
        self.outcome = outcome
        self.post_state = post_state
        self.probability = probability

    def __iter__(self):
        return iter((self.outcome, self.post_state, self.probability))


def measurement_basis(basis: Union[str, Tuple[Sequence[complex], Sequence[complex]]]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Resolve a basis spec into (vector for outcome +1, vector for outcome -1).
    'Z' -> (|0>, |1>), 'X' -> (|+>, |->), or a custom orthonormal pair.
    """
    if isinstance(basis, str):
        if basis.upper() == "Z":
            return np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)
        if basis.upper() == "X":
            s = 1 / np.sqrt(2)
            return np.array([s, s], dtype=complex), np.array([s, -s], dtype=complex)
        raise InvalidStateError(f"Unknown basis '{basis}'")
    plus = np.asarray(basis[0], dtype=complex).reshape(2)
    minus = np.asarray(basis[1], dtype=complex).reshape(2)
    gram = np.array([[np.vdot(u, v) for v in (plus, minus)] for u in (plus, minus)])
    if np.max(np.abs(gram - np.eye(2))) > Config.STRUCT_TOL:
        raise InvalidStateError("Custom measurement basis is not orthonormal")
    return plus, minus


def _project(state: AnyState, site: int, vec: np.ndarray) -> Tuple[float, Optional[np.ndarray]]:
    """Unnormalized projection of `site` onto |vec>; returns (probability, projected array)"""
    n = state.n_qubits
    left, right = 2 ** (site - 1), 2 ** (n - site)
    if isinstance(state, StateVector):
        psi = state.amplitudes.reshape(left, 2, right)
        amp = np.einsum("aib,i->ab", psi, vec.conj())
        prob = float(np.vdot(amp, amp).real)
        return prob, np.einsum("ab,i->aib", amp, vec).reshape(-1)
    rho = state.matrix.reshape(left, 2, right, left, 2, right)
    block = np.einsum("aibcjd,i,j->abcd", rho, vec.conj(), vec)
    prob = float(np.einsum("abab->", block).real)
    projected = np.einsum("abcd,i,j->aibcjd", block, vec, vec.conj())
    return prob, projected.reshape(2 ** n, 2 ** n)


def projective_measure(
    state: AnyState,
    site: int,
    basis: Union[str, Tuple[Sequence[complex], Sequence[complex]]] = "Z",
    force: Optional[int] = None,
    seed: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> MeasurementResult:
    """
    Projective measurement of one site.

    With `force` set to +1/-1 the outcome is postselected (an error if its
    probability is below 1e-12); otherwise it is sampled from the Born rule
    with `rng` (or a generator seeded with `seed`).
    """
    if not 1 <= site <= state.n_qubits:
        raise InvalidStateError(f"Site {site} outside 1..{state.n_qubits}")
    plus, minus = measurement_basis(basis)
    p_plus, proj_plus = _project(state, site, plus)

    if force is not None:
        if force not in (1, -1):
            raise InvalidStateError(f"Forced outcome must be +1 or -1, got {force}")
        outcome = force
    else:
        rng = rng if rng is not None else make_rng(seed)
        outcome = 1 if rng.random() < p_plus else -1

    if outcome == 1:
        prob, projected = p_plus, proj_plus
    else:
        prob, projected = _project(state, site, minus)

    if prob < Config.ZERO_PROBABILITY:
        raise MeasurementError(f"Outcome {outcome:+d} on site {site} has probability {prob:.3e}")

    if isinstance(state, StateVector):
        post: AnyState = StateVector(projected / np.sqrt(prob))
    else:
        post = DensityMatrix._trusted(projected / prob)
    return MeasurementResult(outcome, post, prob)


def random_pure_state(n_qubits: int, seed: Optional[int] = None) -> StateVector:
    """Haar-random pure state from a normalized complex Gaussian vector"""
    _check_qubit_limit(n_qubits)
    rng = make_rng(seed)
    dim = 2 ** n_qubits
    vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return StateVector.normalized(vec)


def random_mixed_state(n_qubits: int, rank: int = 2, seed: Optional[int] = None) -> DensityMatrix:
    """Random state of rank <= `rank`: partial trace of a random purification"""
    if rank < 1:
        raise InvalidStateError("rank must be at least 1")
    _check_qubit_limit(n_qubits)
    rng = make_rng(seed)
    dim = 2 ** n_qubits
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return DensityMatrix(rho / np.trace(rho).real)


def thermal_state(hamiltonian: np.ndarray, beta: float) -> DensityMatrix:
    """exp(-beta H) / Z; beta = 0 gives the maximally mixed state exactly"""
    if beta < 0:
        raise InvalidStateError("beta must be non-negative")
    dim = hamiltonian.shape[0]
    n = _n_qubits_for_dim(dim)
    if beta == 0:
        return DensityMatrix.maximally_mixed(n)
    energies, vecs = np.linalg.eigh(hamiltonian)
    weights = np.exp(-beta * (energies - energies.min()))
    weights = weights / weights.sum()
    return DensityMatrix._trusted((vecs * weights) @ vecs.conj().T)


def _psd_sqrt(mat: np.ndarray) -> np.ndarray:
    evals, evecs = np.linalg.eigh(0.5 * (mat + mat.conj().T))
    return (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.conj().T


def _check_psd(mat: np.ndarray):
    lowest = np.linalg.eigvalsh(0.5 * (mat + mat.conj().T)).min()
    if lowest < -Config.PSD_TOL:
        raise InvalidStateError(f"Input is not positive semidefinite (min eigenvalue {lowest:.3e})")


def state_fidelity(a: AnyState, b: AnyState) -> float:
    """
    Fidelity between two states.

    If `b` is pure (a StateVector or a rank-one density matrix) this is
    <psi|a|psi>; otherwise the Uhlmann form (Tr sqrt(sqrt(a) b sqrt(a)))^2.
    """
    if isinstance(b, StateVector) and isinstance(a, StateVector):
        return float(min(1.0, abs(np.vdot(b.amplitudes, a.amplitudes)) ** 2))
    if isinstance(a, StateVector):
        a, b = b, a
    rho_a = as_density(a).matrix
    _check_psd(rho_a)
    if isinstance(b, StateVector):
        psi = b.amplitudes
        return float(np.clip(np.vdot(psi, rho_a @ psi).real, 0.0, 1.0))
    rho_b = b.matrix
    _check_psd(rho_b)
    evals, evecs = np.linalg.eigh(rho_b)
    if evals[-1] > 1 - Config.STRUCT_TOL:
        psi = evecs[:, -1]
        return float(np.clip(np.vdot(psi, rho_a @ psi).real, 0.0, 1.0))
    sqrt_a = _psd_sqrt(rho_a)
    inner = _psd_sqrt(sqrt_a @ rho_b @ sqrt_a)
    return float(np.clip(np.trace(inner).real ** 2, 0.0, 1.0))


def entropy(rho: AnyState) -> float:
    """von Neumann entropy in bits"""
    mat = as_density(rho).matrix
    evals = np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))
    if evals.min() < -Config.PSD_TOL:
        raise InvalidStateError(f"Input is not positive semidefinite (min eigenvalue {evals.min():.3e})")
    evals = evals[evals > 1e-14]
    return float(max(0.0, -np.sum(evals * np.log2(evals))))


def trace_distance(a: AnyState, b: AnyState) -> float:
    diff = as_density(a).matrix - as_density(b).matrix
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))


def purity(rho: AnyState) -> float:
    mat = as_density(rho).matrix
    return float(np.trace(mat @ mat).real)


def expectation(state: AnyState, operator: np.ndarray) -> float:
    """Real part of <O> for Hermitian observables"""
    if isinstance(state, StateVector):
        return float(np.vdot(state.amplitudes, operator @ state.amplitudes).real)
    return float(np.trace(state.matrix @ operator).real)
