"""
Quantum Generators for the Bananaworld Correlation Analyzer
Dense complex linear algebra for the quantum reference values: Bell-state
correlations up to the Tsirelson bound, the Klyachko pentagram and the PBR basis
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .constants import (ALGEBRAIC_TOLERANCE, BORN_TOLERANCE, CHSH_VARIANT_COUNT, DEFAULT_GRID_STEPS,
                        KLYACHKO_BANANA_VALUE, KLYACHKO_CLASSICAL_BOUND, PENTAGRAM_STEP_ANGLE)
from .correlation_core import FLOAT, CorrelationArray, chsh_coefficients
from .errors import QuantumStateError, SamplingError
from .serialization import complex_from_json, complex_to_json

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2)


# --- states -------------------------------------------------------------------------

class StateVector:
    """Normalized pure state in dimension 2, 3 or 4"""

    __slots__ = ("_amplitudes",)

    def __init__(self, amplitudes: Sequence[complex], tolerance: float = ALGEBRAIC_TOLERANCE):
        vec = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if vec.shape[0] not in (2, 3, 4):
            raise QuantumStateError(f"state dimension must be 2, 3 or 4, got {vec.shape[0]}")
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > tolerance:
            raise QuantumStateError(f"state is not normalized (norm {norm:.15g})")
        vec.setflags(write=False)
        self._amplitudes = vec

    @classmethod
    def normalized(cls, amplitudes: Sequence[complex]) -> "StateVector":
        vec = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise QuantumStateError("cannot normalize the zero vector")
        return cls(vec / norm)

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amplitudes

    @property
    def dimension(self) -> int:
        return int(self._amplitudes.shape[0])

    def inner(self, other: "StateVector") -> complex:
        """<self|other>"""
        return inner(self, other)

    def to_dict(self) -> dict:
        return {"dimension": self.dimension,
                "amplitudes": [complex_to_json(z) for z in self._amplitudes]}

    @classmethod
    def from_dict(cls, payload: dict) -> "StateVector":
        try:
            return cls([complex_from_json(z) for z in payload["amplitudes"]])
        except (KeyError, TypeError) as e:
            raise QuantumStateError(f"malformed state payload: {e}") from e

    def __repr__(self) -> str:
        return f"StateVector({np.array2string(self._amplitudes, precision=6)})"


def inner(bra: StateVector, ket: StateVector) -> complex:
    if bra.dimension != ket.dimension:
        raise QuantumStateError(f"dimension mismatch: {bra.dimension} vs {ket.dimension}")
    return complex(np.vdot(bra.amplitudes, ket.amplitudes))


def tensor(*states: StateVector) -> StateVector:
    """Kronecker product, first factor most significant"""
    if not states:
        raise QuantumStateError("tensor needs at least one factor")
    vec = states[0].amplitudes
    for state in states[1:]:
        vec = np.kron(vec, state.amplitudes)
    return StateVector(vec)


_QUBIT_LABELS = {
    "0": (1.0, 0.0),
    "1": (0.0, 1.0),
    "+": (1 / SQRT2, 1 / SQRT2),
    "-": (1 / SQRT2, -1 / SQRT2),
}


def qubit_state(label: str) -> StateVector:
    """|0>, |1>, |+> or |->"""
    try:
        return StateVector(_QUBIT_LABELS[label])
    except KeyError:
        raise QuantumStateError(f"unknown qubit label {label!r}, expected one of 0 1 + -") from None


def bell_state(kind: int) -> StateVector:
    """1: (|01> - |10>)/√2, 2: (|01> + |10>)/√2, 3: (|00> + |11>)/√2, 4: (|00> - |11>)/√2"""
    h = 1 / SQRT2
    states = {
        1: (0, h, -h, 0),
        2: (0, h, h, 0),
        3: (h, 0, 0, h),
        4: (h, 0, 0, -h),
    }
    if kind not in states:
        raise QuantumStateError(f"Bell state kind must be 1..4, got {kind}")
    return StateVector(states[kind])


def singlet() -> StateVector:
    return bell_state(1)


# --- measurements ---------------------------------------------------------------------

@dataclass(frozen=True)
class BinaryMeasurement:
    """Projective qubit measurement along an angle on the x-z great circle

    Outcome 0 projects onto cos(θ/2)|0> + sin(θ/2)|1>, outcome 1 onto its complement.
    """
    angle: float

    @property
    def projectors(self) -> Tuple[np.ndarray, np.ndarray]:
        half = self.angle / 2
        ket = np.array([math.cos(half), math.sin(half)], dtype=complex)
        p0 = np.outer(ket, ket.conj())
        return p0, np.eye(2, dtype=complex) - p0

    @property
    def observable(self) -> np.ndarray:
        """Π0 - Π1, i.e. cos θ Z + sin θ X"""
        p0, p1 = self.projectors
        return p0 - p1

    def check(self, tolerance: float = ALGEBRAIC_TOLERANCE) -> bool:
        p0, p1 = self.projectors
        return (np.allclose(p0 + p1, np.eye(2), atol=tolerance)
                and np.allclose(p0 @ p0, p0, atol=tolerance)
                and np.allclose(p1 @ p1, p1, atol=tolerance)
                and np.allclose(p0 @ p1, 0, atol=tolerance))


def binary_measurement(angle: float) -> BinaryMeasurement:
    return BinaryMeasurement(float(angle))


def born_array(state: StateVector, alice: Sequence[BinaryMeasurement],
               bob: Sequence[BinaryMeasurement]) -> CorrelationArray:
    """p(ab|xy) = <ψ| Π_a^(x) ⊗ Π_b^(y) |ψ>"""
    if state.dimension != 4:
        raise QuantumStateError(f"born_array needs a two-qubit state, got dimension {state.dimension}")
    if len(alice) != 2 or len(bob) != 2:
        raise QuantumStateError("each party needs exactly two measurements")
    psi = state.amplitudes
    values = {}
    for x, y in itertools.product((0, 1), repeat=2):
        pa = alice[x].projectors
        pb = bob[y].projectors
        for a, b in itertools.product((0, 1), repeat=2):
            op = np.kron(pa[a], pb[b])
            p = float(np.real(np.vdot(psi, op @ psi)))
            # round-off below zero is clipped
            values[(a, b, x, y)] = 0.0 if -BORN_TOLERANCE < p < 0 else p
    return CorrelationArray(values, representation=FLOAT)


# --- Tsirelson ------------------------------------------------------------------------------

@dataclass(frozen=True)
class ChshSettings:
    """Measurement angles and the CHSH value they reach on the singlet"""
    alice: Tuple[float, float]
    bob: Tuple[float, float]
    value: float
    variant: int = 0

    def measurements(self) -> Tuple[List[BinaryMeasurement], List[BinaryMeasurement]]:
        return ([binary_measurement(t) for t in self.alice],
                [binary_measurement(t) for t in self.bob])

    def to_dict(self) -> dict:
        return {"alice": list(self.alice), "bob": list(self.bob),
                "value": self.value, "variant": self.variant}


def tsirelson_settings() -> ChshSettings:
    """Singlet settings reaching 2√2 on variant 0; the singlet correlator is -cos(θa - θb)"""
    return ChshSettings(alice=(0.0, math.pi / 2), bob=(-3 * math.pi / 4, -5 * math.pi / 4),
                        value=2 * SQRT2, variant=0)


def _correlator_grid(state: StateVector, angles: np.ndarray) -> np.ndarray:
    """E[i, j] = <ψ| A(θi) ⊗ B(θj) |ψ> for every pair of grid angles"""
    c, s = np.cos(angles), np.sin(angles)
    z = np.array([[1, 0], [0, -1]], dtype=complex)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    observables = c[:, None, None] * z + s[:, None, None] * x  # (n, 2, 2)
    psi = state.amplitudes.reshape(2, 2)
    # <ψ| A ⊗ B |ψ> with ψ reshaped as ψ[i, k]
    grid = np.einsum("ik,nij,mkl,jl->nm", psi.conj(), observables, observables, psi)
    return np.real(grid)


def tsirelson_grid_search(steps: int = DEFAULT_GRID_STEPS,
                          state: Optional[StateVector] = None) -> ChshSettings:
    """Best CHSH value over a regular angle grid, Alice's first angle pinned at 0"""
    if steps < 4:
        raise QuantumStateError(f"angle grid needs at least 4 steps, got {steps}")
    state = state or singlet()
    angles = 2 * math.pi * np.arange(steps) / steps
    E = _correlator_grid(state, angles)

    best = (-math.inf, 0, 0, 0, 0)
    for variant in range(CHSH_VARIANT_COUNT):
        signs = chsh_coefficients(variant)
        # axes: a1, b0, b1 with a0 = angle 0
        K = (signs[(0, 0)] * E[0][None, :, None]
             + signs[(0, 1)] * E[0][None, None, :]
             + signs[(1, 0)] * E[:, :, None]
             + signs[(1, 1)] * E[:, None, :])
        flat = int(np.argmax(K))
        value = float(K.flat[flat])
        if value > best[0] + ALGEBRAIC_TOLERANCE:
            best = (value, variant) + np.unravel_index(flat, K.shape)
    value, variant, a1, b0, b1 = best
    logger.info(f"[Quantum] grid search over {steps} angles: CHSH {value:.12f} (variant {variant})")
    return ChshSettings(alice=(0.0, float(angles[a1])), bob=(float(angles[b0]), float(angles[b1])),
                        value=value, variant=int(variant))


@dataclass(frozen=True)
class SweepResult:
    maximum: float
    samples: int
    seed: int


def random_two_qubit_states(rng: np.random.Generator, count: int) -> np.ndarray:
    """Haar-random pure states as rows of a (count, 4) complex array"""
    raw = rng.normal(size=(count, 4)) + 1j * rng.normal(size=(count, 4))
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


def random_chsh_sweep(samples: int, seed: int) -> SweepResult:
    """Largest CHSH value over random two-qubit states and random settings"""
    if samples < 1:
        raise SamplingError(f"sweep needs at least one sample, got {samples}")
    rng = np.random.default_rng(seed)
    states = random_two_qubit_states(rng, samples).reshape(samples, 2, 2)
    angles = rng.uniform(0.0, 2 * math.pi, size=(samples, 4))
    z = np.array([[1, 0], [0, -1]], dtype=complex)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    obs = np.cos(angles)[..., None, None] * z + np.sin(angles)[..., None, None] * x  # (n, 4, 2, 2)

    correlators = {}
    for xs, ys in itertools.product((0, 1), repeat=2):
        A, B = obs[:, xs], obs[:, 2 + ys]
        correlators[(xs, ys)] = np.real(
            np.einsum("nik,nij,nkl,njl->n", states.conj(), A, B, states))

    maximum = -math.inf
    for variant in range(CHSH_VARIANT_COUNT):
        signs = chsh_coefficients(variant)
        K = sum(signs[ctx] * correlators[ctx] for ctx in correlators)
        maximum = max(maximum, float(np.max(K)))
    logger.info(f"[Quantum] random sweep of {samples} samples: max CHSH {maximum:.12f}")
    return SweepResult(maximum=maximum, samples=samples, seed=seed)


# --- Klyachko pentagram ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class KlyachkoFrame:
    """Five unit vectors on a cone about the z axis, consecutive ones orthogonal

    Vertex k sits at angle k * 4π/5 around the circle, so construction order walks
    the pentagram and consecutive vectors are its edges.
    """
    vectors: np.ndarray  # (5, 3)
    r: float
    s: float
    phi: float

    def edges(self) -> List[Tuple[int, int]]:
        return [(k, (k + 1) % 5) for k in range(5)]

    def check(self, tolerance: float = ALGEBRAIC_TOLERANCE) -> Dict[str, bool]:
        norms = np.linalg.norm(self.vectors, axis=1)
        return {
            "unit_vectors": bool(np.allclose(norms, 1.0, atol=tolerance)),
            "r2_plus_s2": abs(self.r ** 2 + self.s ** 2 - 1) <= tolerance,
            "r2_is_inverse_sqrt5": abs(self.r ** 2 - 1 / math.sqrt(5)) <= tolerance,
            "consecutive_orthogonal": all(
                abs(float(np.dot(self.vectors[i], self.vectors[j]))) <= tolerance
                for i, j in self.edges()),
        }

    def to_dict(self) -> dict:
        return {
            "geometry": {"r": self.r, "s": self.s, "phi": self.phi},
            "vectors": self.vectors.tolist(),
        }


def klyachko_frame() -> KlyachkoFrame:
    s = 1 / (SQRT2 * math.cos(math.pi / 10))
    r = math.sqrt(1 - s * s)
    vectors = np.array([
        (s * math.cos(PENTAGRAM_STEP_ANGLE * k), s * math.sin(PENTAGRAM_STEP_ANGLE * k), r)
        for k in range(5)
    ])
    vectors.setflags(write=False)
    return KlyachkoFrame(vectors=vectors, r=r, s=s, phi=math.acos(r))


@dataclass(frozen=True)
class KlyachkoSum:
    probabilities: Tuple[float, ...]
    total: float


def klyachko_sum(frame: KlyachkoFrame, psi: StateVector) -> KlyachkoSum:
    """Probabilities |<v_k|ψ>|^2 at the five vertices and their sum"""
    if psi.dimension != 3:
        raise QuantumStateError(f"Klyachko states live in dimension 3, got {psi.dimension}")
    amps = frame.vectors @ psi.amplitudes
    probs = tuple(float(v) for v in np.abs(amps) ** 2)
    return KlyachkoSum(probabilities=probs, total=float(sum(probs)))


def north_pole() -> StateVector:
    return StateVector((0.0, 0.0, 1.0))


def random_klyachko_sweep(samples: int, seed: int, frame: Optional[KlyachkoFrame] = None) -> SweepResult:
    """Largest vertex-probability sum over random normalized qutrit states"""
    if samples < 1:
        raise SamplingError(f"sweep needs at least one sample, got {samples}")
    frame = frame or klyachko_frame()
    rng = np.random.default_rng(seed)
    raw = rng.normal(size=(samples, 3)) + 1j * rng.normal(size=(samples, 3))
    states = raw / np.linalg.norm(raw, axis=1, keepdims=True)
    totals = np.sum(np.abs(states @ frame.vectors.T) ** 2, axis=1)
    return SweepResult(maximum=float(np.max(totals)), samples=samples, seed=seed)


@dataclass(frozen=True)
class NoncontextualResult:
    maximum: int
    witness: Tuple[int, ...]
    feasible: Tuple[Tuple[int, ...], ...]


def noncontextual_max() -> NoncontextualResult:
    """Brute force over 0/1 assignments with at most one 1 per pentagram edge"""
    frame_edges = [(k, (k + 1) % 5) for k in range(5)]
    feasible = [v for v in itertools.product((0, 1), repeat=5)
                if all(v[i] + v[j] <= 1 for i, j in frame_edges)]
    witness = max(feasible, key=sum)
    return NoncontextualResult(maximum=sum(witness), witness=witness, feasible=tuple(feasible))


def klyachko_bound_chain() -> Dict[str, object]:
    """classical 2 < quantum √5 < Bananaworld 5/2"""
    frame = klyachko_frame()
    quantum = klyachko_sum(frame, north_pole()).total
    operator = frame.vectors.T @ frame.vectors
    return {
        "classical": KLYACHKO_CLASSICAL_BOUND,
        "quantum": quantum,
        "quantum_operator_norm": float(np.max(np.linalg.eigvalsh(operator))),
        "bananaworld": KLYACHKO_BANANA_VALUE,
    }


# --- PBR ----------------------------------------------------------------------------------------

PBR_PREPARATIONS = (("0", "0"), ("0", "+"), ("+", "0"), ("+", "+"))


def pbr_basis() -> List[StateVector]:
    """Entangled measurement basis; element i never fires on preparation i"""
    q = {label: qubit_state(label).amplitudes for label in _QUBIT_LABELS}
    pairs = [
        (("0", "1"), ("1", "0")),
        (("0", "-"), ("1", "+")),
        (("+", "1"), ("-", "0")),
        (("+", "-"), ("-", "+")),
    ]
    basis = []
    for (l1, l2), (r1, r2) in pairs:
        vec = (np.kron(q[l1], q[l2]) + np.kron(q[r1], q[r2])) / SQRT2
        basis.append(StateVector(vec))
    return basis


def pbr_basis_is_orthonormal(basis: Sequence[StateVector],
                             tolerance: float = ALGEBRAIC_TOLERANCE) -> bool:
    gram = np.array([[inner(u, v) for v in basis] for u in basis])
    return bool(np.allclose(gram, np.eye(len(basis)), atol=tolerance))


@dataclass(frozen=True)
class PbrOutcome:
    preparation: Tuple[str, str]
    probabilities: Tuple[float, ...]
    blocked: int


def pbr_probabilities(prep1: str, prep2: str,
                      tolerance: float = ALGEBRAIC_TOLERANCE) -> PbrOutcome:
    """Outcome probabilities for |prep1> ⊗ |prep2>, each drawn from |0> and |+>"""
    for label in (prep1, prep2):
        if label not in ("0", "+"):
            raise QuantumStateError(f"PBR preparations are |0> or |+>, got {label!r}")
    state = tensor(qubit_state(prep1), qubit_state(prep2))
    probs = tuple(abs(inner(b, state)) ** 2 for b in pbr_basis())
    blocked = [i for i, p in enumerate(probs) if p <= tolerance]
    if len(blocked) != 1:
        raise QuantumStateError(f"expected exactly one impossible outcome, found {blocked}")
    return PbrOutcome(preparation=(prep1, prep2), probabilities=probs, blocked=blocked[0])


def pbr_contradiction() -> Dict[str, object]:
    """Every outcome is ruled out by some preparation, yet each preparation's outcomes sum to 1"""
    outcomes = [pbr_probabilities(p1, p2) for p1, p2 in PBR_PREPARATIONS]
    sums = [sum(o.probabilities) for o in outcomes]
    covered = sorted(o.blocked for o in outcomes)
    return {
        "outcomes": outcomes,
        "sums": sums,
        "every_outcome_blocked": covered == [0, 1, 2, 3],
        "normalized": all(abs(s - 1) <= ALGEBRAIC_TOLERANCE for s in sums),
    }
