"""
Polytopes for the Bananaworld Correlation Analyzer
Deterministic vertex catalog, PR boxes, local and no-signaling polytopes,
LP membership with verified certificates, affine dimension and LHV models
"""

import functools
import itertools
import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy
from scipy.optimize import linprog

from .constants import BOUNDARY_BAND_FACTOR, CLASSICAL_CHSH_BOUND, ENTRY_KEYS, TSIRELSON_BOUND
from .correlation_core import (RATIONAL, CorrelationArray, Outcome, Scalar,
                               chsh_coefficients, chsh_max, default_tolerance, mix,
                               no_signaling_check, product_form_check, require_valid)
from .errors import InvalidArrayError, InvalidModelError, RepresentationError, VerificationError
from .rational_lp import solve_feasibility
from .serialization import scalar_to_json

logger = logging.getLogger(__name__)

LOCAL = "local"
NO_SIGNALING = "no_signaling"
POLYTOPES = (LOCAL, NO_SIGNALING)

ALL = "all"
SIGNALING = "signaling"
VERTEX_KINDS = (ALL, LOCAL, SIGNALING)

BOUNDARY_INDETERMINATE = "boundary-indeterminate"
NONLOCAL_NO_SIGNALING = "nonlocal_no_signaling"

VertexId = Union[int, str]


# --- deterministic vertices ---------------------------------------------------

@dataclass(frozen=True)
class DeterministicVertex:
    """Response functions a = f(x, y), b = g(x, y)

    alice_fn and bob_fn list the outcome for contexts YY, YB, BY, BB. The index packs
    the eight values f(YY) f(YB) f(BY) f(BB) g(YY) g(YB) g(BY) g(BB), most significant first.
    """
    alice_fn: Tuple[Outcome, Outcome, Outcome, Outcome]
    bob_fn: Tuple[Outcome, Outcome, Outcome, Outcome]

    @classmethod
    def from_index(cls, index: int) -> "DeterministicVertex":
        if not 0 <= index < 256:
            raise InvalidModelError(f"deterministic vertex index must be in 0..255, got {index}")
        bits = [(index >> (7 - k)) & 1 for k in range(8)]
        return cls(tuple(Outcome(v) for v in bits[:4]), tuple(Outcome(v) for v in bits[4:]))

    @property
    def index(self) -> int:
        value = 0
        for bit in itertools.chain(self.alice_fn, self.bob_fn):
            value = (value << 1) | int(bit)
        return value

    def alice(self, x: int, y: int) -> Outcome:
        return self.alice_fn[2 * int(x) + int(y)]

    def bob(self, x: int, y: int) -> Outcome:
        return self.bob_fn[2 * int(x) + int(y)]

    @property
    def is_local(self) -> bool:
        """Alice ignores y and Bob ignores x"""
        alice_ok = all(self.alice(x, 0) == self.alice(x, 1) for x in (0, 1))
        bob_ok = all(self.bob(0, y) == self.bob(1, y) for y in (0, 1))
        return alice_ok and bob_ok

    def to_array(self) -> CorrelationArray:
        return _vertex_array(self.index)


@functools.lru_cache(maxsize=256)
def _vertex_array(index: int) -> CorrelationArray:
    v = DeterministicVertex.from_index(index)
    values = {
        (a, b, x, y): Fraction(int(a == v.alice(x, y) and b == v.bob(x, y)))
        for a, b, x, y in ENTRY_KEYS
    }
    return CorrelationArray(values, representation=RATIONAL)


@functools.lru_cache(maxsize=None)
def _catalog(kind: str) -> Tuple[DeterministicVertex, ...]:
    everything = [DeterministicVertex.from_index(i) for i in range(256)]
    if kind == ALL:
        return tuple(everything)
    if kind == LOCAL:
        return tuple(v for v in everything if v.is_local)
    return tuple(v for v in everything if not v.is_local)


def enumerate_deterministic(kind: str = ALL) -> List[DeterministicVertex]:
    """All 256 deterministic vertices, the 16 local ones or the 240 signaling ones"""
    if kind not in VERTEX_KINDS:
        raise ValueError(f"vertex kind must be one of {VERTEX_KINDS}, got {kind!r}")
    return list(_catalog(kind))


# --- PR boxes ---------------------------------------------------------------------

@dataclass(frozen=True)
class PrBoxVertex:
    """p(ab|xy) = 1/2 if a ^ b = x*y ^ alpha*x ^ beta*y ^ gamma, else 0"""
    alpha: int
    beta: int
    gamma: int

    @property
    def index(self) -> int:
        return 4 * self.alpha + 2 * self.beta + self.gamma

    @property
    def label(self) -> str:
        return f"pr{self.index}"

    @property
    def array(self) -> CorrelationArray:
        half = Fraction(1, 2)
        values = {}
        for a, b, x, y in ENTRY_KEYS:
            target = (x & y) ^ (self.alpha & x) ^ (self.beta & y) ^ self.gamma
            values[(a, b, x, y)] = half if (a ^ b) == target else Fraction(0)
        return CorrelationArray(values, representation=RATIONAL)


def pr_boxes() -> List[PrBoxVertex]:
    """The eight extremal nonlocal no-signaling boxes, (0,0,0) first"""
    return [PrBoxVertex(al, be, ga) for al, be, ga in itertools.product((0, 1), repeat=3)]


def polytope_vertices(polytope: str) -> List[Tuple[VertexId, CorrelationArray]]:
    """Labelled vertex arrays: 16 local vertices, plus the 8 PR boxes for no_signaling"""
    if polytope not in POLYTOPES:
        raise ValueError(f"polytope must be one of {POLYTOPES}, got {polytope!r}")
    vertices = [(v.index, v.to_array()) for v in enumerate_deterministic(LOCAL)]
    if polytope == NO_SIGNALING:
        vertices += [(box.label, box.array) for box in pr_boxes()]
    return vertices


# --- membership ---------------------------------------------------------------------

@dataclass(frozen=True)
class Certificate:
    """Linear functional sum_k c_k p_k with every polytope vertex at or below bound"""
    coefficients: Tuple[Scalar, ...]
    bound: Scalar
    value: Scalar
    label: str = "farkas"

    def evaluate(self, array: CorrelationArray) -> Scalar:
        start = Fraction(0) if array.is_rational and isinstance(self.bound, Fraction) else 0.0
        return sum((c * p for c, p in zip(self.coefficients, array.vector())), start)

    def verify(self, array: CorrelationArray, vertices: Sequence[CorrelationArray],
               tolerance: Scalar = 0) -> bool:
        if not self.evaluate(array) > self.bound + tolerance:
            return False
        return all(self.evaluate(v) <= self.bound + tolerance for v in vertices)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "coefficients": [scalar_to_json(c) for c in self.coefficients],
            "bound": scalar_to_json(self.bound),
            "value": scalar_to_json(self.value),
        }


@dataclass(frozen=True)
class MembershipResult:
    """In: convex weights; Out: separating certificate; or boundary-indeterminate"""
    kind: str  # 'in', 'out' or 'boundary-indeterminate'
    polytope: str
    weights: Tuple[Tuple[VertexId, Scalar], ...] = ()
    certificate: Optional[Certificate] = None
    distance: Optional[float] = None

    @property
    def is_in(self) -> bool:
        return self.kind == "in"

    @property
    def is_out(self) -> bool:
        return self.kind == "out"

    @property
    def is_indeterminate(self) -> bool:
        return self.kind == BOUNDARY_INDETERMINATE

    def to_dict(self) -> dict:
        payload = {"polytope": self.polytope, "result": self.kind}
        if self.is_in:
            payload["weights"] = [[vid, scalar_to_json(w)] for vid, w in self.weights]
        elif self.is_out:
            payload["certificate"] = self.certificate.to_dict()
        else:
            payload["distance"] = self.distance
        return payload


def chsh_certificate(array: CorrelationArray, variant: int) -> Certificate:
    """CHSH variant written as a functional on the 16 entries, bound 2"""
    signs = chsh_coefficients(variant)
    rational = array.is_rational
    coefficients = []
    for a, b, x, y in ENTRY_KEYS:
        c = signs[(x, y)] * (1 if a == b else -1)
        coefficients.append(Fraction(c) if rational else float(c))
    bound = Fraction(CLASSICAL_CHSH_BOUND) if rational else float(CLASSICAL_CHSH_BOUND)
    start = Fraction(0) if rational else 0.0
    value = sum((c * p for c, p in zip(coefficients, array.vector())), start)
    return Certificate(tuple(coefficients), bound, value, label=f"chsh-variant-{variant}")


def _reconstruct(vertices: Dict[VertexId, CorrelationArray],
                 weights: Sequence[Tuple[VertexId, Scalar]]) -> CorrelationArray:
    return mix([vertices[vid] for vid, _ in weights], [w for _, w in weights])


def membership(array: CorrelationArray, polytope: str = LOCAL,
               tolerance: Optional[Scalar] = None,
               band_factor: float = BOUNDARY_BAND_FACTOR) -> MembershipResult:
    """Decide whether array lies in the local or no-signaling polytope

    Rational arrays are decided exactly with the rational simplex. Float arrays use
    HiGHS on the L1-residual formulation; residuals between tolerance and
    band_factor * tolerance are reported as boundary-indeterminate.
    """
    tol = default_tolerance(array) if tolerance is None else tolerance
    require_valid(array, tol)
    labelled = polytope_vertices(polytope)
    if array.is_rational:
        return _membership_exact(array, polytope, labelled)
    return _membership_float(array, polytope, labelled, float(tol), band_factor)


def _membership_exact(array, polytope, labelled) -> MembershipResult:
    ids = [vid for vid, _ in labelled]
    arrays = [arr for _, arr in labelled]
    A = [[arr.vector()[k] for arr in arrays] for k in range(16)]
    A.append([Fraction(1)] * len(arrays))
    b = list(array.vector()) + [Fraction(1)]
    result = solve_feasibility(A, b)

    if result.feasible:
        weights = tuple((vid, w) for vid, w in zip(ids, result.solution) if w != 0)
        if _reconstruct(dict(labelled), weights) != array:
            raise VerificationError("exact decomposition does not reconstruct the array")
        logger.info(f"[Polytopes] array is in the {polytope} polytope "
                    f"({len(weights)} vertices, {result.pivots} pivots)")
        return MembershipResult("in", polytope, weights=weights)

    certificate = _preferred_certificate(array, polytope)
    if certificate is None:
        y = result.farkas
        coefficients = tuple(y[:16])
        bound = -y[16]
        value = sum((c * p for c, p in zip(coefficients, array.vector())), Fraction(0))
        certificate = Certificate(coefficients, bound, value, label="farkas")
    if not certificate.verify(array, arrays):
        raise VerificationError(f"certificate {certificate.label} failed verification")
    logger.info(f"[Polytopes] array is outside the {polytope} polytope, "
                f"certificate {certificate.label}")
    return MembershipResult("out", polytope, certificate=certificate)


def _preferred_certificate(array: CorrelationArray, polytope: str,
                           tolerance: Scalar = 0) -> Optional[Certificate]:
    """For the local polytope, a violated CHSH variant is the natural witness"""
    if polytope != LOCAL:
        return None
    value, variant = chsh_max(array, tolerance if not array.is_rational else None)
    if value > CLASSICAL_CHSH_BOUND + tolerance:
        return chsh_certificate(array, variant)
    return None


def _membership_float(array, polytope, labelled, tol: float, band_factor: float) -> MembershipResult:
    ids = [vid for vid, _ in labelled]
    V = np.array([arr.as_numpy() for _, arr in labelled]).T  # 16 x n
    n = V.shape[1]
    rows = np.vstack([V, np.ones((1, n))])
    eye = np.eye(17)
    A_eq = np.hstack([rows, eye, -eye])
    b_eq = np.concatenate([array.as_numpy(), [1.0]])
    c = np.concatenate([np.zeros(n), np.ones(34)])
    feas_tol = min(1e-7, max(tol, 1e-10))
    lp = linprog(c, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs",
                 options={"primal_feasibility_tolerance": feas_tol,
                          "dual_feasibility_tolerance": feas_tol})
    if not lp.success:
        logger.warning(f"[Polytopes] HiGHS did not converge: {lp.message}")
        return MembershipResult(BOUNDARY_INDETERMINATE, polytope, distance=math.nan)

    residual = float(lp.fun)
    logger.debug(f"[Polytopes] L1 residual to the {polytope} polytope: {residual:.3e}")
    vertex_arrays = [arr.to_float() for _, arr in labelled]

    if residual <= tol:
        w = lp.x[:n]
        weights = tuple((vid, float(wi)) for vid, wi in zip(ids, w) if wi > 0)
        rebuilt = V @ w
        error = max(float(np.max(np.abs(rebuilt - array.as_numpy()))), abs(float(w.sum()) - 1.0))
        if error <= tol:
            return MembershipResult("in", polytope, weights=weights)
        logger.warning(f"[Polytopes] float weights reconstruct within {error:.3e} only")
        return MembershipResult(BOUNDARY_INDETERMINATE, polytope, distance=residual)

    if residual <= band_factor * tol:
        logger.warning(f"[Polytopes] residual {residual:.3e} inside the boundary band")
        return MembershipResult(BOUNDARY_INDETERMINATE, polytope, distance=residual)

    certificate = _preferred_certificate(array, polytope, tol)
    if certificate is None:
        y = np.asarray(lp.eqlin.marginals, dtype=float)
        coefficients = tuple(float(v) for v in y[:16])
        bound = -float(y[16])
        value = float(np.dot(y[:16], array.as_numpy()))
        certificate = Certificate(coefficients, bound, value, label="farkas")
    if not certificate.verify(array, vertex_arrays, tol):
        logger.warning(f"[Polytopes] float certificate {certificate.label} failed verification")
        return MembershipResult(BOUNDARY_INDETERMINATE, polytope, distance=residual)
    return MembershipResult("out", polytope, certificate=certificate)


def decompose(array: CorrelationArray, polytope: str = LOCAL,
              tolerance: Optional[Scalar] = None) -> Tuple[Tuple[VertexId, Scalar], ...]:
    """Convex weights of array over the polytope vertices; raises when it is not inside"""
    result = membership(array, polytope, tolerance)
    if not result.is_in:
        raise InvalidArrayError(f"array is not inside the {polytope} polytope ({result.kind})")
    return result.weights


# --- dimension ------------------------------------------------------------------------

def affine_dimension(arrays: Sequence[CorrelationArray], tolerance: float = 1e-9) -> int:
    """Dimension of the affine hull of the arrays as points in 16-dimensional space"""
    if not arrays:
        raise InvalidArrayError("affine_dimension needs at least one array")
    representations = {arr.representation for arr in arrays}
    if len(representations) != 1:
        raise RepresentationError("arrays must share one representation")
    for arr in arrays:
        require_valid(arr)

    base = arrays[0].vector()
    if representations.pop() == RATIONAL:
        rows = {tuple(p - q for p, q in zip(arr.vector(), base)) for arr in arrays[1:]}
        rows.discard((Fraction(0),) * 16)
        if not rows:
            return 0
        matrix = sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) for v in row]
                               for row in rows])
        return int(matrix.rank())

    diffs = np.array([arr.as_numpy() - arrays[0].as_numpy() for arr in arrays[1:]])
    if diffs.size == 0:
        return 0
    return int(np.linalg.matrix_rank(diffs, tol=tolerance))


def is_simplex(arrays: Sequence[CorrelationArray]) -> bool:
    """Affinely independent vertices, so every mixture decomposes uniquely"""
    return affine_dimension(arrays) == len(set(arrays)) - 1


# --- LHV models --------------------------------------------------------------------------

LhvComponent = Union[DeterministicVertex, CorrelationArray]


@dataclass(frozen=True)
class LhvModel:
    """Finite distribution rho(lambda) over per-lambda correlation arrays

    Components are local deterministic vertices or, more generally, arbitrary valid
    arrays conditioned on lambda.
    """
    support: Tuple[Tuple[LhvComponent, Scalar], ...]
    tolerance: float = 1e-9

    def __post_init__(self):
        support = tuple((comp, w) for comp, w in self.support)
        object.__setattr__(self, "support", support)
        if not support:
            raise InvalidModelError("LHV model needs at least one component")
        weights = [w for _, w in support]
        if any(w < 0 for w in weights):
            raise InvalidModelError("LHV weights must be non-negative")
        exact = all(isinstance(w, (int, Fraction)) for w in weights)
        total = sum(weights)
        if (exact and total != 1) or (not exact and abs(total - 1) > self.tolerance):
            raise InvalidModelError(f"LHV weights sum to {total}, not 1")
        keys = [self._key(comp) for comp, _ in support]
        if len(set(keys)) != len(keys):
            raise InvalidModelError("LHV support lists a component twice")
        for comp, _ in support:
            if isinstance(comp, DeterministicVertex):
                if not comp.is_local:
                    raise InvalidModelError(f"vertex {comp.index} is not local")
            elif not isinstance(comp, CorrelationArray):
                raise InvalidModelError(f"unsupported LHV component {comp!r}")

    @staticmethod
    def _key(comp: LhvComponent):
        return ("vertex", comp.index) if isinstance(comp, DeterministicVertex) else ("array", comp)

    @classmethod
    def point_mass(cls, component: LhvComponent) -> "LhvModel":
        return cls(((component, Fraction(1)),))

    @classmethod
    def uniform(cls, components: Sequence[LhvComponent]) -> "LhvModel":
        w = Fraction(1, len(components))
        return cls(tuple((comp, w) for comp in components))

    @property
    def exact(self) -> bool:
        return all(isinstance(w, (int, Fraction)) for _, w in self.support)

    def arrays(self) -> List[CorrelationArray]:
        return [comp.to_array() if isinstance(comp, DeterministicVertex) else comp
                for comp, _ in self.support]

    def weights(self) -> List[Scalar]:
        return [w for _, w in self.support]


def lhv_mixture(model: LhvModel) -> CorrelationArray:
    """Entrywise mixture sum_lambda rho(lambda) p_lambda"""
    arrays = model.arrays()
    if not model.exact:
        arrays = [arr.to_float() for arr in arrays]
    elif any(not arr.is_rational for arr in arrays):
        raise RepresentationError("exact weights over float component arrays")
    return mix(arrays, model.weights())


@dataclass(frozen=True)
class IndependenceReport:
    """Per-lambda parameter and outcome independence"""
    parameter_independence: bool
    outcome_independence: bool
    per_component: Tuple[Tuple[bool, bool], ...] = field(default=())

    @property
    def factorizes(self) -> bool:
        return self.parameter_independence and self.outcome_independence


def lhv_independence_checks(model: LhvModel) -> IndependenceReport:
    """Parameter independence is per-lambda no-signaling; outcome independence is product form"""
    details = []
    for arr in model.arrays():
        require_valid(arr)
        parameter = no_signaling_check(arr).passes
        outcome = all(product_form_check(arr).values())
        details.append((parameter, outcome))
    return IndependenceReport(
        parameter_independence=all(p for p, _ in details),
        outcome_independence=all(o for _, o in details),
        per_component=tuple(details),
    )


# --- classification ------------------------------------------------------------------------

@dataclass(frozen=True)
class Classification:
    """Where an array sits in the chain local / quantum-compatible / no-signaling / all"""
    tier: str  # local, nonlocal_no_signaling, signaling or boundary-indeterminate
    chsh_max: Scalar
    chsh_variant: int
    tsirelson_compatible: bool
    distance: Optional[float] = None  # L1 residual when the tier is undecided


def classify(array: CorrelationArray, tolerance: Optional[Scalar] = None) -> Classification:
    tol = default_tolerance(array) if tolerance is None else tolerance
    require_valid(array, tol)
    value, variant = chsh_max(array, tol)
    distance = None
    if not no_signaling_check(array, tol).passes:
        tier = SIGNALING
    else:
        local = membership(array, LOCAL, tol)
        if local.is_indeterminate:
            tier, distance = BOUNDARY_INDETERMINATE, local.distance
        else:
            tier = LOCAL if local.is_in else NONLOCAL_NO_SIGNALING
    return Classification(tier=tier, chsh_max=value, chsh_variant=variant,
                          tsirelson_compatible=float(value) <= TSIRELSON_BOUND + float(tol),
                          distance=distance)


def vertex_catalog(kind: str = ALL) -> dict:
    vertices = enumerate_deterministic(kind)
    return {
        "kind": kind,
        "count": len(vertices),
        "vertices": [
            {"index": v.index, "local": v.is_local,
             "alice": [int(o) for o in v.alice_fn], "bob": [int(o) for o in v.bob_fn]}
            for v in vertices
        ],
    }


def vertex_catalog_json(kind: str = ALL) -> str:
    return json.dumps(vertex_catalog(kind), indent=2)


def membership_result_json(result: MembershipResult) -> str:
    return json.dumps(result.to_dict(), indent=2)
