"""
Correlation Core for the Bananaworld Correlation Analyzer
Correlation arrays p(ab|xy) over two parties, two peelings and two tastes,
and the elementary functionals on them: marginals, no-signaling residuals,
expectations, CHSH and product form.
"""

import itertools
import logging
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from numbers import Real
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .constants import (CHSH_MINUS_CONTEXT, CHSH_VARIANT_COUNT, CONTEXTS,
                        DEFAULT_FLOAT_TOLERANCE, ENTRY_KEYS, TABLE_RULES)
from .errors import InvalidArrayError, RepresentationError

logger = logging.getLogger(__name__)

Scalar = Union[Fraction, float]
EntryKey = Tuple[int, int, int, int]

RATIONAL = "rational"
FLOAT = "float"


class Setting(IntEnum):
    """Peeling choice: yellow half (Y) or brown half (B)"""
    Y = 0
    B = 1


class Outcome(IntEnum):
    """Taste: ordinary (0) or intense (1)"""
    ORDINARY = 0
    INTENSE = 1

    @property
    def signed(self) -> int:
        """Signed view: ordinary -> -1, intense -> +1"""
        return 1 if self is Outcome.INTENSE else -1

    @classmethod
    def from_signed(cls, value: int) -> "Outcome":
        if value not in (-1, 1):
            raise ValueError(f"signed outcome must be -1 or +1, got {value}")
        return cls.INTENSE if value == 1 else cls.ORDINARY


def _entry_index(a: int, b: int, x: int, y: int) -> int:
    return 8 * int(x) + 4 * int(y) + 2 * int(a) + int(b)


def _coerce_scalar(value, representation: str) -> Scalar:
    if representation == RATIONAL:
        return Fraction(value)
    return float(value)


def _detect_representation(values: Sequence) -> str:
    has_float = any(isinstance(v, (float, np.floating)) for v in values)
    has_fraction = any(isinstance(v, Fraction) for v in values)
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (Real, Fraction)):
            raise RepresentationError(f"unsupported scalar {v!r} of type {type(v).__name__}")
    if has_float and has_fraction:
        raise RepresentationError("array mixes exact rationals and floats")
    return FLOAT if has_float else RATIONAL


class CorrelationArray:
    """Immutable table of the 16 joint conditional probabilities p(ab|xy)

    Entries are stored in context-major order (see constants.ENTRY_KEYS). An array
    is homogeneous: either every entry is a Fraction or every entry is a float.
    Construction does not check the probability invariants; use validate().
    """

    __slots__ = ("_values", "_representation")

    def __init__(self, entries: Union[Mapping[EntryKey, Scalar], Sequence[Scalar]],
                 representation: Optional[str] = None):
        if isinstance(entries, Mapping):
            missing = [k for k in ENTRY_KEYS if k not in entries]
            if missing:
                raise InvalidArrayError(f"missing entries for {missing}")
            raw = [entries[k] for k in ENTRY_KEYS]
        else:
            raw = list(entries)
            if len(raw) != 16:
                raise InvalidArrayError(f"expected 16 entries, got {len(raw)}")

        if representation is None:
            representation = _detect_representation(raw)
        elif representation not in (RATIONAL, FLOAT):
            raise RepresentationError(f"unknown representation {representation!r}")
        elif representation == RATIONAL and any(isinstance(v, (float, np.floating)) for v in raw):
            raise RepresentationError("float entry in a rational array")

        self._representation = representation
        self._values = tuple(_coerce_scalar(v, representation) for v in raw)

    # --- access -----------------------------------------------------------
    @property
    def representation(self) -> str:
        return self._representation

    @property
    def is_rational(self) -> bool:
        return self._representation == RATIONAL

    def p(self, a: int, b: int, x: int, y: int) -> Scalar:
        """Joint probability p(ab|xy)"""
        return self._values[_entry_index(a, b, x, y)]

    def __getitem__(self, key: EntryKey) -> Scalar:
        a, b, x, y = key
        return self.p(a, b, x, y)

    def vector(self) -> Tuple[Scalar, ...]:
        """Entries as a 16-tuple in ENTRY_KEYS order"""
        return self._values

    def entries(self) -> Dict[EntryKey, Scalar]:
        return dict(zip(ENTRY_KEYS, self._values))

    def as_numpy(self) -> np.ndarray:
        return np.array([float(v) for v in self._values], dtype=float)

    def to_float(self) -> "CorrelationArray":
        if not self.is_rational:
            return self
        return CorrelationArray([float(v) for v in self._values], representation=FLOAT)

    def context_total(self, x: int, y: int) -> Scalar:
        return sum((self.p(a, b, x, y) for a in (0, 1) for b in (0, 1)), self._zero())

    def _zero(self) -> Scalar:
        return Fraction(0) if self.is_rational else 0.0

    # --- comparison -------------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, CorrelationArray):
            return NotImplemented
        return (self._representation == other._representation
                and self._values == other._values)

    def __hash__(self) -> int:
        return hash((self._representation, self._values))

    def allclose(self, other: "CorrelationArray", tolerance: float) -> bool:
        """Entrywise comparison within tolerance, across representations"""
        return max(abs(float(p) - float(q)) for p, q in zip(self._values, other._values)) <= tolerance

    def __repr__(self) -> str:
        cells = ", ".join(
            f"p({a}{b}|{Setting(x).name}{Setting(y).name})={v}"
            for (a, b, x, y), v in zip(ENTRY_KEYS, self._values) if v
        )
        return f"CorrelationArray[{self._representation}]({cells})"


# --- constructors -----------------------------------------------------------

def from_rule(rule: Callable[[int, int, int, int], Scalar],
              representation: Optional[str] = None) -> CorrelationArray:
    """Build an array by evaluating rule(a, b, x, y) on every entry"""
    return CorrelationArray({k: rule(*k) for k in ENTRY_KEYS}, representation=representation)


def table(number: int) -> CorrelationArray:
    """One of the four reference tables, in exact rationals"""
    if number not in TABLE_RULES:
        raise InvalidArrayError(f"no reference table {number}; expected 1..4")
    return from_rule(TABLE_RULES[number], representation=RATIONAL)


def uniform_array(representation: str = RATIONAL) -> CorrelationArray:
    """Every entry equal to 1/4"""
    value = Fraction(1, 4) if representation == RATIONAL else 0.25
    return CorrelationArray([value] * 16, representation=representation)


def mix(arrays: Sequence[CorrelationArray], weights: Sequence[Scalar]) -> CorrelationArray:
    """Entrywise convex combination; weights are not normalised"""
    if not arrays or len(arrays) != len(weights):
        raise InvalidArrayError("mix needs one weight per array and at least one array")
    representations = {arr.representation for arr in arrays}
    if len(representations) != 1:
        raise RepresentationError("cannot mix rational and float arrays")
    representation = representations.pop()
    if representation == RATIONAL:
        coerced = [Fraction(w) for w in weights]
    else:
        coerced = [float(w) for w in weights]
    values = []
    for i in range(16):
        values.append(sum((w * arr.vector()[i] for arr, w in zip(arrays, coerced)),
                          Fraction(0) if representation == RATIONAL else 0.0))
    return CorrelationArray(values, representation=representation)


# --- validation -------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    """One failed invariant: an out-of-range entry or an unnormalised context"""
    kind: str  # 'range' or 'normalization'
    location: Tuple[int, ...]  # (a, b, x, y) for range, (x, y) for normalization
    magnitude: Scalar

    def describe(self) -> dict:
        if self.kind == "range":
            a, b, x, y = self.location
            where = f"p({a}{b}|{Setting(x).name}{Setting(y).name})"
        else:
            x, y = self.location
            where = f"context ({Setting(x).name},{Setting(y).name})"
        return {"kind": self.kind, "location": where, "magnitude": str(self.magnitude)}


def default_tolerance(array: CorrelationArray) -> Scalar:
    """Zero for exact arrays, 1e-9 for floats"""
    return Fraction(0) if array.is_rational else DEFAULT_FLOAT_TOLERANCE


def _tolerance(array: CorrelationArray, tolerance: Optional[Scalar]) -> Scalar:
    return default_tolerance(array) if tolerance is None else tolerance


def validate(array: CorrelationArray, tolerance: Optional[Scalar] = None) -> List[Violation]:
    """List every range and normalization violation; empty means valid"""
    tol = _tolerance(array, tolerance)
    violations = []
    for key, value in array.entries().items():
        if value < -tol:
            violations.append(Violation("range", key, -value))
        elif value > 1 + tol:
            violations.append(Violation("range", key, value - 1))
    for x, y in CONTEXTS:
        excess = abs(array.context_total(x, y) - 1)
        if excess > tol:
            violations.append(Violation("normalization", (x, y), excess))
    return violations


def require_valid(array: CorrelationArray, tolerance: Optional[Scalar] = None) -> None:
    """Raise InvalidArrayError when validate finds anything"""
    violations = validate(array, tolerance)
    if violations:
        raise InvalidArrayError(
            f"correlation array has {len(violations)} violation(s)", violations)


# --- marginals and no-signaling ----------------------------------------------

@dataclass(frozen=True)
class Marginals:
    """Per-party marginal tables keyed (outcome, x, y)"""
    alice: Dict[Tuple[int, int, int], Scalar]
    bob: Dict[Tuple[int, int, int], Scalar]

    def alice_p(self, a: int, x: int, y: int) -> Scalar:
        return self.alice[(int(a), int(x), int(y))]

    def bob_p(self, b: int, x: int, y: int) -> Scalar:
        return self.bob[(int(b), int(x), int(y))]


def marginals(array: CorrelationArray, tolerance: Optional[Scalar] = None) -> Marginals:
    """p_A(a|x,y) = sum_b p(ab|xy) and p_B(b|x,y) = sum_a p(ab|xy)"""
    require_valid(array, tolerance)
    alice, bob = {}, {}
    for x, y in CONTEXTS:
        for o in (0, 1):
            alice[(o, x, y)] = array.p(o, 0, x, y) + array.p(o, 1, x, y)
            bob[(o, x, y)] = array.p(0, o, x, y) + array.p(1, o, x, y)
    return Marginals(alice=alice, bob=bob)


@dataclass(frozen=True)
class NoSignalingReport:
    """Dependence of each party's marginals on the remote setting"""
    alice_residuals: Dict[Tuple[int, int], Scalar]  # (a, x) -> |p_A(a|x,Y) - p_A(a|x,B)|
    bob_residuals: Dict[Tuple[int, int], Scalar]  # (b, y) -> |p_B(b|Y,y) - p_B(b|B,y)|
    max_residual: Scalar
    tolerance: Scalar
    passes: bool


def no_signaling_check(array: CorrelationArray,
                       tolerance: Optional[Scalar] = None) -> NoSignalingReport:
    """Residuals of the four no-signaling constraints"""
    tol = _tolerance(array, tolerance)
    m = marginals(array, tol)
    alice_res = {(o, x): abs(m.alice_p(o, x, 0) - m.alice_p(o, x, 1))
                 for o in (0, 1) for x in (0, 1)}
    bob_res = {(o, y): abs(m.bob_p(o, 0, y) - m.bob_p(o, 1, y))
               for o in (0, 1) for y in (0, 1)}
    worst = max(itertools.chain(alice_res.values(), bob_res.values()))
    return NoSignalingReport(alice_residuals=alice_res, bob_residuals=bob_res,
                             max_residual=worst, tolerance=tol, passes=worst <= tol)


# --- expectations and CHSH ---------------------------------------------------

def expectation(array: CorrelationArray, x: int, y: int,
                tolerance: Optional[Scalar] = None) -> Scalar:
    """<xy> = p(same taste) - p(different taste)"""
    require_valid(array, tolerance)
    return _correlator(array, x, y)


def _correlator(array: CorrelationArray, x: int, y: int) -> Scalar:
    return (array.p(0, 0, x, y) + array.p(1, 1, x, y)
            - array.p(0, 1, x, y) - array.p(1, 0, x, y))


def chsh_coefficients(variant: int) -> Dict[Tuple[int, int], int]:
    """Sign of each correlator <xy> in the given CHSH variant"""
    if not 0 <= variant < CHSH_VARIANT_COUNT:
        raise ValueError(f"CHSH variant must be in 0..7, got {variant}")
    sign = -1 if variant >= 4 else 1
    minus_context = CHSH_MINUS_CONTEXT[variant % 4]
    return {ctx: (-sign if ctx == minus_context else sign) for ctx in CONTEXTS}


def _chsh_unchecked(array: CorrelationArray, variant: int) -> Scalar:
    coefficients = chsh_coefficients(variant)
    return sum((c * _correlator(array, x, y) for (x, y), c in coefficients.items()),
               array._zero())


def chsh(array: CorrelationArray, variant: int = 0,
         tolerance: Optional[Scalar] = None) -> Scalar:
    """CHSH value of one variant; variant 0 is <YY> + <YB> + <BY> - <BB>"""
    require_valid(array, tolerance)
    return _chsh_unchecked(array, variant)


def chsh_values(array: CorrelationArray, tolerance: Optional[Scalar] = None) -> List[Scalar]:
    require_valid(array, tolerance)
    return [_chsh_unchecked(array, v) for v in range(CHSH_VARIANT_COUNT)]


def chsh_max(array: CorrelationArray, tolerance: Optional[Scalar] = None) -> Tuple[Scalar, int]:
    """Largest CHSH value over the 8 variants and its index (lowest on ties)"""
    values = chsh_values(array, tolerance)
    best = 0
    for v in range(1, CHSH_VARIANT_COUNT):
        if values[v] > values[best]:
            best = v
    return values[best], best


def product_form_check(array: CorrelationArray,
                       tolerance: Optional[Scalar] = None) -> Dict[Tuple[int, int], bool]:
    """Per context: does p(ab|xy) = p_A(a|x,y) p_B(b|x,y) for all a, b"""
    tol = _tolerance(array, tolerance)
    m = marginals(array, tol)
    result = {}
    for x, y in CONTEXTS:
        result[(x, y)] = all(
            abs(array.p(a, b, x, y) - m.alice_p(a, x, y) * m.bob_p(b, x, y)) <= tol
            for a in (0, 1) for b in (0, 1)
        )
    return result


# --- relabelings --------------------------------------------------------------

@dataclass(frozen=True)
class Relabeling:
    """Local reversible operation on an array

    q(a,b|x,y) = p(a ^ alice_outcome_flip[x], b ^ bob_outcome_flip[y] |
                   x ^ alice_setting_swap, y ^ bob_setting_swap)
    """
    alice_setting_swap: int = 0
    alice_outcome_flip: Tuple[int, int] = (0, 0)
    bob_setting_swap: int = 0
    bob_outcome_flip: Tuple[int, int] = (0, 0)

    def is_identity(self) -> bool:
        return self == Relabeling()


def all_relabelings() -> List[Relabeling]:
    """The 64 local relabelings, identity first"""
    bits = (0, 1)
    return [
        Relabeling(sa, (fa0, fa1), sb, (fb0, fb1))
        for sa, fa0, fa1, sb, fb0, fb1 in itertools.product(bits, repeat=6)
    ]


def apply_relabeling(array: CorrelationArray, relabeling: Relabeling) -> CorrelationArray:
    r = relabeling
    values = {}
    for a, b, x, y in ENTRY_KEYS:
        values[(a, b, x, y)] = array.p(a ^ r.alice_outcome_flip[x], b ^ r.bob_outcome_flip[y],
                                       x ^ r.alice_setting_swap, y ^ r.bob_setting_swap)
    return CorrelationArray(values, representation=array.representation)


def variant_relabeling(variant: int) -> Relabeling:
    """Relabeling R with chsh(apply_relabeling(p, R), 0) == chsh(p, variant)"""
    if not 0 <= variant < CHSH_VARIANT_COUNT:
        raise ValueError(f"CHSH variant must be in 0..7, got {variant}")
    mx, my = CHSH_MINUS_CONTEXT[variant % 4]
    flip = 1 if variant >= 4 else 0
    return Relabeling(alice_setting_swap=1 ^ mx, alice_outcome_flip=(flip, flip),
                      bob_setting_swap=1 ^ my, bob_outcome_flip=(0, 0))


def relabeling_orbit(array: CorrelationArray) -> List[CorrelationArray]:
    """Distinct arrays reachable from array by local relabelings, in discovery order"""
    seen = {}
    for relabeling in all_relabelings():
        image = apply_relabeling(array, relabeling)
        seen.setdefault(image, None)
    logger.debug(f"[CorrelationCore] relabeling orbit has {len(seen)} members")
    return list(seen)
