"""
Banana Simulator for the Bananaworld Correlation Analyzer
Seeded stochastic sources for pure-state bananas, (E)PR pairs, Klyachko bunches
and LHV models, plus empirical aggregation back into correlation arrays
"""

import hashlib
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

import numpy as np

from .constants import (CONTEXTS, DEFAULT_BLOCK_SIZE, DEFAULT_MAX_WORKERS, ENTRY_KEYS,
                        KLYACHKO_BANANA_VALUE)
from .correlation_core import (FLOAT, RATIONAL, CorrelationArray, Outcome, Setting,
                               require_valid, table)
from .errors import BunchStateError, InedibleBunchError, InvalidModelError, SamplingError
from .polytopes import DeterministicVertex, LhvModel
from .serialization import array_to_dict

logger = logging.getLogger(__name__)

SEED_LIMIT = 2 ** 64


# --- randomness -------------------------------------------------------------------

def sub_seed(seed: int, x: int, y: int, block: int) -> int:
    """seed XOR the first 8 bytes (little endian) of blake2b("x:y:block")"""
    digest = hashlib.blake2b(f"{x}:{y}:{block}".encode("ascii"), digest_size=8).digest()
    return seed ^ int.from_bytes(digest, "little")


class RandomSource:
    """64-bit seed driving numpy's PCG64 bit generator"""

    def __init__(self, seed: int):
        if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
            raise SamplingError(f"seed must be an integer, got {seed!r}")
        if not 0 <= int(seed) < SEED_LIMIT:
            raise SamplingError(f"seed must be in [0, 2**64), got {seed}")
        self.seed = int(seed)
        self.generator = np.random.Generator(np.random.PCG64(self.seed))

    def bit(self) -> int:
        return int(self.generator.integers(0, 2))

    def bits(self, n: int) -> np.ndarray:
        return self.generator.integers(0, 2, size=n, dtype=np.int8)

    def uniform(self, n: int) -> np.ndarray:
        return self.generator.random(n)

    def child(self, x: int, y: int, block: int) -> "RandomSource":
        return RandomSource(sub_seed(self.seed, x, y, block))


# --- pure-state bananas ----------------------------------------------------------------

class PureBananaState(Enum):
    """Peeling the matching half gives the listed taste; the other half is a fair coin"""
    Y0 = (Setting.Y, Outcome.ORDINARY)
    Y1 = (Setting.Y, Outcome.INTENSE)
    B0 = (Setting.B, Outcome.ORDINARY)
    B1 = (Setting.B, Outcome.INTENSE)

    @property
    def sharp_peeling(self) -> Setting:
        return self.value[0]

    @property
    def sharp_taste(self) -> Outcome:
        return self.value[1]


def peel_pure(state: PureBananaState, peeling: Setting, rng: RandomSource) -> Outcome:
    if Setting(peeling) == state.sharp_peeling:
        return state.sharp_taste
    return Outcome(rng.bit())


def _peel_pure_many(state: PureBananaState, peeling: int, rng: RandomSource, n: int) -> np.ndarray:
    if Setting(peeling) == state.sharp_peeling:
        return np.full(n, int(state.sharp_taste), dtype=np.int8)
    return rng.bits(n)


# --- (E)PR pairs ------------------------------------------------------------------------

def peel_epr(x: Setting, y: Setting, rng: RandomSource) -> Tuple[Outcome, Outcome]:
    """Same taste unless both peel B; each taste pattern equally likely"""
    u = rng.bit()
    return Outcome(u), Outcome(u ^ (int(x) & int(y)))


# --- sources ----------------------------------------------------------------------------

class EprPairSource:
    name = "epr"

    def sample(self, x: int, y: int, rng: RandomSource) -> Tuple[Outcome, Outcome]:
        return peel_epr(x, y, rng)

    def sample_many(self, x: int, y: int, rng: RandomSource, n: int) -> Tuple[np.ndarray, np.ndarray]:
        u = rng.bits(n)
        return u, u ^ np.int8(int(x) & int(y))


class PureProductSource:
    """Two independent pure-state bananas, one per party"""
    name = "pure"

    def __init__(self, alice: PureBananaState = PureBananaState.Y0,
                 bob: PureBananaState = PureBananaState.Y0):
        self.alice = alice
        self.bob = bob

    def sample(self, x: int, y: int, rng: RandomSource) -> Tuple[Outcome, Outcome]:
        return peel_pure(self.alice, x, rng), peel_pure(self.bob, y, rng)

    def sample_many(self, x: int, y: int, rng: RandomSource, n: int) -> Tuple[np.ndarray, np.ndarray]:
        a = _peel_pure_many(self.alice, x, rng, n)
        b = _peel_pure_many(self.bob, y, rng, n)
        return a, b


class LhvSource:
    """Draw λ by weight, then the outcomes of the λ-conditioned array"""
    name = "lhv"

    def __init__(self, model: LhvModel):
        if not isinstance(model, LhvModel):
            raise InvalidModelError(f"expected an LhvModel, got {type(model).__name__}")
        self.model = model
        weights = np.array([float(w) for w in model.weights()])
        self._weights = weights / weights.sum()
        # per λ and context, cumulative distribution over (a, b) in order 00 01 10 11
        self._cumulative = {}
        arrays = model.arrays()
        for x, y in CONTEXTS:
            rows = [[float(arr.p(a, b, x, y)) for a in (0, 1) for b in (0, 1)] for arr in arrays]
            self._cumulative[(x, y)] = np.cumsum(np.array(rows), axis=1)

    def sample(self, x: int, y: int, rng: RandomSource) -> Tuple[Outcome, Outcome]:
        a, b = self.sample_many(x, y, rng, 1)
        return Outcome(int(a[0])), Outcome(int(b[0]))

    def sample_many(self, x: int, y: int, rng: RandomSource, n: int) -> Tuple[np.ndarray, np.ndarray]:
        lam = rng.generator.choice(len(self._weights), size=n, p=self._weights)
        cumulative = self._cumulative[(int(x), int(y))][lam]
        u = rng.uniform(n)
        index = np.minimum((u[:, None] >= cumulative).sum(axis=1), 3).astype(np.int8)
        return index >> 1, index & 1


def sample_lhv(model: LhvModel, x: Setting, y: Setting, rng: RandomSource) -> Tuple[Outcome, Outcome]:
    return LhvSource(model).sample(x, y, rng)


# --- Klyachko bunches --------------------------------------------------------------------

def _adjacent(i: int, j: int) -> bool:
    return (i - j) % 5 in (1, 4)


@dataclass
class KlyachkoBunch:
    """Five bananas on a cycle; only one adjacent pair may be peeled on the stem"""
    peeled: Set[int] = field(default_factory=set)
    edible: bool = True

    def peel(self, i: int, j: int, rng: RandomSource) -> Tuple[Outcome, Outcome]:
        for k in (i, j):
            if not 0 <= k < 5:
                raise InedibleBunchError(f"banana index must be in 0..4, got {k}")
        if self.peeled or not self.edible:
            self.edible = False
            raise BunchStateError(f"bunch already peeled at {sorted(self.peeled)}")
        if not _adjacent(i, j):
            self.edible = False
            raise InedibleBunchError(f"bananas {i} and {j} are not adjacent")
        self.peeled = {i, j}
        # the remaining three are inedible now
        self.edible = False
        u = rng.bit()
        return Outcome(u), Outcome(1 - u)


def peel_klyachko(bunch: KlyachkoBunch, i: int, j: int, rng: RandomSource) -> Tuple[Outcome, Outcome]:
    """One of an adjacent pair tastes ordinary, the other intense, each way with probability 1/2"""
    return bunch.peel(i, j, rng)


@dataclass(frozen=True)
class KlyachkoEstimate:
    per_banana: Tuple[float, ...]
    total: float
    trials_per_edge: int
    seed: int


def estimate_klyachko_sum(trials_per_edge: int, seed: int) -> KlyachkoEstimate:
    """Monte-Carlo estimate of sum_k p(k tastes intense) over fresh bunches on every edge"""
    if trials_per_edge < 1:
        raise SamplingError("trials_per_edge must be at least 1")
    root = RandomSource(seed)
    intense = np.zeros(5)
    peels = np.zeros(5)
    for i in range(5):
        j = (i + 1) % 5
        rng = root.child(i, j, 0)
        u = rng.bits(trials_per_edge)
        intense[i] += int(u.sum())
        intense[j] += trials_per_edge - int(u.sum())
        peels[i] += trials_per_edge
        peels[j] += trials_per_edge
    per_banana = tuple(float(v) for v in intense / peels)
    total = float(sum(per_banana))
    logger.info(f"[BananaSim] Klyachko estimate {total:.5f} from {trials_per_edge} trials per edge")
    return KlyachkoEstimate(per_banana=per_banana, total=total,
                            trials_per_edge=trials_per_edge, seed=seed)


def klyachko_banana_value() -> Fraction:
    """Summing p_i + p_{i+1} = 1 over the five edges counts every banana twice"""
    edge_totals = [Fraction(1)] * 5
    value = sum(edge_totals) / 2
    assert value == KLYACHKO_BANANA_VALUE
    return value


# --- empirical arrays ------------------------------------------------------------------------

@dataclass(frozen=True)
class EmpiricalArray:
    """Outcome counts per context and the frequency array they define"""
    counts: Dict[Tuple[int, int, int, int], int]
    trials: int
    seed: int
    source: str = ""

    @property
    def array(self) -> CorrelationArray:
        return CorrelationArray({k: self.counts[k] / self.trials for k in ENTRY_KEYS},
                                representation=FLOAT)

    def to_rational(self) -> CorrelationArray:
        return CorrelationArray({k: Fraction(self.counts[k], self.trials) for k in ENTRY_KEYS},
                                representation=RATIONAL)

    def to_dict(self) -> dict:
        payload = array_to_dict(self.array)
        payload["counts"] = [
            {"a": a, "b": b, "x": x, "y": y, "count": self.counts[(a, b, x, y)]}
            for a, b, x, y in ENTRY_KEYS
        ]
        payload["seed"] = self.seed
        payload["trials"] = self.trials
        payload["source"] = self.source
        return payload


def _run_block(source, seed: int, x: int, y: int, block: int, n: int) -> np.ndarray:
    rng = RandomSource(sub_seed(seed, x, y, block))
    a, b = source.sample_many(x, y, rng, n)
    return np.bincount(2 * a.astype(np.int64) + b.astype(np.int64), minlength=4)


def empirical_array(source, trials_per_context: int, seed: int,
                    block_size: int = DEFAULT_BLOCK_SIZE,
                    max_workers: int = DEFAULT_MAX_WORKERS) -> EmpiricalArray:
    """Run every context trials_per_context times over sub-seeded blocks

    Blocks run on a worker pool and are merged in block order, so the counts depend
    only on the seed and the trial count.
    """
    if isinstance(trials_per_context, bool) or int(trials_per_context) < 1:
        raise SamplingError(f"trials_per_context must be at least 1, got {trials_per_context}")
    if block_size < 1 or max_workers < 1:
        raise SamplingError("block_size and max_workers must be positive")
    RandomSource(seed)  # validates the seed
    trials = int(trials_per_context)

    jobs = []
    for x, y in CONTEXTS:
        for block in range(math.ceil(trials / block_size)):
            n = min(block_size, trials - block * block_size)
            jobs.append((x, y, block, n))
    logger.debug(f"[BananaSim] {len(jobs)} blocks for {getattr(source, 'name', source)} "
                 f"with seed {seed}")

    counts = {k: 0 for k in ENTRY_KEYS}
    with ThreadPoolExecutor(max_workers=max_workers, thread_name_prefix="SampleWorker") as pool:
        futures = [pool.submit(_run_block, source, seed, x, y, block, n) for x, y, block, n in jobs]
        for (x, y, _, _), future in zip(jobs, futures):
            tally = future.result()
            for a in (0, 1):
                for b in (0, 1):
                    counts[(a, b, x, y)] += int(tally[2 * a + b])

    result = EmpiricalArray(counts=counts, trials=trials, seed=seed,
                            source=getattr(source, "name", type(source).__name__))
    require_valid(result.array)
    return result


# --- inference demonstrations -----------------------------------------------------------------

def infer_peeling_from_clone(j: Outcome, k: Outcome) -> Setting:
    """Bob's clone tasted under Y gives j and under B gives k; equal tastes mean Alice peeled Y"""
    return Setting.Y if int(j) == int(k) else Setting.B


def epr_counterfactual_assignments(alice_peeling: Setting,
                                   alice_taste: Outcome) -> FrozenSet[Tuple[Outcome, Outcome]]:
    """Definite tastes (j, k) of Bob's banana under Y and B that agree with the (E)PR table"""
    epr = table(1)
    x, a = int(alice_peeling), int(alice_taste)
    consistent = set()
    for j in (0, 1):
        for k in (0, 1):
            if epr.p(a, j, x, 0) > 0 and epr.p(a, k, x, 1) > 0:
                consistent.add((Outcome(j), Outcome(k)))
    return frozenset(consistent)


def lhv_model_from_vertices(indices: List[int], weights: Optional[List[Fraction]] = None) -> LhvModel:
    """LHV model over deterministic vertex indices, uniform when no weights are given"""
    vertices = [DeterministicVertex.from_index(i) for i in indices]
    if weights is None:
        return LhvModel.uniform(vertices)
    return LhvModel(tuple(zip(vertices, weights)))
