"""Local-hashing frequency oracle over a finite integer domain.

Each user hashes their value into [1, m] with a personally chosen hash
function, perturbs the hashed value by randomized response, and ships the
(hash id, perturbed value) pair. The server counts, per candidate value, how
many reports are consistent with it and debiases the count.

The hash family is a seeded 64-bit mixer reduced to [1, m]; drawing a uniform
random 64-bit seed plays the role of drawing a hash function uniformly from
the family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .errors import ParameterError

try:
    from numba import njit as _njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

__all__ = [
    "HASH_RANGE_CAP",
    "LdpParams",
    "HashFunctionId",
    "Report",
    "ReportBatch",
    "m_for_epsilon",
    "hash_eval",
    "hash_eval_many",
    "perturb",
    "perturb_many",
    "user_report",
    "report_many",
    "support_count",
    "support_counts",
    "estimate",
    "estimate_all",
    "output_distribution",
    "max_probability_ratio",
]

# Hash ranges beyond this add nothing measurable (collision probability below
# 1e-6) but would overflow 64-bit bucket arithmetic for extreme epsilon.
HASH_RANGE_CAP = 1 << 20

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S32 = np.uint64(32)
_U64_MAX = (1 << 64) - 1


def m_for_epsilon(epsilon: float) -> int:
    """Hash range for a budget: e^epsilon + 1 rounded to an integer, at least 2."""
    if not epsilon > 0:
        raise ParameterError(f"epsilon must be positive, got {epsilon}")
    if epsilon >= math.log(HASH_RANGE_CAP):
        return HASH_RANGE_CAP
    return max(2, int(round(math.exp(epsilon) + 1.0)))


@dataclass(frozen=True)
class LdpParams:
    """Privacy budget plus hash range; probabilities use overflow-safe forms."""

    epsilon: float
    m: int

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ParameterError(f"epsilon must be positive, got {self.epsilon}")
        if self.m < 2:
            raise ParameterError(f"hash range must be >= 2, got {self.m}")

    @classmethod
    def from_epsilon(cls, epsilon: float) -> "LdpParams":
        return cls(epsilon=float(epsilon), m=m_for_epsilon(epsilon))

    @property
    def p_keep(self) -> float:
        """Probability the perturbed value equals the hashed value."""
        return 1.0 / (1.0 + (self.m - 1) * math.exp(-self.epsilon))

    @property
    def p_other(self) -> float:
        """Probability of any one specific other value."""
        return math.exp(-self.epsilon) * self.p_keep


@dataclass(frozen=True)
class HashFunctionId:
    """Identifier of one member of the hash family (a 64-bit seed)."""

    seed: int

    def __post_init__(self):
        if not 0 <= self.seed <= _U64_MAX:
            raise ParameterError("hash seed must fit in 64 bits")


@dataclass(frozen=True)
class Report:
    """One user's submission: chosen hash function and perturbed value."""

    hash_id: HashFunctionId
    value: int


class ReportBatch:
    """Columnar report storage: parallel arrays of seeds and values.

    Behaves as a sequence of ``Report`` while keeping the bulk
    representation the estimation kernels operate on.
    """

    __slots__ = ("seeds", "values")

    def __init__(self, seeds: np.ndarray, values: np.ndarray):
        seeds = np.ascontiguousarray(seeds, dtype=np.uint64)
        values = np.ascontiguousarray(values, dtype=np.int64)
        if seeds.shape != values.shape or seeds.ndim != 1:
            raise ParameterError("seeds and values must be equal-length 1-d arrays")
        self.seeds = seeds
        self.values = values

    def __len__(self) -> int:
        return len(self.seeds)

    def __getitem__(self, i: int) -> Report:
        return Report(HashFunctionId(int(self.seeds[i])), int(self.values[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @classmethod
    def from_reports(cls, reports: Iterable[Report]) -> "ReportBatch":
        rs = list(reports)
        return cls(
            np.array([r.hash_id.seed for r in rs], dtype=np.uint64),
            np.array([r.value for r in rs], dtype=np.int64),
        )


def _as_batch(reports) -> ReportBatch:
    if isinstance(reports, ReportBatch):
        return reports
    return ReportBatch.from_reports(reports)


def _mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer, vectorized over uint64 arrays."""
    z = z ^ (z >> _S30)
    z = z * _MIX1
    z = z ^ (z >> _S27)
    z = z * _MIX2
    return z ^ (z >> _S31)


def _value_tweak(values: np.ndarray) -> np.ndarray:
    return _mix64((values + np.uint64(1)) * _GOLDEN)


def _bucket(z: np.ndarray, m: int) -> np.ndarray:
    """Reduce mixed 64-bit words to [0, m) by multiply-shift on the top bits."""
    return ((z >> _S32) * np.uint64(m)) >> _S32


def hash_eval_many(seeds, values, m: int) -> np.ndarray:
    """Vectorized hash family evaluation; returns values in [1, m]."""
    if m < 2:
        raise ParameterError(f"hash range must be >= 2, got {m}")
    if m > HASH_RANGE_CAP:
        raise ParameterError(f"hash range exceeds cap {HASH_RANGE_CAP}")
    seeds = np.ascontiguousarray(seeds, dtype=np.uint64)
    values = np.ascontiguousarray(values, dtype=np.uint64)
    z = _mix64(seeds ^ _value_tweak(values))
    return (_bucket(z, m) + np.uint64(1)).astype(np.int64)


def hash_eval(hash_id: Union[HashFunctionId, int], v: int, m: int) -> int:
    """Hash of domain index ``v`` under one hash function; result in [1, m]."""
    seed = hash_id.seed if isinstance(hash_id, HashFunctionId) else int(hash_id)
    return int(hash_eval_many(np.array([seed], dtype=np.uint64), [v], m)[0])


def perturb(x: int, params: LdpParams, rng: np.random.Generator) -> int:
    """Randomized response on [1, m]: keep ``x`` with probability p_keep,
    otherwise return one of the other m-1 values uniformly."""
    m = params.m
    if not 1 <= x <= m:
        raise ParameterError(f"value {x} outside [1, {m}]")
    if rng.random() < params.p_keep:
        return x
    r = int(rng.integers(1, m))
    return r if r < x else r + 1


def perturb_many(xs: np.ndarray, params: LdpParams, rng: np.random.Generator) -> np.ndarray:
    """Vectorized randomized response; one user per element.

    Draws a fixed number of variates per user regardless of outcome, so the
    per-user randomness depends only on the user's position in the array.
    """
    xs = np.ascontiguousarray(xs, dtype=np.int64)
    m = params.m
    if len(xs) and (xs.min() < 1 or xs.max() > m):
        raise ParameterError(f"values outside [1, {m}]")
    keep = rng.random(len(xs)) < params.p_keep
    r = rng.integers(1, m, size=len(xs), dtype=np.int64)
    alt = np.where(r < xs, r, r + 1)
    return np.where(keep, xs, alt)


def user_report(
    v: int, domain_size: int, params: LdpParams, rng: np.random.Generator
) -> Report:
    """Full user-side protocol for one user holding domain index ``v``."""
    if not 0 <= v < domain_size:
        raise ParameterError(f"domain index {v} outside [0, {domain_size})")
    seed = int(rng.integers(0, 2**64, dtype=np.uint64))
    x = hash_eval(seed, v, params.m)
    return Report(HashFunctionId(seed), perturb(x, params, rng))


def report_many(
    values: np.ndarray, domain_size: int, params: LdpParams, rng: np.random.Generator
) -> ReportBatch:
    """User-side protocol for a population of users (one report each)."""
    values = np.ascontiguousarray(values, dtype=np.int64)
    if len(values) and (values.min() < 0 or values.max() >= domain_size):
        raise ParameterError(f"domain indices outside [0, {domain_size})")
    seeds = rng.integers(0, 2**64, size=len(values), dtype=np.uint64)
    xs = hash_eval_many(seeds, values, params.m)
    return ReportBatch(seeds, perturb_many(xs, params, rng))


def support_count(reports, v: int, m: int) -> int:
    """Number of reports whose value matches their own hash of ``v``."""
    batch = _as_batch(reports)
    if len(batch) == 0:
        return 0
    return int(np.count_nonzero(hash_eval_many(batch.seeds, np.full(len(batch), v), m) == batch.values))


if _HAVE_NUMBA:

    @_njit(cache=True)
    def _support_counts_kernel(seeds, targets, domain_size, m):  # pragma: no cover
        n = seeds.shape[0]
        out = np.zeros(domain_size, dtype=np.int64)
        for v in range(domain_size):
            c = (np.uint64(v) + np.uint64(1)) * np.uint64(0x9E3779B97F4A7C15)
            c ^= c >> np.uint64(30)
            c *= np.uint64(0xBF58476D1CE4E5B9)
            c ^= c >> np.uint64(27)
            c *= np.uint64(0x94D049BB133111EB)
            c ^= c >> np.uint64(31)
            acc = 0
            for u in range(n):
                z = seeds[u] ^ c
                z ^= z >> np.uint64(30)
                z *= np.uint64(0xBF58476D1CE4E5B9)
                z ^= z >> np.uint64(27)
                z *= np.uint64(0x94D049BB133111EB)
                z ^= z >> np.uint64(31)
                if ((z >> np.uint64(32)) * m) >> np.uint64(32) == targets[u]:
                    acc += 1
            out[v] = acc
        return out


def support_counts(reports, domain_size: int, m: int) -> np.ndarray:
    """Support counts for every domain value at once."""
    batch = _as_batch(reports)
    if len(batch) == 0:
        return np.zeros(domain_size, dtype=np.int64)
    if _HAVE_NUMBA:
        targets = (batch.values - 1).astype(np.uint64)
        return _support_counts_kernel(
            batch.seeds, targets, domain_size, np.uint64(m)
        )
    out = np.empty(domain_size, dtype=np.int64)
    for v in range(domain_size):
        out[v] = support_count(batch, v, m)
    return out


def estimate(sup: int, n_users: int, params: LdpParams) -> float:
    """Debiased count from one support count; may be negative, never clamped."""
    if n_users < 1:
        raise ParameterError("n_users must be >= 1")
    if not 0 <= sup <= n_users:
        raise ParameterError(f"support {sup} outside [0, {n_users}]")
    m = params.m
    e = math.exp(-params.epsilon)
    ratio = (1.0 + (m - 1) * e) / (1.0 - e)  # (e^eps + m - 1) / (e^eps - 1)
    return ratio * (m * sup - n_users) / (m - 1)


def estimate_all(reports, domain_size: int, n_users: int, params: LdpParams) -> np.ndarray:
    """Debiased count estimate for every domain value."""
    sups = support_counts(reports, domain_size, params.m)
    m = params.m
    e = math.exp(-params.epsilon)
    ratio = (1.0 + (m - 1) * e) / (1.0 - e)
    return ratio * (m * sups - n_users) / (m - 1)


def output_distribution(x: int, params: LdpParams) -> np.ndarray:
    """Probability of each output in [1, m] when the hashed value is ``x``
    (index i holds the probability of output i+1)."""
    m = params.m
    if not 1 <= x <= m:
        raise ParameterError(f"value {x} outside [1, {m}]")
    probs = np.full(m, params.p_other)
    probs[x - 1] = params.p_keep
    return probs


def max_probability_ratio(params: LdpParams) -> float:
    """Largest Pr[y | x] / Pr[y | x*] over all inputs x != x* and outputs y.

    The perturbation step assigns every output one of two probabilities, so
    the maximum is the keep/other ratio, attained at y = x.
    """
    return params.p_keep / params.p_other
