"""Monte Carlo coincidence counting over the two-party detection models.

Each of the nine correlations is measured in one fixed pair of device
settings.  A run draws a Poisson number of pairs per correlation, samples
joint two-bit x two-bit outcomes from the Born-rule distribution, and
forms the counting estimator

    E(p) = [C(p=+1) - C(p=-1)] / [C(p=+1) + C(p=-1)]

with the binomial standard error sqrt((1 - E^2)/n).  Joint outcomes are
indexed by (bit1_A, bit2_A, bit1_B, bit2_B) with bit +1 mapping to 0, so

    outcome index = 8*i(bit1_A) + 4*i(bit2_A) + 2*i(bit1_B) + i(bit2_B).

Randomness comes from the counter-based Philox generator; every
correlation derives its own stream from (seed, correlation index), so
reports do not depend on execution order and are bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

import numpy as np

from .observables import (
    CORRELATIONS,
    CORRELATION_BY_ID,
    Correlation,
    Setting,
    bell_operator,
    context,
    correlation_operator,
    CONTEXT_SYMBOLS,
)
from .apparatus import build_apparatus
from .qstate import DIM, Party, mixed_expectation

RNG_ALGORITHM = "philox4x64"

DEFAULT_PAIR_RATE = 3.2e4
DEFAULT_DURATION = 1.0


@dataclass(frozen=True)
class ContextPair:
    alice: Setting
    bob: Setting


def _setting_containing(party: Party, symbol: str) -> Setting:
    hits = [s for s in Setting if symbol in CONTEXT_SYMBOLS[(party, s)]]
    if len(hits) != 1:
        raise ValueError(f"symbol {symbol!r} is not readable in a unique {party.value} setting")
    return hits[0]


@lru_cache(maxsize=None)
def context_pair(corr_id: str) -> ContextPair:
    """The unique device-setting pair in which a correlation is measurable."""
    corr = CORRELATION_BY_ID[corr_id]
    settings: dict[Party, Setting] = {}
    for party, symbol in corr.factors:
        s = _setting_containing(party, symbol)
        if settings.setdefault(party, s) is not s:
            raise ValueError(f"correlation {corr_id!r} mixes settings for {party.value}")
    return ContextPair(alice=settings[Party.ALICE], bob=settings[Party.BOB])


# signed readout bits per outcome index, columns (bit1_A, bit2_A, bit1_B, bit2_B)
OUTCOME_BITS = np.array(
    [[1 - 2 * ((i >> b) & 1) for b in (3, 2, 1, 0)] for i in range(DIM)], dtype=int
)
OUTCOME_BITS.setflags(write=False)


def outcome_index(bit1_a: int, bit2_a: int, bit1_b: int, bit2_b: int) -> int:
    idx = 0
    for bit in (bit1_a, bit2_a, bit1_b, bit2_b):
        idx = 2 * idx + (0 if bit > 0 else 1)
    return idx


@lru_cache(maxsize=None)
def _joint_projectors(alice: Setting, bob: Setting) -> np.ndarray:
    """(16, 16, 16) stack of joint outcome projectors for a setting pair."""
    model_a = build_apparatus(Party.ALICE, alice)
    model_b = build_apparatus(Party.BOB, bob)
    stack = np.zeros((DIM, DIM, DIM), dtype=complex)
    for ch_a in model_a.outcomes:
        for ch_b in model_b.outcomes:
            idx = outcome_index(ch_a.bit1, ch_a.bit2, ch_b.bit1, ch_b.bit2)
            stack[idx] = ch_a.projector @ ch_b.projector
    stack.setflags(write=False)
    return stack


@lru_cache(maxsize=None)
def _statistic_signs(corr_id: str) -> np.ndarray:
    """Per-outcome value (+-1) of a correlation's bit-product statistic."""
    corr = CORRELATION_BY_ID[corr_id]
    pair = context_pair(corr_id)
    signs = np.ones(DIM, dtype=int)
    for party, symbol in corr.factors:
        setting = pair.alice if party is Party.ALICE else pair.bob
        pos = context(party, setting).bit_position(symbol)
        base = 0 if party is Party.ALICE else 2
        if pos == 2:  # derived product, multiply both readout bits
            signs = signs * OUTCOME_BITS[:, base] * OUTCOME_BITS[:, base + 1]
        else:
            signs = signs * OUTCOME_BITS[:, base + pos]
    signs.setflags(write=False)
    return signs


def outcome_distribution(rho: np.ndarray, pair: ContextPair) -> np.ndarray:
    """Born-rule probabilities of the 16 joint outcomes for a setting pair."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (DIM, DIM):
        raise ValueError(f"density matrix must be {DIM}x{DIM}")
    stack = _joint_projectors(pair.alice, pair.bob)
    p = np.einsum("oij,ji->o", stack, rho)
    if float(np.max(np.abs(p.imag))) > 1e-10:
        raise ValueError("outcome probabilities acquired an imaginary part")
    p = p.real
    if float(p.min()) < -1e-10:
        raise ValueError(f"negative outcome probability {float(p.min()):.3e}")
    if abs(float(p.sum()) - 1.0) > 1e-10:
        raise ValueError("outcome probabilities do not sum to 1")
    return np.clip(p, 0.0, None)


@dataclass(frozen=True)
class CountTable:
    counts: tuple[int, ...]
    total: int

    def __post_init__(self):
        if len(self.counts) != DIM:
            raise ValueError(f"count table needs {DIM} bins")
        if any(c < 0 for c in self.counts):
            raise ValueError("counts must be non-negative")
        if sum(self.counts) != self.total:
            raise ValueError("counts do not sum to total")


def _stream(seed: int, stream_index: int) -> np.random.Generator:
    key = np.array([seed % (1 << 64), stream_index % (1 << 64)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _draw_counts(rng: np.random.Generator, dist: np.ndarray, n: int) -> CountTable:
    p = np.clip(np.asarray(dist, dtype=float), 0.0, None)
    p = p / p.sum()
    counts = rng.multinomial(n, p) if n > 0 else np.zeros(DIM, dtype=int)
    return CountTable(tuple(int(c) for c in counts), int(n))


def sample_events(dist, n: int, seed: int) -> CountTable:
    """Multinomial sample of n events, deterministic for a given seed."""
    if n < 0:
        raise ValueError("sample size must be non-negative")
    return _draw_counts(_stream(seed, 0), np.asarray(dist, dtype=float), n)


@dataclass(frozen=True)
class CorrelationEstimate:
    id: str
    E: float
    stderr: float
    n: int


def estimate_correlation(table: CountTable, corr: Correlation | str) -> CorrelationEstimate:
    """Counting estimator and binomial standard error for one correlation."""
    corr_id = corr.id if isinstance(corr, Correlation) else corr
    if corr_id not in CORRELATION_BY_ID:
        raise KeyError(f"unknown correlation id {corr_id!r}")
    if table.total <= 0:
        raise ValueError(f"correlation {corr_id!r} undefined: no events counted")
    signs = _statistic_signs(corr_id)
    counts = np.asarray(table.counts, dtype=float)
    c_plus = float(counts[signs > 0].sum())
    c_minus = float(counts[signs < 0].sum())
    e = (c_plus - c_minus) / table.total
    stderr = math.sqrt(max(1.0 - e * e, 0.0) / table.total)
    return CorrelationEstimate(corr_id, e, stderr, table.total)


@dataclass(frozen=True)
class Schedule:
    """Pairs per second and collection time, with per-correlation overrides."""

    pair_rate: float = DEFAULT_PAIR_RATE
    duration: float = DEFAULT_DURATION
    overrides: Mapping[str, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        if not (self.pair_rate > 0.0 and self.duration > 0.0):
            raise ValueError("pair_rate and duration must be positive")
        for corr_id, (rate, duration) in self.overrides.items():
            if corr_id not in CORRELATION_BY_ID:
                raise ValueError(f"override for unknown correlation {corr_id!r}")
            if not (rate > 0.0 and duration > 0.0):
                raise ValueError(f"override for {corr_id!r} must be positive")

    def mean_counts(self, corr_id: str) -> float:
        rate, duration = self.overrides.get(corr_id, (self.pair_rate, self.duration))
        return rate * duration

    def to_dict(self) -> dict:
        return {
            "pair_rate": self.pair_rate,
            "duration": self.duration,
            "overrides": {
                k: {"pair_rate": r, "duration": d} for k, (r, d) in sorted(self.overrides.items())
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Schedule":
        known = {"pair_rate", "duration", "overrides"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown schedule fields: {sorted(unknown)}")
        overrides = {}
        for corr_id, entry in d.get("overrides", {}).items():
            sub_unknown = set(entry) - {"pair_rate", "duration"}
            if sub_unknown:
                raise ValueError(f"unknown override fields: {sorted(sub_unknown)}")
            overrides[corr_id] = (
                float(entry.get("pair_rate", d.get("pair_rate", DEFAULT_PAIR_RATE))),
                float(entry.get("duration", d.get("duration", DEFAULT_DURATION))),
            )
        return cls(
            pair_rate=float(d.get("pair_rate", DEFAULT_PAIR_RATE)),
            duration=float(d.get("duration", DEFAULT_DURATION)),
            overrides=overrides,
        )


@dataclass(frozen=True)
class ExperimentReport:
    estimates: tuple[CorrelationEstimate, ...]
    bell_value: float
    bell_stderr: float
    sigma_violation: float
    m_fidelity: float
    m_histogram: tuple[float, ...]
    seed: int | None
    schedule: Schedule | None
    mode: str
    rng_algorithm: str | None

    def estimate(self, corr_id: str) -> CorrelationEstimate:
        for est in self.estimates:
            if est.id == corr_id:
                return est
        raise KeyError(corr_id)

    def to_dict(self) -> dict:
        doc: dict = {"mode": self.mode}
        if self.mode == "sampled":
            doc["rng"] = {"algorithm": self.rng_algorithm, "seed": self.seed}
            doc["schedule"] = self.schedule.to_dict() if self.schedule is not None else None
        doc["correlations"] = [
            {
                "id": est.id,
                "sign": CORRELATION_BY_ID[est.id].sign,
                "E": est.E,
                "stderr": est.stderr,
                "n": est.n,
            }
            for est in self.estimates
        ]
        doc["bell_value"] = self.bell_value
        doc["bell_stderr"] = self.bell_stderr
        doc["sigma_violation"] = self.sigma_violation
        doc["m_fidelity"] = self.m_fidelity
        doc["m_histogram"] = list(self.m_histogram)
        return doc


def _aggregate(estimates: list[CorrelationEstimate]) -> tuple[float, float, float]:
    bell = sum(c.sign * est.E for c, est in zip(CORRELATIONS, estimates))
    var = sum(est.stderr ** 2 for est in estimates)
    stderr = math.sqrt(var)
    if stderr > 0.0:
        sigma = (bell - 7.0) / stderr
    else:
        sigma = math.inf if bell > 7.0 else (-math.inf if bell < 7.0 else math.nan)
    return bell, stderr, sigma


def run_schedule(rho: np.ndarray, schedule: Schedule, seed: int) -> ExperimentReport:
    """Sample all nine correlations and aggregate the Bell statistics.

    Event counts are Poisson around rate*duration; each correlation uses
    its own (seed, index) Philox stream, so identical inputs give
    bit-identical reports regardless of evaluation order.
    """
    estimates = []
    m_histogram: tuple[float, ...] | None = None
    m_fidelity = math.nan
    for idx, corr in enumerate(CORRELATIONS):
        rng = _stream(seed, idx)
        n = int(rng.poisson(schedule.mean_counts(corr.id)))
        dist = outcome_distribution(rho, context_pair(corr.id))
        table = _draw_counts(rng, dist, n)
        estimates.append(estimate_correlation(table, corr))
        if corr.id == "M":
            counts = np.asarray(table.counts, dtype=float)
            m_histogram = tuple(counts / table.total)
            signs = _statistic_signs("M")
            m_fidelity = float(counts[signs < 0].sum() / table.total)
    bell, stderr, sigma = _aggregate(estimates)
    return ExperimentReport(
        estimates=tuple(estimates),
        bell_value=bell,
        bell_stderr=stderr,
        sigma_violation=sigma,
        m_fidelity=m_fidelity,
        m_histogram=m_histogram,
        seed=seed,
        schedule=schedule,
        mode="sampled",
        rng_algorithm=RNG_ALGORITHM,
    )


def predict_exact(rho: np.ndarray) -> ExperimentReport:
    """Analytic report: expectation values instead of sampled counts."""
    estimates = [
        CorrelationEstimate(corr.id, mixed_expectation(correlation_operator(corr), rho), 0.0, 0)
        for corr in CORRELATIONS
    ]
    bell = mixed_expectation(bell_operator(), rho)
    hist = outcome_distribution(rho, context_pair("M"))
    signs = _statistic_signs("M")
    fidelity = float(hist[signs < 0].sum())
    sigma = math.inf if bell > 7.0 else (-math.inf if bell < 7.0 else math.nan)
    return ExperimentReport(
        estimates=tuple(estimates),
        bell_value=bell,
        bell_stderr=0.0,
        sigma_violation=sigma,
        m_fidelity=fidelity,
        m_histogram=tuple(float(x) for x in hist),
        seed=None,
        schedule=None,
        mode="exact",
        rng_algorithm=None,
    )
