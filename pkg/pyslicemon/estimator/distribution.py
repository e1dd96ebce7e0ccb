"""
Laplace model of successive metric differences and the insertion probability
it implies under a change-triggered threshold.
"""
from typing import Optional, Sequence

import numpy as np
from scipy.stats import laplace

from pyslicemon.core.errors import InsufficientDataError

BATCH_ROWS = 256


def deriveSeed(base: int, *parts: int) -> int:
    """Deterministic 32-bit seed from a base seed and integer coordinates."""
    return int(np.random.SeedSequence([int(base) & 0xFFFFFFFF] + [int(p) & 0xFFFFFFFF for p in parts])
               .generate_state(1)[0])


class DiffDistribution:
    """
    :param mu: Location of the fitted Laplace distribution.
    :param b: Scale; 0 marks the constant distribution.
    :param count: Number of samples the fit used.
    :param reservoir: The samples themselves.
    """

    def __init__(self, mu: float, b: float, count: int, reservoir: Optional[Sequence[float]] = None):
        self.mu = float(mu)
        self.b = float(b)
        self.count = int(count)
        self.reservoir = tuple(reservoir) if reservoir is not None else ()

    def isConstant(self) -> bool:
        return self.b == 0.0

    def sample(self, n: int, seed: int) -> np.ndarray:
        if self.isConstant():
            return np.full(n, self.mu)
        return np.random.default_rng(seed).laplace(self.mu, self.b, n)

    def __repr__(self):
        return f'DiffDistribution(mu={self.mu}, b={self.b}, count={self.count})'


def fitDifferences(samples: Sequence[float]) -> DiffDistribution:
    """Laplace maximum-likelihood fit: median location, mean absolute deviation scale."""
    values = np.asarray(samples, dtype=float)
    if values.size == 0:
        raise InsufficientDataError('cannot fit a distribution to zero samples')
    if np.ptp(values) == 0.0:
        return DiffDistribution(float(values[0]), 0.0, values.size, values.tolist())
    mu, b = laplace.fit(values)
    return DiffDistribution(float(mu), float(b), values.size, values.tolist())


def _resetRates(draws: np.ndarray, deltas: np.ndarray) -> np.ndarray:
    """
    draws: (nSteps, rows) differences; deltas: (rows, candidates) thresholds.
    Returns the fraction of steps on which |running sum| reached the threshold,
    the sum restarting from zero after every reset.
    """
    nSteps, rows = draws.shape
    running = np.zeros(deltas.shape)
    resets = np.zeros(deltas.shape)
    for t in range(nSteps):
        running += draws[t][:, None]
        hit = np.abs(running) >= deltas
        resets += hit
        running[hit] = 0.0
    return resets / nSteps


def betaCurve(dist: DiffDistribution, deltas: Sequence[float], nSteps: int = 10000, seed: int = 0) -> np.ndarray:
    """β for every threshold in deltas, sharing one draw sequence across thresholds."""
    return betaMatrix([dist], np.asarray([deltas], dtype=float), nSteps, [seed])[0]


def betaMatrix(dists: Sequence[DiffDistribution], deltas: np.ndarray, nSteps: int,
               seeds: Sequence[int]) -> np.ndarray:
    """Row i holds β of dists[i] over deltas[i]; each row is made non-increasing in Δ."""
    deltas = np.asarray(deltas, dtype=float)
    out = np.empty(deltas.shape)
    for start in range(0, len(dists), BATCH_ROWS):
        stop = min(start + BATCH_ROWS, len(dists))
        draws = np.stack([dists[i].sample(nSteps, seeds[i]) for i in range(start, stop)], axis=1)
        out[start:stop] = _resetRates(draws, deltas[start:stop])
    order = np.argsort(deltas, axis=1, kind='stable')
    ranked = np.take_along_axis(out, order, axis=1)
    ranked = np.minimum.accumulate(ranked, axis=1)
    np.put_along_axis(out, order, ranked, axis=1)
    return out


def betaOf(dist: DiffDistribution, delta: float, nSteps: int = 10000, seed: int = 0) -> float:
    if delta < 0:
        raise ValueError('threshold must be non-negative')
    if nSteps < 1:
        raise ValueError('nSteps must be at least 1')
    return float(betaCurve(dist, [delta], nSteps, seed)[0])
