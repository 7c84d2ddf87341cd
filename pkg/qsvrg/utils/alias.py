# qsvrg/utils/alias.py

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..core.exceptions import SamplingError
from .random_streams import RngStream


@dataclass(frozen=True)
class AliasTable:
    """Walker/Vose alias table: O(n) build, O(1) draws"""

    prob: NDArray[np.float64]
    alias: NDArray[np.int64]

    @property
    def n(self) -> int:
        return self.prob.shape[0]

    def probabilities(self) -> NDArray[np.float64]:
        """Probabilities the table actually samples with"""
        q = self.prob.copy()
        np.add.at(q, self.alias, 1.0 - self.prob)
        return q / self.n


def alias_build(weights: ArrayLike) -> AliasTable:
    """Two-worklist alias construction from non-negative weights"""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.shape[0] == 0:
        raise SamplingError("weights must be a non-empty one-dimensional array")
    if not np.all(np.isfinite(w)):
        raise SamplingError("weights must be finite")
    if np.any(w < 0):
        raise SamplingError("weights must be non-negative")
    total = math.fsum(w)
    if total <= 0.0:
        raise SamplingError("at least one weight must be strictly positive")

    n = w.shape[0]
    scaled = (w * n / total).tolist()
    prob = np.zeros(n)
    alias = np.arange(n, dtype=np.int64)

    small = [i for i in range(n) if scaled[i] < 1.0]
    large = [i for i in range(n) if scaled[i] >= 1.0]
    while small and large:
        s = small.pop()
        g = large.pop()
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = (scaled[g] + scaled[s]) - 1.0
        if scaled[g] < 1.0:
            small.append(g)
        else:
            large.append(g)

    # Leftovers only differ from 1 by rounding; zero-weight entries must stay unreachable
    donor = int(np.argmax(w))
    for g in large:
        prob[g] = 1.0
        alias[g] = g
    for s in small:
        if w[s] > 0:
            prob[s] = 1.0
            alias[s] = s
        else:
            prob[s] = 0.0
            alias[s] = donor

    prob.setflags(write=False)
    alias.setflags(write=False)
    return AliasTable(prob=prob, alias=alias)


def alias_sample(table: AliasTable, rng: RngStream) -> int:
    """One draw: a uniform picks the cell, a second uniform flips its coin"""
    n = table.n
    cell = min(int(rng.uniform() * n), n - 1)
    coin = rng.uniform()
    return cell if coin < table.prob[cell] else int(table.alias[cell])


def alias_sample_many(table: AliasTable, rng: RngStream, size: int) -> NDArray[np.int64]:
    """``size`` draws consuming the stream exactly like repeated ``alias_sample`` calls"""
    n = table.n
    u = rng.uniforms(2 * size).reshape(size, 2)
    cells = np.minimum((u[:, 0] * n).astype(np.int64), n - 1)
    keep = u[:, 1] < table.prob[cells]
    return np.where(keep, cells, table.alias[cells])
