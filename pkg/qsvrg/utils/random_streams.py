# qsvrg/utils/random_streams.py

"""
Seeded counter-based random streams.

Every stream is a Philox-4x64 generator keyed by (seed, stream_id), so identical pairs give
identical sequences on every platform and distinct stream ids give unrelated sequences.
Uniforms are served from a fixed-size block; a scalar draw and a block draw of the same
length consume the stream identically.
"""

import numpy as np
from numpy.typing import NDArray

UINT64_MAX = 2**64 - 1
BLOCK_SIZE = 4096


class RngStream:
    def __init__(self, seed: int, stream_id: int = 0):
        if not (0 <= seed <= UINT64_MAX and 0 <= stream_id <= UINT64_MAX):
            raise ValueError("seed and stream_id must be 64-bit unsigned integers")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        self._generator = np.random.Generator(np.random.Philox(key=key))
        self._buffer: NDArray[np.float64] = np.empty(0)
        self._position = 0

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"

    def spawn(self, stream_id: int) -> "RngStream":
        """Fresh stream with the same seed and another stream id"""
        return RngStream(self.seed, stream_id)

    def uniform(self) -> float:
        """Next uniform in [0, 1)"""
        if self._position >= self._buffer.shape[0]:
            self._buffer = self._generator.random(BLOCK_SIZE)
            self._position = 0
        value = self._buffer[self._position]
        self._position += 1
        return float(value)

    def uniforms(self, size: int) -> NDArray[np.float64]:
        """Next ``size`` uniforms, in the same order ``uniform`` would return them"""
        out = np.empty(size)
        available = min(size, self._buffer.shape[0] - self._position)
        if available > 0:
            out[:available] = self._buffer[self._position : self._position + available]
            self._position += available
        if size > available:
            out[available:] = self._generator.random(size - available)
        return out

    def integers(self, n: int, size: int) -> NDArray[np.int64]:
        """``size`` uniform indices in [0, n), one uniform each"""
        cells = (self.uniforms(size) * n).astype(np.int64)
        return np.minimum(cells, n - 1)

    def normal(self, size) -> NDArray[np.float64]:
        """Standard normal variates, drawn directly from the underlying generator"""
        return self._generator.standard_normal(size)
