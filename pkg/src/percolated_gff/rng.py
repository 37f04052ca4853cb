"""Counter-based random streams.

A stream is identified by ``(seed, name, *labels)``. Its values are an
addressable sequence: element ``i`` depends only on the identity and on ``i``,
never on how many values were drawn before or by which worker. This is what
makes environments, walkers and field replicas reproducible independently of
iteration order and thread count.

The stream is numpy's Philox-4x64 bit generator keyed from a
:class:`numpy.random.SeedSequence`; one raw 64-bit output is spent per value,
so offsets translate into ``advance`` calls on the Philox counter.
"""

import zlib
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy import special

_BLOCK = 4  # Philox-4x64 emits four 64-bit words per counter increment
_MANTISSA = 2.0**-53


@dataclass(frozen=True)
class CounterStream:
    """Addressable stream of uniforms, normals and exponentials.

    :param seed: Master seed (64-bit integer)
    :param name: Stream name, e.g. ``"edges/open"``
    :param labels: Extra integer labels (replica, step, ...)
    """

    seed: int
    name: str
    labels: tuple[int, ...] = ()

    # Public methods

    def child(self, *labels: int) -> "CounterStream":
        """Return the sub-stream with ``labels`` appended."""
        return CounterStream(self.seed, self.name, self.labels + tuple(labels))

    def exponentials(self, start: int, count: int) -> NDArray[np.float64]:
        """Standard exponential variates at positions ``start .. start+count-1``."""
        return -np.log(self.uniforms(start, count))

    def normals(self, start: int, count: int) -> NDArray[np.float64]:
        """Standard normal variates by inversion, one raw word per value."""
        return np.asarray(special.ndtri(self.uniforms(start, count)), dtype=np.float64)

    def uniforms(self, start: int, count: int) -> NDArray[np.float64]:
        """Uniforms in the open interval (0, 1).

        :param start: Position of the first value in the stream
        :param count: Number of values
        :returns: Array of ``count`` uniforms
        :rtype: NDArray[np.float64]
        """
        if start < 0 or count < 0:
            raise ValueError("stream positions must be non-negative")
        raw = self._raw(start, count)
        return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _MANTISSA

    # Private methods

    def _key(self) -> NDArray[np.uint64]:
        spawn_key = (zlib.crc32(self.name.encode("utf-8")),) + self.labels
        sequence = np.random.SeedSequence(
            entropy=self.seed & 0xFFFFFFFFFFFFFFFF, spawn_key=spawn_key
        )
        return sequence.generate_state(2, dtype=np.uint64)

    def _raw(self, start: int, count: int) -> NDArray[np.uint64]:
        bit_generator = np.random.Philox(key=self._key())
        block, skip = divmod(start, _BLOCK)
        if block:
            bit_generator.advance(block)
        raw = bit_generator.random_raw(skip + count)
        return np.asarray(raw, dtype=np.uint64)[skip:]
