"""Counter-based random streams.

Sample ``i`` of a stream always reads the same block of Philox output, so a
result never depends on how the sample range is split across workers.
"""
import numpy as np

_OPEN_SHIFT = 2.0 ** -54


class CounterStream:
    """Random uniforms addressed by sample index.

    Parameters
    ----------
    seed : int
        64-bit unsigned seed; forms the first Philox key word.
    stream : int
        Purpose tag; forms the second key word so that differently tagged
        streams with the same seed are independent.
    """

    def __init__(self, seed: int, stream: int = 0):
        seed = int(seed)
        stream = int(stream)
        if not 0 <= seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if not 0 <= stream < 2**64:
            raise ValueError("stream tag must be a 64-bit unsigned integer")
        self.seed = seed
        self.stream = stream

    def child(self, stream: int) -> "CounterStream":
        """Stream with the same seed and a different purpose tag."""
        return CounterStream(self.seed, stream)

    def uniforms(self, start: int, count: int, width: int) -> np.ndarray:
        """Return a ``(count, width)`` array of uniforms on the open interval (0, 1).

        Row ``r`` belongs to sample ``start + r``.  Each sample owns a block of
        ``width`` rounded up to a multiple of four 64-bit words, which is one
        Philox counter increment per four words.
        """
        if start < 0 or count < 0 or width < 1:
            raise ValueError("start, count must be >= 0 and width >= 1")
        block = -(-width // 4) * 4
        bitgen = np.random.Philox(key=np.array([self.seed, self.stream], dtype=np.uint64))
        bitgen.advance(start * (block // 4))
        raw = np.random.Generator(bitgen).random(count * block)
        raw += _OPEN_SHIFT
        return raw.reshape(count, block)[:, :width]

    def generator(self, index: int = 0) -> np.random.Generator:
        """Conventional generator for sequential (single-owner) consumers."""
        return np.random.Generator(
            np.random.Philox(key=np.array([self.seed, self.stream], dtype=np.uint64),
                             counter=np.array([0, 0, 0, index], dtype=np.uint64)))
