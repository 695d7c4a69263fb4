# stable_core/random_stream.py

import numpy as np

from .errors import DomainError


class RandomStream:
    """
    Воспроизводимый поток случайных чисел

    Один и тот же (seed, stream_id) всегда даёт одну и ту же
    последовательность. Для параллельной работы каждому воркеру выдаётся
    свой подпоток через substream(i); один поток нельзя делить между
    воркерами.

    Args:
        seed: 64-битное целое
        stream_id: Номер потока
        path: Ключ порождения (заполняется substream)
    """

    def __init__(self, seed, stream_id=0, path=()):
        seed = int(seed)
        if not (0 <= seed < 2**64):
            raise DomainError(f"seed должен быть 64-битным, получено {seed}", {"seed": seed})
        self.seed = seed
        self.stream_id = int(stream_id)
        self.path = tuple(int(p) for p in path)
        sequence = np.random.SeedSequence(
            entropy=self.seed,
            spawn_key=(self.stream_id,) + self.path,
        )
        self.generator = np.random.Generator(np.random.PCG64(sequence))

    def substream(self, index):
        """Независимый подпоток с номером index"""
        return RandomStream(self.seed, self.stream_id, self.path + (int(index),))

    def metadata(self):
        return {"seed": self.seed, "stream_id": self.stream_id, "path": list(self.path)}

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, stream_id={self.stream_id}, path={self.path})"
