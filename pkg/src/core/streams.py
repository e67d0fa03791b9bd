"""Seeded random streams.

Every stochastic draw in a run comes from its own generator, keyed by the
role of the draw and the agent (and PCC) it belongs to. Keys are spawn keys
of a single ``SeedSequence``:

    (0, i)      population draws of client i
    (1, j)      initial cap of provider j
    (2, f, j)   honesty draw of provider j at PCC f
    (3, f, j)   lottery permutations of provider j at PCC f
    (4, f, i)   SRP resample of client i at PCC f

Adding clients therefore never perturbs provider draws and vice versa.
"""
import numpy as np

CLIENT, INITIAL_CAP, HONESTY, LOTTERY, SRP_RESAMPLE = range(5)


class RandomStreams:
    """Factory for independent, reproducible generators."""

    def __init__(self, seed: int):
        self.seed = int(seed)

    def _generator(self, *key: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(entropy=self.seed, spawn_key=key))

    def client(self, i: int) -> np.random.Generator:
        return self._generator(CLIENT, i)

    def initial_cap(self, j: int) -> np.random.Generator:
        return self._generator(INITIAL_CAP, j)

    def honesty(self, f: int, j: int) -> np.random.Generator:
        return self._generator(HONESTY, f, j)

    def lottery(self, f: int, j: int) -> np.random.Generator:
        return self._generator(LOTTERY, f, j)

    def srp_resample(self, f: int, i: int) -> np.random.Generator:
        return self._generator(SRP_RESAMPLE, f, i)
