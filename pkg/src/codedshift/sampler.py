"""Stationary Monte Carlo sampling from a block-Bernoulli measure.

Windows are drawn by first placing the block containing coordinate zero with
the size-biased law |g| p_g / c (naive block-boundary starts would sample the
induced measure instead), then extending to the right with i.i.d. blocks
until the window is covered.  Everything is a pure function of the seed.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import SamplerError
from .measures import GBernoulliMeasure
from .words import Word

SHORTFALL_LIMIT = 1e-9
_CHUNK = 1 << 15


class _Stream:
    """Chunked uniform source on a counter-based generator; 64-bit seeded."""

    def __init__(self, seed: int):
        self._g = np.random.Generator(np.random.PCG64(seed))
        self._buf = self._g.random(_CHUNK)
        self._i = 0

    def u(self) -> float:
        if self._i >= self._buf.shape[0]:
            self._buf = self._g.random(_CHUNK)
            self._i = 0
        v = self._buf[self._i]
        self._i += 1
        return v

    def randint(self, n: int) -> int:
        """Uniform int in [0, n); composes draws when n overflows a double."""
        if n <= 1:
            return 0
        if n <= (1 << 50):
            return int(self.u() * n)
        hi = self.randint((n >> 50) + 1)
        lo = int(self.u() * (1 << 50))
        v = (hi << 50) | lo
        return v if v < n else self.randint(n)


@dataclass(frozen=True)
class SampleWindow:
    """A sampled window: the word, the block over coordinate 0, its offset."""

    word: Word
    origin_block: Word
    offset: int


class _BlockSampler:
    """Truncated per-length block distributions for one measure."""

    def __init__(self, mu: GBernoulliMeasure, cap=None):
        self.mu = mu
        G = mu.G
        if cap is None:
            cap = self._auto_cap(mu)
        shortfall = mu.unenumerated_mass(cap)
        if shortfall > SHORTFALL_LIMIT:
            raise SamplerError(
                f"truncated block distribution at cap {cap} leaves mass "
                f"{shortfall:.3e} > {SHORTFALL_LIMIT}"
            )
        lengths = [n for n in range(1, cap + 1) if G.count(n) > 0]
        if not lengths:
            raise SamplerError(f"no generators at or below cap {cap}")
        mass = np.array([mu.length_mass(n) for n in lengths], dtype=float)
        self.cap = cap
        self.shortfall = shortfall
        self.lengths = lengths
        # no renormalization: uniforms compare against the raw cumulative
        # masses, and the sub-1e-9 missing tail folds into the deepest class
        self.cum_iid = np.cumsum(mass)
        self.cum_origin = np.cumsum(mass * np.array(lengths, dtype=float) / mu.c)

    @staticmethod
    def _auto_cap(mu):
        if mu.G.is_explicit:
            return mu.G.max_len
        cap = 8
        while mu.unenumerated_mass(cap) > SHORTFALL_LIMIT:
            cap += 8
            if cap > 100_000:
                raise SamplerError("no cap keeps the truncated mass under the shortfall limit")
        return cap

    def _pick(self, cum, u):
        idx = int(np.searchsorted(cum, u, side="right"))
        if idx >= len(self.lengths):
            idx = len(self.lengths) - 1
        return self.lengths[idx]

    def draw_iid(self, stream) -> tuple:
        n = self._pick(self.cum_iid, stream.u())
        return self.mu.G.uniform_word(n, stream.randint).syms

    def draw_origin(self, stream):
        n = self._pick(self.cum_origin, stream.u())
        block = self.mu.G.uniform_word(n, stream.randint).syms
        offset = stream.randint(n)
        return block, offset


def _sampler_for(mu, cap):
    cache = getattr(mu, "_block_samplers", None)
    if cache is None:
        cache = {}
        mu._block_samplers = cache
    if cap not in cache:
        cache[cap] = _BlockSampler(mu, cap)
    return cache[cap]


def sample_window(mu: GBernoulliMeasure, length: int, seed: int, cap=None) -> SampleWindow:
    """One stationary window of the given length, deterministic in the seed."""
    if length < 1:
        raise SamplerError("window length must be >= 1")
    sampler = _sampler_for(mu, cap)
    stream = _Stream(seed)
    word, block, offset = _one_window(sampler, stream, length)
    return SampleWindow(word=Word(word), origin_block=Word(block), offset=offset)


def _one_window(sampler, stream, length):
    block, offset = sampler.draw_origin(stream)
    syms = block[offset:]
    while len(syms) < length:
        syms += sampler.draw_iid(stream)
    return syms[:length], block, offset


def sample_windows(mu, length, count, seed, cap=None, with_origins=False):
    """count stationary windows as raw symbol tuples (fast path)."""
    if length < 1:
        raise SamplerError("window length must be >= 1")
    sampler = _sampler_for(mu, cap)
    stream = _Stream(seed)
    words = []
    origins = [] if with_origins else None
    for _ in range(count):
        word, block, offset = _one_window(sampler, stream, length)
        words.append(word)
        if with_origins:
            origins.append((block, offset))
    if with_origins:
        return words, origins
    return words


def empirical_block_counts(mu, length, count, seed, cap=None) -> Counter:
    return Counter(sample_windows(mu, length, count, seed, cap=cap))


def empirical_entropy(mu: GBernoulliMeasure, n: int, samples: int, seed: int, cap=None) -> float:
    """Plug-in block entropy -(1/n) sum f log f over sampled n-windows.

    Plug-in estimates are biased low by at most about (#observed blocks)/(2
    samples) nats; assert only confidence containment against a known rate.
    """
    counts = empirical_block_counts(mu, n, samples, seed, cap=cap)
    total = float(samples)
    ent = -math.fsum((k / total) * math.log(k / total) for k in counts.values())
    return ent / n
