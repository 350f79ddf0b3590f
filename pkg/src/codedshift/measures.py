"""Block-Bernoulli measures on coded shifts.

A measure here is its data (per-generator probabilities p_g and the
normalizer c = sum |g| p_g) plus query operations; nothing is ever stored
over sequence space.  Cylinder values come with certified tail errors from
the generating set's growth certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .entropy import CharacteristicSolution, WeightedPotential, characteristic_fn
from .errors import BudgetError, CodedShiftError, GurevichError
from .genset import GeneratingSet, sardinas_patterson
from .words import as_word

DEFAULT_SERIES_TOL = 1e-12


class MeasureError(CodedShiftError):
    pass


def _series_depth(q: float, C: float, tol: float, N0: int) -> int:
    """Depth making the weighted geometric tail C sum_{n>N} n q^n fall below tol."""
    if q >= 1.0:
        raise GurevichError(
            "length-weighted generator series cannot be certified summable: "
            f"growth ratio {q} >= 1 (the root does not clear the spectrum growth rate)"
        )
    N = N0
    while _weighted_geom_tail(q, C, N) > tol:
        N = max(N + 8, int(N * 1.5))
        if N > 2_000_000:
            raise BudgetError("weighted tail refuses to shrink within depth budget")
    return N


def _weighted_geom_tail(q: float, C: float, N: int) -> float:
    return C * q ** (N + 1) * ((N + 1) * (1.0 - q) + q) / (1.0 - q) ** 2


class GBernoulliMeasure:
    """Shift-invariant measure assigning (1/c) prod p_g to generator cylinders.

    source records how p was made: "mme" (p_g = lambda*^{-|g|}), "pressure"
    (p_g = exp(phi(g)) lambda*^{-|g|}), or "custom" (explicit table on an
    explicit generating set).
    """

    def __init__(self, G, source, *, lambda_star=None, phi=None, table=None, tol=DEFAULT_SERIES_TOL):
        self.G = G
        self.source = source
        self.lambda_star = lambda_star
        self.phi = phi
        self.tol = tol
        self._table = None
        if table is not None:
            self._table = {as_word(w): float(p) for w, p in table.items()}
            for w in self._table:
                if not G.contains(w):
                    raise MeasureError(f"table word {w.text()!r} is not a generator")
        self._init_sums()

    # -- per-generator and per-length probabilities ---------------------
    def p(self, g) -> float:
        g = as_word(g)
        if self._table is not None:
            try:
                return self._table[g]
            except KeyError:
                raise MeasureError(f"unknown generator {g.text()!r}") from None
        if not self.G.contains(g):
            raise MeasureError(f"unknown generator {g.text()!r}")
        if self.source == "mme":
            return self.lambda_star ** (-len(g))
        return math.exp(self.phi.fn(g)) * self.lambda_star ** (-len(g))

    def length_mass(self, n: int) -> float:
        """Total probability sum of p_g over generators of length n."""
        if self._table is not None:
            return math.fsum(p for w, p in self._table.items() if len(w) == n)
        c = self.G.count(n)
        if c == 0:
            return 0.0
        if self.source == "mme":
            try:
                w = float(c)
            except OverflowError:
                return math.exp(math.log(c) - n * math.log(self.lambda_star))
            return w * self.lambda_star ** (-n)
        if self.phi.length_aggregate is not None:
            return self.phi.length_aggregate(self.G, n) * self.lambda_star ** (-n)
        return math.fsum(
            math.exp(self.phi.fn(g)) for g in self.G.words_of_length(n)
        ) * self.lambda_star ** (-n)

    def length_constant_p(self, n: int) -> Optional[float]:
        """p_g for length-n generators when it does not depend on g."""
        if self.source == "mme":
            return self.lambda_star ** (-n)
        return None

    # -- normalizer and probability-sum certificates --------------------
    def _init_sums(self):
        G = self.G
        if self._table is not None or G.is_explicit:
            if self._table is None:
                self._table = {g: self._raw_p(g) for g in G.words_up_to(G.max_len)}
            items = sorted(self._table.items(), key=lambda kv: G.alphabet.sort_key(kv[0]))
            self.p_total = math.fsum(p for _, p in items)
            self.p_tail = 0.0
            self.c = math.fsum(len(w) * p for w, p in items)
            self.c_tail = 0.0
            self.depth = G.max_len or max((len(w) for w in self._table), default=0)
            return
        lam = self.lambda_star
        if self.source == "pressure" and self.phi is not None:
            C = G.tail.C * math.exp(self.phi.bound_const)
            rho = G.tail.rho * math.exp(self.phi.bound_slope)
        else:
            C = G.tail.C
            rho = G.tail.rho
        q = rho / lam
        N = _series_depth(q, C, self.tol, G.tail.N0)
        masses = [self.length_mass(n) for n in range(1, N + 1)]
        self.p_total = math.fsum(masses)
        self.p_tail = C * q ** (N + 1) / (1.0 - q)
        self.c = math.fsum(n * m for n, m in enumerate(masses, start=1))
        self.c_tail = _weighted_geom_tail(q, C, N)
        self.depth = N
        if not math.isfinite(self.c) or self.c <= 0:
            raise GurevichError("normalizer series failed to evaluate finitely")

    def _raw_p(self, g):
        if self.source == "mme":
            return self.lambda_star ** (-len(g))
        if self.source == "pressure":
            return math.exp(self.phi.fn(g)) * self.lambda_star ** (-len(g))
        raise MeasureError("custom measures need an explicit table")

    def base_measure(self) -> float:
        """Mass of the parse-aligned set: mu(E) = 1/c."""
        return 1.0 / self.c

    def unenumerated_mass(self, cap: int) -> float:
        """Certified bound on the p-mass of generators longer than cap."""
        if self._table is not None:
            return math.fsum(p for w, p in self._table.items() if len(w) > cap)
        if self.source == "mme":
            C, rho = self.G.tail.C, self.G.tail.rho
        else:
            C = self.G.tail.C * math.exp(self.phi.bound_const)
            rho = self.G.tail.rho * math.exp(self.phi.bound_slope)
        q = rho / self.lambda_star
        if q >= 1.0:
            return math.inf
        return C * q ** (cap + 1) / (1.0 - q)

    def __repr__(self):
        return f"GBernoulliMeasure({self.source}, c={self.c:.12g})"


def mme(G: GeneratingSet, sol: CharacteristicSolution, tol: float = DEFAULT_SERIES_TOL) -> GBernoulliMeasure:
    """The maximal measure: p_g = lambda*^{-|g|} with normalizer c.

    Verifies that sol still solves the characteristic equation, that the
    probabilities sum to 1 within the certified tail, and that the
    length-weighted series for c is summable (else GurevichError).
    """
    if sol.degenerate:
        raise MeasureError("degenerate root lambda*=1: the measure data is not defined")
    value, tail = characteristic_fn(G, sol.lambda_star, tol=max(sol.tol, 1e-15))
    if abs(value - 1.0) > 10 * (sol.residual + sol.tol) + tail:
        raise MeasureError(
            f"solution does not satisfy the characteristic equation: |f-1|={abs(value-1.0)}"
        )
    mu = GBernoulliMeasure(G, "mme", lambda_star=sol.lambda_star, tol=tol)
    slack = mu.p_tail + 10 * (sol.residual + sol.tol)
    if abs(mu.p_total - 1.0) > slack + 1e-9:
        raise MeasureError(
            f"probabilities sum to {mu.p_total}, off 1 beyond certified slack {slack}"
        )
    return mu


def equilibrium_measure(G: GeneratingSet, phi: WeightedPotential, sol: CharacteristicSolution,
                        tol: float = DEFAULT_SERIES_TOL) -> GBernoulliMeasure:
    """Measure with p_g = exp(phi(g)) lambda*^{-|g|} from a pressure solution."""
    if sol.degenerate:
        return GBernoulliMeasure(G, "pressure", lambda_star=1.0, phi=phi, tol=tol)
    return GBernoulliMeasure(G, "pressure", lambda_star=sol.lambda_star, phi=phi, tol=tol)


def custom_measure(G: GeneratingSet, table: dict, tol: float = DEFAULT_SERIES_TOL) -> GBernoulliMeasure:
    return GBernoulliMeasure(G, "custom", table=table, tol=tol)


def g_cylinder(mu: GBernoulliMeasure, gs) -> float:
    """(1/c) prod p_g over the listed generators; the empty list gives 1/c."""
    acc = 1.0 / mu.c
    for g in gs:
        acc *= mu.p(g)
    return acc


# ----------------------------------------------------------------------
@dataclass(frozen=True)
class CylinderEstimate:
    """Sequential mass of a plain cylinder with a rigorous truncation error."""

    value: float
    tail_error: float
    covers_enumerated: int
    cutoff: int


_ZERO = (0.0, 0)


class _CoverIndex:
    """Prefix/suffix/substring tables over generators up to a length cap.

    Every table maps a symbol tuple to (probability mass, generator count),
    with substring placements counted once per occurrence.  Built once per
    (measure, cutoff, window length) and reused across words; word_cylinder
    then costs O(|w| * length classes) dictionary lookups.
    """

    def __init__(self, mu, cutoff, max_word_len):
        self.cutoff = cutoff
        self.maxw = max_word_len
        gens = mu.G.words_up_to(cutoff)
        self.exact = {}
        self.prefix = {}
        self.suffix = {}
        self.infix = {}
        self.lengths = sorted({len(g) for g in gens})

        def bump(table, key, p):
            m, k = table.get(key, _ZERO)
            table[key] = (m + p, k + 1)

        for g in gens:
            p = mu.p(g)
            t = g.syms
            L = len(t)
            bump(self.exact, t, p)
            for e in range(1, min(L, max_word_len) + 1):
                if e < L:
                    bump(self.prefix, t[:e], p)
                bump(self.suffix, t[-e:], p)
            for m in range(1, max_word_len + 1):
                for i in range(L - m + 1):
                    bump(self.infix, t[i : i + m], p)


def _require_unique_representation(G):
    if G.certificates.get("unique_representation") is not None:
        return
    flag = G.meta.get("unique_representation_checked")
    if flag:
        return
    verdict = sardinas_patterson(G, min(16, G.max_len or 16))
    if not verdict.decipherable:
        raise MeasureError(
            "generating set is not uniquely decipherable "
            f"(witness {verdict.witness.text()!r}); cylinder masses are undefined"
        )
    G.meta["unique_representation_checked"] = True


def _default_cutoff(G, w_len, budget=60_000):
    lo = max(w_len, 1)
    best = None
    total = 0
    n = 0
    while n < 400:
        n += 1
        c = G.count(n)
        total += c
        if total > budget:
            break
        best = n
    if best is None or best < lo:
        raise BudgetError("no generator cutoff fits the enumeration budget")
    return best


def word_cylinder(mu: GBernoulliMeasure, w, L: Optional[int] = None) -> CylinderEstimate:
    """Sequential mass of the cylinder of w, by minimal-cover enumeration.

    A minimal cover places a first block over position 0 (at some offset),
    contiguous blocks across the window, and a last block over the final
    position; unique representation makes these covers a partition of the
    cylinder's sequential part.  Covers through blocks longer than the cap L
    are not enumerated; their mass is bounded by the union bound
    |w| (1/c) sum_{|g|>L} |g| p_g and reported as tail_error.
    """
    w = as_word(w)
    if len(w) == 0:
        raise MeasureError("word_cylinder needs a nonempty word")
    G = mu.G
    _require_unique_representation(G)
    if L is None:
        L = _default_cutoff(G, len(w))
    index = _cover_index(mu, L, len(w))
    ws = w.syms
    n = len(ws)

    # single blocks containing the whole window (once per occurrence)
    value, covers = index.infix.get(ws, _ZERO)

    # R(t): chains of blocks starting exactly at t and covering through n-1
    R = [_ZERO] * (n + 1)
    for t in range(n - 1, 0, -1):
        mass, cnt = index.prefix.get(ws[t:], _ZERO)  # right-edge overhangs
        for ell in index.lengths:
            if ell > n - t:
                break
            hit = index.exact.get(ws[t : t + ell])
            if hit:
                if t + ell == n:
                    mass += hit[0]
                    cnt += hit[1]
                else:
                    cm, ck = R[t + ell]
                    mass += hit[0] * cm
                    cnt += hit[1] * ck
        R[t] = (mass, cnt)

    # first block covers position 0 with some offset and ends at e < n
    for e in range(1, n):
        am, ak = index.suffix.get(ws[:e], _ZERO)
        rm, rk = R[e]
        value += am * rm
        covers += ak * rk

    value /= mu.c
    tail = n * _long_block_mass(mu, L) / mu.c
    return CylinderEstimate(value=value, tail_error=tail, covers_enumerated=covers, cutoff=L)


def _cover_index(mu, L, maxw):
    cache = getattr(mu, "_cover_cache", None)
    if cache is None:
        cache = {}
        mu._cover_cache = cache
    key = (L, maxw)
    # reuse a wider index when present
    for (cl, cm), idx in cache.items():
        if cl == L and cm >= maxw:
            return idx
    idx = _CoverIndex(mu, L, maxw)
    cache[key] = idx
    return idx


def _long_block_mass(mu, L):
    """sum over |g| > L of |g| p_g, certified."""
    G = mu.G
    if G.is_explicit or mu._table is not None:
        return math.fsum(len(g) * p for g, p in mu._table.items() if len(g) > L)
    if mu.source == "mme":
        C, rho = G.tail.C, G.tail.rho
    else:
        C = G.tail.C * math.exp(mu.phi.bound_const)
        rho = G.tail.rho * math.exp(mu.phi.bound_slope)
    q = rho / mu.lambda_star
    if q >= 1.0:
        raise GurevichError("tail mass cannot be certified: growth ratio >= 1")
    top = max(L, mu.depth)
    partial = math.fsum(n * mu.length_mass(n) for n in range(L + 1, top + 1))
    return partial + _weighted_geom_tail(q, C, top)


def measure_entropy(mu: GBernoulliMeasure) -> float:
    """Entropy via the induced-system identity: (-sum p log p) / c."""
    return induced_entropy(mu) / mu.c


def induced_entropy(mu: GBernoulliMeasure) -> float:
    """-sum_g p_g log p_g, evaluated with the same depth certificates as c."""
    if mu._table is not None:
        return -math.fsum(p * math.log(p) for p in mu._table.values() if p > 0)
    if mu.source == "mme":
        # -p log p = |g| log(lambda*) p, summed per length class
        h = math.log(mu.lambda_star)
        return h * math.fsum(n * mu.length_mass(n) for n in range(1, mu.depth + 1))
    total = 0.0
    for n in range(1, mu.depth + 1):
        for g in mu.G.words_of_length(n):
            p = mu.p(g)
            if p > 0:
                total -= p * math.log(p)
    return total


@dataclass(frozen=True)
class GibbsReport:
    """Cylinder-to-exponential comparison ratios for a constant potential."""

    ratios: tuple  # ((word, ratio), ...)
    inf_ratio: float
    sup_ratio: float
    h: float
    cutoff: int


def gibbs_scan(mu: GBernoulliMeasure, words, h: float, L: Optional[int] = None) -> GibbsReport:
    """Ratios mu([w]) e^{|w| h} across a word family.

    For the constant potential -h these are the two-sided Gibbs comparison
    quantities; a family with ratios accumulating at 0 witnesses failure of
    the lower Gibbs bound.
    """
    words = [as_word(w) for w in words]
    if not words:
        raise MeasureError("gibbs_scan needs at least one word")
    ratios = []
    cutoff = 0
    for w in words:
        est = word_cylinder(mu, w, L)
        cutoff = max(cutoff, est.cutoff)
        ratios.append((w, est.value * math.exp(len(w) * h)))
    values = [r for _, r in ratios]
    return GibbsReport(
        ratios=tuple(ratios),
        inf_ratio=min(values),
        sup_ratio=max(values),
        h=h,
        cutoff=cutoff,
    )
