"""Characteristic-series evaluation and root solving.

The characteristic function of a generating set is

    f(lam) = sum_n c(n) lam^(-n),

a strictly decreasing analytic function above the spectrum growth rate.  Its
root lam* gives the entropy log(lam*).  Solving is by bisection on the
truncated series with a certified geometric tail kept below a tenth of the
requested tolerance, followed by a secant polish that never leaves the final
bracket (so results always match plain bisection within tolerance).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from .errors import BudgetError, DivergenceError, NoRootError
from .genset import GeneratingSet
from .words import Word

DEFAULT_TOL = 1e-12
DEPTH_BUDGET = 500_000
NO_ROOT_PROBE_DEPTH = 20_000
_DEGENERATE_SLACK = 5e-13


@dataclass(frozen=True)
class CharacteristicSolution:
    """Root of a characteristic series with its certification data."""

    lambda_star: float
    h_top: float
    bracket: tuple
    depth: int
    residual: float
    tol: float
    degenerate: bool = False

    @property
    def pressure(self) -> float:
        """log(lambda*); meaningful when the series carries weights."""
        return self.h_top


@dataclass
class WeightedPotential:
    """A potential constant on each generator cylinder.

    fn(g) is the weight of generator g.  The declared affine bound
    fn(g) <= bound_const + bound_slope * |g| certifies the weighted tail.
    length_aggregate(G, n), when given, returns sum_{|g|=n} exp(fn(g))
    without enumerating the length class.
    """

    fn: Callable[[Word], float]
    bound_const: float = 0.0
    bound_slope: float = 0.0
    length_aggregate: Optional[Callable] = None
    zero_flag: bool = False

    @classmethod
    def zero(cls) -> "WeightedPotential":
        return cls(fn=lambda g: 0.0, zero_flag=True)

    @classmethod
    def length_linear(cls, a: float, b: float) -> "WeightedPotential":
        """fn(g) = a + b |g|, with exact per-length aggregates."""
        if a == 0.0 and b == 0.0:
            return cls.zero()
        return cls(
            fn=lambda g: a + b * len(g),
            bound_const=a,
            bound_slope=b,
            length_aggregate=lambda G, n: G.count(n) * math.exp(a + b * n),
        )

    def is_zero(self) -> bool:
        return self.zero_flag


class _SeriesContext:
    """Per-length weights of a (possibly weighted) characteristic series."""

    def __init__(self, G: GeneratingSet, phi: Optional[WeightedPotential]):
        self.G = G
        self.phi = phi
        self._w: list = [0.0]  # w[0] unused
        if phi is None:
            self.C_eff = None if G.is_explicit else G.tail.C
            self.rho_eff = 1.0 if G.is_explicit else G.tail.rho
            self.N0 = 1 if G.is_explicit else G.tail.N0
        else:
            base_C = 1.0 if G.is_explicit else G.tail.C
            base_rho = 1.0 if G.is_explicit else G.tail.rho
            self.C_eff = base_C * math.exp(phi.bound_const)
            self.rho_eff = base_rho * math.exp(phi.bound_slope)
            self.N0 = 1 if G.is_explicit else G.tail.N0
        self.finite_depth = G.max_len if G.is_explicit else None

    def weight(self, n: int) -> float:
        while len(self._w) <= n:
            m = len(self._w)
            self._w.append(self._compute_weight(m))
        return self._w[n]

    def _compute_weight(self, n: int) -> float:
        G, phi = self.G, self.phi
        if phi is None:
            c = G.count(n)
            try:
                return float(c)
            except OverflowError:
                return math.inf
        if phi.length_aggregate is not None:
            return float(phi.length_aggregate(G, n))
        if G.count(n) == 0:
            return 0.0
        return math.fsum(math.exp(phi.fn(g)) for g in G.words_of_length(n))

    def term(self, n: int, lam: float, loglam: float) -> float:
        """One series term; falls back to log space for extreme magnitudes."""
        w = self.weight(n)
        if w == 0.0:
            return 0.0
        if math.isfinite(w):
            t = w * lam ** (-n)
            if t != 0.0 and math.isfinite(t):
                return t
        logw = math.log(self.G.count(n)) if self.phi is None else math.log(w)
        return math.exp(logw - n * loglam)

    def tail_bound(self, lam: float, N: int) -> float:
        if self.finite_depth is not None:
            return 0.0 if N >= self.finite_depth else self._finite_remainder(lam, N)
        q = self.rho_eff / lam
        if q >= 1.0:
            return math.inf
        C = self.C_eff if self.C_eff is not None else 1.0
        return C * q ** (N + 1) / (1.0 - q)

    def _finite_remainder(self, lam, N):
        return math.fsum(
            self.weight(n) * lam ** (-n) for n in range(N + 1, self.finite_depth + 1)
        )

    def depth_for(self, lam: float, tol_tail: float) -> int:
        """Smallest depth whose tail bound is below tol_tail at this lam."""
        if self.finite_depth is not None:
            return self.finite_depth
        q = self.rho_eff / lam
        if q >= 1.0:
            raise DivergenceError(
                f"series evaluated at lambda={lam} <= growth rate rho={self.rho_eff}"
            )
        C = self.C_eff if self.C_eff is not None else 1.0
        target = tol_tail * (1.0 - q) / C
        if target >= q:
            N = self.N0
        else:
            N = max(self.N0, int(math.ceil(math.log(target) / math.log(q))) - 1)
        if N > DEPTH_BUDGET:
            raise BudgetError(
                f"tail tolerance {tol_tail} at lambda={lam} needs depth {N} > budget"
            )
        return N

    def partial(self, lam: float, N: int) -> float:
        loglam = math.log(lam)
        return math.fsum(self.term(n, lam, loglam) for n in range(1, N + 1))

    def value_at_one(self) -> float:
        """Exact series value at lambda = 1 (finite supports only)."""
        assert self.finite_depth is not None
        return math.fsum(self.weight(n) for n in range(1, self.finite_depth + 1))


class _FiniteWeights:
    """Series context over an explicit per-length weight table (no genset)."""

    def __init__(self, weights: dict):
        self.table = {n: float(w) for n, w in weights.items() if w}
        self.finite_depth = max(self.table) if self.table else 0
        self.rho_eff = 1.0
        self.N0 = 1

    def weight(self, n):
        return self.table.get(n, 0.0)

    def tail_bound(self, lam, N):
        if N >= self.finite_depth:
            return 0.0
        return math.fsum(w * lam ** (-n) for n, w in self.table.items() if n > N)

    def depth_for(self, lam, tol_tail):
        return self.finite_depth

    def partial(self, lam, N):
        return math.fsum(w * lam ** (-n) for n, w in self.table.items() if n <= N)

    def value_at_one(self):
        return math.fsum(self.table.values())


def characteristic_fn(G: GeneratingSet, lam: float, N: Optional[int] = None, tol: float = DEFAULT_TOL):
    """Evaluate the characteristic series at lam.

    Returns (value, tail_bound) where value sums the first N length classes
    and tail_bound certifies everything beyond.  N defaults to the depth
    that keeps the tail below tol/10.
    """
    ctx = _SeriesContext(G, None)
    if not G.is_explicit and lam <= ctx.rho_eff:
        raise DivergenceError(
            f"lambda={lam} is not above the certified growth rate rho={ctx.rho_eff}"
        )
    if N is None:
        N = ctx.depth_for(lam, tol / 10.0)
    return ctx.partial(lam, N), ctx.tail_bound(lam, N)


def _solve_series(ctx, tol: float, max_iter: int = 300) -> CharacteristicSolution:
    tol_tail = tol / 10.0

    # Finite supports: decide degenerate / no-root exactly at lambda = 1.
    if ctx.finite_depth is not None:
        F1 = ctx.value_at_one()
        if abs(F1 - 1.0) <= _DEGENERATE_SLACK:
            return CharacteristicSolution(
                lambda_star=1.0,
                h_top=0.0,
                bracket=(1.0, 1.0),
                depth=ctx.finite_depth,
                residual=abs(F1 - 1.0),
                tol=tol,
                degenerate=True,
            )
        if F1 < 1.0:
            raise NoRootError(
                f"characteristic series tops out at {F1} < 1: no root at or above 1",
                sup_estimate=F1,
                depth=ctx.finite_depth,
            )
        lo = 1.0
    else:
        lo = max(1.0, ctx.rho_eff) + 1e-9
        # certify f(lo) >= 1 from partial sums alone (they only undershoot)
        reached, partial_max, depth_used = _partial_reaches(ctx, lo, 1.0)
        if not reached:
            raise NoRootError(
                "characteristic series stayed below 1 just above its growth "
                f"rate (partial sum {partial_max} at depth {depth_used}); "
                "no root detected",
                sup_estimate=partial_max,
                depth=depth_used,
            )

    # expand hi until the certified value drops below 1
    step = 1.0
    hi = lo + step
    for _ in range(200):
        N = ctx.depth_for(hi, tol_tail)
        if ctx.partial(hi, N) + ctx.tail_bound(hi, N) < 1.0:
            break
        step *= 2.0
        hi = lo + step
    else:
        raise NoRootError("could not bracket the characteristic root from above")

    depth = 0
    value = math.nan
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        depth = ctx.depth_for(mid, tol_tail)
        value = ctx.partial(mid, depth)
        if value >= 1.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * mid and abs(value - 1.0) <= 0.8 * tol:
            break
        if hi - lo <= 1e-17 * mid:
            break

    lam = 0.5 * (lo + hi)
    depth = ctx.depth_for(lam, tol_tail)
    best = (abs(ctx.partial(lam, depth) - 1.0), lam)

    # secant polish inside the bracket; an internal acceleration only
    a, b = lo, hi
    fa = ctx.partial(a, ctx.depth_for(a, tol_tail)) - 1.0
    fb = ctx.partial(b, ctx.depth_for(b, tol_tail)) - 1.0
    for _ in range(4):
        if fa == fb:
            break
        c = a - fa * (b - a) / (fb - fa)
        if not (lo <= c <= hi):
            break
        fc = ctx.partial(c, ctx.depth_for(c, tol_tail)) - 1.0
        if abs(fc) < best[0]:
            best = (abs(fc), c)
        if fc == 0.0:
            break
        if (fa < 0) == (fc < 0):
            a, fa = c, fc
        else:
            b, fb = c, fc

    lam = best[1]
    depth = ctx.depth_for(lam, tol_tail)
    residual = abs(ctx.partial(lam, depth) - 1.0) + ctx.tail_bound(lam, depth)
    return CharacteristicSolution(
        lambda_star=lam,
        h_top=math.log(lam),
        bracket=(lo, hi),
        depth=depth,
        residual=residual,
        tol=tol,
    )


def _partial_reaches(ctx, lam: float, target: float):
    """Grow the truncation until the partial sum reaches target.

    Partial sums only undershoot the series, so reaching the target is a
    certificate; giving up is a budget-limited status, never a certificate of
    absence (no growth bound can control the tail this close to rho).
    """
    total = 0.0
    n = 0
    stall = 0
    loglam = math.log(lam)
    while n < NO_ROOT_PROBE_DEPTH:
        n += 1
        t = ctx.term(n, lam, loglam)
        if t:
            total += t
            stall = 0
        else:
            stall += 1
        if total >= target:
            return True, total, n
        if n > 64 and stall > 8192:
            break
        if n > 1024 and t and t < 1e-18 * max(total, 1e-300):
            break
    return False, total, n


def solve_entropy(G: GeneratingSet, tol: float = DEFAULT_TOL) -> CharacteristicSolution:
    """Solve sum_g lam^(-|g|) = 1 for lam*; entropy is log(lam*).

    Raises NoRootError with an explicit status when the series never reaches
    1 above the growth rate, and reports the degenerate root lam* = 1 with a
    flag instead of failing.
    """
    return _solve_series(_SeriesContext(G, None), tol)


def solve_pressure(G: GeneratingSet, phi: Optional[WeightedPotential], tol: float = DEFAULT_TOL) -> CharacteristicSolution:
    """Solve sum_g exp(phi(g)) lam^(-|g|) = 1; the pressure is log(lam*).

    A zero potential reduces bit-for-bit to solve_entropy.
    """
    if phi is None or phi.is_zero():
        return _solve_series(_SeriesContext(G, None), tol)
    return _solve_series(_SeriesContext(G, phi), tol)


# ----------------------------------------------------------------------
def prefix_weights(G: GeneratingSet, m: int) -> dict:
    """Per-length counts of the first m generators in canonical order."""
    if m < 1:
        raise ValueError("prefix needs m >= 1")
    weights: dict[int, float] = {}
    remaining = m
    n = 0
    while remaining > 0:
        n += 1
        if n > DEPTH_BUDGET:
            raise BudgetError(f"prefix of size {m} spans more than {DEPTH_BUDGET} lengths")
        c = G.count(n)
        if c == 0:
            continue
        take = min(c, remaining)
        weights[n] = float(take)
        remaining -= take
    return weights


def prefix_entropy(G: GeneratingSet, m: int, tol: float = DEFAULT_TOL) -> CharacteristicSolution:
    """Entropy of the sofic shift generated by the first m generators.

    Only the length profile of the prefix enters the equation, so this works
    even when m is far beyond any enumeration budget.
    """
    return _solve_series(_FiniteWeights(prefix_weights(G, m)), tol)


@dataclass(frozen=True)
class SoficEntry:
    m: int
    status: str  # "ok" | "degenerate" | "no_root"
    lambda_m: Optional[float] = None
    h: Optional[float] = None


def sofic_approx_entropies(G: GeneratingSet, m_max: int, tol: float = DEFAULT_TOL) -> list:
    """lambda_m for m = 1..m_max; a nondecreasing chain below lambda*.

    Prefixes whose series cannot reach 1 are reported per-index rather than
    raised.
    """
    out = []
    for m in range(1, m_max + 1):
        try:
            sol = prefix_entropy(G, m, tol)
        except NoRootError:
            out.append(SoficEntry(m=m, status="no_root"))
            continue
        status = "degenerate" if sol.degenerate else "ok"
        out.append(SoficEntry(m=m, status=status, lambda_m=sol.lambda_star, h=sol.h_top))
    return out


# ----------------------------------------------------------------------
@dataclass(frozen=True)
class Progression:
    """Arithmetic progression {a + k b : k >= 0} of gap sizes."""

    a: int
    b: int

    def __post_init__(self):
        if self.a < 0 or self.b < 1:
            raise ValueError("Progression requires a >= 0 and b >= 1")

    def members_upto(self, N: int):
        s = self.a
        while s <= N:
            yield s
            s += self.b

    def remainder(self, x: float, N: int) -> float:
        """Exact sum of x^s over members beyond N (0 < x < 1)."""
        if self.a > N:
            first = self.a
        else:
            k0 = (N - self.a) // self.b + 1
            first = self.a + k0 * self.b
        return x**first / (1.0 - x**self.b)


def _gapset_members_upto(S, N):
    if isinstance(S, Progression):
        return list(S.members_upto(N))
    return sorted(s for s in S if s <= N)


def _gapset_remainder(S, x, N):
    if isinstance(S, Progression):
        return S.remainder(x, N)
    return math.fsum(x**s for s in S if s > N)


@dataclass(frozen=True)
class SGraphSpec:
    """Branch structure of a gap-template shift.

    gap_sets holds one set of admissible gap sizes per branch (finite sets or
    arithmetic progressions); r counts extra single-letter generators.
    """

    gap_sets: tuple
    r: int = 0

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("r must be >= 0")
        for S in self.gap_sets:
            if not isinstance(S, Progression) and len(S) == 0:
                raise ValueError("gap sets must be nonempty")

    @property
    def d(self) -> int:
        return len(self.gap_sets)


def sgraph_char_value(spec: SGraphSpec, x: float, N: int):
    """Value of 1 - r x - x sum_i sum_{s in S_i, s <= N} x^s with its tail.

    The tail is the exact remainder of the truncated double sum (geometric
    closed form for progression descriptors), so value - tail brackets the
    untruncated quantity from above.
    """
    if not (0.0 < x < 1.0):
        raise ValueError("sgraph_char_value needs 0 < x < 1")
    inner = math.fsum(
        math.fsum(x**s for s in _gapset_members_upto(S, N)) for S in spec.gap_sets
    )
    tail = x * math.fsum(_gapset_remainder(S, x, N) for S in spec.gap_sets)
    value = 1.0 - spec.r * x - x * inner
    return value, tail


# ----------------------------------------------------------------------
@dataclass(frozen=True)
class GensetEntropyEstimate:
    """Growth-rate estimate of the length spectrum.

    estimate is the windowed difference slope of log c(n); secant is the
    largest log(c(n))/n over the terminal window; closed_form carries the
    family's registered exact value when one exists.
    """

    estimate: float
    secant: float
    closed_form: Optional[float]
    depth: int
    window: int
    baseline: tuple


def genset_entropy(G: GeneratingSet, N: int) -> GensetEntropyEstimate:
    """Estimate h(G) = limsup log(c(n))/n from the spectrum up to depth N."""
    if N < 2:
        raise ValueError("genset_entropy needs N >= 2")
    closed = G.closed_forms.get("h_genset")
    window = max(8, N // 8)
    spectrum = G.length_spectrum(N)
    nonzero = [(n, math.log(c)) for n, c in enumerate(spectrum, start=1) if c > 0]
    if G.is_explicit or len(nonzero) < 2:
        # the spectrum is eventually zero, or too sparse to slope
        return GensetEntropyEstimate(0.0, 0.0, closed, N, window, ())
    n2, l2 = nonzero[-1]
    older = [(n, l) for n, l in nonzero if n <= n2 - window]
    n1, l1 = older[-1] if older else nonzero[0]
    estimate = 0.0 if n1 == n2 else (l2 - l1) / (n2 - n1)
    terminal = [(l / n) for n, l in nonzero if n >= N - window]
    secant = max(terminal) if terminal else 0.0
    return GensetEntropyEstimate(estimate, secant, closed, N, window, (n1, n2))
