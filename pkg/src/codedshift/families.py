"""Built-in generating-set families with closed-form spectra and certificates.

Each family records why its parses are unique (the certificate), a tail
certificate for its length spectrum, and any exact constants used as
cross-checks elsewhere.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from .entropy import Progression
from .errors import CodedShiftError
from .genset import GeneratingSet, TailBound, register_family
from .words import Alphabet, Word, as_word

LOG2 = math.log(2.0)


# ----------------------------------------------------------------------
# Matched-delimiter family
# ----------------------------------------------------------------------
_DYCK_ALPHABET = Alphabet(["(", ")", "[", "]"])
_OPENERS = (("(", ")"), ("[", "]"))


@lru_cache(maxsize=None)
def _dyck_count(n: int) -> int:
    """Number of depth-n building words: exact closed form."""
    if n < 1:
        return 0
    return 2 ** (n - 1) * math.comb(2 * n, n) // (2 * n - 1)


@lru_cache(maxsize=None)
def _dyck_count_rec(n: int) -> int:
    if n == 1:
        return 2
    return sum(_dyck_count_rec(j) * _dyck_count_rec(n - j) for j in range(1, n))


@lru_cache(maxsize=None)
def _comp_count(m: int) -> int:
    """Compositions of total weight m into blocks of weights 1..m."""
    if m == 0:
        return 1
    return sum(_dyck_count(j) * _comp_count(m - j) for j in range(1, m + 1))


@dataclass(frozen=True)
class DyckCounts:
    """Exact block counts d_1..d_N (arbitrary precision)."""

    values: tuple

    def __getitem__(self, n: int) -> int:
        if not 1 <= n <= len(self.values):
            raise IndexError(n)
        return self.values[n - 1]

    def __len__(self) -> int:
        return len(self.values)


def dyck_counts(N: int) -> DyckCounts:
    """d_1..d_N by the convolution recursion, verified against the closed form."""
    if N < 1:
        raise ValueError("dyck_counts needs N >= 1")
    vals = []
    for n in range(1, N + 1):
        rec = _dyck_count_rec(n)
        if rec != _dyck_count(n):
            raise AssertionError(f"count recursion and closed form disagree at n={n}")
        vals.append(rec)
    return DyckCounts(tuple(vals))


@lru_cache(maxsize=None)
def _dyck_level(n: int) -> tuple:
    """All building words of symbol length 2n (the sets W_n)."""
    if n < 1:
        return ()
    out = []
    for comp in _compositions(n - 1):
        inner = sum((w.syms for w in comp), ())
        for op, cl in _OPENERS:
            out.append(Word((op,) + inner + (cl,)))
    return tuple(out)


@lru_cache(maxsize=None)
def _compositions(m: int) -> tuple:
    """All block sequences of total weight m, as tuples of Words."""
    if m == 0:
        return ((),)
    out = []
    for j in range(1, m + 1):
        for first in _dyck_level(j):
            for rest in _compositions(m - j):
                out.append((first,) + rest)
    return tuple(out)


def dyck_words(n: int) -> tuple:
    """The length-2n canonical generators."""
    return _dyck_level(n)


def _dyck_uniform(n: int, draw) -> Word:
    """Uniform generator of symbol length n without enumerating the level.

    A block is a bracket pair around a uniform composition; the first-block
    weight of a composition is drawn with probability d_j e_{m-j} / e_m, after
    which the block and the remainder are uniform and independent.
    """
    if n % 2 != 0:
        raise ValueError("no generators of odd length")

    def sample_block(k):
        op, cl = _OPENERS[draw(2)]
        return (op,) + sample_comp(k - 1) + (cl,)

    def sample_comp(m):
        syms = ()
        while m > 0:
            pick = draw(_comp_count(m))
            j = 1
            while True:
                bucket = _dyck_count(j) * _comp_count(m - j)
                if pick < bucket:
                    break
                pick -= bucket
                j += 1
            syms += sample_block(j)
            m -= j
        return syms

    return Word(sample_block(n // 2))


def _dyck_certificate():
    return {
        "unique_representation": (
            "generators are fully matched delimiter blocks; blocks cannot "
            "overlap, so block boundaries are forced"
        )
    }


def dyck_generators(n_max: Optional[int] = None, variant: str = "canonical") -> GeneratingSet:
    """The matched-delimiter generating sets.

    variant 'canonical' is the recursive block family; 'g1' adds the two
    openers, 'g2' the two closers.  n_max, when given, eagerly materializes
    levels up to that block depth (budget-guarded).
    """
    if variant not in ("canonical", "g1", "g2"):
        raise ValueError(f"unknown variant {variant!r}")
    extra = {"canonical": (), "g1": ("(", "["), "g2": (")", "]")}[variant]

    def enumerate_level(n):
        ws = list(_dyck_level(n // 2)) if n % 2 == 0 else []
        if n == 1:
            ws.extend(Word((s,)) for s in extra)
        return ws

    def count(n):
        c = _dyck_count(n // 2) if n % 2 == 0 else 0
        if n == 1:
            c += len(extra)
        return c

    def uniform(n, draw):
        if n == 1 and extra:
            return Word((extra[draw(len(extra))],))
        return _dyck_uniform(n, draw)

    name = {"canonical": "dyck", "g1": "dyck_g1", "g2": "dyck_g2"}[variant]
    meta = {}
    if variant == "g1":
        meta["sofic_checkpoint"] = {"max_len": 140, "tol": 1e-6}
    gs = GeneratingSet.family(
        _DYCK_ALPHABET,
        enumerate_level,
        TailBound(C=1.0, rho=2.0**1.5, N0=1),
        count_fn=count,
        uniform_sampler=uniform,
        name=name,
        params={},
        certificates=_dyck_certificate(),
        closed_forms={"h_genset": 1.5 * LOG2},
        meta=meta,
    )
    if n_max is not None:
        gs.words_up_to(2 * n_max)
    return gs


# ----------------------------------------------------------------------
# Greedy base-beta digit expansions
# ----------------------------------------------------------------------
class BetaExpansion:
    """Greedy digit expansion of a non-integer base beta > 1.

    Digits satisfy b_1 = floor(beta), then b_{n+1} = floor(beta r_n) with
    r_{n+1} = beta r_n - b_{n+1}.  All arithmetic is exact (the float input
    is treated as the rational it denotes), so digits never drift at depth.
    A terminating or repeating remainder is flagged, not repaired.
    """

    def __init__(self, beta):
        self.beta_exact = Fraction(beta)
        if self.beta_exact <= 1:
            raise ValueError("beta must exceed 1")
        if self.beta_exact.denominator == 1:
            raise ValueError("beta must not be an integer")
        self.beta = float(self.beta_exact)
        b1 = int(self.beta_exact)
        self._digits = [b1]
        self._r = self.beta_exact - b1
        self._seen = {self._r: 1}
        self.finite = self._r == 0
        self.eventually_periodic = False
        self.cycle: Optional[tuple] = None

    def extend(self, N: int) -> None:
        while len(self._digits) < N:
            if self.finite:
                self._digits.append(0)
                continue
            x = self.beta_exact * self._r
            b = int(x)
            self._digits.append(b)
            self._r = x - b
            if self._r == 0:
                self.finite = True
                self.eventually_periodic = True
                if self.cycle is None:
                    self.cycle = (len(self._digits), 0)
            elif self._r in self._seen:
                if not self.eventually_periodic:
                    self.eventually_periodic = True
                    start = self._seen[self._r]
                    self.cycle = (start, len(self._digits) - start)
            else:
                self._seen[self._r] = len(self._digits)

    def digit(self, n: int) -> int:
        if n < 1:
            raise IndexError(n)
        self.extend(n)
        return self._digits[n - 1]

    def digit_list(self, N: int) -> list:
        self.extend(N)
        return list(self._digits[:N])

    def remainder(self, n: int) -> Fraction:
        """r_n = beta^n (1 - sum_{k<=n} b_k beta^{-k}), exactly."""
        self.extend(n)
        return self.beta_exact**n * (1 - self.partial_sum(n))

    def partial_sum(self, N: int) -> Fraction:
        self.extend(N)
        inv = 1 / self.beta_exact
        acc = Fraction(0)
        power = Fraction(1)
        for b in self._digits[:N]:
            power *= inv
            acc += b * power
        return acc

    def tail_allowance(self, N: int) -> Fraction:
        """Analytic bound: 1 - partial_sum(N) <= beta^{-N} * beta/(beta-1)."""
        return self.beta_exact ** (-N) * self.beta_exact / (self.beta_exact - 1)


def beta_generators(beta, depth: int = 60):
    """The digit-path generating set of a beta shift.

    Generators are the digit prefixes b_1..b_j followed by any smaller digit,
    plus the single letters below b_1; there are b_n of them at length n.
    Returns the expansion object and the (lazily infinite) generating set.
    """
    exp = BetaExpansion(beta)
    exp.extend(depth)
    floor_beta = exp.digit_list(1)[0]
    alphabet = Alphabet([str(i) for i in range(floor_beta + 1)])

    def prefix(j):
        return tuple(str(b) for b in exp.digit_list(j))

    def enumerate_level(n):
        top = exp.digit(n)
        if top == 0:
            return []
        pre = prefix(n - 1)
        return [Word(pre + (str(i),)) for i in range(top)]

    def count(n):
        return exp.digit(n)

    def uniform(n, draw):
        top = exp.digit(n)
        return Word(prefix(n - 1) + (str(draw(top)),))

    gs = GeneratingSet.family(
        alphabet,
        enumerate_level,
        TailBound(C=float(math.ceil(exp.beta)), rho=1.0, N0=1),
        count_fn=count,
        uniform_sampler=uniform,
        name="beta",
        params={"beta": float(beta), "depth": depth},
        certificates={
            "unique_representation": (
                "every generator is a maximal digit-path prefix; the first "
                "strict drop below the digit sequence ends each block"
            )
        },
        closed_forms={"h_genset": 0.0, "h_top": math.log(float(beta))},
    )
    gs.meta["expansion"] = exp
    return exp, gs


# ----------------------------------------------------------------------
# Gap-template families
# ----------------------------------------------------------------------
def _as_gapset(S):
    if isinstance(S, Progression):
        return S
    if isinstance(S, dict):
        if "progression" in S:
            p = S["progression"]
            return Progression(int(p["a"]), int(p["b"]))
        raise CodedShiftError(f"bad gap-set descriptor: {S!r}")
    return sorted(set(int(s) for s in S))


def _gap_contains(S, s: int) -> bool:
    if isinstance(S, Progression):
        return s >= S.a and (s - S.a) % S.b == 0
    return s in S


def sgap(S) -> GeneratingSet:
    """Generators 0 1^s for s in S (finite set or arithmetic progression)."""
    S = _as_gapset(S)
    if not isinstance(S, Progression) and not S:
        raise CodedShiftError("sgap needs a nonempty gap set")
    alphabet = Alphabet(["0", "1"])
    cert = {
        "unique_representation": "every block starts at a 0 and contains no other 0"
    }
    closed = {"h_genset": 0.0}
    if isinstance(S, Progression):
        gs = GeneratingSet.family(
            alphabet,
            lambda n: [Word("0" + "1" * (n - 1))] if _gap_contains(S, n - 1) else [],
            TailBound(C=1.0, rho=1.0, N0=1),
            count_fn=lambda n: 1 if _gap_contains(S, n - 1) else 0,
            name="sgap",
            params={"S": {"progression": {"a": S.a, "b": S.b}}},
            certificates=cert,
            closed_forms=closed,
        )
        return gs
    words = [Word("0" + "1" * s) for s in S]
    gs = GeneratingSet.explicit(
        alphabet, words, name="sgap", params={"S": list(S)},
        certificates=cert, closed_forms=closed,
    )
    return gs


def multigap(S_list, r: int = 0) -> GeneratingSet:
    """Generators 0 i^s for s in S_i, over the alphabet {0, ..., d}.

    A gap size of 0 yields the bare word 0 regardless of the branch, so it is
    allowed in at most one branch.
    """
    sets = [_as_gapset(S) for S in S_list]
    if any(not isinstance(S, Progression) and not S for S in sets):
        raise CodedShiftError("multigap branches need nonempty gap sets")
    if r != 0:
        raise CodedShiftError("multigap template has no extra unit letters; r must be 0")
    zero_branches = [i for i, S in enumerate(sets) if _gap_contains(S, 0)]
    if len(zero_branches) > 1:
        raise CodedShiftError(
            "gap size 0 in more than one branch duplicates the word '0': "
            f"branches {zero_branches}"
        )
    d = len(sets)
    if d < 1:
        raise CodedShiftError("multigap needs at least one branch")
    alphabet = Alphabet([str(i) for i in range(d + 1)])
    cert = {
        "unique_representation": "every block starts at a 0 and contains no other 0"
    }

    def members(n):
        # generators of length n = s + 1
        s = n - 1
        out = []
        for i, S in enumerate(sets, start=1):
            if _gap_contains(S, s):
                out.append(Word(("0",) + (str(i),) * s))
                if s == 0:
                    break  # the bare '0' only once
        return out

    if all(not isinstance(S, Progression) for S in sets):
        words = []
        for n in range(1, max(max(S) for S in sets) + 2):
            words.extend(members(n))
        return GeneratingSet.explicit(
            alphabet, words, name="multigap",
            params={"S_list": [list(S) for S in sets]},
            certificates=cert, closed_forms={"h_genset": 0.0},
        )

    def count(n):
        s = n - 1
        k = sum(1 for S in sets if _gap_contains(S, s))
        if s == 0:
            k = min(k, 1)
        return k

    params = {
        "S_list": [
            {"progression": {"a": S.a, "b": S.b}} if isinstance(S, Progression) else list(S)
            for S in sets
        ]
    }
    return GeneratingSet.family(
        alphabet,
        members,
        TailBound(C=float(d), rho=1.0, N0=1),
        count_fn=count,
        name="multigap",
        params=params,
        certificates=cert,
        closed_forms={"h_genset": 0.0},
    )


# ----------------------------------------------------------------------
def nongibbs(schedule="squares") -> GeneratingSet:
    """Generators 0^{n_i} 1^{n_i} along a strictly increasing schedule.

    The default schedule n_i = i^2 has gaps n_{i+1} - n_i growing without
    bound, which is what makes the maximal measure fail the Gibbs comparison.
    """
    alphabet = Alphabet(["0", "1"])
    if schedule == "squares":
        fn = lambda i: i * i  # noqa: E731
        params = {"schedule": "squares"}
    elif schedule == "linear":
        fn = lambda i: i  # noqa: E731
        params = {"schedule": "linear"}
    else:
        ns = [int(x) for x in schedule]
        if any(b <= a for a, b in zip(ns, ns[1:])) or not ns or ns[0] < 1:
            raise CodedShiftError("nongibbs schedule must be strictly increasing positive")
        words = [Word("0" * n + "1" * n) for n in ns]
        return GeneratingSet.explicit(
            alphabet, words, name="nongibbs", params={"schedule": ns},
            certificates={"unique_representation": "maximal 01-runs force boundaries"},
            closed_forms={"h_genset": 0.0},
        )

    def is_scheduled(half):
        i = 1
        while True:
            v = fn(i)
            if v == half:
                return True
            if v > half:
                return False
            i += 1

    def members(n):
        if n % 2 == 0 and is_scheduled(n // 2):
            half = n // 2
            return [Word("0" * half + "1" * half)]
        return []

    return GeneratingSet.family(
        alphabet,
        members,
        TailBound(C=1.0, rho=1.0, N0=1),
        count_fn=lambda n: 1 if (n % 2 == 0 and is_scheduled(n // 2)) else 0,
        uniform_sampler=lambda n, draw: Word("0" * (n // 2) + "1" * (n // 2)),
        name="nongibbs",
        params=params,
        certificates={"unique_representation": "maximal 01-runs force boundaries"},
        closed_forms={"h_genset": 0.0},
    )


def three_mme() -> GeneratingSet:
    """Blocks {0,1}^k {2,3}^k 4^k for every k >= 1.

    The three symbol regimes make parses unambiguous while the residual full
    shifts on {0,1} and {2,3} tie the sequential entropy exactly.
    """
    alphabet = Alphabet(["0", "1", "2", "3", "4"])

    def members(n):
        if n % 3 != 0:
            return []
        k = n // 3
        if 4**k > 4_200_000:
            from .errors import BudgetError

            raise BudgetError(f"level n={n} holds 4^{k} generators", at=n)
        out = []
        for v in itertools.product("01", repeat=k):
            for w in itertools.product("23", repeat=k):
                out.append(Word(v + w + ("4",) * k))
        return out

    def uniform(n, draw):
        k = n // 3
        v = tuple("01"[draw(2)] for _ in range(k))
        w = tuple("23"[draw(2)] for _ in range(k))
        return Word(v + w + ("4",) * k)

    return GeneratingSet.family(
        alphabet,
        members,
        TailBound(C=1.0, rho=2.0 ** (2.0 / 3.0), N0=1),
        count_fn=lambda n: 4 ** (n // 3) if n % 3 == 0 else 0,
        uniform_sampler=uniform,
        name="three_mme",
        params={},
        certificates={
            "unique_representation": (
                "the {0,1} / {2,3} / 4 regime changes inside each block "
                "determine all boundaries"
            )
        },
        closed_forms={"h_genset": 2.0 * LOG2 / 3.0, "h_top": LOG2},
        meta={"sofic_checkpoint": {"max_len": 57, "tol": 1e-6}},
    )


# ----------------------------------------------------------------------
def preset(name: str, params: Optional[dict] = None) -> GeneratingSet:
    """Build a registered family by name; see the genset JSON schema."""
    params = dict(params or {})
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise CodedShiftError(f"unknown family {name!r}; known: {sorted(_BUILDERS)}") from None
    return builder(params)


def _build_sgap(params):
    if "S" not in params:
        raise CodedShiftError("sgap params need field 'S'")
    return sgap(params["S"])


def _build_multigap(params):
    if "S_list" not in params:
        raise CodedShiftError("multigap params need field 'S_list'")
    return multigap(params["S_list"], r=int(params.get("r", 0)))


def _build_beta(params):
    if "beta" not in params:
        raise CodedShiftError("beta params need field 'beta'")
    _, gs = beta_generators(params["beta"], depth=int(params.get("depth", 60)))
    return gs


def _build_nongibbs(params):
    return nongibbs(params.get("schedule", "squares") if params else "squares")


def _build_three_mme(params):
    return three_mme()


def _build_dyck(params):
    return dyck_generators(params.get("n_max"), variant="canonical")


def _build_dyck_g1(params):
    return dyck_generators(params.get("n_max"), variant="g1")


def _build_dyck_g2(params):
    return dyck_generators(params.get("n_max"), variant="g2")


def _build_theorem_a(params):
    from .constructions import SftSpec, build_theorem_a

    for field in ("alphabet", "forbidden", "epsilon", "n"):
        if field not in params:
            raise CodedShiftError(f"theorem_a params need field {field!r}")
    Z = SftSpec.build(Alphabet(params["alphabet"]), [as_word(w) for w in params["forbidden"]])
    return build_theorem_a(Z, float(params["epsilon"]), int(params["n"])).genset


def _build_augmented(params):
    from .constructions import build_augmentation

    for field in ("base", "epsilon", "depth"):
        if field not in params:
            raise CodedShiftError(f"augmented params need field {field!r}")
    base = params["base"]
    base_gs = preset(base["name"], base.get("params"))
    return build_augmentation(base_gs, float(params["epsilon"]), int(params["depth"])).genset


_BUILDERS = {
    "sgap": _build_sgap,
    "multigap": _build_multigap,
    "beta": _build_beta,
    "dyck": _build_dyck,
    "dyck_g1": _build_dyck_g1,
    "dyck_g2": _build_dyck_g2,
    "nongibbs": _build_nongibbs,
    "three_mme": _build_three_mme,
    "theorem_a": _build_theorem_a,
    "augmented": _build_augmented,
}

for _name, _builder in _BUILDERS.items():
    register_family(_name, _builder)
