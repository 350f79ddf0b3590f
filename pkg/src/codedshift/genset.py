"""Generating sets: explicit word lists and lazily enumerable length-indexed
families, with length spectra, tail-growth certificates, and decipherability
checks.
"""

from __future__ import annotations

import json
import math
import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import BudgetError, CodedShiftError
from .words import Alphabet, Word, as_word, factorize

DEFAULT_MAX_GEN_LEN = 64
DEFAULT_ENUM_BUDGET = 500_000


@dataclass(frozen=True)
class TailBound:
    """Certificate c(n) <= C * rho**n for all n >= N0."""

    C: float
    rho: float
    N0: int = 1

    def __post_init__(self):
        if not (self.C > 0):
            raise ValueError("TailBound: C must be positive")
        if not (self.rho >= 1.0):
            raise ValueError("TailBound: rho must be >= 1")
        if self.N0 < 1:
            raise ValueError("TailBound: N0 must be >= 1")

    def check(self, counts: Callable[[int], int], span: int = 64) -> None:
        for n in range(self.N0, self.N0 + span + 1):
            c = counts(n)
            if c > self.C * self.rho**n * (1 + 1e-12):
                raise ValueError(
                    f"TailBound violated at n={n}: c(n)={c} > {self.C}*{self.rho}^{n}"
                )

    def geometric_tail(self, lam: float, N: int) -> float:
        """Upper bound for sum_{n>N} c(n) lam^{-n}, valid once N >= N0."""
        q = self.rho / lam
        if q >= 1.0:
            return math.inf
        return self.C * q ** (N + 1) / (1.0 - q)

    def weighted_tail(self, lam: float, N: int) -> float:
        """Upper bound for sum_{n>N} n c(n) lam^{-n}, valid once N >= N0."""
        q = self.rho / lam
        if q >= 1.0:
            return math.inf
        # sum_{n>N} n q^n = q^{N+1} ((N+1)(1-q) + q) / (1-q)^2
        return self.C * q ** (N + 1) * ((N + 1) * (1.0 - q) + q) / (1.0 - q) ** 2


class GeneratingSet:
    """A code: the words whose bi-infinite concatenations generate a shift.

    Two kinds.  Explicit sets hold a finite word list.  Families hold an
    enumerator n -> words of length n, a mandatory TailBound, and usually a
    closed-form count function; enumeration results are cached behind a lock
    so concurrent queries are safe.
    """

    def __init__(
        self,
        alphabet: Alphabet,
        *,
        words=None,
        enumerator=None,
        count_fn=None,
        tail: Optional[TailBound] = None,
        uniform_sampler=None,
        name: Optional[str] = None,
        params: Optional[dict] = None,
        certificates: Optional[dict] = None,
        closed_forms: Optional[dict] = None,
        meta: Optional[dict] = None,
        validate_tail: bool = True,
    ):
        self.alphabet = alphabet
        self.name = name
        self.params = dict(params or {})
        self.certificates = dict(certificates or {})
        self.closed_forms = dict(closed_forms or {})
        self.meta = dict(meta or {})
        self._count_fn = count_fn
        self._uniform_sampler = uniform_sampler
        self._lock = threading.Lock()
        self._words_cache: dict[int, tuple] = {}
        self._count_cache: dict[int, int] = {}

        if (words is None) == (enumerator is None):
            raise ValueError("exactly one of words / enumerator is required")

        if words is not None:
            self.kind = "explicit"
            ws = [as_word(w) for w in words]
            if any(len(w) == 0 for w in ws):
                raise ValueError("generating set must not contain the empty word")
            for w in ws:
                if not alphabet.contains_word(w):
                    raise ValueError(f"word {w.text()!r} uses symbols outside the alphabet")
            if len(set(ws)) != len(ws):
                raise ValueError("explicit generating set has duplicate words")
            ws.sort(key=alphabet.sort_key)
            self._words = tuple(ws)
            self._enumerator = None
            self.tail = None
            self._max_len = max(len(w) for w in ws)
        else:
            self.kind = "family"
            if tail is None:
                raise ValueError("family generating sets require a TailBound")
            self._words = None
            self._enumerator = enumerator
            self.tail = tail
            self._max_len = None
            if validate_tail:
                span = 64 if count_fn is not None else 8
                tail.check(self.count, span=span)
                if count_fn is not None:
                    # spot-check enumerator consistency at cheap levels
                    for n in range(1, tail.N0 + 3):
                        if count_fn(n) <= 4096:
                            got = len(self.words_of_length(n))
                            if got != count_fn(n):
                                raise ValueError(
                                    f"enumerator/count mismatch at n={n}: {got} != {count_fn(n)}"
                                )

    # ------------------------------------------------------------------
    @classmethod
    def explicit(cls, alphabet, words, **kw) -> "GeneratingSet":
        return cls(alphabet, words=words, **kw)

    @classmethod
    def family(cls, alphabet, enumerator, tail, **kw) -> "GeneratingSet":
        return cls(alphabet, enumerator=enumerator, tail=tail, **kw)

    @property
    def is_explicit(self) -> bool:
        return self.kind == "explicit"

    @property
    def max_len(self) -> Optional[int]:
        """Largest generator length for explicit sets, None for families."""
        return self._max_len

    def growth_rho(self) -> float:
        return 1.0 if self.is_explicit else self.tail.rho

    # ------------------------------------------------------------------
    def words_of_length(self, n: int) -> tuple:
        """Generators of length exactly n, sorted by the alphabet order."""
        if n < 1:
            return ()
        with self._lock:
            if n in self._words_cache:
                return self._words_cache[n]
        if self.is_explicit:
            ws = tuple(w for w in self._words if len(w) == n)
        else:
            try:
                raw = self._enumerator(n)
            except Exception as exc:  # noqa: BLE001 - surfaced with the level
                raise CodedShiftError(f"family enumeration failed at n={n}: {exc}") from exc
            ws = tuple(sorted((as_word(w) for w in raw), key=self.alphabet.sort_key))
            if any(len(w) != n for w in ws):
                raise CodedShiftError(f"enumerator returned a word of wrong length at n={n}")
            if len(set(ws)) != len(ws):
                raise CodedShiftError(f"enumerator returned duplicate words at n={n}")
        with self._lock:
            self._words_cache[n] = ws
            self._count_cache[n] = len(ws)
        return ws

    def count(self, n: int) -> int:
        """c(n): number of generators of length exactly n."""
        if n < 1:
            return 0
        if self.is_explicit:
            return len(self.words_of_length(n))
        with self._lock:
            if n in self._count_cache:
                return self._count_cache[n]
        c = self._count_fn(n) if self._count_fn is not None else len(self.words_of_length(n))
        c = int(c)
        with self._lock:
            self._count_cache.setdefault(n, c)
        return c

    def length_spectrum(self, N: int) -> list:
        """[c(1), ..., c(N)]; matches the closed-form counts when present."""
        if N < 1:
            raise ValueError("length_spectrum: N >= 1 required")
        return [self.count(n) for n in range(1, N + 1)]

    def count_up_to(self, max_len: int) -> int:
        return sum(self.count(n) for n in range(1, max_len + 1))

    def words_up_to(self, max_len: int, budget: int = DEFAULT_ENUM_BUDGET) -> list:
        """All generators of length <= max_len in canonical order.

        Raises BudgetError (naming the offending length) before enumerating
        past `budget` words.
        """
        out = []
        total = 0
        for n in range(1, max_len + 1):
            total += self.count(n)
            if total > budget:
                raise BudgetError(
                    f"enumeration of generators up to length {max_len} exceeds "
                    f"budget {budget} at length n={n}",
                    at=n,
                )
            out.extend(self.words_of_length(n))
        return out

    def contains(self, w) -> bool:
        w = as_word(w)
        if len(w) == 0:
            return False
        if self.is_explicit:
            return w in self._words
        if self.count(len(w)) == 0:
            return False
        return w in self.words_of_length(len(w))

    def uniform_word(self, n: int, draw) -> Word:
        """A uniform generator of length n; `draw(k)` yields an int in [0, k).

        Families may install a lazy sampler; the fallback enumerates the
        length class.
        """
        c = self.count(n)
        if c == 0:
            raise ValueError(f"no generators of length {n}")
        if self._uniform_sampler is not None:
            return self._uniform_sampler(n, draw)
        return self.words_of_length(n)[draw(c)]

    # ------------------------------------------------------------------
    def to_json(self) -> dict:
        if self.is_explicit:
            return {
                "alphabet": list(self.alphabet.symbols),
                "kind": "explicit",
                "words": [w.text() for w in self._words],
            }
        if self.name is None:
            raise CodedShiftError("only registered families serialize to JSON")
        return {
            "alphabet": list(self.alphabet.symbols),
            "kind": "family",
            "family": {"name": self.name, "params": self.params},
            "tail": {"C": self.tail.C, "rho": self.tail.rho, "N0": self.tail.N0},
        }

    @staticmethod
    def from_json(obj: dict) -> "GeneratingSet":
        if not isinstance(obj, dict):
            raise CodedShiftError("genset JSON: expected an object")
        kind = obj.get("kind")
        if kind == "explicit":
            if "alphabet" not in obj:
                raise CodedShiftError("genset JSON: missing field 'alphabet'")
            if "words" not in obj:
                raise CodedShiftError("genset JSON: missing field 'words'")
            alphabet = Alphabet(obj["alphabet"])
            return GeneratingSet.explicit(alphabet, [as_word(w) for w in obj["words"]])
        if kind == "family":
            fam = obj.get("family")
            if not isinstance(fam, dict) or "name" not in fam:
                raise CodedShiftError("genset JSON: missing field 'family.name'")
            name = fam["name"]
            if name not in FAMILY_BUILDERS:
                raise CodedShiftError(f"genset JSON: unknown family {name!r}")
            return FAMILY_BUILDERS[name](fam.get("params") or {})
        raise CodedShiftError("genset JSON: field 'kind' must be 'explicit' or 'family'")

    @staticmethod
    def load(path) -> "GeneratingSet":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                obj = json.load(fh)
        except OSError as exc:
            raise CodedShiftError(f"cannot read genset file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise CodedShiftError(f"malformed JSON in genset file {path}: {exc}") from exc
        return GeneratingSet.from_json(obj)

    def __repr__(self) -> str:
        if self.is_explicit:
            return f"GeneratingSet(explicit, {len(self._words)} words)"
        return f"GeneratingSet(family {self.name!r})"


# Registered family builders (populated by the families module on import).
FAMILY_BUILDERS: dict[str, Callable[[dict], GeneratingSet]] = {}


def register_family(name: str, builder: Callable[[dict], GeneratingSet]) -> None:
    FAMILY_BUILDERS[name] = builder


# ----------------------------------------------------------------------
@dataclass(frozen=True)
class UdVerdict:
    """Outcome of a unique-decipherability test on a truncated code."""

    decipherable: bool
    witness: Optional[Word] = None
    witness_parses: tuple = ()
    max_gen_len: int = DEFAULT_MAX_GEN_LEN


def sardinas_patterson(G, max_gen_len: int = DEFAULT_MAX_GEN_LEN, budget: int = 2_000_000) -> UdVerdict:
    """Decide unique decipherability of the length-truncated code.

    Runs the dangling-suffix iteration as a BFS with parent links, so a
    failure comes back with a concrete witness word carrying two parses.
    """
    if hasattr(G, "words_up_to"):
        code = [as_word(w) for w in G.words_up_to(max_gen_len)]
    else:
        code = [as_word(w) for w in G if len(as_word(w)) <= max_gen_len]
    if not code:
        raise ValueError("sardinas_patterson: empty truncated code")
    code_set = {w.syms for w in code}
    lengths = sorted({len(w) for w in code})
    by_prefix = sorted(code, key=lambda w: w.syms)

    def extensions(s):
        """Codewords having tuple s as a proper prefix."""
        import bisect

        lo = bisect.bisect_left(by_prefix, s, key=lambda w: w.syms)
        out = []
        for w in by_prefix[lo:]:
            if w.syms[: len(s)] != s:
                break
            if len(w.syms) > len(s):
                out.append(w)
        return out

    # state: dangling suffix s, with one parse ahead of the other by s.
    # parent[s] = (prev_state, appended_codeword, swapped_roles)
    parent: dict = {}
    queue = deque()

    def witness_from(s_final, closer):
        # reconstruct ahead/behind block lists, then append the closer
        chain = []
        s = s_final
        while s is not None:
            prev = parent[s]
            chain.append((s, prev[1], prev[2]))
            s = prev[0]
        chain.reverse()
        # chain[0] came from a root pair (u, v = u + s)
        root_u, root_v = parent_root[chain[0][0]]
        ahead, behind = [root_v], [root_u]
        for _, appended, swapped in chain:
            if appended is not None:
                behind.append(appended)
            if swapped:
                ahead, behind = behind, ahead
        behind.append(closer)
        word = Word(sum((b.syms for b in behind), ()))
        return word, (tuple(ahead), tuple(behind))

    parent_root: dict = {}
    for u in code:
        for n in lengths:
            if n >= len(u):
                break
            pre = u.syms[:n]
            if pre in code_set:
                s = u.syms[n:]
                if s in code_set:
                    # u = prefix + codeword: immediate double parse of u itself
                    w = Word(u.syms)
                    parses = ((w,), (Word(pre), Word(s)))
                    return UdVerdict(False, w, parses, max_gen_len)
                if s not in parent:
                    parent[s] = (None, None, False)
                    parent_root[s] = (Word(pre), u)
                    queue.append(s)

    visited = set(parent)
    steps = 0
    while queue:
        s = queue.popleft()
        steps += 1
        if steps > budget:
            raise BudgetError("sardinas_patterson: suffix exploration budget exceeded")
        # behind side appends codeword c
        for n in lengths:
            if n > len(s):
                break
            if s[:n] in code_set:
                if n == len(s):
                    word, parses = witness_from(s, Word(s))
                    return UdVerdict(False, word, parses, max_gen_len)
                t = s[n:]
                if t not in visited:
                    visited.add(t)
                    parent[t] = (s, Word(s[:n]), False)
                    queue.append(t)
        for w in extensions(s):
            t = w.syms[len(s):]
            if t not in visited:
                visited.add(t)
                parent[t] = (s, w, True)
                queue.append(t)
    return UdVerdict(True, None, (), max_gen_len)


@dataclass(frozen=True)
class RepresentationReport:
    """Result of the finite unique-representation check."""

    passed: bool
    certified: bool
    certificate: Optional[str]
    ud: Optional[UdVerdict]
    witness: Optional[Word]
    horizon: int
    max_gen_len: int
    searched_words: int = 0
    search_complete: bool = False


def _ambiguity_search(G, horizon: int, max_gen_len: int, budget: int):
    """Exhaustive scan of concatenations of length <= horizon for a word with
    two distinct parses.  Returns (witness or None, words examined, completed
    flag); the flag drops when the word budget runs out first.

    parses(s) is computed by splitting off the last block, so every word in
    the truncated G* gets its exact parse count.
    """
    gens = [as_word(g) for g in G.words_up_to(max_gen_len)]
    by_block_len: dict[int, list] = {}
    for g in gens:
        by_block_len.setdefault(len(g), []).append(g.syms)
    parses = {(): 1}
    by_len = {0: [()]}
    examined = 0
    for L in range(1, horizon + 1):
        projected = sum(
            len(by_len.get(L - n, ())) * len(members)
            for n, members in by_block_len.items()
            if n <= L
        )
        if examined + projected > budget:
            return None, examined, False
        bucket: dict[tuple, int] = {}
        for n, members in by_block_len.items():
            if n > L:
                continue
            for t in by_len.get(L - n, ()):
                base = parses[t]
                for g in members:
                    s = t + g
                    bucket[s] = bucket.get(s, 0) + base
        level = sorted(bucket)
        for s in level:
            examined += 1
            parses[s] = bucket[s]
            if bucket[s] > 1:
                w = Word(s)
                if factorize(w, gens, max_gen_len).count > 1:
                    return w, examined, True
        by_len[L] = level
    return None, examined, True


def unique_representation_check(
    G,
    horizon: int = 10,
    max_gen_len: Optional[int] = None,
    search_budget: int = 200_000,
) -> RepresentationReport:
    """Finite necessary condition for unique representation.

    Families proven unique carry a certificate and skip the search; otherwise
    the truncated code is run through sardinas_patterson and a bounded
    concatenation search looks for a word with two parses.
    """
    cert = G.certificates.get("unique_representation")
    if max_gen_len is None:
        max_gen_len = horizon
    if cert is not None:
        return RepresentationReport(
            passed=True,
            certified=True,
            certificate=cert,
            ud=None,
            witness=None,
            horizon=horizon,
            max_gen_len=max_gen_len,
        )
    # cap the truncation to what the enumeration budget allows
    eff_len = 0
    total = 0
    for n in range(1, max_gen_len + 1):
        total += G.count(n)
        if total > search_budget:
            break
        eff_len = n
    if eff_len == 0:
        raise BudgetError("unique_representation_check: no generator level fits the budget")
    ud = sardinas_patterson(G, eff_len)
    if not ud.decipherable:
        return RepresentationReport(
            passed=False,
            certified=False,
            certificate=None,
            ud=ud,
            witness=ud.witness,
            horizon=horizon,
            max_gen_len=eff_len,
        )
    witness, examined, complete = _ambiguity_search(G, horizon, eff_len, search_budget)
    return RepresentationReport(
        passed=witness is None,
        certified=False,
        certificate=None,
        ud=ud,
        witness=witness,
        horizon=horizon,
        max_gen_len=eff_len,
        searched_words=examined,
        search_complete=complete,
    )
