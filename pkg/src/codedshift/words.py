"""Alphabets, finite words, occurrences, and factorization into code words.

Symbols are opaque string tokens (length >= 1), so alphabets like
{(, ), [, ]} and {0, ..., 4} share one representation.  Words serialize as
their tokens joined with an empty separator when every token is a single
character, otherwise comma-separated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator


class Word:
    """An immutable finite word: a tuple of symbol tokens."""

    __slots__ = ("syms",)

    def __init__(self, syms: Iterable[str] = ()):
        if isinstance(syms, Word):
            object.__setattr__(self, "syms", syms.syms)
        else:
            object.__setattr__(self, "syms", tuple(syms))

    def __setattr__(self, name, value):
        raise AttributeError("Word is immutable")

    @staticmethod
    def parse(text: str) -> "Word":
        """Inverse of text(): comma-separated tokens, else one char per token."""
        if text == "":
            return Word()
        if "," in text:
            return Word(text.split(","))
        return Word(text)

    def text(self) -> str:
        if all(len(s) == 1 for s in self.syms):
            return "".join(self.syms)
        return ",".join(self.syms)

    def __len__(self) -> int:
        return len(self.syms)

    def __iter__(self) -> Iterator[str]:
        return iter(self.syms)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Word(self.syms[i])
        return self.syms[i]

    def __add__(self, other: "Word") -> "Word":
        return Word(self.syms + as_word(other).syms)

    def __mul__(self, k: int) -> "Word":
        return Word(self.syms * k)

    def __eq__(self, other) -> bool:
        return isinstance(other, Word) and self.syms == other.syms

    def __hash__(self) -> int:
        return hash(self.syms)

    def __lt__(self, other: "Word") -> bool:
        # Fallback ordering (length, then token order); canonical enumeration
        # sorts with Alphabet.sort_key instead.
        return (len(self.syms), self.syms) < (len(other.syms), other.syms)

    def startswith(self, prefix: "Word", at: int = 0) -> bool:
        return self.syms[at : at + len(prefix.syms)] == prefix.syms

    def endswith(self, suffix: "Word") -> bool:
        n = len(suffix.syms)
        return n == 0 or self.syms[-n:] == suffix.syms

    def __repr__(self) -> str:
        return f"Word({self.text()!r})"

    def __str__(self) -> str:
        return self.text()


def as_word(w) -> Word:
    """Coerce a Word, plain string, or iterable of tokens to a Word."""
    if isinstance(w, Word):
        return w
    if isinstance(w, str):
        return Word.parse(w)
    return Word(w)


class Alphabet:
    """An ordered set of distinct symbol tokens (1 to 255 of them).

    Symbol order is fixed and total; it drives every deterministic
    enumeration in the package.
    """

    __slots__ = ("symbols", "_index")

    def __init__(self, symbols: Iterable[str]):
        syms = tuple(symbols)
        if not syms:
            raise ValueError("alphabet must be nonempty")
        if len(syms) > 255:
            raise ValueError("alphabet holds at most 255 symbols")
        if len(set(syms)) != len(syms):
            raise ValueError("alphabet symbols must be distinct")
        if any(not isinstance(s, str) or len(s) < 1 for s in syms):
            raise ValueError("symbols are nonempty strings")
        object.__setattr__(self, "symbols", syms)
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(syms)})

    def __setattr__(self, name, value):
        raise AttributeError("Alphabet is immutable")

    def index(self, sym: str) -> int:
        return self._index[sym]

    def __contains__(self, sym: str) -> bool:
        return sym in self._index

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self) -> Iterator[str]:
        return iter(self.symbols)

    def __eq__(self, other) -> bool:
        return isinstance(other, Alphabet) and self.symbols == other.symbols

    def __hash__(self) -> int:
        return hash(self.symbols)

    def __repr__(self) -> str:
        return f"Alphabet({list(self.symbols)!r})"

    def contains_word(self, w: Word) -> bool:
        return all(s in self._index for s in w.syms)

    def key(self, w: Word) -> tuple:
        """Lexicographic key of a word under the alphabet's symbol order."""
        idx = self._index
        return tuple(idx[s] for s in w.syms)

    def sort_key(self, w: Word) -> tuple:
        """Canonical enumeration key: by length, then lexicographic."""
        return (len(w.syms), self.key(w))

    def words_of_length(self, n: int) -> Iterator[Word]:
        """All length-n words in lexicographic order."""
        if n == 0:
            yield Word()
            return
        stack = [()]
        for _ in range(n):
            stack = [t + (s,) for t in stack for s in self.symbols]
        for t in stack:
            yield Word(t)


def occurrences(w, u) -> list:
    """Ascending start indices of all (possibly overlapping) copies of u in w.

    Raises ValueError for an empty pattern.
    """
    w, u = as_word(w), as_word(u)
    if len(u) == 0:
        raise ValueError("occurrences: empty pattern")
    ws, us = w.syms, u.syms
    m = len(us)
    return [i for i in range(len(ws) - m + 1) if ws[i : i + m] == us]


@dataclass(frozen=True)
class Factorization:
    """One parse of a word into generator blocks.

    cut_points are the interior block boundaries (strictly increasing,
    excluding 0 and the word length); the concatenation of blocks reproduces
    the word exactly.
    """

    cut_points: tuple
    blocks: tuple

    def __len__(self) -> int:
        return len(self.blocks)


@dataclass(frozen=True)
class FactorizeResult:
    """All parses of a word, with an exact count even when listing is capped."""

    parses: tuple
    count: int
    truncated: bool

    def __len__(self) -> int:
        return len(self.parses)

    def __iter__(self):
        return iter(self.parses)

    def __getitem__(self, i):
        return self.parses[i]


def _blocks_by_length(gens, max_gen_len):
    table = {}
    for g in gens:
        g = as_word(g)
        n = len(g)
        if 1 <= n <= max_gen_len:
            table.setdefault(n, set()).add(g.syms)
    return table


def _gen_words(gens, max_gen_len):
    """Accept a GeneratingSet (via words_up_to) or any iterable of words."""
    if hasattr(gens, "words_up_to"):
        return gens.words_up_to(max_gen_len)
    return list(gens)


def count_factorizations(w, gens, max_gen_len: int = 64) -> int:
    """Exact number of parses of w into blocks of length <= max_gen_len.

    Dynamic programming over suffix start positions; counting is kept
    separate from listing so it scales to long words.
    """
    w = as_word(w)
    table = _blocks_by_length(_gen_words(gens, max_gen_len), max_gen_len)
    L = len(w)
    ws = w.syms
    counts = [0] * (L + 1)
    counts[L] = 1
    for i in range(L - 1, -1, -1):
        total = 0
        for n, members in table.items():
            if i + n <= L and ws[i : i + n] in members:
                total += counts[i + n]
        counts[i] = total
    return counts[0]


def factorize(w, gens, max_gen_len: int = 64, limit: int = 10000) -> FactorizeResult:
    """All complete parses of w into generators, in lexicographic cut-point order.

    The empty word has exactly one (empty) parse; unparseable words yield an
    empty result.  Listing stops after `limit` parses (truncated flag set);
    the count field stays exact regardless.
    """
    w = as_word(w)
    table = _blocks_by_length(_gen_words(gens, max_gen_len), max_gen_len)
    lengths = sorted(table)
    L = len(w)
    ws = w.syms

    counts = [0] * (L + 1)
    counts[L] = 1
    for i in range(L - 1, -1, -1):
        counts[i] = sum(
            counts[i + n]
            for n in lengths
            if i + n <= L and ws[i : i + n] in table[n]
        )

    parses = []
    truncated = False

    def emit(i, cuts, blocks):
        nonlocal truncated
        if len(parses) >= limit:
            truncated = True
            return
        if i == L:
            parses.append(Factorization(tuple(cuts[:-1]), tuple(blocks)))
            return
        # Ascending block length == lexicographic cut-point order: two
        # distinct generators of equal length cannot match the same span.
        for n in lengths:
            if i + n <= L and counts[i + n] and ws[i : i + n] in table[n]:
                emit(i + n, cuts + [i + n], blocks + [Word(ws[i : i + n])])

    if counts[0]:
        emit(0, [], [])
    return FactorizeResult(tuple(parses), counts[0], truncated)


def factor_language(gens, k: int, max_gen_len: int = 10**9) -> set:
    """All length-k factors of finite concatenations of the given blocks.

    A window sits inside one block, starts at a block boundary (a cut prefix
    of a concatenation), or is a proper block suffix followed by such a cut
    prefix.  Returns a set of symbol tuples.
    """
    if k < 1:
        raise ValueError("factor_language needs k >= 1")
    words = sorted({as_word(g).syms for g in _gen_words(gens, max_gen_len)})
    out = set()
    for t in words:
        for i in range(len(t) - k + 1):
            out.add(t[i : i + k])

    # cut[m]: the m-symbol prefixes of block concatenations, m <= k
    cut = [set() for _ in range(k + 1)]
    seen = {()}
    level = [()]
    while level:
        nxt = []
        for base in level:
            for t in words:
                cand = base + t
                for m in range(len(base) + 1, min(len(cand), k) + 1):
                    cut[m].add(cand[:m])
                if len(cand) < k and cand not in seen:
                    seen.add(cand)
                    nxt.append(cand)
        level = nxt
    out |= cut[k]

    # windows opening strictly inside a block and crossing its right edge
    for t in words:
        for s in range(1, min(len(t), k)):
            suf = t[-s:]
            for pre in cut[k - s]:
                out.add(suf + pre)
    return out


def concat_contains(u, gens, max_gen_len: int = 64) -> bool:
    """Is u a factor of some finite concatenation of the given blocks?

    States are the amounts of u already matched, seeded by every block
    placement that first touches u; a state of len(u) or beyond means some
    concatenation covers u entirely.
    """
    u = as_word(u)
    if len(u) == 0:
        return True
    words = [as_word(g) for g in _gen_words(gens, max_gen_len)]
    us = u.syms
    L = len(us)

    def match(g, pos):
        # block g placed so that it covers u starting at offset pos >= 0
        gs = g.syms
        overlap = min(len(gs), L - pos)
        return gs[:overlap] == us[pos : pos + overlap]

    frontier = set()
    for g in words:
        gs = g.syms
        # placements where g overlaps the start of u
        for off in range(len(gs)):
            overlap = min(len(gs) - off, L)
            if gs[off : off + overlap] == us[:overlap]:
                frontier.add(min(overlap, L))
    seen = set(frontier)
    while frontier:
        pos = frontier.pop()
        if pos >= L:
            return True
        for g in words:
            if match(g, pos):
                nxt = min(pos + len(g), L)
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.add(nxt)
    return False
