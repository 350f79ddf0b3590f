"""Constructive procedures: small-sequential-entropy generator builders and
the nested-marker augmentation that drives a coded shift inside its own
limit set while raising entropy by less than a prescribed epsilon.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Optional

from .entropy import solve_entropy
from .errors import CodedShiftError
from .genset import GeneratingSet, TailBound, UdVerdict, sardinas_patterson
from .words import Alphabet, Word, as_word, factor_language


# ----------------------------------------------------------------------
# Subshifts of finite type
# ----------------------------------------------------------------------
class SftSpec:
    """An irreducible subshift of finite type given by forbidden words.

    period_word repeats admissibly; absent_word is a minimal non-admissible
    word (every proper subword occurs), split as its first symbol
    marker_symbol plus tail marker_tail.  Both are derived canonically when
    not supplied.  Construction validates irreducibility via strong
    connectivity of the follower graph restricted to bi-extendable states.
    """

    def __init__(self, alphabet: Alphabet, forbidden, period_word=None, absent_word=None):
        self.alphabet = alphabet
        self.forbidden = tuple(as_word(f) for f in forbidden)
        if not self.forbidden:
            raise CodedShiftError("the full shift admits no absent word; forbid something")
        if any(len(f) == 0 for f in self.forbidden):
            raise CodedShiftError("forbidden words must be nonempty")
        for f in self.forbidden:
            if not alphabet.contains_word(f):
                raise CodedShiftError(f"forbidden word {f.text()!r} leaves the alphabet")
        self.memory = max(len(f) for f in self.forbidden)
        self.absent_word = (
            as_word(absent_word) if absent_word is not None else self._minimal_absent_word()
        )
        self.period_word = (
            as_word(period_word) if period_word is not None else self._shortest_period_word()
        )
        self.marker_symbol = self.absent_word[0]
        self.marker_tail = self.absent_word[1:]
        self.validate()

    @classmethod
    def build(cls, alphabet, forbidden, period_word=None, absent_word=None) -> "SftSpec":
        return cls(alphabet, forbidden, period_word, absent_word)

    # -- language primitives -------------------------------------------
    def admissible(self, word) -> bool:
        ws = as_word(word).syms
        for f in self.forbidden:
            fs = f.syms
            m = len(fs)
            if any(ws[i : i + m] == fs for i in range(len(ws) - m + 1)):
                return False
        return True

    def words_of_length(self, n: int):
        """Admissible words of length n in lexicographic order."""
        level = [()]
        for _ in range(n):
            level = [
                t + (a,) for t in level for a in self.alphabet if self._ext_ok(t, a)
            ]
        return [Word(t) for t in level]

    def _ext_ok(self, prefix, sym):
        t = prefix + (sym,)
        for f in self.forbidden:
            m = len(f.syms)
            if len(t) >= m and t[-m:] == f.syms:
                return False
        return True

    def language(self, count: int):
        """The first `count` admissible words, by length then lexicographic."""
        out = []
        n = 1
        while len(out) < count:
            level = self.words_of_length(n)
            if not level:
                raise CodedShiftError(f"language is empty at length {n}")
            out.extend(level)
            n += 1
        return out[:count]

    def _minimal_absent_word(self) -> Word:
        for n in range(1, self.memory + 1):
            admitted = {w.syms for w in self.words_of_length(n)}
            for cand in self.alphabet.words_of_length(n):
                if cand.syms in admitted:
                    continue
                if self._proper_subwords_admissible(cand):
                    return cand
        raise CodedShiftError("no minimal absent word found up to the forbidden length")

    def _proper_subwords_admissible(self, w) -> bool:
        t = w.syms
        n = len(t)
        return all(
            self.admissible(Word(t[i : i + m]))
            for m in range(1, n)
            for i in range(n - m + 1)
        )

    def _shortest_period_word(self) -> Word:
        for n in range(1, self.memory + 2):
            for cand in self.words_of_length(n):
                if self.admissible(cand * self._reps(n)):
                    return cand
        raise CodedShiftError("no admissible periodic word found")

    def _reps(self, period_len):
        return max(2, self.memory // period_len + 2)

    # -- validation -------------------------------------------------------
    def validate(self):
        if self.admissible(self.absent_word):
            raise CodedShiftError("designated absent word is admissible")
        if not self._proper_subwords_admissible(self.absent_word):
            raise CodedShiftError("absent word has a non-admissible proper subword")
        if not self.admissible(self.period_word * self._reps(len(self.period_word))):
            raise CodedShiftError("period word does not repeat admissibly")
        self._check_irreducible()

    def _check_irreducible(self):
        m = max(1, self.memory - 1)
        states = [w.syms for w in self.words_of_length(m)]
        if not states:
            raise CodedShiftError("subshift is empty")
        idx = {s: i for i, s in enumerate(states)}
        fwd = [[] for _ in states]
        back = [[] for _ in states]
        for s in states:
            for a in self.alphabet:
                t = (s + (a,))[1:]
                if t in idx and self.admissible(Word(s + (a,))):
                    fwd[idx[s]].append(idx[t])
                    back[idx[t]].append(idx[s])

        alive = set(range(len(states)))
        changed = True
        while changed:
            changed = False
            for q in list(alive):
                if not any(r in alive for r in fwd[q]) or not any(
                    r in alive for r in back[q]
                ):
                    alive.discard(q)
                    changed = True
        if not alive:
            raise CodedShiftError("subshift has no bi-infinite points")

        def reach(adj, start):
            seen = {start}
            stack = [start]
            while stack:
                q = stack.pop()
                for r in adj[q]:
                    if r in alive and r not in seen:
                        seen.add(r)
                        stack.append(r)
            return seen

        start = min(alive)
        if reach(fwd, start) != alive or reach(back, start) != alive:
            raise CodedShiftError("subshift of finite type is not irreducible")

    # -- bridges ------------------------------------------------------------
    def bridge(self, left, right, require_symbol: Optional[str] = None) -> Word:
        """Shortest, then lexicographically least, v with left+v+right
        admissible, containing require_symbol when demanded.

        Breadth-first over suffix states of left+v with symbols tried in
        alphabet order, so the selection is a fixed reproducible rule.
        """
        left, right = as_word(left), as_word(right)
        ctx = left.syms[-(self.memory - 1) :] if self.memory > 1 else ()

        start = (ctx, require_symbol is None)
        parent = {start: None}
        queue = deque([start])
        while queue:
            state = queue.popleft()
            tail, have = state
            for a in self.alphabet.symbols:
                cand = tail + (a,)
                if not self.admissible(Word(cand)):
                    continue
                new_tail = cand[-(self.memory - 1) :] if self.memory > 1 else ()
                nxt = (new_tail, have or a == require_symbol)
                if nxt in parent:
                    continue
                parent[nxt] = (state, a)
                if nxt[1] and self.admissible(Word(new_tail + right.syms)):
                    syms = []
                    cur = nxt
                    while parent[cur] is not None:
                        cur, sym = parent[cur]
                        syms.append(sym)
                    v = Word(reversed(syms))
                    if self.admissible(left + v + right):
                        return v
                queue.append(nxt)
        raise CodedShiftError(
            f"no admissible bridge from {left.text()!r} to {right.text()!r}; "
            "input subshift is not irreducible as claimed"
        )


# ----------------------------------------------------------------------
# Small sequential entropy with a prescribed residual subshift
# ----------------------------------------------------------------------
@dataclass
class TheoremABuild:
    """Output of the small-entropy generator construction."""

    epsilon: float
    m_schedule: tuple
    s_words: tuple
    generators: tuple
    bridges: dict
    certificate_sum: float
    certificate_tail: float
    genset: GeneratingSet

    @property
    def certificate_total(self) -> float:
        return self.certificate_sum + self.certificate_tail


def build_theorem_a(Z: SftSpec, epsilon: float, N: int) -> TheoremABuild:
    """First N generators of a coded shift whose sequential entropy stays
    certified below epsilon while the generators exhaust the language of Z.

    Each generator splices the next admissible word between bridges and a
    periodic padding block of length above n/epsilon, so generator n is
    longer than n/epsilon and the certificate sum exp(-epsilon |g_n|) plus
    its geometric tail lands strictly below 1.
    """
    if not (0 < epsilon < math.log(len(Z.alphabet))):
        raise CodedShiftError("epsilon must lie in (0, log |alphabet|)")
    if N < 1:
        raise CodedShiftError("need N >= 1 generators")
    k = Z.marker_symbol
    a_tail = Z.marker_tail
    k_occurs_in_z = len(a_tail) > 0
    require = k if k_occurs_in_z else None
    p = Z.period_word
    # enough periodic context that a bridge from p behaves like one from s_n,
    # which always ends in a long p-run
    p_ctx = p * Z._reps(len(p))
    wlist = Z.language(N + 1)
    bridges = {}

    def bridge(left_label, left, right_label, right):
        key = (left_label, right_label)
        if key not in bridges:
            bridges[key] = Z.bridge(left, right, require_symbol=require)
        return bridges[key]

    def v_from_p(w):
        return bridge("p", p_ctx, w.text(), w)

    def v_to_p(w):
        return bridge(w.text(), w, "p", p_ctx)

    def up_to_first_marker(v: Word) -> Word:
        return v[: v.syms.index(k) + 1]

    m_schedule = []
    s_words = []
    gens = []
    for n in range(1, N + 1):
        w_n = wlist[n - 1]
        if n == 1:
            m = int(math.floor(1.0 / epsilon)) + 1
            if k_occurs_in_z:
                va = bridge(a_tail.text(), a_tail, w_n.text(), w_n)
                s = a_tail + va + w_n + v_to_p(w_n) + p * m
            else:
                s = w_n + v_to_p(w_n) + p * m
        else:
            m = max(int(math.floor(n / epsilon)), len(gens[-1])) + 1
            s = s_words[-1] + v_from_p(w_n) + w_n + v_to_p(w_n) + p * m
        if not Z.admissible(s):
            raise CodedShiftError(f"assembled word s_{n} left the language of Z")
        m_schedule.append(m)
        s_words.append(s)
        if k_occurs_in_z:
            g = s + up_to_first_marker(v_from_p(wlist[n]))
        else:
            # the marker symbol never occurs in Z: close each block with it
            g = s + Word([k])
        gens.append(g)

    cert_sum = math.fsum(math.exp(-epsilon * len(g)) for g in gens)
    cert_tail = math.exp(-float(N)) / (math.e - 1.0)
    genset = GeneratingSet.explicit(
        Z.alphabet,
        gens,
        name="theorem_a",
        params={
            "alphabet": list(Z.alphabet.symbols),
            "forbidden": [f.text() for f in Z.forbidden],
            "epsilon": epsilon,
            "n": N,
        },
        certificates={
            "unique_representation": (
                "the unique absent word of the base subshift appears exactly "
                "at block boundaries, pinning every parse"
            )
        },
        closed_forms={"h_genset": 0.0},
    )
    return TheoremABuild(
        epsilon=epsilon,
        m_schedule=tuple(m_schedule),
        s_words=tuple(s_words),
        generators=tuple(gens),
        bridges=bridges,
        certificate_sum=cert_sum,
        certificate_tail=cert_tail,
        genset=genset,
    )


# ----------------------------------------------------------------------
# Marker augmentation
# ----------------------------------------------------------------------
def find_absent_markers(G: GeneratingSet, max_marker_len: int = 8, cap: Optional[int] = None):
    """Two equal-length aperiodic words absent from the (truncated) language,
    with disjoint shift orbits; scanned by length then lexicographic order.
    """
    if cap is None:
        cap = _enumeration_cap(G)
    gens = G.words_up_to(cap)
    for ell in range(2, max_marker_len + 1):
        present = factor_language(gens, ell)
        found = []
        for cand in G.alphabet.words_of_length(ell):
            t = cand.syms
            if t in present or not _aperiodic(t):
                continue
            if any(_same_orbit(t, u.syms) for u in found):
                continue
            found.append(cand)
            if len(found) == 2:
                return found[0], found[1]
    raise CodedShiftError(
        f"no marker pair of length <= {max_marker_len} is absent from the language"
    )


def _aperiodic(t) -> bool:
    n = len(t)
    return not any(n % d == 0 and t == t[:d] * (n // d) for d in range(1, n))


def _same_orbit(t, u) -> bool:
    return len(t) == len(u) and u in {t[i:] + t[:i] for i in range(len(t))}


def _enumeration_cap(G, budget: int = 120_000) -> int:
    if G.is_explicit:
        return G.max_len
    total = 0
    cap = 0
    n = 0
    while n < 256:
        n += 1
        total += G.count(n)
        if total > budget:
            break
        cap = n
    if cap == 0:
        raise CodedShiftError("no enumerable generator level fits the budget")
    return cap


def find_cover(target, gens) -> Optional[list]:
    """A block sequence whose concatenation contains the target word.

    Breadth-first over matched-length states with parent links; None when no
    cover exists among the given blocks.
    """
    target = as_word(target)
    us = target.syms
    L = len(us)
    words = [as_word(g) for g in gens]

    parent = {}
    for g in words:
        gs = g.syms
        for off in range(len(gs)):
            overlap = min(len(gs) - off, L)
            if gs[off : off + overlap] == us[:overlap]:
                pos = min(overlap, L)
                if pos not in parent:
                    parent[pos] = (None, g)
    queue = deque(sorted(parent))
    while queue:
        pos = queue.popleft()
        if pos >= L:
            blocks = []
            cur = pos
            while cur is not None:
                prev, g = parent[cur]
                blocks.append(g)
                cur = prev
            return list(reversed(blocks))
        for g in words:
            gs = g.syms
            overlap = min(len(gs), L - pos)
            if gs[:overlap] == us[pos : pos + overlap]:
                nxt = min(pos + len(gs), L)
                if nxt not in parent:
                    parent[nxt] = (pos, g)
                    queue.append(nxt)
    return None


@dataclass
class AugmentationBuild:
    """Output of the nested-marker augmentation."""

    base: GeneratingSet
    u: Word
    v: Word
    w_words: tuple
    f_words: tuple
    genset: GeneratingSet
    lambda_base: float
    lambda_aug: float
    epsilon: float
    m_schedule: tuple
    cap: int
    ud: UdVerdict


def build_augmentation(
    G: GeneratingSet,
    epsilon: float,
    depth: int,
    m_schedule=None,
    max_marker_len: int = 8,
) -> AugmentationBuild:
    """Adjoin nested generators f_i = u^(2^i |w_i|) w_i v^(2^i |w_i|) to G.

    w_1 is a single generator of length >= 3; each later w_i is a
    concatenation of current generators that starts and ends in G, contains
    its predecessor, meets the length schedule, and realizes every window of
    length i seen by the (cap-truncated) current language.  The markers u, v
    are absent aperiodic words with disjoint orbits, so maximal marker runs
    keep parses unique.  The root of the augmented set is re-solved and must
    land in (lambda*, lambda* e^epsilon); the schedule grows until it does.
    """
    if depth < 1:
        raise CodedShiftError("depth must be >= 1")
    if epsilon <= 0:
        raise CodedShiftError("epsilon must be positive")
    base_sol = solve_entropy(G)
    if base_sol.degenerate:
        raise CodedShiftError("base set has zero entropy; nothing to augment")
    cap = _enumeration_cap(G)
    u, v = find_absent_markers(G, max_marker_len=max_marker_len, cap=cap)
    if m_schedule is None:
        m_schedule = [3 + i for i in range(depth)]
    m_schedule = list(m_schedule)
    if len(m_schedule) < depth:
        raise CodedShiftError("m_schedule shorter than depth")

    base_gens = G.words_up_to(cap)
    pool_cap = min(cap, 12)
    pool = [g for g in base_gens if len(g) <= pool_cap]
    if not pool:
        pool = [base_gens[0]]

    aug_sol = None
    for _ in range(6):
        w_words = _nested_words(G, pool, u, v, depth, m_schedule)
        f_words = [
            (u * (2 ** (i + 1) * len(w))) + w + (v * (2 ** (i + 1) * len(w)))
            for i, w in enumerate(w_words)
        ]
        gtilde = _augmented_genset(G, f_words, epsilon, depth)
        aug_sol = solve_entropy(gtilde)
        if aug_sol.lambda_star < base_sol.lambda_star * math.exp(epsilon):
            break
        m_schedule = [2 * m for m in m_schedule]
    else:
        raise CodedShiftError("schedule growth failed to certify the entropy bound")
    if not aug_sol.lambda_star > base_sol.lambda_star:
        raise CodedShiftError("augmented root failed to exceed the base root")

    sp_words = list(base_gens) + f_words
    ud = sardinas_patterson(sp_words, max(len(w) for w in sp_words))
    if not ud.decipherable:
        raise CodedShiftError(
            f"augmented set lost unique decipherability: witness {ud.witness.text()!r}"
        )
    return AugmentationBuild(
        base=G,
        u=u,
        v=v,
        w_words=tuple(w_words),
        f_words=tuple(f_words),
        genset=gtilde,
        lambda_base=base_sol.lambda_star,
        lambda_aug=aug_sol.lambda_star,
        epsilon=epsilon,
        m_schedule=tuple(m_schedule),
        cap=cap,
        ud=ud,
    )


def _nested_words(G, pool, u, v, depth, m_schedule):
    first = next((g for g in pool if len(g) >= max(3, m_schedule[0])), None)
    if first is None:
        raise CodedShiftError(
            f"no generator of length >= {max(3, m_schedule[0])} to seed the nesting"
        )
    filler = pool[0]
    blocks_list = [[first]]

    def word_of(blocks):
        return Word(sum((b.syms for b in blocks), ()))

    def f_of(j, w):
        return (u * (2**j * len(w))) + w + (v * (2**j * len(w)))

    for i in range(2, depth + 1):
        prev_blocks = blocks_list[-1]
        added = [f_of(j, word_of(b)) for j, b in enumerate(blocks_list, start=1)]
        gens_i = pool + added
        required = factor_language(gens_i, i)
        blocks = list(prev_blocks) + [added[-1]]

        def windows(word_obj):
            t = word_obj.syms
            return {t[a : a + i] for a in range(len(t) - i + 1)}

        missing = sorted(required - windows(word_of(blocks)))
        guard = 0
        while missing:
            guard += 1
            if guard > 10 * len(required) + 100:
                raise CodedShiftError("window coverage failed to converge")
            cover = find_cover(Word(missing[0]), gens_i)
            if cover is None:
                raise CodedShiftError(
                    f"window {Word(missing[0]).text()!r} marked realizable but has no cover"
                )
            blocks.extend(cover)
            missing = sorted(required - windows(word_of(blocks)))
        if not G.contains(blocks[-1]):
            blocks.append(filler)
        prev_len = len(word_of(prev_blocks))
        while len(word_of(blocks)) < max(m_schedule[i - 1], prev_len + 1):
            blocks.append(filler)
        blocks_list.append(blocks)
    return [word_of(b) for b in blocks_list]


def _augmented_genset(G, f_words, epsilon, depth):
    f_by_len = {}
    for f in f_words:
        f_by_len.setdefault(len(f), []).append(f)
    if any(len(fs) > 1 for fs in f_by_len.values()):
        raise CodedShiftError("augmentation produced two additions of equal length")

    if G.is_explicit:
        return GeneratingSet.explicit(
            G.alphabet,
            list(G.words_up_to(G.max_len)) + list(f_words),
            name="augmented",
            params=_aug_params(G, epsilon, depth),
            certificates=_AUG_CERT,
            closed_forms=dict(G.closed_forms),
        )

    def enumerate_level(n):
        return list(G.words_of_length(n)) + f_by_len.get(n, [])

    return GeneratingSet.family(
        G.alphabet,
        enumerate_level,
        TailBound(C=G.tail.C + 1.0, rho=G.tail.rho, N0=G.tail.N0),
        count_fn=lambda n: G.count(n) + len(f_by_len.get(n, ())),
        name="augmented",
        params=_aug_params(G, epsilon, depth),
        certificates=_AUG_CERT,
        closed_forms=dict(G.closed_forms),
    )


def _aug_params(G, epsilon, depth):
    base = {"name": G.name, "params": G.params} if G.name else None
    return {"base": base, "epsilon": epsilon, "depth": depth}


_AUG_CERT = {
    "unique_representation": (
        "added blocks are fenced by aperiodic marker runs absent from the "
        "base language; maximal marker runs pin their boundaries"
    )
}
