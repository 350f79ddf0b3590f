"""Flower/factor automata for finite generating sets and exact language counts.

For a finite code the limit set is empty (a window longer than every
generator cannot sit inside one block), so the factor language of the block
concatenations equals the language of the sofic shift they generate; counting
it therefore cross-checks the characteristic-root entropies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import BudgetError, CodedShiftError
from .genset import sardinas_patterson
from .words import as_word


@dataclass
class FactorAutomaton:
    """Deterministic automaton whose accepted words are exactly the factors.

    Every state is accepting; transitions out of the implicit dead state are
    omitted.  States are numbered in discovery order from the initial state,
    so equal inputs build identical automata.
    """

    alphabet: tuple
    n_states: int
    transitions: dict  # (state, symbol) -> state
    initial: int = 0
    deterministic: bool = True

    def transfer_matrix(self):
        """Integer matrix counting labeled edges between states."""
        A = [[0] * self.n_states for _ in range(self.n_states)]
        for (s, _), t in self.transitions.items():
            A[s][t] += 1
        return A

    def count_words(self, n: int) -> int:
        """Exact number of distinct accepted words of length n."""
        if n < 0:
            raise ValueError("n must be >= 0")
        vecs = getattr(self, "_vecs", None)
        if vecs is None:
            v0 = [0] * self.n_states
            v0[self.initial] = 1
            vecs = [v0]
            self._vecs = vecs
        A = getattr(self, "_matrix", None)
        if A is None:
            A = self.transfer_matrix()
            self._matrix = A
        while len(vecs) <= n:
            prev = vecs[-1]
            nxt = [0] * self.n_states
            for s, cnt in enumerate(prev):
                if cnt:
                    row = A[s]
                    for t, mult in enumerate(row):
                        if mult:
                            nxt[t] += cnt * mult
            vecs.append(nxt)
        return sum(vecs[n])

    def accepts(self, word) -> bool:
        state = self.initial
        for sym in as_word(word):
            nxt = self.transitions.get((state, sym))
            if nxt is None:
                return False
            state = nxt
        return True


def factor_automaton(G, max_states: int = 1_000_000) -> FactorAutomaton:
    """Determinized flower automaton of a finite, uniquely decipherable code.

    The flower has one loop per generator through a hub; making every state
    initial and accepting yields the factor language, and the subset
    construction removes the double counting the loops would cause.
    """
    if hasattr(G, "words_up_to"):
        if not G.is_explicit:
            raise CodedShiftError("factor_automaton needs a finite generating set")
        words = G.words_up_to(G.max_len)
    else:
        words = [as_word(w) for w in G]
    if not words:
        raise CodedShiftError("factor_automaton: empty generating set")
    verdict = sardinas_patterson(words, max(len(w) for w in words))
    if not verdict.decipherable:
        raise CodedShiftError(
            f"code is not uniquely decipherable (witness {verdict.witness.text()!r})"
        )

    hub = 0
    n_nfa = 1
    moves: dict = {}
    for g in words:
        prev = hub
        for i, sym in enumerate(g):
            if i == len(g) - 1:
                nxt = hub
            else:
                nxt = n_nfa
                n_nfa += 1
            moves.setdefault((prev, sym), set()).add(nxt)
            prev = nxt
    alphabet = tuple(sorted({sym for (_, sym) in moves}))

    init = frozenset(range(n_nfa))
    numbering = {init: 0}
    order = [init]
    transitions = {}
    frontier = [init]
    while frontier:
        next_frontier = []
        for S in frontier:
            s_id = numbering[S]
            for sym in alphabet:
                T = frozenset(q for s in S for q in moves.get((s, sym), ()))
                if not T:
                    continue
                if T not in numbering:
                    if len(numbering) >= max_states:
                        raise BudgetError(
                            f"determinization exceeded {max_states} states "
                            f"(NFA had {n_nfa} states over {len(words)} generators)"
                        )
                    numbering[T] = len(order)
                    order.append(T)
                    next_frontier.append(T)
                transitions[(s_id, sym)] = numbering[T]
        frontier = next_frontier
    return FactorAutomaton(alphabet=alphabet, n_states=len(order), transitions=transitions)


def count_language(A: FactorAutomaton, n: int) -> int:
    """Exact |L_n| via integer transfer-matrix iteration."""
    if not A.deterministic:
        raise CodedShiftError("count_language needs a deterministic automaton")
    return A.count_words(n)


def growth_slope(A: FactorAutomaton, n: int) -> float:
    """log |L_n| - log |L_{n-1}|: the local entropy slope at length n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    a, b = A.count_words(n - 1), A.count_words(n)
    if a == 0 or b == 0:
        raise CodedShiftError(f"language dies out by length {n}")
    return math.log(b) - math.log(a)
