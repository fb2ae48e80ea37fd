"""Bundled 2048-entry wordlist with typo-tolerant lookup.

Lookup matches a token exactly or, failing that, to the unique wordlist
entry at minimum Damerau-Levenshtein distance <= 2. Candidate retrieval
uses a symmetric-delete index so a lookup touches a handful of entries
instead of scanning all 2048.
"""

from __future__ import annotations

import hashlib
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .errors import MalformedInput, UnrecoverableWord

WORDLIST_SIZE = 2048
BITS_PER_WORD = 11  # log2(WORDLIST_SIZE)

_MAX_EDIT_DISTANCE = 2


def damerau_levenshtein(a: str, b: str, cutoff: int = _MAX_EDIT_DISTANCE) -> int:
    """Restricted Damerau-Levenshtein (optimal string alignment) distance.

    Returns cutoff + 1 as soon as the distance provably exceeds cutoff.
    """
    if a == b:
        return 0
    la, lb = len(a), len(b)
    if abs(la - lb) > cutoff:
        return cutoff + 1
    if la == 0 or lb == 0:
        return max(la, lb)

    prev2: list[int] = []
    prev = list(range(lb + 1))
    for i in range(1, la + 1):
        cur = [i] + [0] * lb
        row_min = i
        for j in range(1, lb + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            d = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
            if (
                i > 1
                and j > 1
                and a[i - 1] == b[j - 2]
                and a[i - 2] == b[j - 1]
            ):
                d = min(d, prev2[j - 2] + 1)
            cur[j] = d
            if d < row_min:
                row_min = d
        if row_min > cutoff:
            return cutoff + 1
        prev2, prev = prev, cur
    return prev[lb] if prev[lb] <= cutoff else cutoff + 1


def _deletions(token: str, depth: int) -> set[str]:
    """All strings reachable from token by deleting up to `depth` characters."""
    out = {token}
    frontier = {token}
    for _ in range(depth):
        nxt = set()
        for s in frontier:
            for i in range(len(s)):
                nxt.add(s[:i] + s[i + 1 :])
        nxt -= out
        out |= nxt
        frontier = nxt
    return out


class Wordlist:
    """Sorted, lowercase, 2048-word list with fuzzy token lookup."""

    def __init__(self, words: list[str], checksum: str):
        if len(words) != WORDLIST_SIZE:
            raise MalformedInput(
                f"wordlist must have exactly {WORDLIST_SIZE} words, got {len(words)}"
            )
        if words != sorted(words):
            raise MalformedInput("wordlist must be sorted")
        for w in words:
            if not w or not w.isascii() or not w.islower() or not w.isalpha():
                raise MalformedInput(f"invalid wordlist entry: {w!r}")
        self.words = words
        self.checksum = checksum
        self._index = {w: i for i, w in enumerate(words)}
        # symmetric-delete index: deletion variant -> word indices
        self._delete_index: dict[str, list[int]] = {}
        for i, w in enumerate(words):
            for variant in _deletions(w, _MAX_EDIT_DISTANCE):
                self._delete_index.setdefault(variant, []).append(i)

    @classmethod
    def from_file(cls, path: str | Path) -> "Wordlist":
        data = Path(path).read_bytes()
        words = data.decode("ascii").split()
        return cls(words, hashlib.sha256(data).hexdigest())

    def __len__(self) -> int:
        return WORDLIST_SIZE

    def __getitem__(self, index: int) -> str:
        return self.words[index]

    def index_of(self, word: str) -> int | None:
        return self._index.get(word)

    def candidates(self, token: str) -> list[int]:
        """Word indices within edit distance 2 of token (superset, unverified)."""
        seen: set[int] = set()
        for variant in _deletions(token, _MAX_EDIT_DISTANCE):
            seen.update(self._delete_index.get(variant, ()))
        return sorted(seen)

    def lookup(self, token: str) -> tuple[int, int]:
        """Resolve a token to a word index.

        Returns (index, corrections) where corrections is 0 for an exact
        match and 1 when the token was repaired to its unique nearest
        wordlist entry at distance <= 2.

        Raises UnrecoverableWord when no entry is within distance 2 or the
        minimum distance is shared by two or more entries.
        """
        exact = self._index.get(token)
        if exact is not None:
            return exact, 0
        best_dist = _MAX_EDIT_DISTANCE + 1
        best: list[int] = []
        for i in self.candidates(token):
            d = damerau_levenshtein(token, self.words[i])
            if d < best_dist:
                best_dist = d
                best = [i]
            elif d == best_dist:
                best.append(i)
        if best_dist > 1:
            # The delete index can miss distance-2 pairs that involve a
            # transposition; a full scan keeps the distance-2 semantics exact.
            best_dist = _MAX_EDIT_DISTANCE + 1
            best = []
            for i, w in enumerate(self.words):
                d = damerau_levenshtein(token, w)
                if d < best_dist:
                    best_dist = d
                    best = [i]
                elif d == best_dist:
                    best.append(i)
        if best_dist > _MAX_EDIT_DISTANCE or not best:
            raise UnrecoverableWord(f"no wordlist entry within distance 2 of {token!r}")
        if len(best) > 1:
            tied = ", ".join(self.words[i] for i in best)
            raise UnrecoverableWord(f"ambiguous token {token!r}: tied between {tied}")
        return best[0], 1


@lru_cache(maxsize=None)
def _load_bundled() -> Wordlist:
    ref = resources.files("sigcode.data").joinpath("wordlist.txt")
    data = ref.read_bytes()
    words = data.decode("ascii").split()
    return Wordlist(words, hashlib.sha256(data).hexdigest())


def default_wordlist() -> Wordlist:
    """The wordlist bundled with the package."""
    return _load_bundled()
