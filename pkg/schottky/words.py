"""Reduced words in the free group F_r.

Letters are signed integers: +k is the k-th generator, -k its inverse. For
vectorized work, words of a fixed length are stored as rows of small-integer
codes, code c < r standing for +(c + 1) and code c >= r for -(c - r + 1).
Rows of `level_codes` are always in lexicographic order of codes.
"""

import math
import string
from dataclasses import dataclass

import numpy as np


class SchottkyError(Exception):
    """Base class for free group and Schottky representation exceptions"""


class InvalidWord(SchottkyError):
    """Raised when a word uses letters outside the alphabet or is not reduced."""


class NotSchottky(SchottkyError):
    """Raised when Schottky diagnostics are required but absent."""


class RankMismatch(SchottkyError):
    """Raised when objects built for different ranks are combined."""


class DisjointnessViolated(SchottkyError):
    """Raised when ping-pong disks have overlapping closures."""


class Diverged(SchottkyError):
    """Raised when the displacement minimization runs off to infinity."""


class ThetaOutOfRange(SchottkyError):
    """Raised when the McMullen parameter is outside (0, 2 pi / 3)."""


def letter_to_code(letter, r):
    return letter - 1 if letter > 0 else r - letter - 1


def code_to_letter(code, r):
    return code + 1 if code < r else -(code - r + 1)


def word_count(r, n):
    if n == 0:
        return 1
    return 2 * r * (2 * r - 1) ** (n - 1)


class ReducedWord(tuple):
    def __new__(cls, letters=(), rank=None):
        letters = tuple(int(x) for x in letters)
        for x in letters:
            if x == 0 or (rank is not None and abs(x) > rank):
                raise InvalidWord(f"letter {x} is not in the alphabet of F_{rank}")
        for a, b in zip(letters, letters[1:]):
            if a == -b:
                raise InvalidWord(f"{letters} is not reduced")
        return super().__new__(cls, letters)

    @classmethod
    def reduce(cls, letters):
        stack = []
        for x in letters:
            if stack and stack[-1] == -x:
                stack.pop()
            else:
                stack.append(int(x))
        return cls(stack)

    # "aB" -> (1, -2): lowercase letters are generators, uppercase inverses
    @classmethod
    def parse(cls, text, rank=None):
        letters = []
        for ch in text.replace(" ", ""):
            if ch in string.ascii_lowercase:
                letters.append(string.ascii_lowercase.index(ch) + 1)
            elif ch in string.ascii_uppercase:
                letters.append(-(string.ascii_uppercase.index(ch) + 1))
            else:
                raise InvalidWord(f"cannot parse {text!r}")
        return cls(letters, rank=rank)

    @classmethod
    def from_codes(cls, codes, r):
        return cls(code_to_letter(int(c), r) for c in codes)

    def codes(self, r):
        return np.array([letter_to_code(x, r) for x in self], dtype=np.int16)

    def inverse(self):
        return ReducedWord(-x for x in reversed(self))

    def concat(self, other):
        return ReducedWord.reduce(tuple(self) + tuple(other))

    def power(self, k):
        if k < 0:
            return self.inverse().power(-k)
        result = ReducedWord()
        for _ in range(k):
            result = result.concat(self)
        return result

    def is_cyclically_reduced(self):
        return len(self) < 2 or self[0] != -self[-1]

    def cyclic_reduction(self):
        """Returns (u, core) with self = u core u^-1 and core cyclically
        reduced."""
        k = 0
        while len(self) - 2 * k >= 2 and self[k] == -self[len(self) - 1 - k]:
            k += 1
        return ReducedWord(self[:k]), ReducedWord(self[k : len(self) - k])

    def __str__(self):
        if not self:
            return "1"
        return "".join(
            string.ascii_lowercase[x - 1] if x > 0 else string.ascii_uppercase[-x - 1]
            for x in self
        )

    def __repr__(self):
        return f"ReducedWord({str(self)!r})"


def level_codes(r, n):
    """All reduced words of length n as an int16 array of codes, one word per
    row, in lexicographic order."""
    codes = np.zeros((1, 0), dtype=np.int16)
    for _ in range(n):
        codes = extend_level(codes, r)
    return codes


def extend_level(codes, r):
    alphabet = np.arange(2 * r, dtype=np.int16)
    count, depth = codes.shape
    parents = np.repeat(codes, 2 * r, axis=0)
    letters = np.tile(alphabet, count)
    if depth:
        keep = letters != (parents[:, -1] + r) % (2 * r)
        parents, letters = parents[keep], letters[keep]
    return np.column_stack([parents, letters]).astype(np.int16)


def enumerate_reduced(r, n):
    if n < 0:
        raise InvalidWord(f"word length must be non-negative, got {n}")
    for row in level_codes(r, n):
        yield ReducedWord.from_codes(row, r)


def word_rank(codes, r):
    """Position of each row of `codes` in the lexicographic order of its
    level."""
    codes = np.atleast_2d(np.asarray(codes, dtype=np.int64))
    rank = codes[:, 0].copy()
    for k in range(1, codes.shape[1]):
        inv = (codes[:, k - 1] + r) % (2 * r)
        c = codes[:, k]
        rank = rank * (2 * r - 1) + np.where(c < inv, c, c - 1)
    return rank


@dataclass(frozen=True)
class InfiniteWord:
    """An eventually periodic infinite reduced word prefix . period^oo."""

    prefix: ReducedWord
    period: ReducedWord

    def __post_init__(self):
        if not self.period:
            raise InvalidWord("period must be non-empty")
        if not self.period.is_cyclically_reduced():
            raise InvalidWord(f"period {self.period} is not cyclically reduced")
        if self.prefix and self.prefix[-1] == -self.period[0]:
            raise InvalidWord(f"{self.prefix} . ({self.period})^oo is not reduced")

    @classmethod
    def repeating_last(cls, prefix):
        prefix = ReducedWord(prefix)
        if not prefix:
            raise InvalidWord("an empty prefix has no last letter to repeat")
        return cls(prefix, ReducedWord(prefix[-1:]))

    def letters(self, n):
        out = list(self.prefix[:n])
        while len(out) < n:
            out.extend(self.period)
        return ReducedWord(out[:n])

    def shift(self, k=1):
        if k <= len(self.prefix):
            return InfiniteWord(ReducedWord(self.prefix[k:]), self.period)
        k = (k - len(self.prefix)) % len(self.period)
        rotated = ReducedWord(self.period[k:] + self.period[:k])
        return InfiniteWord(ReducedWord(), rotated)

    def __str__(self):
        return f"{self.prefix}({self.period})^oo"


def common_prefix_length(xi, zeta):
    """Length of the longest common prefix; None if the words are equal."""
    horizon = (
        max(len(xi.prefix), len(zeta.prefix))
        + len(xi.period) * len(zeta.period)
        + 1
    )
    a, b = xi.letters(horizon), zeta.letters(horizon)
    for k, (x, y) in enumerate(zip(a, b)):
        if x != y:
            return k
    return None


def symbolic_dist(xi, zeta):
    """d_1(xi, zeta) = e^{-|common prefix|}."""
    k = common_prefix_length(xi, zeta)
    return 0.0 if k is None else math.exp(-k)


def cylinder_contains(word, xi):
    return xi.letters(len(word)) == tuple(word)
