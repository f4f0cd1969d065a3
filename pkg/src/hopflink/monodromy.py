"""Block permutations of wires and their decomposition into two-block swaps.

A block permutation of [1, N] moves each of k contiguous blocks rigidly,
sigma(x) = x + n_i on [c_i, c_{i+1}). It is stored by cuts and shifts only,
so N can be huge. Composition order is the usual one: ``compose(p, q)(x) =
p(q(x))``; a decomposition ``[s1, ..., sr]`` means sigma = s1 o s2 o ... o sr.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass

from .errors import InvalidPermutation, MalformedInput, PreconditionError, SizeMismatch
from .links.terms import LinkExpression, SignedTerm, Twisted


@dataclass(frozen=True)
class BlockPermutation:
    N: int
    cuts: tuple
    shifts: tuple

    def __post_init__(self):
        object.__setattr__(self, "cuts", tuple(int(c) for c in self.cuts))
        object.__setattr__(self, "shifts", tuple(int(s) for s in self.shifts))
        N, cuts, shifts = self.N, self.cuts, self.shifts
        if N < 1:
            raise InvalidPermutation("N must be positive")
        if len(cuts) != len(shifts) + 1 or not shifts:
            raise InvalidPermutation("need k+1 cuts for k shifts, k >= 1")
        if cuts[0] != 1 or cuts[-1] != N + 1:
            raise InvalidPermutation("cuts must start at 1 and end at N+1")
        if any(x >= y for x, y in zip(cuts, cuts[1:])):
            raise InvalidPermutation("cuts must be strictly increasing")
        images = sorted((c + s, d + s) for c, d, s in zip(cuts, cuts[1:], shifts))
        pos = 1
        for lo, hi in images:
            if lo != pos:
                raise InvalidPermutation("block images do not tile [1, N]")
            pos = hi
        if pos != N + 1:
            raise InvalidPermutation("block images do not tile [1, N]")

    @property
    def k(self) -> int:
        return len(self.shifts)

    @classmethod
    def identity(cls, N: int) -> "BlockPermutation":
        return cls(N, (1, N + 1), (0,))

    def blocks(self):
        return list(zip(self.cuts, self.cuts[1:], self.shifts))

    def __call__(self, x: int) -> int:
        if not 1 <= x <= self.N:
            raise ValueError(f"{x} outside [1, {self.N}]")
        i = bisect.bisect_right(self.cuts, x) - 1
        return x + self.shifts[i]

    def normalized(self) -> "BlockPermutation":
        """Merge adjacent blocks with equal shifts."""
        cuts, shifts = [self.cuts[0]], []
        for c, s in zip(self.cuts[1:], self.shifts):
            if shifts and shifts[-1] == s:
                cuts[-1] = c
            else:
                shifts.append(s)
                cuts.append(c)
        return BlockPermutation(self.N, tuple(cuts), tuple(shifts))

    def inverse(self) -> "BlockPermutation":
        parts = sorted((c + s, d + s, -s) for c, d, s in self.blocks())
        cuts = [p[0] for p in parts] + [self.N + 1]
        return BlockPermutation(self.N, tuple(cuts), tuple(p[2] for p in parts))

    def dense(self):
        """The permutation as a list (index 0 holds sigma(1)); small N only."""
        out = []
        for c, d, s in self.blocks():
            out.extend(range(c + s, d + s))
        return out

    def to_json(self) -> dict:
        return {"N": self.N, "cuts": list(self.cuts), "shifts": list(self.shifts)}

    @classmethod
    def from_json(cls, obj) -> "BlockPermutation":
        try:
            return cls(int(obj["N"]), tuple(obj["cuts"]), tuple(obj["shifts"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad block permutation: {exc}") from exc


@dataclass(frozen=True)
class TwoBlockSwap:
    """Exchange of the adjacent blocks [offset, offset+d1) and [offset+d1, offset+d1+d2)."""

    d1: int
    d2: int
    offset: int = 1

    def __post_init__(self):
        if self.d1 < 1 or self.d2 < 1:
            raise PreconditionError("swapped blocks must be nonempty")
        if self.offset < 1:
            raise PreconditionError("offset is 1-based")

    def as_permutation(self, N: int) -> BlockPermutation:
        o, d1, d2 = self.offset, self.d1, self.d2
        end = o + d1 + d2
        if end > N + 1:
            raise SizeMismatch(f"swap reaches {end - 1} > N = {N}")
        cuts, shifts = [1], []
        if o > 1:
            cuts.append(o)
            shifts.append(0)
        cuts += [o + d1, end]
        shifts += [d2, -d1]
        if end <= N:
            cuts.append(N + 1)
            shifts.append(0)
        return BlockPermutation(N, tuple(cuts), tuple(shifts))


def compose(p: BlockPermutation, q: BlockPermutation) -> BlockPermutation:
    """``p o q``: apply q first."""
    if p.N != q.N:
        raise SizeMismatch(f"cannot compose permutations of {p.N} and {q.N} wires")
    cuts, shifts = [1], []
    for c, d, s in q.blocks():
        # image [c+s, d+s) is cut by p's block boundaries
        lo = c + s
        while lo < d + s:
            i = bisect.bisect_right(p.cuts, lo) - 1
            hi = min(d + s, p.cuts[i + 1])
            shifts.append(s + p.shifts[i])
            cuts.append(hi - s)
            lo = hi
    return BlockPermutation(p.N, tuple(cuts), tuple(shifts)).normalized()


def compose_all(perms, N: int) -> BlockPermutation:
    out = BlockPermutation.identity(N)
    for p in perms:
        out = compose(out, p)
    return out


def decompose(sigma: BlockPermutation) -> list:
    """Two-block swaps s1..sr (r <= k-1) with sigma = s1 o ... o sr.

    Induction on blocks: on the range [lo, N] let tau swap [lo, sigma(lo))
    with [sigma(lo), N]; tau o sigma fixes the first block, and
    sigma = tau^-1 o (tau o sigma).
    """
    sigma = sigma.normalized()
    N = sigma.N
    swaps = []
    cur = sigma
    idx = 0  # blocks before idx are fixed by cur
    while idx < cur.k:
        lo = cur.cuts[idx]
        start = lo + cur.shifts[idx]
        if start != lo:
            d1, d2 = start - lo, N + 1 - start
            tau = TwoBlockSwap(d1, d2, lo).as_permutation(N)
            swaps.append(TwoBlockSwap(d2, d1, lo))  # tau^-1
            cur = compose(tau, cur)
            # keep cur's block cuts so the index walk stays aligned
        idx = _next_unfixed(cur, lo)
    return swaps


def _next_unfixed(cur: BlockPermutation, lo: int) -> int:
    """Index of the first block of cur starting after the fixed block at lo."""
    i = bisect.bisect_right(cur.cuts, lo) - 1
    assert cur.shifts[i] == 0, "block at the front of the range is not fixed"
    return i + 1


def swap_to_links(s: TwoBlockSwap) -> LinkExpression:
    """The swapping cable as twisted links: (d1+d2) - d1 - d2; invariant d1*d2."""
    return LinkExpression((SignedTerm(1, Twisted(s.d1 + s.d2)), SignedTerm(-1, Twisted(s.d1)),
                           SignedTerm(-1, Twisted(s.d2))))
