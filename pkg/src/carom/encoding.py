"""Cantor-set encoding of computation states into the unit interval.

A tape t becomes the point

    x_t = 2 * (t_0/3 + t_{-1}/9 + t_1/27 + t_{-2}/81 + ...)

interleaving the right half-tape into odd ternary digits and the left
half-tape into even ones.  Head position k is then recorded by the affine
embedding tau_k of [0,1] onto a sub-interval I_k: the encoded computation
state is x_{t,k} = tau_k(x_t).

All arithmetic is exact TernaryRational; at head position k the relevant
scales shrink like 3**-(3k+2), which no float survives.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .ternary import T, TernaryRational

#: Enumeration guard: block counts grow as 2**(2k).  Point-wise operations
#: (encode/decode/shift/rewrite) work for any k regardless.
K_MAX_DEFAULT = 64


def k_max_cap():
    return int(os.environ.get("BILLIARD_KMAX", K_MAX_DEFAULT))


class NotACode(ValueError):
    """The given number is not the encoding of any computation state."""


class KRangeExceeded(ValueError):
    """Block enumeration requested beyond the configured K_max cap."""


def digit_position(cell):
    """Ternary digit index (1-based) of tape cell ``cell`` inside x_t."""
    return 2 * cell + 1 if cell >= 0 else -2 * cell


def cell_of_digit(pos):
    """Inverse of digit_position."""
    return (pos - 1) // 2 if pos % 2 == 1 else -(pos // 2)


def encode_tape(tape):
    """Exact x_t of a finite-support tape (frozenset of 1-cells)."""
    total = T(0)
    for cell in tape:
        total = total + T(2, digit_position(cell))
    return total


def tau(k, x):
    """The affine embedding of [0,1] onto I_k.

    tau_k(x) = 3**-(1-k) * (1+x)        for k < 0,
             = 1 + 3**-(1+k) * (x - 2)  for k >= 0.
    """
    if not (T(0) <= x <= T(1)):
        raise ValueError(f"tau argument {x} outside [0, 1]")
    if k < 0:
        return (x + 1).div3(1 - k)
    return (x - 2).div3(1 + k) + 1


def tau_inverse(k, x):
    if k < 0:
        return x.mul3(1 - k) - 1
    return (x - 1).mul3(1 + k) + 2


def head_interval(k):
    """I_k = tau_k([0,1]) as a HeadInterval."""
    return HeadInterval(k, tau(k, T(0)), tau(k, T(1)))


@dataclass(frozen=True)
class HeadInterval:
    """The sub-interval of [0,1] that stores head position k.

    len(I_k) = 3**-(1+|k|); intervals are pairwise disjoint and ordered
    left to right by k.
    """

    k: int
    lo: TernaryRational
    hi: TernaryRational

    def __contains__(self, x):
        return self.lo <= x <= self.hi

    @property
    def length(self):
        return self.hi - self.lo


def head_of(x):
    """The unique k with x in I_k, or None.

    For x >= 1/3 the candidates satisfy 1 - x in [3**-(1+k), 2*3**-(1+k)];
    for x < 1/3, x in [3**-(1-k), 2*3**-(1-k)].  Walk outward until the
    scale drops below x's own resolution.
    """
    if x <= T(0) or x >= T(1):
        return None
    if x >= T(1, 1):
        gap = T(1) - x  # in (0, 2/3]; x in I_k iff gap in [scale, 2*scale]
        k = 0
        while True:
            scale = T(1, 1 + k)
            if scale * 2 < gap:
                return None  # between I_{k-1} and I_k
            if scale <= gap:
                return k
            k += 1
    else:
        k = -1
        while True:
            scale = T(1, 1 - k)
            if x < scale:
                k -= 1  # terminates: scale eventually drops below x's resolution
                continue
            return k if x <= scale * 2 else None


@dataclass(frozen=True)
class EncodedPoint:
    """A point of [0,1] known to encode (tape, head); carries the decode."""

    value: TernaryRational
    head: int
    tape: frozenset

    def __str__(self):
        return f"{self.value} (head {self.head}, tape {sorted(self.tape)})"


def encode_state(tape, k):
    """x_{t,k} = tau_k(x_t), with the decode cached."""
    tape = frozenset(tape)
    return EncodedPoint(tau(k, encode_tape(tape)), k, tape)


def decode(x):
    """Invert the encoding, or raise NotACode.

    Rejection reasons: x lies in no I_k; the tau_k pre-image has no finite
    ternary expansion in [0,1); or a ternary digit equals 1.
    """
    k = head_of(x)
    if k is None:
        raise NotACode(f"{x} lies in no head interval")
    y = tau_inverse(k, x)
    if y < T(0) or y >= T(1):
        # tau_k(1) is the interval's right endpoint; x_t = 1 needs an
        # infinite all-twos tape, which Lambda excludes.
        raise NotACode(f"{x} decodes to tape value {y} outside [0, 1)")
    ones = set()
    for pos, digit in enumerate(y.ternary_digits(), start=1):
        if digit == 1:
            raise NotACode(f"{x} has ternary digit 1 at tape position {pos}")
        if digit == 2:
            ones.add(cell_of_digit(pos))
    return frozenset(ones), k


def try_decode(x):
    try:
        tape, k = decode(x)
    except NotACode:
        return None
    return EncodedPoint(x, k, tape)


def read_digit(point):
    """The symbol under the head."""
    return 1 if point.head in point.tape else 0


def shift_point(point, eps):
    """Move the head by eps, exactly.

    x_{t,k+1} = 3 x_{t,k} when k < 0 and x_{t,k}/3 + 2/3 when k >= 0; the
    eps = -1 maps are the exact inverses (x/3 for k <= 0 targets, 3x - 2
    for k >= 1 sources).
    """
    if eps not in (-1, +1):
        raise ValueError("eps must be +-1")
    x, k = point.value, point.head
    if eps == +1:
        new = x.mul3() if k < 0 else x.div3() + T(2, 1)
    else:
        # invert the (k-1) -> k map
        new = x.mul3() - 2 if k - 1 >= 0 else x.div3()
    return EncodedPoint(new, k + eps, point.tape)


def rewrite_scale(k):
    """|x_{t',k} - x_{t,k}| / 2 for a head-cell symbol change at position k.

    3**-(3k+2) for k >= 0 and the mirrored 3**-(3|k|+1) for k < 0: the
    head digit sits at digit_position(k) of x_t and tau_k contracts by
    3**-(1+|k|).
    """
    return T(1, digit_position(k) + 1 + abs(k))


def rewrite_point(point, symbol):
    """Write ``symbol`` at the head cell; exact displacement.

    Equals x +- 2 * rewrite_scale(k) when the symbol changes, x otherwise.
    """
    if symbol not in (0, 1):
        raise ValueError("symbol must be 0 or 1")
    current = read_digit(point)
    if symbol == current:
        return point
    delta = rewrite_scale(point.head) * 2
    new_value = point.value + delta if symbol == 1 else point.value - delta
    new_tape = point.tape | {point.head} if symbol == 1 else point.tape - {point.head}
    return EncodedPoint(new_value, point.head, new_tape)


@dataclass(frozen=True)
class CantorBlock:
    """A maximal sub-interval of I_k on which a fixed ternary digit of the
    underlying tape value is constant.

    ``digit_pos`` is the 1-based digit index of x_t being pinned and
    ``symbol`` its tape value (digit 2*symbol).  ``prefix`` lists the free
    digits (as bits) before the pinned one.  Classifying on the head cell
    uses digit_pos = digit_position(k); merge walls classify on the cell
    behind the head.
    """

    k: int
    digit_pos: int
    prefix: tuple
    symbol: int
    lo: TernaryRational
    hi: TernaryRational

    def __contains__(self, x):
        return self.lo <= x <= self.hi

    @property
    def length(self):
        return self.hi - self.lo


def cantor_blocks_at(k, digit_pos, symbol, k_max=None):
    """All blocks of I_k pinning ternary digit ``digit_pos`` of the tape
    value to symbol, left to right, with exact endpoints.

    2**(digit_pos - 1) blocks, each of pre-embedding length 3**-digit_pos,
    hence length 3**-(digit_pos + 1 + |k|) inside I_k.
    """
    cap = k_max if k_max is not None else k_max_cap()
    if abs(k) > cap or digit_pos - 1 > 2 * cap + 1:
        raise KRangeExceeded(f"level {k}/digit {digit_pos} beyond K_max {cap}")
    if digit_pos < 1:
        raise ValueError("digit positions are 1-based")
    blocks = []
    n_free = digit_pos - 1
    for bits in range(1 << n_free):
        prefix = tuple(bits >> (n_free - 1 - i) & 1 for i in range(n_free))
        base = T(0)
        for i, b in enumerate(prefix, start=1):
            base = base + T(2 * b, i)
        base = base + T(2 * symbol, digit_pos)
        lo = tau(k, base)
        hi = tau(k, base + T(1, digit_pos))
        blocks.append(CantorBlock(k, digit_pos, prefix, symbol, lo, hi))
    blocks.sort(key=lambda b: b.lo.as_fraction())
    return blocks


def cantor_blocks(k, symbol, k_max=None):
    """Head-cell blocks of I_k: the states with tape symbol ``symbol``
    under the head."""
    return cantor_blocks_at(k, digit_position(k), symbol, k_max=k_max)


def block_of(x, k, digit_pos):
    """Exact (lo, hi, symbol) of the digit_pos block containing x in I_k.

    Cheaper than enumerating 2**(digit_pos-1) blocks: read the digits of
    the pre-image directly.
    """
    y = tau_inverse(k, x)
    if y < T(0) or y >= T(1):
        raise NotACode(f"{x} not interior to I_{k}")
    digits = y.ternary_digits()
    digits += [0] * (digit_pos - len(digits))
    if any(d == 1 for d in digits[:digit_pos]):
        raise NotACode(f"{x} has a 1-digit in its pinned prefix")
    base = T(0)
    for i, d in enumerate(digits[:digit_pos], start=1):
        base = base + T(d, i)
    return tau(k, base), tau(k, base + T(1, digit_pos)), digits[digit_pos - 1] // 2
