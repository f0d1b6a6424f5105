#!/usr/bin/env python3
"""A tour of the Cantor encoding of machine configurations.

A two-sided binary tape becomes a single point of [0,1] by interleaving
its halves into the odd/even ternary digits; the head position picks one
of a family of nested sub-intervals.  Everything here is exact: the
numbers are rationals with power-of-three denominators.
"""

from carom.encoding import (
    cantor_blocks,
    decode,
    encode_state,
    encode_tape,
    head_interval,
    rewrite_point,
    shift_point,
)
from carom.machine import parse_tape

# --- tapes become ternary points -------------------------------------------

tape = parse_tape("11@101")   # cells -2,-1 = 1, cells 0..2 = 1,0,1
x = encode_tape(tape)
print(f"tape 11@101 encodes to x_t = {x} = {float(x):.6f}")
print(f"ternary digits: {x.ternary_str()}   (all 0s and 2s)")

# --- the head position picks a sub-interval ---------------------------------

print("\nhead intervals I_k (each 3x shorter than its neighbour):")
for k in range(-3, 4):
    iv = head_interval(k)
    print(f"  I_{k:+d} = [{iv.lo}, {iv.hi}]  length {iv.length}")

p = encode_state(tape, 0)
print(f"\nfull configuration (tape, head 0) encodes to {p.value}")
print(f"decoding recovers: tape cells {sorted(decode(p.value)[0])}, head {decode(p.value)[1]}")

# --- head moves are affine maps ---------------------------------------------

print("\nmoving the head right is an affine map on the encoding:")
q = p
for _ in range(3):
    q2 = shift_point(q, +1)
    rel = "x/3 + 2/3" if q.head >= 0 else "3x"
    print(f"  head {q.head:+d} -> {q2.head:+d}:  {q.value} -> {q2.value}   ({rel})")
    q = q2

# --- writing a symbol displaces by a fixed tiny amount -----------------------

w = rewrite_point(p, 0)   # clear the bit under the head
print(f"\nwriting 0 over the head bit: {p.value} -> {w.value}")
print(f"displacement {w.value - p.value} (exactly -2 * 3^-(3k+2) at k=0)")

# --- the read-split structure ------------------------------------------------

print("\nstates reading 0 vs 1 occupy alternating blocks of I_1:")
for s in (0, 1):
    blocks = cantor_blocks(1, s)
    print(f"  symbol {s}: {len(blocks)} blocks, first = [{blocks[0].lo}, {blocks[0].hi}]")
