#!/usr/bin/env python3
"""Reversible machines: what the injectivity criterion accepts and why.

A machine embeds in a billiard only if its global transition map is
injective; otherwise two computation histories would have to share one
beam.  The decision procedure is local: into any state, all incoming
transitions must share one shift and write distinct symbols.
"""

from carom.machine import (
    brute_force_reversible,
    check_reversible,
    parse_machine,
    parse_tape,
    run_machine,
)
from carom.zoo import MACHINE_TEXTS

print("fixture machines:")
for name, text in MACHINE_TEXTS.items():
    m = parse_machine(text, name=name)
    verdict = check_reversible(m)
    print(f"  {name:12s} {'reversible' if verdict is None else 'NOT reversible'}")

# --- a near miss -------------------------------------------------------------

collide = parse_machine("""
states: A B H
initial: A
halting: H
A 0 -> B 0 R
A 1 -> B 1 L
B 0 -> H 0 R
B 1 -> H 1 R
""")
w = check_reversible(collide)
print(f"\nmixed shifts into one state break injectivity:\n  {w.reason}")

# brute force over small configurations agrees
pair = brute_force_reversible(collide, bound=2)
c1, c2 = pair
print(f"  witness configurations mapping to the same successor:\n"
      f"    {c1}\n    {c2}")

# --- running the fixtures -----------------------------------------------------

print("\nsample runs (budget 100):")
for name, literal in [("rev-move", "{2:1}"), ("bit-flipper", "@0011"),
                      ("counter", "@1101"), ("walker", "@111")]:
    m = parse_machine(MACHINE_TEXTS[name], name=name)
    res = run_machine(m, parse_tape(literal), 100)
    tape = "{" + ",".join(str(i) for i in sorted(res.final.tape)) + "}"
    print(f"  {name:12s} {literal:8s} -> halted={res.halted} "
          f"steps={res.steps} head={res.final.head} ones at {tape}")
