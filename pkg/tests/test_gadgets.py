from fractions import Fraction

import pytest

from carom.encoding import (
    cantor_blocks,
    encode_state,
    read_digit,
    rewrite_point,
    shift_point,
)
from carom.gadgets import (
    DomainError,
    build_merge_gadget,
    build_shift_gadget,
    build_shift_stage,
    build_split_gadget,
    build_turn_gadget,
    check_separation,
    make_turn,
)
from carom.geometry import Port, walls_clash
from carom.machine import enumerate_tapes
from carom.ternary import T


def sample_points(k_range=3, cells=3):
    out = []
    for tape in enumerate_tapes(range(-cells, cells + 1)):
        for k in range(-k_range, k_range + 1):
            out.append(encode_state(tape, k))
    return out


# --- shift ---------------------------------------------------------------

def test_shift_gadget_examples():
    pos = build_shift_gadget("pos", +1)
    assert pos.transfer.apply(T(1, 1))[0] == T(7, 2)
    neg = build_shift_gadget("neg", +1)
    assert neg.transfer.apply(T(1, 2))[0] == T(1, 1)
    pos_inv = build_shift_gadget("pos", -1)
    assert pos_inv.transfer.apply(T(7, 2))[0] == T(1, 1)
    neg_inv = build_shift_gadget("neg", -1)
    assert neg_inv.transfer.apply(T(1, 1))[0] == T(1, 2)


def test_shift_gadget_inverse_composition():
    fwd = build_shift_gadget("pos", +1)
    bwd = build_shift_gadget("pos", -1)
    for p in sample_points(2, 2):
        if p.head < 0:
            continue
        out, _ = fwd.transfer.apply(p.value)
        back, _ = bwd.transfer.apply(out)
        assert back == p.value


def test_shift_stage_matches_shift_point():
    for eps in (+1, -1):
        stage = build_shift_stage(eps)
        for p in sample_points(3, 3):
            want = shift_point(p, eps).value
            got, piece = stage.transfer.apply(p.value)
            assert got == want, (p, eps)
            assert piece.lo <= p.value <= piece.hi


def test_shift_stage_rebased_lane():
    stage = build_shift_stage(+1, sigma=-2)
    for p in sample_points(2, 2):
        got, _ = stage.transfer.apply(p.value - 2)
        assert got == shift_point(p, +1).value - 2


def test_shift_stage_domain_error():
    stage = build_shift_stage(+1)
    with pytest.raises(DomainError):
        stage.transfer.apply(T(1, 2) - T(1, 9))  # in a gap between intervals
    bounded = build_shift_stage(+1, K=2)
    deep = encode_state(frozenset(), 5)
    with pytest.raises(DomainError):
        bounded.transfer.apply(deep.value)


def test_shift_gadget_wrong_regime_rejected():
    pos = build_shift_gadget("pos", +1)
    with pytest.raises(DomainError):
        pos.transfer.apply(T(1, 2))  # k = -1 point


def test_shift_stage_walls_are_four_arcs():
    stage = build_shift_stage(+1)
    walls = stage.walls([])
    assert len(walls) == 4
    assert all(w.kind == "parabola_arc" for w in walls)
    # regime arcs must not overlap horizontally
    for i in range(4):
        for j in range(i + 1, 4):
            b1, b2 = walls[i].bbox(), walls[j].bbox()
            assert b1[2] < b2[0] or b2[2] < b1[0]


# --- split ---------------------------------------------------------------

def test_split_transfer_examples():
    split = build_split_gadget(4)
    out, piece = split.transfer.apply(T(1, 1))
    assert out == T(1, 1) - 2 and piece.tag == "branch0"
    out, piece = split.transfer.apply(T(5, 2))
    assert out == T(5, 2) + 2 and piece.tag == "branch1"


def test_split_rewrite_example():
    split = build_split_gadget(4, rewrite_rule=lambda k, s: 1)
    out, piece = split.transfer.apply(T(1, 1))
    # 1/3 + 2*3^-2 - 2 = -13/9
    assert out == T(-13, 2)
    assert piece.tag == "branch0"


def test_split_matches_encoding_semantics():
    writes = {0: 1, 1: 1}
    split = build_split_gadget(3, rewrite_rule=lambda k, s: writes[s])
    for p in sample_points(3, 3):
        a = read_digit(p)
        want = rewrite_point(p, writes[a]).value + (-2 if a == 0 else 2)
        got, piece = split.transfer.apply(p.value)
        assert got == want
        assert piece.tag == f"branch{a}"


def test_split_wall_slopes_and_parallelism():
    split = build_split_gadget(2)
    for k in range(-2, 3):
        walls = split.walls([k])
        by_id = {w.wall_id: w for w in walls}
        for w in walls:
            if not w.wall_id.endswith(":W"):
                continue
            (x0, y0), (x1, y1) = w.p0, w.p1
            slope = (y1 - y0) / (x1 - x0)
            expected = Fraction(-1) if ":s0:" in w.wall_id else Fraction(1)
            assert slope == expected
            ret = by_id[w.wall_id[:-2] + ":Wt"]
            (a0, b0), (a1, b1) = ret.p0, ret.p1
            assert (b1 - b0) / (a1 - a0) == slope  # exactly parallel


def test_rewrite_wall_angle_law():
    split = build_split_gadget(2, rewrite_rule=lambda k, s: 1 - s)
    for k in range(0, 3):
        for w in split.walls([k]):
            if not (w.wall_id.endswith(":W") and ":s0:" in w.wall_id):
                continue
            (x0, y0), (x1, y1) = w.p0, w.p1
            slope = (y1 - y0) / (x1 - x0)
            d = Fraction(1, 3 ** (3 * k + 2))
            assert slope == -1 / (1 + d)


def test_rewrite_slope_approaches_straight():
    # tan(alpha_k) -> 1 as k grows: the rewrite wall flattens toward the
    # plain separating wall
    d = lambda k: Fraction(1, 3 ** (3 * k + 2))
    slopes = [Fraction(-1) / (1 + d(k)) for k in (0, 2, 5)]
    gaps = [abs(s - Fraction(-1)) for s in slopes]
    assert gaps[0] > gaps[1] > gaps[2] > 0


def test_split_walls_disjoint():
    split = build_split_gadget(3, rewrite_rule=lambda k, s: 1 - s)
    walls = split.walls(range(-3, 4))
    boxes = [(w, w.bbox()) for w in walls]
    boxes.sort(key=lambda t: t[1][0])
    for i, (w1, b1) in enumerate(boxes):
        for w2, b2 in boxes[i + 1:]:
            if b2[0] > b1[2]:
                break
            assert not walls_clash(w1, w2), (w1.wall_id, w2.wall_id)


def test_split_domain_guard():
    split = build_split_gadget(2)
    deep = encode_state(frozenset(), 4)
    with pytest.raises(DomainError):
        split.transfer.apply(deep.value)


# --- merge ---------------------------------------------------------------

def test_merge_inverts_split():
    split = build_split_gadget(3)
    merge = build_merge_gadget(split)
    assert merge.transfer.apply(T(-5, 1) * T(1))[0] == T(1, 1)  # -5/3 -> 1/3
    assert merge.transfer.apply(T(23, 2))[0] == T(5, 2)         # 23/9 -> 5/9
    for p in sample_points(2, 2):
        mid, _ = split.transfer.apply(p.value)
        back, piece = merge.transfer.apply(mid)
        assert back == p.value
        assert piece.a == T(1)


def test_merge_rejects_noninjective():
    # a split whose two branches land on overlapping lanes cannot be reversed
    split = build_split_gadget(1)
    bad = build_split_gadget(1, name="bad")
    bad_pieces = bad.transfer.pieces([0])

    class Clashing:
        label = "clashing"

        def pieces(self, levels):
            # drag the branch-1 image onto the branch-0 image window
            return [p if p.tag == "branch0" else p._replace(b=T(-20, 2))
                    for p in bad_pieces]

        def check_injective(self, levels):
            from carom.gadgets import PiecewiseTransfer
            PiecewiseTransfer(None, self.pieces, self.label).check_injective(levels)

    import dataclasses
    fake = dataclasses.replace(bad, transfer=Clashing())
    with pytest.raises(ValueError):
        build_merge_gadget(fake, validate_levels=(0,))
    # the honest split merges fine
    build_merge_gadget(split)


def test_merge_walls_mirror_split():
    split = build_split_gadget(1)
    merge = build_merge_gadget(split)
    sw = {w.wall_id: w for w in split.walls([0])}
    for w in merge.walls([0]):
        twin = sw[w.wall_id]
        assert w.p0[0] == twin.p0[0]
        assert w.p0[1] == 10 - twin.p0[1]


# --- turns ---------------------------------------------------------------

def test_turn_gadget_basics():
    turn = build_turn_gadget(+90)
    assert len(turn.static_walls) == 1
    out_port = turn.out_ports["out"]
    assert out_port.beam == (1, 0)
    got, piece = turn.transfer.apply(T(1, 1))
    assert got == T(1, 1)

    left = build_turn_gadget(-90)
    assert left.out_ports["out"].beam == (-1, 0)


def test_turn_chain_roundtrip_orientation():
    # up -> right -> down -> left -> up: charts compose to the identity
    port = Port((Fraction(0), Fraction(0)), (Fraction(1), Fraction(0)),
                (Fraction(0), Fraction(1)), Fraction(0), Fraction(1))
    t1 = make_turn(port, (1, 0), Fraction(4), "t1")
    p1 = t1.out_ports["out"]
    t2 = make_turn(p1, (0, -1), Fraction(6), "t2")
    p2 = t2.out_ports["out"]
    t3 = make_turn(p2, (-1, 0), Fraction(8), "t3")
    p3 = t3.out_ports["out"]
    t4 = make_turn(p3, (0, 1), Fraction(3), "t4")
    p4 = t4.out_ports["out"]
    assert p4.beam == (Fraction(0), Fraction(1))
    assert p4.tangent == (Fraction(1), Fraction(0))
    # net transfer is the identity; the net chart is a rigid translation
    for u in (Fraction(0), Fraction(1, 3), Fraction(1)):
        d0 = (port.chart(u)[0] - port.chart(0)[0],
              port.chart(u)[1] - port.chart(0)[1])
        d4 = (p4.chart(u)[0] - p4.chart(0)[0],
              p4.chart(u)[1] - p4.chart(0)[1])
        assert d0 == d4


def test_two_opposite_turns_restore_direction():
    port = Port((Fraction(0), Fraction(0)), (Fraction(1), Fraction(0)),
                (Fraction(0), Fraction(1)), Fraction(0), Fraction(1))
    right = make_turn(port, (1, 0), Fraction(5), "r")
    back_up = make_turn(right.out_ports["out"], (0, 1), Fraction(5), "u")
    out = back_up.out_ports["out"]
    assert out.beam == (Fraction(0), Fraction(1))
    got, _ = back_up.transfer.apply(T(5, 2))
    assert got == T(5, 2)


def test_turn_window_guard():
    port = Port((Fraction(0), Fraction(0)), (Fraction(1), Fraction(0)),
                (Fraction(0), Fraction(1)), Fraction(-9), Fraction(9))
    with pytest.raises(ValueError):
        make_turn(port, (1, 0), Fraction(4), "wide", max_extent=Fraction(8))


# --- separation ----------------------------------------------------------

def test_separation_k0_passes():
    reports = check_separation(0)
    assert all(r.passed for r in reports)


def test_separation_k3_min_slack_positive():
    reports = check_separation(3)
    assert all(r.passed for r in reports)
    slacks = [r.min_slack for r in reports if r.min_slack is not None]
    assert slacks and min(slacks) > 0


def test_separation_block_count_at_top_level():
    from carom.encoding import cantor_blocks
    assert len(cantor_blocks(4, 0)) == 2 ** 8


def test_separation_mutation_fails():
    # shifting the k=0 read-0 wall left by 3^-(3k+1) = 1/3 rams it into the
    # k=-1 block family
    def perturb(k, symbol, index, lo, hi):
        if k == 0 and symbol == 0:
            return lo - Fraction(1, 3), hi - Fraction(1, 3)
        return lo, hi

    reports = check_separation(1, perturb=perturb)
    assert any(not r.passed for r in reports)
    assert any(r.min_slack is not None and r.min_slack < 0 for r in reports)
