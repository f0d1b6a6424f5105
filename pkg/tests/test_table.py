import json
import xml.etree.ElementTree as ET

import pytest

from carom.encoding import encode_state
from carom.machine import enumerate_tapes, parse_machine, step, ComputationState
from carom.table import (
    NotReversible,
    OutOfRange,
    compile_table,
    load_table,
    to_svg,
)
from carom.ternary import T
from carom.zoo import fixture_machines, get_machine

NONREV = """\
states: A B H
initial: A
halting: H
A 0 -> B 0 R
A 1 -> B 0 R
B 0 -> H 0 R
B 1 -> H 1 R
"""


def test_compile_rev_move_structure():
    m = get_machine("rev-move")
    table = compile_table(m, 4)
    assert len(table.stations) == 2
    assert len(table.corridors) == 2
    # both targets have in-degree 1, so no merges anywhere
    assert all(st.merge is None for st in table.stations.values())
    assert table.stations["H"].checkpoint.hard
    assert not table.stations["A"].checkpoint.hard


def test_compile_merge_only_at_indegree_two():
    looper = get_machine("looper")
    table = compile_table(looper, 3)
    assert table.stations["L"].merge is not None
    assert table.stations["H"].merge is None
    walker = compile_table(get_machine("walker"), 3)
    # Q is entered by P and by itself: one merge; P and H are merge-free
    assert walker.stations["Q"].merge is not None
    assert walker.stations["P"].merge is None
    assert walker.stations["H"].merge is None


def test_compile_rejects_nonreversible():
    with pytest.raises(NotReversible) as err:
        compile_table(parse_machine(NONREV), 3)
    assert err.value.witness is not None


def test_corridor_correctness_exhaustive():
    # composed corridor transfer == one machine step at the encoding level
    K = 3
    for name, m in fixture_machines().items():
        table = compile_table(m, K)
        for (q, a), corridor in table.corridors.items():
            for tape in enumerate_tapes(range(-2, 3)):
                for k in range(-K + 1, K):
                    if (1 if k in tape else 0) != a:
                        continue
                    if abs(k + corridor.edge.shift) > K:
                        continue
                    before = encode_state(tape, k).value
                    conf2 = step(m, ComputationState(tape, q, k))
                    want = encode_state(conf2.tape, conf2.head).value
                    got, pieces = corridor.apply(before)
                    assert got == want, (name, q, a, sorted(tape), k)


def test_corridor_out_of_range():
    m = get_machine("rev-move")
    table = compile_table(m, 4)
    deep = encode_state(frozenset(), 4).value
    with pytest.raises(OutOfRange) as err:
        table.corridors[("A", 0)].apply(deep)
    assert err.value.k == 5


def test_corridor_inverse():
    for name in ("rev-move", "walker", "looper", "bit-flipper"):
        m = get_machine(name)
        table = compile_table(m, 3)
        for (q, a), corridor in table.corridors.items():
            for tape in enumerate_tapes(range(-1, 2)):
                for k in (-1, 0, 1):
                    if (1 if k in tape else 0) != a:
                        continue
                    if abs(k + corridor.edge.shift) > 3:
                        continue
                    v = encode_state(tape, k).value
                    out, _ = corridor.apply(v)
                    assert corridor.apply_inverse(out) == v


def test_wall_sequence_reports_all_bounces():
    m = get_machine("walker")  # has a merge on Q
    table = compile_table(m, 3)
    v = encode_state(frozenset(), 0).value  # read 0: the edge P -> Q
    seq = table.corridors[("P", 0)].wall_sequence(v)
    # split pair, two shift arcs, four turn mirrors, merge pair
    assert len(seq) == 10
    assert seq[0].startswith("split:P") and seq[0].endswith(":W")
    assert "stage:P.r0" in seq[2]
    assert seq[-1].startswith("premerge:Q")
    # merge-free target: no merge walls at the end
    seq2 = table.corridors[("P", 1)].wall_sequence(
        encode_state(frozenset({0}), 0).value)
    assert len(seq2) == 8


def test_layout_exact_disjointness():
    for name, m in fixture_machines().items():
        table = compile_table(m, 2)
        checked = table.verify_layout(levels=range(-2, 3))
        assert checked > 0, name


def test_layout_rev_move_k3():
    table = compile_table(get_machine("rev-move"), 3)
    table.verify_layout(levels=range(-3, 4))


def test_iota_charts():
    m = get_machine("rev-move")
    table = compile_table(m, 3)
    pad = table.iota_chart("initial")
    assert pad.hard
    launch = pad.chart(T(1, 1).as_fraction())
    assert pad.chart_inverse(launch) == T(1, 1).as_fraction()
    halt = table.iota_chart("halt")
    assert halt is table.stations["H"].checkpoint
    assert table.iota_chart("A") is table.stations["A"].checkpoint
    with pytest.raises(KeyError):
        table.iota_chart("nope")


def test_initial_pad_placement():
    # rev-move's initial state is re-entered: the pad sits off-column
    table = compile_table(get_machine("rev-move"), 2)
    st = table.stations["A"]
    assert table.initial_pad.origin[0] == st.x - 4
    # a machine whose initial state is never re-entered gets an in-column pad
    fresh = parse_machine(
        "states: S A H\ninitial: S\nhalting: H\n"
        "S 0 -> A 1 R\nS 1 -> H 0 R\nA 0 -> A 0 R\nA 1 -> H 1 R\n")
    t2 = compile_table(fresh, 2)
    assert t2.initial_pad.origin[0] == t2.stations["S"].x


def test_serialize_roundtrip_and_stability():
    m = get_machine("rev-move")
    t1 = compile_table(m, 2, scene_levels=2)
    t2 = compile_table(m, 2, scene_levels=2)
    assert t1.to_json() == t2.to_json()
    loaded = load_table(t1.to_json())
    assert loaded.to_json() == t1.to_json()
    assert loaded.machine_hash == t1.machine_hash


def test_serialize_tamper_detected():
    t1 = compile_table(get_machine("rev-move"), 2, scene_levels=2)
    doc = json.loads(t1.to_json())
    doc["scene"][0]["p0"][0] = "1/7"
    with pytest.raises(ValueError):
        load_table(json.dumps(doc))


def test_svg_export():
    table = compile_table(get_machine("rev-move"), 2)
    svg = to_svg(table, levels=range(-1, 2))
    root = ET.fromstring(svg)
    ns = "{http://www.w3.org/2000/svg}"
    paths = root.findall(f".//{ns}path")
    walls = table.scene_walls(range(-1, 2))
    marks = table.marked_segments()
    assert len(paths) == len(walls) + len(marks)


def test_every_corridor_routes_with_four_turns():
    # self loops and plain edges alike: a rectangle of four turn mirrors
    for name, m in fixture_machines().items():
        table = compile_table(m, 2)
        for corridor in table.corridors.values():
            assert len(corridor.turns) == 4


def test_parallel_corridors_one_row_apart():
    # the looper's two self-loop corridors share endpoints: private rows
    # and lanes one pitch apart
    from carom.table import ROW_PITCH, LANE_PITCH
    table = compile_table(get_machine("looper"), 2)
    c0, c1 = table.corridors[("L", 0)], table.corridors[("L", 1)]
    y0 = c0.turns[0].gadget.static_walls[0].p0[1]
    y1 = c1.turns[0].gadget.static_walls[0].p0[1]
    assert abs(y1 - y0) == ROW_PITCH
    x0 = c0.turns[2].gadget.static_walls[0].p0[0]
    x1 = c1.turns[2].gadget.static_walls[0].p0[0]
    assert abs(x1 - x0) == LANE_PITCH


def test_serialized_pieces_cover_transfers():
    doc = json.loads(compile_table(get_machine("rev-move"), 2, scene_levels=2).to_json())
    for c in doc["corridors"]:
        assert c["pieces"], c
        assert all(p["stage"] in ("split", "shift") for p in c["pieces"])
        split_tags = {p["tag"] for p in c["pieces"] if p["stage"] == "split"}
        assert split_tags == {f"branch{c['read']}"}


def test_kmax_env_override(monkeypatch):
    from carom.encoding import cantor_blocks, k_max_cap, KRangeExceeded
    monkeypatch.setenv("BILLIARD_KMAX", "2")
    assert k_max_cap() == 2
    with pytest.raises(KRangeExceeded):
        cantor_blocks(3, 0)


def test_corridor_cycles_match_betti():
    for name, m in fixture_machines().items():
        table = compile_table(m, 2)
        g = table.graph
        assert g.first_betti_number() == len(g.edges) - len(g.vertices) + \
            _components(g)


def _components(g):
    parent = {v: v for v in g.vertices}

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for e in g.edges:
        ra, rb = find(e.state), find(e.target)
        if ra != rb:
            parent[ra] = rb
    return len({find(v) for v in g.vertices})
