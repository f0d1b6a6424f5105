"""Compile a reversible machine's graph into a placed billiard table.

Layout scheme (all coordinates exact Fractions):

* one station per state along the x axis, pitch 16.  A station stacks,
  bottom to top: the launch pad (initial state only, y=-16), the merge
  for incoming edges (y in [-12,-2], states with in-degree 2), the
  checkpoint chart at y=0 (a hard wall for halting states, a marked
  crossing line otherwise), the read/rewrite split (y in [1,11]) and one
  shift stage per outgoing branch (y in [13,25], branch lanes -2/+2).

* one corridor per graph edge: after its shift stage the beam turns
  right along a private row (y = 28 + 3*edge), descends a private lane
  right of all stations, runs back left under everything (y = -24 -
  3*edge) and turns up into the target's merge lane.  Rows, lanes and
  mirror cells are disjoint by construction and verified exactly; beams
  may cross beams freely, only walls must never intersect.

Turn mirrors keep the transverse coordinate rigid, so a corridor's
transfer is split o shift o rebase o merge, which per head level reduces
to the machine edge acting on the encoded value.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import gadgets
from .encoding import head_of, rewrite_scale
from .gadgets import (
    SIGMA,
    DomainError,
    Gadget,
    Piece,
    PiecewiseTransfer,
    build_merge_gadget,
    build_shift_stage,
    build_split_gadget,
    make_turn,
)
from .geometry import MarkedSegment, Port, walls_clash
from .machine import build_graph, check_reversible
from .ternary import T

F = Fraction

STATION_PITCH = F(16)
SPLIT_DY = F(1)
STAGE_DY = F(13)
MERGE_DY = F(-12)
PAD_Y = F(-16)
ROW0 = F(28)
ROW_PITCH = F(3)
BROW0 = F(-24)
LANE_MARGIN = F(8)
LANE_PITCH = F(3)
DEFAULT_SCENE_LEVELS = 3


class CompileError(Exception):
    pass


class NotReversible(CompileError):
    def __init__(self, witness):
        super().__init__(f"machine is not reversible: {witness.reason}")
        self.witness = witness


class OutOfRange(Exception):
    """A trajectory needs a head position beyond the compiled K."""

    def __init__(self, k):
        super().__init__(f"head position {k} beyond table range")
        self.k = k


@dataclass(frozen=True)
class Placed:
    """A gadget plus its vertical offset in the global frame."""

    gadget: Gadget
    dy: Fraction

    def walls(self, levels):
        return [w.translated(0, self.dy) for w in self.gadget.walls(levels)]


@dataclass
class Station:
    state: str
    x: Fraction
    checkpoint: MarkedSegment
    split: Optional[Placed] = None
    merge: Optional[Placed] = None
    merge_shift: Optional[int] = None  # shared shift of the incoming edges
    premerge: Optional[Gadget] = None  # virtual split the merge mirrors

    def walls(self, levels):
        ws = []
        if self.checkpoint.hard:
            ws.append(self.checkpoint.as_segment())
        if self.split:
            ws += self.split.walls(levels)
        if self.merge:
            ws += self.merge.walls(levels)
        return ws


@dataclass
class Corridor:
    """One graph edge realized as a gadget chain with a composed transfer."""

    edge: object  # machine.Transition
    index: int
    branch: int          # read symbol, selects the split branch and lane
    sigma_in: int        # lane offset after the split (-2 or +2)
    sigma_out: int       # lane offset expected by the target (0 if merge-free)
    split: Gadget
    stage: Placed
    turns: tuple         # four Placed turn gadgets (dy already folded in)
    merge: Optional[Gadget]
    K: int = 8
    premerge: Optional[PiecewiseTransfer] = None   # virtual split behind merge
    stage_inverse: Optional[PiecewiseTransfer] = None

    def apply(self, value):
        """Exact corridor transfer; returns (new value, ordered pieces).

        Raises OutOfRange for head levels the table does not cover and
        DomainError for values that are not valid codes (a compiler bug,
        surfaced loudly).
        """
        k = head_of(value)
        if k is None:
            raise DomainError(f"corridor {self.edge}: {value} is not a code")
        if abs(k) > self.K:
            raise OutOfRange(k)
        k_target = k + self.edge.shift
        if abs(k_target) > self.K:
            raise OutOfRange(k_target)
        pieces = []
        v, piece = self.split.transfer.apply(value)
        if piece.tag != f"branch{self.branch}":
            raise DomainError(
                f"corridor {self.edge}: value {value} belongs to {piece.tag}")
        pieces.append(piece)
        v, piece = self.stage.gadget.transfer.apply(v)
        pieces.append(piece)
        for placed in self.turns:
            v, piece = placed.gadget.transfer.apply(v)
            pieces.append(piece)
        rebase = self.sigma_out - self.sigma_in
        if rebase:
            v = v + rebase
        pieces.append(Piece(T(0), T(0), T(1), T(rebase), (), "rebase"))
        if self.merge is not None:
            v, piece = self.merge.transfer.apply(v)
            pieces.append(piece)
        return v, pieces

    def wall_sequence(self, value):
        """Wall ids a trajectory entering at ``value`` bounces on, in order."""
        _, pieces = self.apply(value)
        out = []
        for p in pieces:
            out.extend(p.wall_ids)
        return out

    def apply_inverse(self, value_after):
        """Run the corridor's transfer chain backwards, piece by piece.

        Inverts each stage: merge via its virtual-split piece, the shift
        via the opposite-move stage, the split via the rewrite
        displacement; used by the time-reversed periodicity replay.
        """
        w = value_after
        if self.merge is not None:
            piece = self.premerge.locate(w)
            w = w + piece.b
        rebase = self.sigma_out - self.sigma_in
        if rebase:
            w = w - rebase
        w, _ = self.stage_inverse.apply(w)
        xprime = w - self.sigma_in
        k = head_of(xprime)
        if k is None:
            raise DomainError(f"inverse corridor {self.edge}: {w} is not a code")
        x = xprime - (self.edge.write - self.edge.read) * 2 * rewrite_scale(k)
        forward, piece = self.split.transfer.apply(x)
        if forward != w or piece.tag != f"branch{self.branch}":
            raise DomainError(f"inverse corridor {self.edge}: not in image")
        return x

    def walls(self, levels):
        ws = list(self.stage.walls(levels))
        for t in self.turns:
            ws += t.walls(levels)
        return ws


@dataclass
class BilliardTable:
    machine: object
    K: int
    graph: object
    stations: dict
    corridors: dict        # (state, read) -> Corridor
    initial_pad: MarkedSegment
    machine_hash: str
    scene_levels: int = DEFAULT_SCENE_LEVELS

    # -- charts ----------------------------------------------------------

    def iota_chart(self, which):
        """Boundary chart for 'initial', 'halt', or a checkpoint state."""
        if which == "initial":
            return self.initial_pad
        if which == "halt":
            halts = [q for q in self.machine.states if q in self.machine.halting]
            if len(halts) != 1:
                raise KeyError(f"'halt' is ambiguous, halting states: {halts}")
            return self.stations[halts[0]].checkpoint
        if which in self.stations:
            return self.stations[which].checkpoint
        raise KeyError(f"no checkpoint chart for {which!r}")

    def checkpoint_point(self, state, value):
        return self.iota_chart(state).chart(value.as_fraction())

    # -- scene -------------------------------------------------------------

    def scene_walls(self, levels=None):
        """All placed walls for the given head levels, in a stable order."""
        if levels is None:
            levels = range(-self.scene_levels, self.scene_levels + 1)
        levels = list(levels)
        ws = [self.initial_pad.as_segment()]
        for q in self.machine.states:
            ws += self.stations[q].walls(levels)
        for key in sorted(self.corridors):
            ws += self.corridors[key].walls(levels)
        return ws

    def marked_segments(self):
        marks = [self.initial_pad]
        for q in self.machine.states:
            marks.append(self.stations[q].checkpoint)
        return marks

    def verify_layout(self, levels=None):
        """Exact pairwise non-intersection of all walls.

        Segment pairs are checked exactly; pairs involving parabola arcs
        conservatively by bounding boxes.  Returns the number of pairs
        inspected; raises CompileError with the offending ids otherwise.
        """
        walls = self.scene_walls(levels)
        boxes = sorted(((w.bbox(), w) for w in walls), key=lambda t: t[0][0])
        checked = 0
        for i, (b1, w1) in enumerate(boxes):
            for b2, w2 in boxes[i + 1:]:
                if b2[0] > b1[2]:
                    break
                checked += 1
                if walls_clash(w1, w2):
                    raise CompileError(f"walls intersect: {w1.wall_id} / {w2.wall_id}")
        return checked

    # -- serialization -----------------------------------------------------

    def to_json(self):
        def frac(x):
            return f"{x.numerator}/{x.denominator}"

        def pt(p):
            return [frac(F(p[0])), frac(F(p[1]))]

        walls = []
        for w in self.scene_walls():
            if w.kind == "segment":
                walls.append({"kind": "segment", "id": w.wall_id,
                              "p0": pt(w.p0), "p1": pt(w.p1)})
            else:
                walls.append({"kind": "parabola_arc", "id": w.wall_id,
                              "axis_x": frac(w.axis_x), "apex_y": frac(w.apex_y),
                              "p": frac(w.p), "sign": w.sign,
                              "x_lo": frac(w.x_lo), "x_hi": frac(w.x_hi)})
        marks = []
        for m in self.marked_segments():
            marks.append({"name": m.name, "origin": pt(m.origin),
                          "tangent": pt(m.tangent), "beam": pt(m.beam),
                          "hard": m.hard})
        corridors = []
        levels = range(-self.scene_levels, self.scene_levels + 1)
        for (q, a), c in sorted(self.corridors.items()):
            pieces = []
            for stage_name, transfer in (("split", c.split.transfer),
                                         ("shift", c.stage.gadget.transfer)):
                for p in transfer.pieces(levels):
                    if stage_name == "split" and p.tag != f"branch{a}":
                        continue
                    pieces.append({
                        "stage": stage_name, "lo": str(p.lo), "hi": str(p.hi),
                        "a": str(p.a), "b": str(p.b), "tag": p.tag,
                        "walls": list(p.wall_ids),
                    })
            corridors.append({
                "source": q, "read": a, "target": c.edge.target,
                "write": c.edge.write, "shift": c.edge.shift,
                "sigma_in": c.sigma_in, "sigma_out": c.sigma_out,
                "index": c.index,
                "ports": {
                    "in": {"window": [0, 1], "beam": "+y"},
                    "branch": {"window": [c.sigma_in, c.sigma_in + 1], "beam": "+y"},
                    "out": {"window": [c.sigma_out, c.sigma_out + 1], "beam": "+y"},
                },
                "pieces": pieces,
            })
        doc = {
            "format": "carom-table/1",
            "meta": {
                "machine": self.machine.canonical_text(),
                "machine_sha256": self.machine_hash,
                "K": self.K,
                "scene_levels": self.scene_levels,
                "grid_pitch": str(STATION_PITCH),
            },
            "checkpoints": marks,
            "corridors": corridors,
            "scene": walls,
        }
        return json.dumps(doc, indent=1, sort_keys=True)


def machine_hash(machine):
    return hashlib.sha256(machine.canonical_text().encode()).hexdigest()


def station_x(index):
    return STATION_PITCH * index


def compile_table(machine, K, scene_levels=DEFAULT_SCENE_LEVELS):
    """Build the computational billiard for ``machine`` with |head| <= K."""
    witness = check_reversible(machine)
    if witness is not None:
        raise NotReversible(witness)
    if K < 1:
        raise CompileError("K must be >= 1")
    graph = build_graph(machine)

    stations = {}
    for i, q in enumerate(machine.states):
        x = station_x(i)
        halting = machine.is_halting(q)
        checkpoint = MarkedSegment(
            name=f"chk:{q}", origin=(x, F(0)), tangent=(F(1), F(0)),
            beam=(F(0), F(1)), hard=halting)
        stations[q] = Station(state=q, x=x, checkpoint=checkpoint)

    # splits: one per non-halting state, rewriting per its two out-edges
    writes = {}
    for t in graph.edges:
        writes[(t.state, t.read)] = t.write
    for q in machine.states:
        if machine.is_halting(q):
            continue
        st = stations[q]
        rule = (lambda q: lambda k, s: writes[(q, s)])(q)
        split = build_split_gadget(K, rewrite_rule=rule, base_x=st.x,
                                   name=f"split:{q}")
        st.split = Placed(split, SPLIT_DY)

    # merges: states entered by two edges; the walls classify on the tape
    # cell behind the head, which reversibility makes branch-disjoint
    for q in machine.states:
        incoming = graph.in_edges(q)
        if len(incoming) < 2:
            continue
        st = stations[q]
        eps = incoming[0].shift
        assert all(e.shift == eps for e in incoming), "reversibility broken"
        virtual = build_split_gadget(
            K, cell_offset=-eps, base_x=st.x, name=f"premerge:{q}",
            k_filter=lambda k, eps=eps: abs(k) <= K and abs(k - eps) <= K)
        st.merge = Placed(build_merge_gadget(virtual, name=f"merge:{q}"), MERGE_DY)
        st.merge_shift = eps
        st.premerge = virtual

    # corridors
    edges = list(graph.edges)
    n_states = len(machine.states)
    lane0 = station_x(n_states - 1) + STATION_PITCH / 2 + LANE_MARGIN
    corridors = {}
    for idx, edge in enumerate(edges):
        src, tgt = stations[edge.state], stations[edge.target]
        a = edge.read
        sigma_in = int(SIGMA[a])
        merged = tgt.merge is not None
        sigma_out = int(SIGMA[edge.write]) if merged else 0
        stage = build_shift_stage(edge.shift, base_x=src.x, sigma=sigma_in,
                                  K=K, name=f"stage:{edge.state}.r{a}")
        stage_placed = Placed(stage, STAGE_DY)

        row = ROW0 + ROW_PITCH * idx
        brow = BROW0 - ROW_PITCH * idx
        lane_right = lane0 + LANE_PITCH * idx

        lo, hi = F(sigma_in), F(sigma_in) + 1
        p0 = Port((src.x + 2, STAGE_DY + gadgets.STAGE_HEIGHT),
                  (F(1), F(0)), (F(0), F(1)), lo, hi)
        t1 = make_turn(p0, (1, 0), row - p0.origin[1], f"c{idx}:t1")
        p1 = t1.out_ports["out"]
        t2 = make_turn(p1, (0, -1), lane_right - p1.chart(lo)[0], f"c{idx}:t2")
        p2 = t2.out_ports["out"]
        t3 = make_turn(p2, (-1, 0), p2.chart(lo)[1] - brow, f"c{idx}:t3")
        p3 = t3.out_ports["out"]
        exit_x = tgt.x + sigma_out
        t4 = make_turn(p3, (0, 1), p3.chart(lo)[0] - exit_x, f"c{idx}:t4")
        p4 = t4.out_ports["out"]
        assert p4.beam == (F(0), F(1)) and p4.tangent == (F(1), F(0))
        assert p4.chart(lo)[0] == exit_x, (p4.chart(lo), exit_x)

        stage_inv = build_shift_stage(-edge.shift, base_x=src.x, sigma=sigma_in,
                                      K=K, name=f"stage-inv:{edge.state}.r{a}")
        corridors[(edge.state, a)] = Corridor(
            edge=edge, index=idx, branch=a, sigma_in=sigma_in,
            sigma_out=sigma_out, split=src.split.gadget, stage=stage_placed,
            turns=tuple(Placed(t, F(0)) for t in (t1, t2, t3, t4)),
            merge=tgt.merge.gadget if merged else None, K=K,
            premerge=tgt.premerge.transfer if merged else None,
            stage_inverse=stage_inv.transfer)

    q0 = machine.initial
    pad_x = stations[q0].x if graph.in_degree(q0) == 0 else stations[q0].x - 4
    initial_pad = MarkedSegment(
        name="launch", origin=(pad_x, PAD_Y), tangent=(F(1), F(0)),
        beam=(F(0), F(1)), hard=True)

    return BilliardTable(
        machine=machine, K=K, graph=graph, stations=stations,
        corridors=corridors, initial_pad=initial_pad,
        machine_hash=machine_hash(machine), scene_levels=scene_levels)


def load_table(text):
    """Rebuild a table from its serialized form.

    The file pins the machine, K and the explicit scene; the table is
    recompiled deterministically and the regenerated scene is required to
    match the stored one byte for byte.
    """
    from .machine import parse_machine

    doc = json.loads(text)
    if doc.get("format") != "carom-table/1":
        raise ValueError("not a carom table file")
    meta = doc["meta"]
    machine = parse_machine(meta["machine"])
    table = compile_table(machine, int(meta["K"]),
                          scene_levels=int(meta["scene_levels"]))
    if table.machine_hash != meta["machine_sha256"]:
        raise ValueError("machine hash mismatch")
    if table.to_json() != json.dumps(doc, indent=1, sort_keys=True):
        raise ValueError("stored scene does not match deterministic recompilation")
    return table


# ---------------------------------------------------------------------------
# SVG export
# ---------------------------------------------------------------------------

def to_svg(table, levels=None, trace_points=None, precision=12):
    """Render walls (one path per wall), checkpoints and an optional
    trajectory polyline.  Decimal output is presentation only."""
    walls = table.scene_walls(levels)

    def fmt(x):
        return f"{float(x):.{precision}g}"

    xs, ys = [], []
    for w in walls:
        b = w.bbox()
        xs += [b[0], b[2]]
        ys += [b[1], b[3]]
    pad = 2
    x0, x1 = min(xs) - pad, max(xs) + pad
    y0, y1 = min(ys) - pad, max(ys) + pad
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" '
             f'viewBox="{fmt(x0)} {fmt(-y1)} {fmt(x1 - x0)} {fmt(y1 - y0)}">',
             f'<g transform="scale(1,-1)" stroke-width="0.05" fill="none">']
    for w in walls:
        if w.kind == "segment":
            d = (f"M {fmt(w.p0[0])} {fmt(w.p0[1])} "
                 f"L {fmt(w.p1[0])} {fmt(w.p1[1])}")
        else:
            # a parabola arc is exactly a quadratic Bezier: the control
            # point is the intersection of the end tangents (mid-x)
            xa, xb = w.x_lo, w.x_hi
            ya, yb = w.y_at(xa), w.y_at(xb)
            xc = (xa + xb) / 2
            yc = ya + w.sign * (xa - w.axis_x) / (2 * w.p) * (xc - xa)
            d = (f"M {fmt(xa)} {fmt(ya)} Q {fmt(xc)} {fmt(yc)} "
                 f"{fmt(xb)} {fmt(yb)}")
        parts.append(f'<path id="{w.wall_id}" stroke="black" d="{d}"/>')
    for m in table.marked_segments():
        p0, p1 = m.chart(0), m.chart(1)
        color = "#c22" if m.hard else "#2a7"
        parts.append(
            f'<path id="mark:{m.name}" stroke="{color}" stroke-dasharray="0.2 0.1" '
            f'd="M {fmt(p0[0])} {fmt(p0[1])} L {fmt(p1[0])} {fmt(p1[1])}"/>')
    if trace_points:
        pts = " ".join(f"{fmt(x)},{fmt(y)}" for x, y in trace_points)
        parts.append(f'<polyline stroke="#36c" points="{pts}"/>')
    parts.append("</g></svg>")
    return "\n".join(parts)
