"""Billiard gadgets: wall geometry plus exact transfer maps.

Three families realize the machine operations on the encoded coordinate:

* split / rewrite-split: one short mirror above every Cantor block, slope
  -1 over read-0 blocks and +1 over read-1 blocks (tilted to
  -1/(1 + 3**-(3k+2)) when the edge writes the opposite symbol), paired
  with an exactly parallel return mirror two units to the side.  Two
  reflections across parallel mirrors translate a vertical beam rigidly,
  so read-0 states exit at x - 2 and read-1 states at x + 2, with the
  rewrite displacement folded into the mirror offset.  Every block's
  mirror pair lives in its own horizontal height band (band centre
  8 * (block centre - 1/2) around the gadget midline); bands are pairwise
  disjoint because blocks are, which is what guarantees the connecting
  flight between a pair never meets another block's walls.

* merge: the y-mirror image of a split that classifies on the tape cell
  *behind* the head; reversibility makes the two incoming beams occupy
  disjoint block families, so the mirrored walls funnel them into one
  window without collisions.

* shift: a confocal parabola pair per head-sign regime.  A vertical beam
  entering the bowl of the first parabola leaves the second one vertical
  again with its transverse offset scaled by the focal-parameter ratio
  (exactly 3 or 1/3); the regime's affine constant is absorbed by where
  the pair sits.  Scaling pairs preserve the vertical sense, so both
  ports face beam-up and corridors stack them directly.

The transfer maps are the exact source of truth; ray tracing through the
walls (simulate.run_numeric) certifies that the geometry implements them.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple, Optional

from .encoding import (
    KRangeExceeded,
    NotACode,
    block_of,
    cantor_blocks_at,
    digit_position,
    head_interval,
    head_of,
    k_max_cap,
    rewrite_scale,
)
from .geometry import ParabolaArc, Port, Segment
from .ternary import T, TernaryRational

F = Fraction


class DomainError(ValueError):
    """Transfer map evaluated outside its domain."""


class Piece(NamedTuple):
    """One affine piece u -> a*u + b of a transfer map, with provenance."""

    lo: TernaryRational
    hi: TernaryRational
    a: TernaryRational
    b: TernaryRational
    wall_ids: tuple
    tag: str

    def apply(self, u):
        return self.a * u + self.b


class PiecewiseTransfer:
    """Exact piecewise-affine map with lazy domain lookup.

    ``locate`` maps a coordinate to its Piece (or raises DomainError);
    ``enumerate_pieces(levels)`` lists pieces explicitly for the given
    head levels, for tests and serialization.  Laziness matters: block
    counts grow as 2**(2k), but evaluating a point only needs its own
    digits.
    """

    def __init__(self, locate, enumerate_pieces, label=""):
        self._locate = locate
        self._enumerate = enumerate_pieces
        self.label = label

    def locate(self, u):
        return self._locate(u)

    def apply(self, u):
        piece = self._locate(u)
        return piece.apply(u), piece

    def pieces(self, levels):
        return self._enumerate(levels)

    def check_injective(self, levels):
        """Verify piece images are pairwise disjoint (needed to invert)."""
        images = sorted(((p.apply(p.lo), p.apply(p.hi), p) for p in self.pieces(levels)),
                        key=lambda t: t[0].as_fraction())
        for (lo1, hi1, p1), (lo2, hi2, p2) in zip(images, images[1:]):
            if hi1 > lo2:
                raise ValueError(
                    f"transfer {self.label}: images of {p1.tag} and {p2.tag} overlap")


@dataclass(frozen=True)
class Gadget:
    """Walls in a local frame plus the exact transfer between its ports."""

    kind: str
    name: str
    in_ports: dict
    out_ports: dict
    transfer: PiecewiseTransfer
    static_walls: tuple = ()
    level_walls: Optional[Callable] = None  # k -> [walls]

    def walls(self, levels=()):
        ws = list(self.static_walls)
        if self.level_walls is not None:
            for k in levels:
                ws.extend(self.level_walls(k))
        return ws


# ---------------------------------------------------------------------------
# split / merge
# ---------------------------------------------------------------------------

#: Branch lane offset by classified symbol: read-0 exits left, read-1 right.
SIGMA = {0: F(-2), 1: F(2)}

#: Local frame height of a split cell; walls live in bands around y = 5.
SPLIT_HEIGHT = F(10)
_H_MID = F(5)
_BAND_GAIN = F(8)


def _band_center(lo, hi):
    """Height band centre for the block [lo, hi].

    8 * |centre difference| >= 8 * (sum of half-lengths + gap) beats the
    band half-widths 4*h, so distinct blocks get disjoint bands.
    """
    c = (lo.as_fraction() + hi.as_fraction()) / 2
    return _H_MID + _BAND_GAIN * (c - F(1, 2))


class _BlockWalls(NamedTuple):
    primary: Segment
    returning: Segment
    slope: Fraction
    displacement: TernaryRational


def _block_wall_params(k, lo, hi, read_s, write_s):
    """Mirror pair realizing u -> u + sigma + rewrite displacement over a
    block, as exact wall geometry in gadget-local coordinates."""
    u_k = rewrite_scale(k)
    disp = SIGMA[read_s] + (2 * (write_s - read_s) * u_k).as_fraction()
    if write_s == read_s:
        slope = F(-1) if read_s == 0 else F(1)
    else:
        tilt = 1 / (1 + u_k.as_fraction())  # tan(alpha_k) = 1/(1+3^-(3k+2))
        slope = -tilt if read_s == 0 else tilt
    return slope, disp


def _block_walls(name, k, digit_pos, prefix_int, lo, hi, read_s, write_s, base_x):
    slope, disp = _block_wall_params(k, lo, hi, read_s, write_s)
    lo_f, hi_f = lo.as_fraction(), hi.as_fraction()
    h = hi_f - lo_f
    pad = h / 3
    center = (lo_f + hi_f) / 2
    height = _band_center(lo, hi)
    wid = f"{name}:k{k}:d{digit_pos}:s{read_s}:b{prefix_int}"

    def primary_y(x):
        return height + slope * (x - center - base_x)

    primary = Segment(
        (base_x + lo_f - pad, primary_y(base_x + lo_f - pad)),
        (base_x + hi_f + pad, primary_y(base_x + hi_f + pad)),
        wid + ":W")
    # parallel return mirror: two reflections across parallel lines
    # translate the beam by exactly `disp` horizontally
    shift = disp * (slope * slope + 1) / (2 * slope * slope)

    def return_y(x):
        return height + slope * (x - center - shift - base_x)

    returning = Segment(
        (base_x + lo_f + disp - pad, return_y(base_x + lo_f + disp - pad)),
        (base_x + hi_f + disp + pad, return_y(base_x + hi_f + disp + pad)),
        wid + ":Wt")
    return _BlockWalls(primary, returning, slope, disp)


def build_split_gadget(K, rewrite_rule=None, *, cell_offset=0, base_x=F(0),
                       name="split", k_filter=None):
    """A separating wall family for head levels |k| <= K.

    ``rewrite_rule`` maps (k, read symbol) to the written symbol (None
    means read-only).  ``cell_offset`` selects which tape cell the walls
    classify on, relative to the head: 0 is the ordinary read split;
    merges use the cell behind the head.  ``k_filter`` limits the valid
    levels (a compiled corridor only supports heads its table covers).

    Transfer: u -> u + sigma_s (+ rewrite displacement) where s is the
    classified symbol, on every Cantor block; in-port window [0, 1],
    branch out-ports at windows [-2, -1] and [2, 3].
    """
    if K > k_max_cap():
        raise KRangeExceeded(f"split K={K} beyond cap {k_max_cap()}")
    if rewrite_rule is None:
        rewrite_rule = lambda k, s: s
    if k_filter is None:
        k_filter = lambda k: abs(k) <= K
    base_x = F(base_x)

    def locate(u):
        v = u  # in-port coordinate equals the encoded value
        k = head_of(v)
        if k is None or not k_filter(k):
            raise DomainError(f"{name}: {v} outside supported head intervals")
        digit_pos = digit_position(k + cell_offset)
        try:
            lo, hi, s = block_of(v, k, digit_pos)
        except NotACode as err:
            raise DomainError(f"{name}: {err}") from err
        write_s = rewrite_rule(k, s)
        slope, disp = _block_wall_params(k, lo, hi, s, write_s)
        prefix_int = _prefix_int(v, k, digit_pos)
        wid = f"{name}:k{k}:d{digit_pos}:s{s}:b{prefix_int}"
        return Piece(lo, hi, T(1), TernaryRational.from_fraction(disp),
                     (wid + ":W", wid + ":Wt"), f"branch{s}")

    def level_walls(k):
        if not k_filter(k):
            return []
        digit_pos = digit_position(k + cell_offset)
        walls = []
        for s in (0, 1):
            write_s = rewrite_rule(k, s)
            for blk in cantor_blocks_at(k, digit_pos, s):
                pair = _block_walls(name, k, digit_pos, _bits_int(blk.prefix) * 2 + s,
                                    blk.lo, blk.hi, s, write_s, base_x)
                walls += [pair.primary, pair.returning]
        return walls

    def enumerate_pieces(levels):
        pieces = []
        for k in levels:
            if not k_filter(k):
                continue
            digit_pos = digit_position(k + cell_offset)
            for s in (0, 1):
                write_s = rewrite_rule(k, s)
                for blk in cantor_blocks_at(k, digit_pos, s):
                    _, disp = _block_wall_params(k, blk.lo, blk.hi, s, write_s)
                    prefix_int = _bits_int(blk.prefix) * 2 + s
                    wid = f"{name}:k{k}:d{digit_pos}:s{s}:b{prefix_int}"
                    pieces.append(Piece(blk.lo, blk.hi, T(1),
                                        TernaryRational.from_fraction(disp),
                                        (wid + ":W", wid + ":Wt"), f"branch{s}"))
        return pieces

    transfer = PiecewiseTransfer(locate, enumerate_pieces, label=name)
    ports_out = {
        "b0": Port((base_x, SPLIT_HEIGHT), (F(1), F(0)), (F(0), F(1)), F(-2), F(-1)),
        "b1": Port((base_x, SPLIT_HEIGHT), (F(1), F(0)), (F(0), F(1)), F(2), F(3)),
    }
    return Gadget(
        kind="split", name=name,
        in_ports={"in": Port((base_x, F(0)), (F(1), F(0)), (F(0), F(1)), F(0), F(1))},
        out_ports=ports_out,
        transfer=transfer,
        level_walls=level_walls,
    )


def _bits_int(bits):
    v = 0
    for b in bits:
        v = v * 2 + b
    return v


def _prefix_int(v, k, digit_pos):
    """Stable block identifier from the pinned digits of v's pre-image."""
    from .encoding import tau_inverse
    y = tau_inverse(k, v)
    digits = y.ternary_digits()
    digits += [0] * (digit_pos - len(digits))
    val = 0
    for d in digits[:digit_pos]:
        val = val * 2 + d // 2
    return val


def build_merge_gadget(split, *, name=None, validate_levels=(-1, 0, 1)):
    """Time reversal of a split: mirrored walls, inverted transfer.

    The two incoming beams (windows [-2,-1] and [2,3]) are funnelled onto
    the single [0,1] window.  Requires the split's transfer to be
    injective; overlapping images mean the machine was not reversible and
    merging would glue distinct histories.
    """
    name = name or split.name + ":merged"
    split.transfer.check_injective(validate_levels)
    axis = SPLIT_HEIGHT / 2

    def locate(u):
        if F(-2) <= u.as_fraction() <= F(-1):
            v = u + 2
        elif F(2) <= u.as_fraction() <= F(3):
            v = u - 2
        else:
            raise DomainError(f"{name}: {u} outside branch lanes")
        piece = split.transfer.locate(v)
        img_lo, img_hi = piece.apply(piece.lo), piece.apply(piece.hi)
        if not (img_lo <= u <= img_hi):
            raise DomainError(f"{name}: {u} not in the image of block {piece.tag}")
        return Piece(img_lo, img_hi, T(1), -piece.b,
                     tuple(reversed(piece.wall_ids)), piece.tag)

    def level_walls(k):
        return [w.mirrored_y(axis) for w in split.walls([k])]

    def enumerate_pieces(levels):
        out = []
        for p in split.transfer.pieces(levels):
            out.append(Piece(p.apply(p.lo), p.apply(p.hi), T(1), -p.b,
                             tuple(reversed(p.wall_ids)), p.tag))
        return out

    def flip_port(p):
        # mirroring flips the beam; time reversal flips it back to +y
        q = p.mirrored_y(axis)
        return Port(q.origin, q.tangent, (F(0), F(1)), q.lo, q.hi)

    in_ports = {key: flip_port(port) for key, port in split.out_ports.items()}
    out_port = flip_port(split.in_ports["in"])
    return Gadget(
        kind="merge", name=name,
        in_ports=in_ports,
        out_ports={"out": out_port},
        transfer=PiecewiseTransfer(locate, enumerate_pieces, label=name),
        level_walls=level_walls,
    )


# ---------------------------------------------------------------------------
# shift
# ---------------------------------------------------------------------------

#: Stage frame height; ports at y=0 and y=STAGE_HEIGHT, out window shifted
#: +2 in x relative to the in window.
STAGE_HEIGHT = F(12)
_FOCUS_EXPAND = F(10)  # focus height of the upward (expanding) pair
_FOCUS_FUNNEL = F(1)   # focus height of the downward (contracting) pair
_P_SMALL = F(1)
_P_BIG = F(3)
_ARC_PAD = F(1, 24)


class _Regime(NamedTuple):
    tag: str
    a: TernaryRational
    b: TernaryRational
    d_lo: Fraction          # coordinate hull of the regime's head intervals
    d_hi: Fraction
    k_pred: Callable        # does head level k belong to this regime


def _shift_regimes(eps):
    if eps == +1:
        return (
            _Regime("neg", T(3), T(0), F(0), F(2, 9), lambda k: k < 0),
            _Regime("pos", T(1, 1), T(2, 1), F(1, 3), F(1), lambda k: k >= 0),
        )
    return (
        _Regime("pos", T(3), T(-2), F(7, 9), F(1), lambda k: k >= 1),
        _Regime("neg", T(1, 1), T(0), F(0), F(2, 3), lambda k: k <= 0),
    )


def _confocal_pair(name, regime, base_x, sigma):
    """Two confocal arcs realizing u -> a*u + b' on the regime window.

    With the out-port chart two units right of the in-port chart, the
    parabola axis must sit at base + sigma + (b+2)/(1-a); the focal
    parameters 1 and 3 give the scaling ratio.  Expansions use an upward
    pair entered at the small arc; contractions a downward pair entered
    at the big arc.
    """
    a = regime.a.as_fraction()
    b = regime.b.as_fraction()
    f_x = base_x + sigma + (b + 2) / (1 - a)
    expanding = a > 1
    sign = 1 if expanding else -1
    focus_y = _FOCUS_EXPAND if expanding else _FOCUS_FUNNEL
    p_in = _P_SMALL if expanding else _P_BIG
    p_out = _P_BIG if expanding else _P_SMALL

    in_lo = base_x + sigma + regime.d_lo
    in_hi = base_x + sigma + regime.d_hi
    out_lo = base_x + 2 + sigma + a * regime.d_lo + b
    out_hi = base_x + 2 + sigma + a * regime.d_hi + b

    def arc(p, x_lo, x_hi, suffix):
        apex = focus_y - sign * p
        for x in (x_lo - f_x, x_hi - f_x):
            assert abs(x) < 2 * p, f"{name}: offset {x} beyond latus rectum of p={p}"
        return ParabolaArc(f_x, apex, p, sign,
                           x_lo - _ARC_PAD, x_hi + _ARC_PAD,
                           f"{name}:{regime.tag}:{suffix}")

    return (arc(p_in, in_lo, in_hi, "in"), arc(p_out, out_lo, out_hi, "out"))


def build_shift_stage(eps, *, base_x=F(0), sigma=0, K=None, name="shift"):
    """Both head-sign regimes of a head move, side by side in one frame.

    In-port window [sigma, sigma+1] (lane coordinate = value + sigma,
    sigma an integer lane offset), out-port window identical but two
    units to the right; transfer u -> sigma + shift(u - sigma) piecewise
    over the head intervals.
    """
    base_x = F(base_x)
    sigma = int(sigma)
    regimes = _shift_regimes(eps)
    walls = []
    arc_ids = {}
    for regime in regimes:
        arcs = _confocal_pair(name, regime, base_x, F(sigma))
        walls += arcs
        arc_ids[regime.tag] = (arcs[0].wall_id, arcs[1].wall_id)
    k_cap = K if K is not None else k_max_cap()

    def piece_for_level(k):
        for regime in regimes:
            if regime.k_pred(k):
                iv = head_interval(k)
                b_rebased = regime.b + sigma * (1 - regime.a)
                return Piece(iv.lo + sigma, iv.hi + sigma, regime.a, b_rebased,
                             arc_ids[regime.tag], f"{regime.tag}:k{k}")
        return None

    def locate(u):
        k = head_of(u - sigma)
        if k is None or abs(k) > k_cap:
            raise DomainError(f"{name}: {u} outside supported head intervals")
        piece = piece_for_level(k)
        if piece is None:
            raise DomainError(f"{name}: head level {k} not moved by eps={eps:+d}")
        return piece

    def enumerate_pieces(levels):
        pieces = (piece_for_level(k) for k in sorted(levels) if abs(k) <= k_cap)
        return [p for p in pieces if p is not None]

    sig = F(sigma)
    return Gadget(
        kind=f"shift({eps:+d})", name=name,
        in_ports={"in": Port((base_x, F(0)), (F(1), F(0)), (F(0), F(1)),
                             sig, sig + 1)},
        out_ports={"out": Port((base_x + 2, STAGE_HEIGHT), (F(1), F(0)),
                               (F(0), F(1)), sig, sig + 1)},
        transfer=PiecewiseTransfer(locate, enumerate_pieces, label=name),
        static_walls=tuple(walls),
    )


def build_shift_gadget(regime, eps, *, name=None):
    """Single-regime confocal pair, the unit the proofs reason about.

    ``regime`` is 'neg' (head levels k < 0 side) or 'pos' (k >= 0 side);
    transfer is 3x / x/3 + 2/3 for eps=+1 and the exact inverses for
    eps=-1, restricted to the union of head intervals the move touches.
    """
    if regime not in ("neg", "pos"):
        raise ValueError("regime must be 'neg' or 'pos'")
    name = name or f"shift[{regime},{eps:+d}]"
    stage = build_shift_stage(eps, name=name)
    wanted = [r for r in _shift_regimes(eps) if r.tag == regime][0]

    def locate(u):
        piece = stage.transfer.locate(u)
        if not piece.tag.startswith(regime):
            raise DomainError(f"{name}: {u} belongs to the other regime")
        return piece

    def enumerate_pieces(levels):
        return [p for p in stage.transfer.pieces(levels)
                if p.tag.startswith(regime)]

    walls = tuple(w for w in stage.static_walls if f":{regime}:" in w.wall_id)
    return Gadget(
        kind=f"shift({eps:+d})", name=name,
        in_ports=stage.in_ports, out_ports=stage.out_ports,
        transfer=PiecewiseTransfer(locate, enumerate_pieces, label=name),
        static_walls=walls,
    )


# ---------------------------------------------------------------------------
# turns
# ---------------------------------------------------------------------------

_TURN_SLOPES = {
    ((0, 1), (1, 0)): 1, ((0, 1), (-1, 0)): -1,
    ((1, 0), (0, -1)): -1, ((1, 0), (0, 1)): 1,
    ((0, -1), (-1, 0)): 1, ((0, -1), (1, 0)): -1,
    ((-1, 0), (0, 1)): -1, ((-1, 0), (0, -1)): 1,
}
_TURN_PAD = F(1, 2)


def make_turn(in_port, out_beam, along, name, max_extent=None):
    """One flat mirror turning ``in_port``'s beam into ``out_beam``.

    ``along`` positions the mirror: the distance from the in-port plane to
    where the beam at coordinate lo meets the mirror.  The out-port chart
    is the mirror image of the in-chart, which makes the transfer the
    identity on [lo, hi].
    """
    bx, by = int(in_port.beam[0]), int(in_port.beam[1])
    ox, oy = int(out_beam[0]), int(out_beam[1])
    slope = _TURN_SLOPES.get(((bx, by), (ox, oy)))
    if slope is None:
        raise ValueError(f"turn {name}: {in_port.beam} -> {out_beam} is not a quarter turn")
    lo, hi = in_port.lo, in_port.hi
    if max_extent is not None and hi - lo + 2 * _TURN_PAD > max_extent:
        raise ValueError(f"turn {name}: beam window wider than wall extent")
    p_lo = in_port.chart(lo)
    anchor = (p_lo[0] + in_port.beam[0] * along, p_lo[1] + in_port.beam[1] * along)
    # mirror line y = slope*x + c through the anchor
    c = anchor[1] - slope * anchor[0]

    def reflect_point(pt):
        x, y = pt
        if slope == 1:
            return (y - c, x + c)
        return (c - y, c - x)

    def reflect_vec(v):
        if slope == 1:
            return (v[1], v[0])
        return (-v[1], -v[0])

    # mirror segment must cover every beam offset in [lo, hi] plus padding
    hits = []
    for u in (lo - _TURN_PAD, hi + _TURN_PAD):
        p = in_port.chart(u)
        # solve p + t*beam on the mirror line
        t = (slope * p[0] + c - p[1]) / (in_port.beam[1] - slope * in_port.beam[0])
        hits.append((p[0] + t * in_port.beam[0], p[1] + t * in_port.beam[1]))
    wall = Segment(hits[0], hits[1], f"{name}:mirror")

    # the reflected chart line sits upstream of the mirror; sliding the
    # origin along the outgoing beam leaves every ray's coordinate intact
    # and puts the port plane safely past the wall
    margin = abs(along) + (hi - lo) + 2 * _TURN_PAD + 2
    rp = reflect_point(in_port.origin)
    out_port = Port((rp[0] + F(ox) * margin, rp[1] + F(oy) * margin),
                    reflect_vec(in_port.tangent), (F(ox), F(oy)), lo, hi)
    # corridor windows have integer bounds, so the piece record stays exact
    piece = Piece(TernaryRational.from_fraction(F(lo)),
                  TernaryRational.from_fraction(F(hi)),
                  T(1), T(0), (wall.wall_id,), "turn")

    def locate(u):
        if not (piece.lo <= u <= piece.hi):
            raise DomainError(f"{name}: {u} outside turn window")
        return piece

    return Gadget(
        kind="turn", name=name,
        in_ports={"in": in_port}, out_ports={"out": out_port},
        transfer=PiecewiseTransfer(locate, lambda levels: [piece], label=name),
        static_walls=(wall,),
    )


def build_turn_gadget(direction_change, window=(F(-4), F(4))):
    """Stand-alone quarter-turn mirror for an upward beam.

    +90 turns the beam right (+x), -90 left (-x); the identity transfer
    covers the full window, which must fit the wall extent guard.
    """
    if direction_change not in (+90, -90):
        raise ValueError("direction_change must be +-90")
    lo, hi = F(window[0]), F(window[1])
    port = Port((F(0), F(0)), (F(1), F(0)), (F(0), F(1)), lo, hi)
    out_beam = (1, 0) if direction_change == +90 else (-1, 0)
    return make_turn(port, out_beam, hi - lo + 2, f"turn[{direction_change:+d}]",
                     max_extent=F(8) + 2 * _TURN_PAD + 1)


# ---------------------------------------------------------------------------
# separation audit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeparationReport:
    """Exact evaluation of the wall-clearance inequality between the block
    families of head levels k and k_other.

    For deflect-left (read-0) walls a trajectory leaving the left endpoint
    of a block's mirror must clear the right endpoint of every mirror to
    its left: gap > half-length sum.  Read-1 walls mirror the inequality.
    """

    k: int
    k_other: int
    pair_count: int
    min_slack: Optional[Fraction]
    passed: bool


def separation_reports(blocks_by_level, *, symbol):
    """All ordered same-family pairs across the given levels.

    ``blocks_by_level`` maps k -> [(lo, hi)] as Fractions.  For symbol 0
    the moving trajectory travels left, so each block is checked against
    every block left of it; symbol 1 is the mirror image.
    """
    reports = []
    levels = sorted(blocks_by_level)
    for k in levels:
        for k2 in levels:
            slacks = []
            for lo, hi in blocks_by_level[k]:
                for lo2, hi2 in blocks_by_level[k2]:
                    if symbol == 0:
                        if lo <= lo2:
                            continue
                        gap = lo - hi2
                    else:
                        if lo >= lo2:
                            continue
                        gap = lo2 - hi
                    slacks.append(gap - (hi - lo) / 2 - (hi2 - lo2) / 2)
            m = min(slacks) if slacks else None
            reports.append(SeparationReport(k, k2, len(slacks), m,
                                            m is None or m > 0))
    return reports


def check_separation(K, *, perturb=None):
    """Exact clearance audit of all head-cell blocks with |k|, |k'| <= K.

    ``perturb`` optionally maps (k, symbol, index, lo, hi) to a replacement
    (lo, hi) pair; the mutation tests shift one wall sideways and expect a
    negative slack.
    """
    if K > k_max_cap():
        raise KRangeExceeded(f"separation K={K} beyond cap {k_max_cap()}")
    out = []
    for symbol in (0, 1):
        table = {}
        for k in range(-K, K + 1):
            blks = []
            for i, blk in enumerate(cantor_blocks_at(k, digit_position(k), symbol)):
                lo, hi = blk.lo.as_fraction(), blk.hi.as_fraction()
                if perturb is not None:
                    lo, hi = perturb(k, symbol, i, lo, hi)
                blks.append((lo, hi))
            table[k] = blks
        out.extend(separation_reports(table, symbol=symbol))
    return out
