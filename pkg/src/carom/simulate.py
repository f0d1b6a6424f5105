"""Trajectory engines and the machine-equivalence verifier.

Two coupled modes:

* run_symbolic evolves the encoded value through the corridors' exact
  transfer maps.  It is the source of truth: every event (reflection
  sequence, checkpoint crossing, halt bounce) is derived from exact
  ternary-rational arithmetic.

* run_numeric re-traces the same trajectory by specular ray tracing over
  the placed walls in mpmath arbitrary-precision floats and must
  reproduce the symbolic event stream, reporting the worst transverse
  deviation at the checkpoints.  This certifies that the geometry really
  implements the transfer maps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import mpmath

from .encoding import decode, encode_state, head_of
from .machine import ComputationState, run_machine, step
from .table import OutOfRange
from .ternary import TernaryRational


@dataclass(frozen=True)
class TraceEvent:
    kind: str                      # reflection | checkpoint | halt-bounce | out-of-range
    step: int                      # machine steps completed when it happened
    wall_id: Optional[str] = None
    state: Optional[str] = None
    value: Optional[TernaryRational] = None
    position: Optional[tuple] = None
    head: Optional[int] = None     # head position (out-of-range: the offender)


@dataclass
class RunOutcome:
    verdict: str                   # halted | budget-exhausted | out-of-range
    steps: int
    trace: list
    final_tape: Optional[frozenset] = None
    final_head: Optional[int] = None
    periodic: bool = False
    out_of_range_k: Optional[int] = None

    @property
    def crossings(self):
        return [e for e in self.trace if e.kind == "checkpoint"]


class TracingError(Exception):
    pass


class TracingDegeneracy(TracingError):
    """Two nearest walls within tie tolerance: a geometry bug, not noise."""


class PrecisionExhausted(TracingError):
    """The working precision cannot resolve the table's scales."""


def run_symbolic(table, tape, budget):
    """Exact billiard run from the initial checkpoint.

    Repeatedly selects the corridor whose split branch contains the
    current value and applies the composed transfer.  A value failing to
    decode at a checkpoint is a compiler bug and raises; exceeding the
    head range yields the out-of-range verdict.
    """
    if budget < 0:
        raise ValueError("budget must be >= 0")
    tape = frozenset(tape)
    value = encode_state(tape, 0).value
    state = table.machine.initial
    trace = []
    steps = 0
    while True:
        trace.append(TraceEvent(
            "checkpoint", steps, state=state, value=value,
            position=table.checkpoint_point(state, value)))
        if table.machine.is_halting(state):
            t, k = decode(value)
            trace.append(TraceEvent(
                "halt-bounce", steps, state=state, value=value,
                wall_id=f"wall:chk:{state}",
                position=table.checkpoint_point(state, value)))
            return RunOutcome("halted", steps, trace, final_tape=t,
                              final_head=k, periodic=True)
        if steps == budget:
            return RunOutcome("budget-exhausted", steps, trace)
        t, k = decode(value)  # loud failure on a non-code: compiler bug
        read = 1 if k in t else 0
        corridor = table.corridors[(state, read)]
        try:
            value, pieces = corridor.apply(value)
        except OutOfRange as oor:
            trace.append(TraceEvent("out-of-range", steps, value=value,
                                    head=oor.k))
            return RunOutcome("out-of-range", steps, trace,
                              out_of_range_k=oor.k)
        for piece in pieces:
            for wid in piece.wall_ids:
                trace.append(TraceEvent("reflection", steps, wall_id=wid))
        state = corridor.edge.target
        steps += 1


def detect_periodicity(outcome):
    """Periodicity certificate for halted runs: the forward event list
    plus its reflection-reversed retrace back to the launch chart.

    Non-halting verdicts yield None (the artifact never claims a run is
    aperiodic, only that no certificate exists within budget).
    """
    if outcome.verdict != "halted":
        return None
    forward = list(outcome.trace)
    backward = list(reversed(forward[:-1]))  # bounce is the turning point
    return {
        "period_events": len(forward) + len(backward),
        "forward": forward,
        "backward": backward,
    }


def replay_reverse(table, outcome):
    """Run a halted trajectory backwards through inverted transfer maps.

    Starts from the halt value and applies each corridor's exact inverse
    along the reversed crossing sequence; returns the recovered launch
    value, which reversibility forces to equal the original encoding.
    """
    crossings = outcome.crossings
    if outcome.verdict != "halted" or not crossings:
        raise ValueError("reverse replay needs a halted outcome")
    value = crossings[-1].value
    for ev in reversed(crossings[:-1]):
        t, k = decode(ev.value)
        read = 1 if k in t else 0
        corridor = table.corridors[(ev.state, read)]
        value = corridor.apply_inverse(value)
        if value != ev.value:
            raise AssertionError(
                f"reverse replay diverged at step {ev.step}: {value} != {ev.value}")
    return value


# ---------------------------------------------------------------------------
# numeric ray tracing
# ---------------------------------------------------------------------------

@dataclass
class NumericResult:
    outcome: RunOutcome            # the verified symbolic outcome
    max_deviation: float
    deviations: list               # per checkpoint crossing
    points: list                   # polyline of traced positions (floats)
    precision: int


def _mpf_pt(p):
    return (mpmath.mpf(p[0].numerator) / p[0].denominator,
            mpmath.mpf(p[1].numerator) / p[1].denominator)


def _seg_intersect(data, origin, direction, t_min):
    (x0, y0), (x1, y1) = data
    ox, oy = origin
    dx, dy = direction
    ex, ey = x1 - x0, y1 - y0
    den = dx * ey - dy * ex
    if den == 0:
        return None
    t = ((x0 - ox) * ey - (y0 - oy) * ex) / den
    if t <= t_min:
        return None
    s = ((x0 - ox) * dy - (y0 - oy) * dx) / den
    # parameter along the segment must stay inside it
    if s < 0 or s > 1:
        return None
    return t


def _arc_intersect(data, origin, direction, t_min, sqrt):
    axis_x, apex_y, p, sign, x_lo, x_hi = data
    ox, oy = origin
    dx, dy = direction
    # F(x,y) = y - apex - sign (x-axis)^2 / 4p = 0
    qa = -sign * dx * dx / (4 * p)
    rel = ox - axis_x
    qb = dy - sign * 2 * rel * dx / (4 * p)
    qc = oy - apex_y - sign * rel * rel / (4 * p)
    if qa == 0:
        roots = [-qc / qb] if qb != 0 else []
    else:
        disc = qb * qb - 4 * qa * qc
        if disc < 0:
            return None
        sq = sqrt(disc)
        # numerically stable root pair
        r1 = (-qb - sq) / (2 * qa) if qb >= 0 else (-qb + sq) / (2 * qa)
        r2 = qc / (qa * r1) if r1 != 0 else (-qb / qa - r1)
        roots = [r1, r2]
    best = None
    for t in roots:
        if t <= t_min:
            continue
        x = ox + t * dx
        if x < x_lo or x > x_hi:
            continue
        if best is None or t < best:
            best = t
    return best


class _NumericWall:
    __slots__ = ("wall", "kind", "data", "fdata")

    def __init__(self, wall):
        self.wall = wall
        self.kind = wall.kind
        if wall.kind == "segment":
            self.data = (_mpf_pt(wall.p0), _mpf_pt(wall.p1))
            self.fdata = (tuple(map(float, wall.p0)), tuple(map(float, wall.p1)))
        else:
            self.data = (mpmath.mpf(wall.axis_x.numerator) / wall.axis_x.denominator,
                         mpmath.mpf(wall.apex_y.numerator) / wall.apex_y.denominator,
                         mpmath.mpf(wall.p.numerator) / wall.p.denominator,
                         wall.sign,
                         mpmath.mpf(wall.x_lo.numerator) / wall.x_lo.denominator,
                         mpmath.mpf(wall.x_hi.numerator) / wall.x_hi.denominator)
            self.fdata = (float(wall.axis_x), float(wall.apex_y), float(wall.p),
                          wall.sign, float(wall.x_lo), float(wall.x_hi))

    def intersect(self, origin, direction, t_min):
        if self.kind == "segment":
            return _seg_intersect(self.data, origin, direction, t_min)
        return _arc_intersect(self.data, origin, direction, t_min, mpmath.sqrt)

    def intersect_float(self, origin, direction, t_min):
        import math
        if self.kind == "segment":
            return _seg_intersect(self.fdata, origin, direction, t_min)
        return _arc_intersect(self.fdata, origin, direction, t_min, math.sqrt)

    def normal_at(self, point):
        if self.kind == "segment":
            (x0, y0), (x1, y1) = self.data
            return (y0 - y1, x1 - x0)
        axis_x, apex_y, p, sign, _, _ = self.data
        return (-sign * (point[0] - axis_x) / (2 * p), mpmath.mpf(1))


def _unit(v):
    n = mpmath.sqrt(v[0] * v[0] + v[1] * v[1])
    return (v[0] / n, v[1] / n)


def _nearest_hit(walls, pos, direction, t_eps, exclude_id=None):
    """Two-pass nearest-intersection: a machine-float sweep shortlists
    candidate walls, then full-precision intersection decides among them.

    Wall features are far coarser than double precision, so the float
    pass cannot drop the true winner; ties finer than floats can resolve
    land in the same shortlist and are separated (or flagged) at working
    precision.  Returns (t, wall, runner_up_t).
    """
    fo = (float(pos[0]), float(pos[1]))
    fd = (float(direction[0]), float(direction[1]))
    scale = max(abs(fd[0]), abs(fd[1]))
    best_f = None
    rough = []
    for w in walls:
        if exclude_id is not None and w.wall.wall_id == exclude_id:
            continue
        t_f = w.intersect_float(fo, fd, 1e-12 / scale if scale else 0.0)
        if t_f is None:
            continue
        rough.append((t_f, w))
        if best_f is None or t_f < best_f:
            best_f = t_f
    if best_f is None:
        return None, None, None
    margin = 1e-5 * (1.0 + best_f)
    best_t = second_t = None
    best_wall = None
    for t_f, w in rough:
        if t_f > best_f + margin:
            continue
        t = w.intersect(pos, direction, t_eps)
        if t is None:
            continue
        if best_t is None or t < best_t:
            best_t, second_t, best_wall = t, best_t, w
        elif second_t is None or t < second_t:
            second_t = t
    return best_t, best_wall, second_t


def _levels_reached(outcome, K):
    ks = [0]
    for ev in outcome.crossings:
        if ev.value is not None:
            k = head_of(ev.value)
            if k is not None:
                ks.append(k)
    reach = max(abs(k) for k in ks) + 1
    reach = min(reach, K)
    return range(-reach, reach + 1)


def run_numeric(table, tape, budget, precision=60):
    """Trace the trajectory by true specular reflection at ``precision``
    working digits and verify it replays the symbolic event stream.

    Returns a NumericResult carrying the symbolic outcome plus the worst
    transverse deviation observed at checkpoint crossings.  Raises
    TracingDegeneracy when two wall hits are indistinguishable at this
    precision and PrecisionExhausted when the trace cannot match the
    exact one.
    """
    if precision < 8:
        raise ValueError("precision must be at least 8 digits")
    symbolic = run_symbolic(table, tape, budget)
    expected = list(symbolic.trace)

    with mpmath.workdps(precision):
        walls = [_NumericWall(w) for w in table.scene_walls(_levels_reached(symbolic, table.K))]
        marks = []
        for m in table.marked_segments():
            marks.append((m, _mpf_pt(m.origin), _mpf_pt(m.tangent), _mpf_pt(m.beam)))

        start_state = table.machine.initial
        v0 = expected[0].value
        pos = _mpf_pt(table.checkpoint_point(start_state, v0))
        direction = (mpmath.mpf(0), mpmath.mpf(1))
        tie_tol = mpmath.mpf(10) ** (-precision + 5)
        t_eps = tie_tol

        deviations = []
        points = [pos]
        idx = 0
        last_wall = None

        def fail(msg):
            raise PrecisionExhausted(
                f"{msg} (precision {precision}, event {idx}/{len(expected)})")

        def check_event(kind, **attrs):
            nonlocal idx
            if idx >= len(expected):
                fail(f"extra event {kind}")
            ev = expected[idx]
            if ev.kind != kind:
                fail(f"expected {ev.kind}, traced {kind}")
            for key, got in attrs.items():
                want = getattr(ev, key)
                if want != got:
                    fail(f"{kind}.{key}: expected {want}, traced {got}")
            idx += 1
            return ev

        def note_crossing(mark, mo, mt, point, d):
            # checkpoints are crossed orthogonally: no tangential drift
            tangential = abs(d[0] * mt[0] + d[1] * mt[1])
            if tangential > mpmath.mpf(10) ** (-precision // 2):
                fail(f"non-orthogonal crossing of {mark.name}")
            u_num = (point[0] - mo[0]) * mt[0] + (point[1] - mo[1]) * mt[1]
            ev = check_event("checkpoint", state=mark.name.split(":", 1)[1])
            u_exact = (mpmath.mpf(ev.value.num) / mpmath.mpf(3) ** ev.value.exp)
            deviations.append(abs(u_num - u_exact))

        # the trajectory starts on the initial checkpoint
        mark0 = table.stations[start_state].checkpoint
        note_crossing(mark0, _mpf_pt(mark0.origin), _mpf_pt(mark0.tangent), pos,
                      direction)

        while idx < len(expected):
            nxt = expected[idx]
            if nxt.kind == "out-of-range":
                check_event("out-of-range")
                break
            best_t, best_wall, second_t = _nearest_hit(
                walls, pos, direction, t_eps, exclude_id=last_wall)
            if best_t is None:
                fail("trajectory escaped the scene")
            if second_t is not None and second_t - best_t < tie_tol:
                raise TracingDegeneracy(
                    f"two walls within {tie_tol} at event {idx}: geometry bug")
            hit = (pos[0] + best_t * direction[0], pos[1] + best_t * direction[1])

            # marked segments crossed on the way, in flight order
            crossings_on_leg = []
            for mark, mo, mt, mb in marks:
                den = direction[0] * mb[0] + direction[1] * mb[1]
                if den == 0:
                    continue
                t = ((mo[0] - pos[0]) * mb[0] + (mo[1] - pos[1]) * mb[1]) / den
                if t <= t_eps or t >= best_t - t_eps:
                    continue
                point = (pos[0] + t * direction[0], pos[1] + t * direction[1])
                u = (point[0] - mo[0]) * mt[0] + (point[1] - mo[1]) * mt[1]
                if u < -0.5 or u > 1.5:
                    continue
                crossings_on_leg.append((t, mark, mo, mt, point))
            for t, mark, mo, mt, point in sorted(crossings_on_leg, key=lambda c: c[0]):
                note_crossing(mark, mo, mt, point, direction)
            if idx == len(expected):
                break  # budget exhausted mid-flight
            if expected[idx].kind == "out-of-range":
                check_event("out-of-range")
                break

            points.append(hit)
            wall_id = best_wall.wall.wall_id
            if wall_id.startswith("wall:chk:"):
                # the halt checkpoint: orthogonal bounce ends the run
                n = _unit(best_wall.normal_at(hit))
                tangential = abs(direction[0] * n[1] - direction[1] * n[0])
                if tangential > mpmath.mpf(10) ** (-precision // 2):
                    fail(f"halt hit not orthogonal (tangential {tangential})")
                mark = table.iota_chart(wall_id.split(":", 2)[2])
                note_crossing(mark, _mpf_pt(mark.origin), _mpf_pt(mark.tangent),
                              hit, direction)
                check_event("halt-bounce")
                break
            check_event("reflection", wall_id=wall_id)
            n = _unit(best_wall.normal_at(hit))
            d_dot = direction[0] * n[0] + direction[1] * n[1]
            if abs(d_dot) < mpmath.mpf(10) ** (-12):
                raise TracingDegeneracy(f"grazing hit on {wall_id}")
            direction = (direction[0] - 2 * d_dot * n[0],
                         direction[1] - 2 * d_dot * n[1])
            pos = hit
            last_wall = wall_id

        if idx != len(expected):
            fail("numeric trace ended early")
        max_dev = float(max(deviations)) if deviations else 0.0
        tol = 10.0 ** (-precision / 2)
        if max_dev > tol:
            raise PrecisionExhausted(
                f"checkpoint deviation {max_dev} exceeds {tol}")
        return NumericResult(outcome=symbolic, max_deviation=max_dev,
                             deviations=[float(d) for d in deviations],
                             points=[(float(x), float(y)) for x, y in points],
                             precision=precision)


class GadgetTracer:
    """Reusable ray tracer for one gadget at a fixed precision.

    Wall data is converted to working-precision floats once; ``trace``
    then launches from the in-port chart and returns the out-port
    coordinate where the ray crosses the out-port plane with no wall in
    between.
    """

    def __init__(self, gadget, precision=60, levels=()):
        self.gadget = gadget
        self.precision = precision
        with mpmath.workdps(precision):
            self.walls = [_NumericWall(w) for w in gadget.walls(levels)]

    def trace(self, u_in, in_port="in", out_port="out"):
        """Returns (u_out, wall_ids) with u_out an mpmath float."""
        pin = self.gadget.in_ports[in_port]
        pout = self.gadget.out_ports[out_port]
        with mpmath.workdps(self.precision):
            u = mpmath.mpf(u_in.num) / mpmath.mpf(3) ** u_in.exp
            o = _mpf_pt(pin.origin)
            tg = _mpf_pt(pin.tangent)
            pos = (o[0] + u * tg[0], o[1] + u * tg[1])
            direction = (mpmath.mpf(int(pin.beam[0])), mpmath.mpf(int(pin.beam[1])))
            t_eps = mpmath.mpf(10) ** (-self.precision + 5)
            oo = _mpf_pt(pout.origin)
            ob = _mpf_pt(pout.beam)
            ot = _mpf_pt(pout.tangent)
            hits = []
            last = None
            for _ in range(64):
                best_t, best_wall, _second = _nearest_hit(
                    self.walls, pos, direction, t_eps, exclude_id=last)
                den = direction[0] * ob[0] + direction[1] * ob[1]
                if den > 0:
                    t_exit = ((oo[0] - pos[0]) * ob[0] + (oo[1] - pos[1]) * ob[1]) / den
                    if t_exit > t_eps and (best_t is None or t_exit < best_t):
                        point = (pos[0] + t_exit * direction[0],
                                 pos[1] + t_exit * direction[1])
                        u_out = ((point[0] - oo[0]) * ot[0]
                                 + (point[1] - oo[1]) * ot[1])
                        return u_out, hits
                if best_t is None:
                    raise TracingError(
                        "ray left the gadget without reaching the out port")
                hit = (pos[0] + best_t * direction[0], pos[1] + best_t * direction[1])
                hits.append(best_wall.wall.wall_id)
                last = best_wall.wall.wall_id
                n = _unit(best_wall.normal_at(hit))
                d_dot = direction[0] * n[0] + direction[1] * n[1]
                direction = (direction[0] - 2 * d_dot * n[0],
                             direction[1] - 2 * d_dot * n[1])
                pos = hit
            raise TracingError("gadget trace exceeded 64 reflections")


def trace_gadget_numeric(gadget, u_in, precision=60, levels=(),
                         in_port="in", out_port="out"):
    """One-shot convenience wrapper around GadgetTracer."""
    return GadgetTracer(gadget, precision, levels).trace(u_in, in_port, out_port)


# ---------------------------------------------------------------------------
# equivalence verification
# ---------------------------------------------------------------------------

@dataclass
class Divergence:
    tape: frozenset
    step: int
    detail: str


@dataclass
class EquivalenceReport:
    passed: bool
    tapes_checked: int
    verdicts: dict                 # verdict string -> count
    first_divergence: Optional[Divergence] = None


def _check_one_tape(machine, table, tape, budget):
    outcome = run_symbolic(table, tape, budget)
    return outcome.verdict, _diverges(machine, table, tape, budget, outcome)


def _diverges(machine, table, tape, budget, outcome):
    conf = ComputationState(frozenset(tape), machine.initial, 0)
    for i, ev in enumerate(outcome.crossings):
        if ev.state != conf.state:
            return Divergence(tape, i, f"state {ev.state} != {conf.state}")
        want = encode_state(conf.tape, conf.head).value
        if ev.value != want:
            return Divergence(tape, i, f"value {ev.value} != {want}")
        if ev.position != table.checkpoint_point(conf.state, want):
            return Divergence(tape, i, "checkpoint chart point mismatch")
        if i < len(outcome.crossings) - 1:
            conf = step(machine, conf)
    oracle = run_machine(machine, tape, budget)
    if outcome.verdict == "halted":
        if not (oracle.halted and oracle.final.tape == outcome.final_tape
                and oracle.final.head == outcome.final_head
                and oracle.steps == outcome.steps):
            return Divergence(tape, outcome.steps, "halted verdict mismatch")
    elif outcome.verdict == "budget-exhausted":
        if oracle.halted:
            return Divergence(tape, outcome.steps,
                              "billiard exhausted budget but machine halted")
    else:  # out-of-range
        beyond = step(machine, conf).head if not machine.is_halting(conf.state) else None
        if beyond is None or abs(beyond) <= table.K:
            return Divergence(tape, outcome.steps,
                              "billiard out-of-range but machine head in range")
    return None


def verify_equivalence(machine, table, tapes, budget, workers=1):
    """Lockstep comparison of the machine against the billiard.

    Every checkpoint crossing must equal the chart image of the machine
    configuration at that step, and final verdicts must agree (halting
    with identical output, budget exhaustion, or a head move beyond the
    compiled range).  Divergence is reported, never raised.
    """
    tapes = [frozenset(t) for t in tapes]
    verdicts = {}
    first = None

    def job(tape):
        return _check_one_tape(machine, table, tape, budget)

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, tapes))
    else:
        results = [job(t) for t in tapes]

    for verdict, div in results:
        verdicts[verdict] = verdicts.get(verdict, 0) + 1
        if div is not None and first is None:
            first = div
    return EquivalenceReport(passed=first is None, tapes_checked=len(tapes),
                             verdicts=verdicts, first_divergence=first)


def write_trace(outcome, stream):
    """Line-per-event text log with a machine-readable verdict block."""
    for ev in outcome.trace:
        fields = [str(ev.step), ev.kind]
        if ev.wall_id:
            fields.append(ev.wall_id)
        if ev.state:
            fields.append(f"state={ev.state}")
        if ev.value is not None:
            fields.append(f"value={ev.value}")
        if ev.head is not None:
            fields.append(f"head={ev.head}")
        if ev.position is not None:
            fields.append(f"pos={float(ev.position[0]):.12g},{float(ev.position[1]):.12g}")
        stream.write(" ".join(fields) + "\n")
    stream.write(f"verdict: {outcome.verdict}\n")
    stream.write(f"steps: {outcome.steps}\n")
    if outcome.verdict == "halted":
        from .machine import format_tape
        stream.write(f"tape: {format_tape(outcome.final_tape)}\n")
        stream.write(f"head: {outcome.final_head}\n")
        stream.write(f"periodic: true\n")
    if outcome.out_of_range_k is not None:
        stream.write(f"out_of_range_k: {outcome.out_of_range_k}\n")
