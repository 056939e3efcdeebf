"""Packet-level execution of the queueing scheme behind the inner bounds.

Session-1 packets are coordinates ``0..N1-1`` and session-2 packets
``N1..N1+N2-1``.  A transmitted vector is a ``frozenset`` of coordinates.
Reception outcomes are bitmasks: 1 = d1, 2 = d2, 4 = r, so the bit of
destination ``k`` is ``k`` itself.

Queues hold, per session ``k`` (``j`` is the other session):

* ``E{k}``  fresh packets, unflagged everywhere
* ``R{k}``  packets known by r only
* ``B{k}``  mixtures ``[x + y]`` heard by d_j, with y known by r
* ``S{k}``  packets heard by d_j only
* ``T{k}``  stand-ins: a packet known by d_j whose delivery to d_k yields a target
* ``X{k}``  vectors known by r and d_j whose delivery to d_k yields a target
* ``D{k}``  decoded packets
* ``M``     mixtures ``[x1 + x2]:W`` that one relay packet W resolves for both
* ``STAR``  relay-held sums of a d2-known and a d1-known item

``S``, ``T`` and ``X`` share one entry type, ``Item(payload, target, case)``:
the payload is what gets sent and the target is the session-k packet that
d_k decodes once it receives the payload.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .channel import R_OUTCOMES, S_OUTCOMES, ChannelSpec
from .gf2 import SparseKnowledge
from .inner import GENERAL_VARS, STRONG_VARS, build_inner_general_lp, build_inner_strong_lp
from .lp import solve

D1, D2, RL = 1, 2, 4
NODE_BITS = {"d1": D1, "d2": D2, "r": RL}

QUEUE_IDS = (
    "Q1_empty", "Q2_empty", "Q1_r", "Q2_r", "Q1_mix", "Q2_mix", "Q_m",
    "Q1_heard2", "Q1_equiv", "Q2_heard1", "Q2_equiv", "Q_star",
    "Q1_cross", "Q2_cross", "Q1_dec", "Q2_dec",
)
_QUEUE_KEYS = dict(zip(QUEUE_IDS, (
    "E1", "E2", "R1", "R2", "B1", "B2", "M", "S1", "T1", "S2", "T2", "STAR",
    "X1", "X2", "D1", "D2",
)))

DEFAULT_AUDIT_PERIOD = 10_000


class SimulationError(RuntimeError):
    """Table precondition violated or an audit failed: the state is corrupt."""


@dataclass(frozen=True)
class Item:
    payload: frozenset[int]
    target: int
    case: int = 0  # 0 outside the cross queues; 1, 2 or 3 inside

    def to_cross(self) -> "Item":
        pure = self.payload == frozenset((self.target,))
        return Item(self.payload, self.target, 1 if pure else 2)


@dataclass(frozen=True)
class Mix:
    """``[x + y]`` with x of the queue's session and y of the other."""

    x: int
    y: int


@dataclass(frozen=True)
class MEntry:
    x1: int
    x2: int
    w: int  # the designated packet, x1 or x2

    def __post_init__(self) -> None:
        if self.w not in (self.x1, self.x2):
            raise SimulationError(f"Q_m entry {self} has no valid designated packet")


@dataclass(frozen=True)
class StarEntry:
    left: Item   # for d1, known by d2
    right: Item  # for d2, known by d1

    @property
    def payload(self) -> frozenset[int]:
        return self.left.payload ^ self.right.payload


def _u(c: int) -> frozenset[int]:
    return frozenset((c,))


# ---------------------------------------------------------------- operations


@dataclass(frozen=True)
class OperationKind:
    tag: str
    family: str
    k: int
    performer: str  # "s" (source table, s-PEC), "r" (relay), "ws" (relay table run by s)
    inputs: tuple[str, ...]


def _operations() -> dict[str, OperationKind]:
    ops: list[OperationKind] = []
    for k in (1, 2):
        j = 3 - k
        ops += [
            OperationKind(f"s_uc{k}", "uc", k, "s", (f"E{k}",)),
            OperationKind(f"s_pm{k}", "pm", k, "s", (f"E{k}", f"R{j}")),
            OperationKind(f"s_am{k}", "am", k, "s", (f"R{k}", f"S{j}")),
            OperationKind(f"s_rc{k}", "rc", k, "s", (f"B{k}",)),
            OperationKind(f"s_dx{k}", "dx", k, "s", (f"S{k}",)),
            OperationKind(f"s_dxp{k}", "dx", k, "s", (f"T{k}",)),
        ]
    # s_cx1..4 pair a d1 item (S1/T1) with a d2 item (S2/T2)
    for l, (a, b) in enumerate((("S1", "S2"), ("S1", "T2"), ("T1", "S2"), ("T1", "T2")), start=1):
        ops.append(OperationKind(f"s_cx{l}", "cx", 0, "s", (a, b)))
    # s_cx5..8 pair a pre-relay item for d_k with a cross item for d_j
    for l, (k, a) in zip(range(5, 9), ((1, "S1"), (2, "S2"), (1, "T1"), (2, "T2"))):
        ops.append(OperationKind(f"s_cx{l}", "cxw", k, "s", (a, f"X{3 - k}")))
    for prefix, performer in (("r_", "r"), ("wr_", "r"), ("ws_", "ws")):
        for k in (1, 2):
            ops += [
                OperationKind(f"{prefix}uc{k}", "ruc", k, performer, (f"R{k}",)),
                OperationKind(f"{prefix}dxp{k}", "rdxp", k, performer, (f"T{k}",)),
                OperationKind(f"{prefix}dxb{k}", "rdxb", k, performer, (f"X{k}",)),
            ]
        ops += [
            OperationKind(f"{prefix}rc", "rrc", 0, performer, ("M",)),
            OperationKind(f"{prefix}ox", "rox", 0, performer, ("STAR",)),
            OperationKind(f"{prefix}cx", "rcx", 0, performer, ("X1", "X2")),
        ]
    for k in (1, 2):
        ops += [
            OperationKind(f"s_sx{k}_1", "sx1", k, "s", (f"R{k}", f"S{k}")),
            OperationKind(f"s_sx{k}_2", "sx2", k, "s", (f"R{k}", f"T{k}")),
            OperationKind(f"s_sx{k}_3", "sx3", k, "s", (f"S{k}", f"T{k}")),
        ]
    return {op.tag: op for op in ops}


OPERATIONS = _operations()
OP_ORDER = tuple(OPERATIONS)


# ------------------------------------------------------------------- knowledge


class NodeKnowledge:
    """Reception list, running span and flagged coordinates of one node."""

    __slots__ = ("name", "space", "flags", "reception_list", "innovative")

    def __init__(self, name: str, dim: int):
        self.name = name
        self.space = SparseKnowledge()
        self.flags = bytearray(dim)
        self.reception_list: list[frozenset[int]] = []
        self.innovative = 0

    def receive(self, v: frozenset[int]) -> None:
        self.reception_list.append(v)
        for c in v:
            self.flags[c] = 1
        if self.space.add(v):
            self.innovative += 1

    def knows(self, v: frozenset[int]) -> bool:
        return self.space.knows(v)

    def knows_coord(self, c: int) -> bool:
        return self.space.knows(_u(c))

    def flagged(self, c: int) -> bool:
        return bool(self.flags[c])


# ----------------------------------------------------------------------- config


@dataclass
class SimConfig:
    channel: ChannelSpec
    n: int
    rates: tuple[float, float]
    quotas: Mapping[str, float] = field(default_factory=dict)
    seed: int = 0
    audit_period: int = DEFAULT_AUDIT_PERIOD
    fallback: tuple[str, ...] = ()  # zero-quota operations allowed once nothing else is eligible

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("n must be non-negative")
        unknown = (set(self.quotas) | set(self.fallback)) - set(OPERATIONS)
        if unknown:
            raise ValueError(f"unknown operations {sorted(unknown)}")
        if any(q < 0 for q in self.quotas.values()):
            raise ValueError("quotas must be non-negative")
        if sum(self.quotas.values()) > self.n * (1 + 1e-9) + 1e-9:
            raise ValueError("quotas exceed the slot count")

    @property
    def packets(self) -> tuple[int, int]:
        return tuple(int(math.floor(self.n * r + 1e-9)) for r in self.rates)  # type: ignore[return-value]


@dataclass(frozen=True)
class AuditReport:
    ok: bool
    queue: str | None = None
    prop: str | None = None
    entry: object = None

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class SimReport:
    decoded1: int
    decoded2: int
    target1: int
    target2: int
    slots_used: int
    audits_passed: int
    rank_decoded: tuple[bool, bool]
    queue_decoded: tuple[bool, bool]

    @property
    def rank_check(self) -> bool:
        """Rank view and queue bookkeeping agree for both destinations."""
        return self.rank_decoded == self.queue_decoded

    @property
    def success(self) -> bool:
        return all(self.rank_decoded) and all(self.queue_decoded)

    def to_text(self) -> str:
        lines = [
            f"decoded1 {self.decoded1}/{self.target1}",
            f"decoded2 {self.decoded2}/{self.target2}",
            f"slots_used {self.slots_used}",
            f"audits_passed {self.audits_passed}",
            f"rank_decoded {int(self.rank_decoded[0])} {int(self.rank_decoded[1])}",
            f"rank_check {'agree' if self.rank_check else 'DISAGREE'}",
            f"success {'yes' if self.success else 'no'}",
        ]
        return "\n".join(lines)


# ------------------------------------------------------------------------ state


class SimState:
    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        n1, n2 = cfg.packets
        self.n1, self.n2 = n1, n2
        self.dim = n1 + n2
        self.nodes = {D1: NodeKnowledge("d1", self.dim), D2: NodeKnowledge("d2", self.dim), RL: NodeKnowledge("r", self.dim)}
        self.q: dict[str, deque] = {key: deque() for key in _QUEUE_KEYS.values() if key[0] != "D"}
        self.q["E1"].extend(range(n1))
        self.q["E2"].extend(range(n1, n1 + n2))
        # decoded packet -> provisional partner (None once truly decoded)
        self.dec: dict[int, dict[int, int | None]] = {1: {}, 2: {}}
        self.target = {1: n1, 2: n2}
        self._dec_checked = {1: 0, 2: 0}
        self.relay_sent = 0

    def session(self, c: int) -> int:
        return 1 if c < self.n1 else 2

    def queue(self, qid: str):
        key = _QUEUE_KEYS.get(qid, qid)
        if key in ("D1", "D2"):
            return self.dec[int(key[1])]
        return self.q[key]

    def sizes(self) -> dict[str, int]:
        return {qid: len(self.queue(qid)) for qid in QUEUE_IDS}

    def eligible(self, op: OperationKind) -> bool:
        q = self.q
        return all(q[name] for name in op.inputs)

    # ------------------------------------------------------------ primitives

    def transmit(self, v: frozenset[int], rec: int, performer: str) -> None:
        if performer == "r":
            self.relay_sent += 1
            if not self.nodes[RL].knows(v):
                raise SimulationError(f"relay sent {sorted(v)} outside its knowledge space")
        for bit, node in self.nodes.items():
            if rec & bit:
                node.receive(v)

    def decode(self, k: int, c: int, partner: int | None = None) -> None:
        if self.session(c) != k:
            raise SimulationError(f"packet {c} inserted into Q{k}_dec from the other session")
        if c in self.dec[k]:
            raise SimulationError(f"packet {c} decoded twice at d{k}")
        self.dec[k][c] = partner

    def remaining_demand(self, k: int) -> int:
        return self.target[k] - len(self.dec[k])

    # ------------------------------------------------------------ operations

    def apply(self, op: OperationKind, rec: int) -> None:
        if not self.eligible(op):
            raise SimulationError(f"{op.tag} applied with an empty input queue")
        getattr(self, "_op_" + op.family)(op, rec)

    def _op_uc(self, op, rec):
        k, j = op.k, 3 - op.k
        q = self.q
        x = q[f"E{k}"][0]
        self.transmit(_u(x), rec, "s")
        if not rec:
            return
        q[f"E{k}"].popleft()
        own, oth, r = rec & k, rec & j, rec & RL
        if own:
            self.decode(k, x)
        elif oth and r:
            q[f"X{k}"].append(Item(_u(x), x, 1))
        elif oth:
            q[f"S{k}"].append(Item(_u(x), x))
        else:
            q[f"R{k}"].append(x)

    def _op_pm(self, op, rec):
        k, j = op.k, 3 - op.k
        q = self.q
        x, y = q[f"E{k}"][0], q[f"R{j}"][0]
        self.transmit(_u(x) | _u(y), rec, "s")
        if not rec:
            return
        own, oth, r = rec & k, rec & j, rec & RL
        q[f"E{k}"].popleft()
        if own or oth:
            q[f"R{j}"].popleft()
        if rec == RL:
            q[f"R{k}"].append(x)
        elif rec == j:
            q[f"B{k}"].append(Mix(x, y))
        else:
            if own and oth and r:
                w = self._demand_choice(x, y)
            elif oth and r:
                w = x
            else:
                w = y
            self.q["M"].append(self._mentry(x, y, w))

    def _demand_choice(self, a: int, b: int) -> int:
        by_session = {self.session(a): a, self.session(b): b}
        return by_session[1] if self.remaining_demand(1) >= self.remaining_demand(2) else by_session[2]

    def _mentry(self, a: int, b: int, w: int) -> MEntry:
        x1, x2 = (a, b) if self.session(a) == 1 else (b, a)
        return MEntry(x1, x2, w)

    def _op_am(self, op, rec):
        k, j = op.k, 3 - op.k
        q = self.q
        x, it = q[f"R{k}"][0], q[f"S{j}"][0]
        y = it.target
        self.transmit(_u(x) | it.payload, rec, "s")
        if not rec:
            return
        own, oth, r = rec & k, rec & j, rec & RL
        if own or oth:
            q[f"R{k}"].popleft()
        if oth or r:
            q[f"S{j}"].popleft()
        if rec == RL:
            q[f"X{j}"].append(Item(_u(y), y, 1))
        elif oth and not own:
            q["M"].append(self._mentry(x, y, x))
        elif rec == k:
            self.decode(k, x)
        elif own and oth and not r:
            self.decode(k, x)
            q[f"X{j}"].append(Item(_u(x), y, 2))
        else:
            self.decode(k, x)
            q[f"X{j}"].append(Item(_u(y), y, 1))

    def _op_rc(self, op, rec):
        k, j = op.k, 3 - op.k
        q = self.q
        m = q[f"B{k}"][0]
        x, y = m.x, m.y
        self.transmit(_u(x), rec, "s")
        if not rec:
            return
        q[f"B{k}"].popleft()
        own, oth, r = rec & k, rec & j, rec & RL
        if rec == RL:
            q["M"].append(self._mentry(x, y, x))
        elif own and oth:
            self.decode(k, x)
            self.decode(j, y)
        elif oth:
            q[f"X{k}" if r else f"S{k}"].append(Item(_u(x), x, 1 if r else 0))
            self.decode(j, y)
        elif r:
            self.decode(k, x)
            q[f"X{j}"].append(Item(_u(x), y, 2))
        else:
            self.decode(k, x)
            q[f"T{j}"].append(Item(_u(x), y))

    def _op_dx(self, op, rec):
        k = op.k
        src = self.q[op.inputs[0]]
        it = src[0]
        self.transmit(it.payload, rec, "s")
        if rec & k:
            src.popleft()
            self.decode(k, it.target)
        elif rec & RL:
            src.popleft()
            self.q[f"X{k}"].append(it.to_cross())

    def _op_cx(self, op, rec):
        q = self.q
        lq, rq = q[op.inputs[0]], q[op.inputs[1]]
        left, right = lq[0], rq[0]
        v = left.payload ^ right.payload
        self.transmit(v, rec, "s")
        if not rec:
            return
        d1, d2, r = rec & D1, rec & D2, rec & RL
        if d1 or r:
            lq.popleft()
        if d2 or r:
            rq.popleft()
        if rec == RL:
            q["STAR"].append(StarEntry(left, right))
            return
        if d1:
            self.decode(1, left.target)
        elif r:
            q["X1"].append(Item(v, left.target, 3))
        if d2:
            self.decode(2, right.target)
        elif r:
            q["X2"].append(Item(v, right.target, 3))

    def _op_cxw(self, op, rec):
        a, b = op.k, 3 - op.k
        q = self.q
        pq, xq = q[op.inputs[0]], q[op.inputs[1]]
        p, x = pq[0], xq[0]
        self.transmit(p.payload ^ x.payload, rec, "s")
        da, db, r = rec & a, rec & b, rec & RL
        if da or r:
            pq.popleft()
        if db:
            xq.popleft()
        if da:
            self.decode(a, p.target)
        elif r:
            q[f"X{a}"].append(p.to_cross())
        if db:
            self.decode(b, x.target)

    # relay-table operations; ``ws`` performers ignore the relay's reception

    def _relay_rec(self, op, rec: int) -> int:
        return rec & (D1 | D2)

    def _op_ruc(self, op, rec):
        k, j = op.k, 3 - op.k
        src = self.q[f"R{k}"]
        x = src[0]
        self.transmit(_u(x), rec, op.performer)
        rec = self._relay_rec(op, rec)
        if rec:
            src.popleft()
            if rec & k:
                self.decode(k, x)
            else:
                self.q[f"X{k}"].append(Item(_u(x), x, 1))

    def _op_rdxp(self, op, rec):
        k = op.k
        src = self.q[f"T{k}"]
        t = src[0].target
        self.transmit(_u(t), rec, op.performer)
        rec = self._relay_rec(op, rec)
        if rec:
            src.popleft()
            if rec & k:
                self.decode(k, t)
            else:
                self.q[f"X{k}"].append(Item(_u(t), t, 1))

    def _op_rdxb(self, op, rec):
        k = op.k
        src = self.q[f"X{k}"]
        it = src[0]
        self.transmit(it.payload, rec, op.performer)
        if rec & k:
            src.popleft()
            self.decode(k, it.target)

    def _op_rrc(self, op, rec):
        q = self.q
        m = q["M"][0]
        self.transmit(_u(m.w), rec, op.performer)
        rec = self._relay_rec(op, rec)
        if not rec:
            return
        q["M"].popleft()
        if rec & D1:
            self.decode(1, m.x1)
        else:
            q["X1"].append(Item(_u(m.w), m.x1, 1 if m.w == m.x1 else 2))
        if rec & D2:
            self.decode(2, m.x2)
        else:
            q["X2"].append(Item(_u(m.w), m.x2, 1 if m.w == m.x2 else 2))

    def _op_rox(self, op, rec):
        q = self.q
        st = q["STAR"][0]
        v = st.payload
        self.transmit(v, rec, op.performer)
        rec = self._relay_rec(op, rec)
        if not rec:
            return
        q["STAR"].popleft()
        if rec & D1:
            self.decode(1, st.left.target)
        else:
            q["X1"].append(Item(v, st.left.target, 3))
        if rec & D2:
            self.decode(2, st.right.target)
        else:
            q["X2"].append(Item(v, st.right.target, 3))

    def _op_rcx(self, op, rec):
        q = self.q
        a, b = q["X1"][0], q["X2"][0]
        self.transmit(a.payload ^ b.payload, rec, op.performer)
        if rec & D1:
            q["X1"].popleft()
            self.decode(1, a.target)
        if rec & D2:
            q["X2"].popleft()
            self.decode(2, b.target)

    # self-mixing operations; the first-listed branch settles either/or rows

    def _op_sx1(self, op, rec):
        k, j = op.k, 3 - op.k
        q = self.q
        x, it = q[f"R{k}"][0], q[f"S{k}"][0]
        xi = it.target
        self.transmit(_u(x) | _u(xi), rec, "s")
        if not rec:
            return
        own, oth, r = rec & k, rec & j, rec & RL
        if own or oth:
            q[f"R{k}"].popleft()
        if own or r:
            q[f"S{k}"].popleft()
        X = q[f"X{k}"]
        if rec == RL:
            X.append(Item(_u(xi), xi, 1))
        elif not own:
            X.append(Item(_u(x), x, 1))
            if r:
                X.append(Item(_u(xi), xi, 1))
        elif not oth and not r:
            self.decode(k, xi, partner=x)
            q[f"T{k}"].append(Item(_u(xi), x))
        elif not oth:
            self.decode(k, xi, partner=x)
            X.append(Item(_u(xi), x, 2))
        else:
            self.decode(k, x, partner=xi)
            X.append(Item(_u(x), xi, 2))

    def _op_sx2(self, op, rec):
        k, j = op.k, 3 - op.k
        q = self.q
        x, it = q[f"R{k}"][0], q[f"T{k}"][0]
        xi = it.target
        self.transmit(_u(x) | it.payload, rec, "s")
        if not rec:
            return
        own, oth, r = rec & k, rec & j, rec & RL
        if own or oth:
            q[f"R{k}"].popleft()
        if r or (own and oth):
            q[f"T{k}"].popleft()
        X = q[f"X{k}"]
        if rec == RL:
            X.append(it.to_cross())
        elif not own:
            X.append(Item(_u(x), x, 1))
            if r:
                X.append(it.to_cross())
        else:
            self.decode(k, x, partner=xi)
            if r:
                X.append(it.to_cross())
            elif oth:
                X.append(Item(_u(x), xi, 2))

    def _op_sx3(self, op, rec):
        k, j = op.k, 3 - op.k
        q = self.q
        it1, it2 = q[f"S{k}"][0], q[f"T{k}"][0]
        xi, xs = it1.target, it2.target
        self.transmit(_u(xi) | _u(xs), rec, "s")
        if not rec:
            return
        own, oth, r = rec & k, rec & j, rec & RL
        if own or r:
            q[f"S{k}"].popleft()
        if oth or (own and r):
            q[f"T{k}"].popleft()
        X = q[f"X{k}"]
        if not own:
            if r:
                X.append(Item(_u(xi), xi, 1))
            if oth:
                X.append(Item(_u(xs), xs, 1))
            return
        self.decode(k, xi, partner=xs)
        if oth:
            X.append(Item(_u(xs), xs, 1))
        elif r:
            X.append(Item(_u(xi), xs, 2))

    # ----------------------------------------------------------------- audit

    def audit(self) -> AuditReport:
        """Check every queue property against the nodes' knowledge."""
        n = self.nodes
        kn = {bit: node.knows for bit, node in n.items()}
        fl = {bit: node.flags for bit, node in n.items()}
        kr = kn[RL]

        def fail(qid: str, prop: str, entry) -> AuditReport:
            return AuditReport(False, qid, prop, entry)

        def bad_target(k: int, it: Item) -> bool:
            # d_k does not hold the target yet but holds target + payload
            return kn[k](_u(it.target)) or not kn[k](it.payload ^ _u(it.target))

        for k in (1, 2):
            j = 3 - k
            for x in self.q[f"E{k}"]:
                if fl[D1][x] or fl[D2][x] or fl[RL][x]:
                    return fail(f"Q{k}_empty", "unflagged at d1, d2, r", x)
            for x in self.q[f"R{k}"]:
                if not kr(_u(x)):
                    return fail(f"Q{k}_r", "known by r", x)
                if fl[D1][x] or fl[D2][x]:
                    return fail(f"Q{k}_r", "unflagged at d1, d2", x)
            for m in self.q[f"B{k}"]:
                if not kn[j](_u(m.x) | _u(m.y)):
                    return fail(f"Q{k}_mix", "mixture held by the other destination", m)
                if fl[k][m.x] or fl[RL][m.x] or kn[j](_u(m.x)):
                    return fail(f"Q{k}_mix", "x unknown everywhere, unflagged at own and r", m)
                if not kr(_u(m.y)) or fl[k][m.y] or kn[j](_u(m.y)):
                    return fail(f"Q{k}_mix", "y known by r only", m)
            sq = f"Q{k}_heard{j}"
            for it in self.q[f"S{k}"]:
                x = it.target
                if it.payload != _u(x) or not kn[j](it.payload):
                    return fail(sq, "pure packet known by the other destination", it)
                if fl[k][x] or fl[RL][x]:
                    return fail(sq, "unflagged at own destination and r", it)
            tq = f"Q{k}_equiv"
            for it in self.q[f"T{k}"]:
                (v,) = it.payload
                if not kn[j](it.payload) or kn[k](it.payload) or fl[RL][v]:
                    return fail(tq, "stand-in known by the other destination only", it)
                if not kr(_u(it.target)) or kn[j](_u(it.target)):
                    return fail(tq, "target known by r, unknown to the other destination", it)
                if bad_target(k, it):
                    return fail(tq, "own destination decodes the target from the stand-in", it)
            xq = f"Q{k}_cross"
            for it in self.q[f"X{k}"]:
                if not kr(it.payload) or not kn[j](it.payload) or kn[k](it.payload):
                    return fail(xq, "known by r and the other destination, not own", it)
                if bad_target(k, it):
                    return fail(xq, "delivery yields the target", it)
        for m in self.q["M"]:
            mix = _u(m.x1) | _u(m.x2)
            a = kn[D1](mix) and not kn[D1](_u(m.x1)) and kr(_u(m.x2)) and not kn[D2](_u(m.x2))
            b = kn[D2](mix) and not kn[D1](_u(m.x1)) and kr(_u(m.x1)) and not kn[D2](_u(m.x2))
            if not (a or b):
                return fail("Q_m", "condition (a) or (b)", m)
            if not (a if m.w == m.x2 else b):
                return fail("Q_m", "designated packet resolves both", m)
        for st in self.q["STAR"]:
            if not kr(st.payload):
                return fail("Q_star", "sum held by r", st)
            if not kn[D2](st.left.payload) or kn[D1](st.left.payload) or kr(st.left.payload):
                return fail("Q_star", "left part known by d2 only", st)
            if not kn[D1](st.right.payload) or kn[D2](st.right.payload) or kr(st.right.payload):
                return fail("Q_star", "right part known by d1 only", st)
            if bad_target(1, st.left) or bad_target(2, st.right):
                return fail("Q_star", "parts yield their targets", st)
        for k in (1, 2):
            rep = self._audit_decoded(k)
            if not rep:
                return rep
        return self._audit_conservation()

    def _audit_decoded(self, k: int) -> AuditReport:
        node = self.nodes[k]
        dec = self.dec[k]
        items = list(dec.items())
        for idx, (c, partner) in enumerate(items):
            if idx < self._dec_checked[k] and partner is None:
                continue
            if node.knows_coord(c):
                dec[c] = None
            elif partner is None or not node.knows(_u(c) | _u(partner)):
                return AuditReport(False, f"Q{k}_dec", "decoded packet in the knowledge space", c)
        self._dec_checked[k] = len(items)
        return AuditReport(True)

    def _audit_conservation(self) -> AuditReport:
        # every packet has exactly one responsible holder
        count = np.zeros(self.dim, dtype=np.int64)
        q = self.q

        def add(cs: Iterable[int]) -> None:
            idx = np.fromiter(cs, dtype=np.int64)
            np.add.at(count, idx, 1)

        for k in (1, 2):
            add(q[f"E{k}"])
            add(q[f"R{k}"])
            add(c for m in q[f"B{k}"] for c in (m.x, m.y))
            for name in ("S", "T", "X"):
                add(it.target for it in q[f"{name}{k}"])
            add(self.dec[k])
        add(c for m in q["M"] for c in (m.x1, m.x2))
        add(c for st in q["STAR"] for c in (st.left.target, st.right.target))
        bad = np.flatnonzero(count != 1)
        if bad.size:
            c = int(bad[0])
            return AuditReport(False, "all", f"packet held {int(count[c])} times", c)
        return AuditReport(True)

    # ------------------------------------------------------------ rank check

    def rank_decoded(self, k: int) -> bool:
        """Rebuild span(RL_dk) from the reception list alone and test M_k."""
        sp = SparseKnowledge()
        for v in self.nodes[k].reception_list:
            sp.add(v)
        lo, hi = (0, self.n1) if k == 1 else (self.n1, self.dim)
        return all(sp.knows(_u(c)) for c in range(lo, hi))


# ---------------------------------------------------------------------- driver


def init_state(cfg: SimConfig) -> SimState:
    return SimState(cfg)


def select_operation(state: SimState, used: Mapping[str, float]) -> OperationKind | None:
    """Eligible operation with the largest remaining quota fraction.

    Operations with quota left come first; once none of them is eligible,
    any operation with a positive quota may run past it, and after that
    the first eligible operation listed in ``cfg.fallback``.
    """
    best = None
    best_key = None
    for tag, quota in state.cfg.quotas.items():
        if quota <= 0:
            continue
        op = OPERATIONS[tag]
        if not state.eligible(op):
            continue
        rem = quota - used.get(tag, 0.0)
        key = (rem > 0, rem / quota, -OP_ORDER.index(tag))
        if best_key is None or key > best_key:
            best, best_key = op, key
    if best is None:
        for tag in state.cfg.fallback:
            if state.eligible(OPERATIONS[tag]):
                return OPERATIONS[tag]
    return best


def apply_operation(state: SimState, op: OperationKind | str, reception: int | Iterable[str]) -> SimState:
    if isinstance(op, str):
        op = OPERATIONS[op]
    if not isinstance(reception, int):
        reception = sum(NODE_BITS[n] for n in set(reception))
    if op.performer == "r" and reception & RL:
        raise ValueError("a relay transmission cannot be received by r")
    state.apply(op, reception)
    return state


def audit_invariants(state: SimState) -> AuditReport:
    return state.audit()


def _outcome_masks(outcomes) -> np.ndarray:
    return np.array([sum(NODE_BITS[n] for n in o) for o in outcomes], dtype=np.int64)


def _sample_receptions(ch: ChannelSpec, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    s_p = np.array([ch.s_joint[o] for o in S_OUTCOMES])
    r_p = np.array([ch.r_joint[o] for o in R_OUTCOMES])
    s = _outcome_masks(S_OUTCOMES)[rng.choice(len(s_p), size=n, p=s_p / s_p.sum())]
    r = _outcome_masks(R_OUTCOMES)[rng.choice(len(r_p), size=n, p=r_p / r_p.sum())]
    return s, r


def _mask_text(rec: int) -> str:
    return "".join(name for name, bit in NODE_BITS.items() if rec & bit) or "-"


def run(cfg: SimConfig, trace_path: str | None = None) -> SimReport:
    """Execute ``cfg.n`` slots; an audit failure raises ``SimulationError``."""
    state = init_state(cfg)
    rng = np.random.default_rng(cfg.seed)
    s_rec, r_rec = _sample_receptions(cfg.channel, cfg.n, rng)
    used: dict[str, float] = {}
    audits = 0
    slots_used = 0
    period = max(1, cfg.audit_period)
    writer = None
    fh = None
    if trace_path:
        fh = open(trace_path, "w", newline="")
        writer = csv.writer(fh)
        writer.writerow(["slot", "op", "reception", "movements"])
    try:
        rep = state.audit()
        if not rep:
            raise SimulationError(f"initial audit failed: {rep}")
        audits += 1
        for t in range(cfg.n):
            op = select_operation(state, used)
            if op is not None:
                rec = int(r_rec[t] if op.performer == "r" else s_rec[t])
                before = state.sizes() if writer else None
                state.apply(op, rec)
                used[op.tag] = used.get(op.tag, 0.0) + 1.0
                slots_used += 1
                if writer:
                    after = state.sizes()
                    moves = " ".join(f"{k}{after[k] - before[k]:+d}" for k in QUEUE_IDS if after[k] != before[k])
                    writer.writerow([t, op.tag, _mask_text(rec), moves])
            elif writer:
                writer.writerow([t, "idle", "-", ""])
            if (t + 1) % period == 0:
                rep = state.audit()
                if not rep:
                    raise SimulationError(f"audit failed at slot {t + 1}: {rep}")
                audits += 1
        rep = state.audit()
        if not rep:
            raise SimulationError(f"final audit failed: {rep}")
        audits += 1
    finally:
        if fh:
            fh.close()
    d1, d2 = len(state.dec[1]), len(state.dec[2])
    rank = (state.rank_decoded(1), state.rank_decoded(2))
    queue = (d1 == state.n1, d2 == state.n2)
    return SimReport(d1, d2, state.n1, state.n2, slots_used, audits, rank, queue)


def mode_operations(prop: int) -> tuple[str, ...]:
    """Operations of the strong-relaying scheme (2) or its general extension (3)."""
    names = GENERAL_VARS if prop == 3 else STRONG_VARS
    return tuple(v for v in names if v in OPERATIONS)


def quotas_from_lp(
    ch: ChannelSpec,
    n: int,
    fraction: float = 0.98,
    prop: int = 2,
    weights: tuple[float, float] = (1.0, 1.0),
    rates: tuple[float, float] | None = None,
) -> tuple[tuple[float, float], dict[str, float]]:
    """Target rates and per-operation slot quotas from the scheme LP.

    Without ``rates`` the target is ``fraction`` of the weighted optimum.
    With ``rates`` the quotas come from an optimum dominating them; rates
    outside the region raise ``ValueError``.
    """
    lp = build_inner_strong_lp(ch) if prop == 2 else build_inner_general_lp(ch)
    if rates is not None:
        lp.add({"R1": 1.0}, ">=", float(rates[0]), name="target_R1")
        lp.add({"R2": 1.0}, ">=", float(rates[1]), name="target_R2")
    lp.maximize({"R1": weights[0], "R2": weights[1]})
    sol = solve(lp)
    if sol.status == "infeasible" and rates is not None:
        raise ValueError(f"rates {rates} lie outside the scheme region")
    if sol.status != "optimal":
        raise SimulationError(f"quota LP not optimal: {sol.status}")
    if rates is None:
        rates = (fraction * sol.values["R1"], fraction * sol.values["R2"])
    quotas = {v: x * n for v, x in sol.values.items() if v in OPERATIONS and x > 1e-12}
    total = sum(quotas.values())
    if total > n:
        quotas = {v: x * n / total for v, x in quotas.items()}
    return (float(rates[0]), float(rates[1])), quotas


def simulate(
    ch: ChannelSpec,
    n: int,
    seed: int = 0,
    fraction: float = 0.98,
    prop: int = 2,
    audit_period: int = DEFAULT_AUDIT_PERIOD,
    trace_path: str | None = None,
    rates: tuple[float, float] | None = None,
) -> SimReport:
    rates, quotas = quotas_from_lp(ch, n, fraction, prop, rates=rates)
    cfg = SimConfig(ch, n, rates, quotas, seed, audit_period, mode_operations(prop))
    return run(cfg, trace_path)
