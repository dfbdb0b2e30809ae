"""Deterministic network simulation: round and event schedulers, metering.

One engine executes one protocol session. Parties are generators that yield
wait conditions (NextRound in rounds mode, Until(predicate) in events mode)
and return their output. The engine owns delivery, ideal-oracle rendezvous,
and honest-bit accounting.

Rounds mode: every message sent in round r reaches honest mailboxes at the
start of round r+1. Events mode: a scheduling policy picks the next pending
envelope; an envelope may be deferred at most 10*n^2 scheduling steps, which
makes eventual delivery hold on every finite trace while leaving reordering
fully adversarial inside that bound.

Only bits sent by honest parties are metered, at nominal sizes. Ideal-oracle
invocations are charged their model cost pro rata to the honest fraction.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass
from typing import Callable, Generator


class Bot:
    """The distinguished non-message output."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "BOT"


BOT = Bot()


class StopProtocol(Exception):
    """Raised inside a party to stop it without producing an output."""


@dataclass
class Envelope:
    seq: int
    src: int
    dst: int
    kind: str
    payload: object
    bits: int
    step: str
    instance: str | None = None
    sent_tick: int = 0


class NextRound:
    pass


@dataclass
class Until:
    pred: Callable[[], bool]


NEXT_ROUND = NextRound()


class RunMetrics:
    """Honest-bit counters broken down by protocol step and oracle kind."""

    def __init__(self):
        self.honest_bits_total = 0
        self.bits_by_step: dict[str, int] = {}
        self.bits_by_oracle: dict[str, int] = {}
        self.rounds_or_events_elapsed = 0
        self.outputs_digest = ""
        self.extra: dict[str, object] = {}

    def add(self, bits: int, step: str, oracle: str | None = None) -> None:
        if bits < 0:
            raise ValueError("negative bits")
        self.honest_bits_total += bits
        self.bits_by_step[step] = self.bits_by_step.get(step, 0) + bits
        key = oracle if oracle is not None else "direct"
        self.bits_by_oracle[key] = self.bits_by_oracle.get(key, 0) + bits

    def oracle_bits(self) -> int:
        return sum(v for k, v in self.bits_by_oracle.items() if k != "direct")

    def to_json(self) -> str:
        return json.dumps(
            {
                "honest_bits_total": self.honest_bits_total,
                "bits_by_step": dict(sorted(self.bits_by_step.items())),
                "bits_by_oracle": dict(sorted(self.bits_by_oracle.items())),
                "rounds_or_events_elapsed": self.rounds_or_events_elapsed,
                "outputs_digest": self.outputs_digest,
                "extra": dict(sorted(self.extra.items())),
            },
            sort_keys=True,
        )


# Model communication costs charged for ideal oracle invocations.
def oracle_model_cost(kind: str, value_bits: int, n: int, k: int) -> int:
    if kind in ("sync_bb", "sync_ba"):
        return (value_bits + k) * n * n + n**3
    if kind == "async_rb":
        return value_bits * n * n
    if kind in ("async_ba_bit", "async_ba_kbit"):
        return (value_bits + k) * n * n
    raise ValueError(f"unknown oracle kind {kind!r}")


SYNC_KINDS = {"sync_bb", "sync_ba"}
ASYNC_KINDS = {"async_rb", "async_ba_bit", "async_ba_kbit"}
SENDER_KINDS = {"sync_bb", "async_rb"}


class IdealOracle:
    def __init__(self, kind: str, instance: str, value_bits: int, sender: int | None):
        self.kind = kind
        self.instance = instance
        self.value_bits = value_bits
        self.sender = sender
        self.submissions: dict[int, object] = {}
        self.registered: set[int] = set()
        self.fired = False
        self.byz_consulted = False


def _oracle_domain_ok(inst: IdealOracle, value) -> bool:
    """Byzantine oracle inputs must live in the oracle's value domain."""
    if inst.value_bits == 1:
        return value in (0, 1)
    return isinstance(value, bytes)


class SchedulerPolicy:
    """Chooses the index of the next pending envelope (events mode)."""

    name = "fifo"

    def pick(self, pending: list[Envelope], rng: random.Random) -> int:
        return 0


class LifoPolicy(SchedulerPolicy):
    name = "lifo"

    def pick(self, pending, rng):
        return len(pending) - 1


class RandomPolicy(SchedulerPolicy):
    name = "random"

    def pick(self, pending, rng):
        return rng.randrange(len(pending))


class StarvePolicy(SchedulerPolicy):
    """Serve corrupt-endpoint traffic first, newest honest traffic last."""

    name = "starve"

    def __init__(self, corrupt: frozenset[int]):
        self.corrupt = corrupt

    def pick(self, pending, rng):
        for i, env in enumerate(pending):
            if env.src in self.corrupt or env.dst in self.corrupt:
                return i
        return len(pending) - 1


class PrefixPolicy(SchedulerPolicy):
    """Follow an explicit decision prefix, then FIFO; used by schedule search."""

    name = "prefix"

    def __init__(self, decisions: tuple[int, ...]):
        self.decisions = decisions
        self.depth = 0
        self.branch_log: list[int] = []

    def pick(self, pending, rng):
        self.branch_log.append(len(pending))
        if self.depth < len(self.decisions):
            idx = self.decisions[self.depth] % len(pending)
        else:
            idx = 0
        self.depth += 1
        return idx


class Ctx:
    """Per-party handle into the engine: sending, mailbox, oracles, flags."""

    def __init__(self, engine: "Engine", pid: int):
        self.engine = engine
        self.pid = pid
        self.mailbox: list[Envelope] = []
        self.happy = False
        self.step = "init"
        self._oracle_seq: dict[str, int] = {}

    @property
    def params(self):
        return self.engine.params

    @property
    def session(self):
        return self.engine.session

    def set_step(self, label: str) -> None:
        self.step = label

    def set_happy(self, value: bool) -> None:
        if self.happy and not value:
            raise AssertionError(f"party {self.pid}: happy flag must be monotone")
        self.happy = bool(value)

    def send(self, dst: int, kind: str, payload, bits: int, step: str | None = None,
             instance: str | None = None, oracle: str | None = None) -> None:
        self.engine.submit_send(
            self.pid, dst, kind, payload, bits, step or self.step, instance, oracle
        )

    def broadcast(self, kind: str, payload, bits: int, step: str | None = None,
                  instance: str | None = None, oracle: str | None = None) -> None:
        for dst in range(1, self.engine.params.n + 1):
            if dst != self.pid:
                self.send(dst, kind, payload, bits, step, instance, oracle)

    def self_deliver(self, kind: str, payload, step: str | None = None,
                     instance: str | None = None) -> None:
        env = Envelope(
            seq=self.engine.next_seq(),
            src=self.pid,
            dst=self.pid,
            kind=kind,
            payload=payload,
            bits=0,
            step=step or self.step,
            instance=instance,
            sent_tick=self.engine.tick,
        )
        self.mailbox.append(env)

    def inbox(self, kind: str | None = None, instance: str | None = None,
              frm: int | None = None) -> list[Envelope]:
        return [
            e
            for e in self.mailbox
            if (kind is None or e.kind == kind)
            and (instance is None or e.instance == instance)
            and (frm is None or e.src == frm)
        ]

    # --- ideal oracle access -------------------------------------------------

    def _auto_instance(self, kind: str) -> str:
        c = self._oracle_seq.get(kind, 0)
        self._oracle_seq[kind] = c + 1
        return f"{kind}#{c}"

    def oracle_submit(self, kind: str, value, value_bits: int,
                      instance: str | None = None, sender: int | None = None) -> str:
        inst = instance or self._auto_instance(kind)
        self.engine.oracle_submit(self.pid, kind, inst, value, value_bits, sender)
        return inst

    def oracle_result(self, instance: str):
        for e in self.mailbox:
            if e.kind == "oracle_out" and e.instance == instance and e.src == 0:
                return e.payload
        return None

    def has_oracle_result(self, instance: str) -> bool:
        return any(
            e.kind == "oracle_out" and e.instance == instance and e.src == 0
            for e in self.mailbox
        )

    def ideal_oracle(self, kind: str, value, value_bits: int,
                     instance: str | None = None, sender: int | None = None):
        """Submit and wait for an ideal oracle instance; yields until done."""
        inst = self.oracle_submit(kind, value, value_bits, instance, sender)
        yield from self.wait_oracle(inst)
        return self.oracle_result(inst)

    def wait_oracle(self, instance: str):
        if self.engine.mode == "rounds":
            while not self.has_oracle_result(instance):
                yield NEXT_ROUND
        else:
            yield Until(lambda: self.has_oracle_result(instance))

    def wait_rounds(self, r: int = 1):
        for _ in range(r):
            yield NEXT_ROUND

    def coin(self, instance: str, rnd: int) -> int:
        return self.engine.session.coin.query(instance, rnd, honest=self.pid in self.engine.honest)


@dataclass
class PartyHandle:
    pid: int
    ctx: Ctx
    gen: Generator | None
    waiting: object = None
    done: bool = False
    output: object = None
    has_output: bool = False


class Engine:
    """Runs one session to quiescence under one scheduler mode."""

    def __init__(self, mode: str, params, session, factories: dict[int, Callable[[Ctx], Generator] | None],
                 honest: frozenset[int], adversary=None, policy: SchedulerPolicy | None = None,
                 seed: int = 0, trace: bool = False, max_rounds: int = 10_000,
                 max_events: int = 2_000_000):
        if mode not in ("rounds", "events"):
            raise ValueError("mode must be rounds or events")
        self.mode = mode
        self.params = params
        self.session = session
        self.honest = honest
        self.adversary = adversary
        self.policy = policy or SchedulerPolicy()
        self.rng = random.Random(("sched", seed).__repr__())
        self.metrics = RunMetrics()
        self.trace: list[dict] | None = [] if trace else None
        self.tick = 0
        self._seq = 0
        self.max_rounds = max_rounds
        self.max_events = max_events
        self.pending: list[Envelope] = []
        self._pending_age: dict[int, int] = {}
        self._event_steps = 0
        self._received_bits = 0
        self.oracles: dict[str, IdealOracle] = {}
        self.parties: dict[int, PartyHandle] = {}
        for pid in range(1, params.n + 1):
            ctx = Ctx(self, pid)
            factory = factories.get(pid)
            gen = factory(ctx) if factory is not None else None
            self.parties[pid] = PartyHandle(pid=pid, ctx=ctx, gen=gen, done=gen is None)

    def next_seq(self) -> int:
        self._seq += 1
        return self._seq

    # --- sending and oracles -------------------------------------------------

    def submit_send(self, src, dst, kind, payload, bits, step, instance, oracle) -> None:
        if not (1 <= dst <= self.params.n):
            raise ValueError(f"bad destination {dst}")
        if dst == src:
            raise ValueError("use self_deliver for local delivery")
        if kind == "oracle_out":
            # the trusted-functionality channel is unforgeable: corrupt
            # attempts are dropped, honest attempts are bugs
            if src in self.honest:
                raise ValueError("oracle outputs are delivered by the engine only")
            return
        env = Envelope(
            seq=self.next_seq(), src=src, dst=dst, kind=kind, payload=payload,
            bits=bits, step=step, instance=instance, sent_tick=self.tick,
        )
        if src in self.honest:
            self.metrics.add(bits, step=step, oracle=oracle)
        self.pending.append(env)
        self._pending_age[env.seq] = self._event_steps

    def oracle_submit(self, pid, kind, instance, value, value_bits, sender) -> None:
        expected_mode = "rounds" if kind in SYNC_KINDS else "events"
        if self.mode != expected_mode:
            raise ValueError(f"oracle kind {kind} not usable under {self.mode} scheduler")
        inst = self.oracles.get(instance)
        if inst is None:
            if kind in SENDER_KINDS and sender is None:
                raise ValueError(f"{kind} oracle needs a designated sender")
            inst = IdealOracle(kind, instance, value_bits, sender)
            self.oracles[instance] = inst
        inst.registered.add(pid)
        if value is not None:
            if pid in self.honest or _oracle_domain_ok(inst, value):
                inst.submissions[pid] = value

    def _consult_adversary_oracle(self, inst: IdealOracle) -> None:
        if inst.byz_consulted or self.adversary is None:
            return
        inst.byz_consulted = True
        subs = self.adversary.oracle_submissions(inst, self)
        for pid, value in sorted(subs.items()):
            if pid not in self.honest and _oracle_domain_ok(inst, value):
                inst.submissions[pid] = value

    def _oracle_ready(self, inst: IdealOracle) -> bool:
        if inst.fired:
            return False
        if inst.kind == "async_rb":
            # conditional termination: nothing happens until the sender speaks
            return inst.sender in inst.submissions
        if inst.kind == "sync_bb":
            # unconditional termination: a silent sender still yields an output
            return inst.sender in inst.submissions or self.honest <= inst.registered
        waiting_honest = [p for p in self.honest if p not in inst.submissions]
        return not waiting_honest

    def _fire_oracle(self, inst: IdealOracle) -> None:
        inst.fired = True
        n, k = self.params.n, self.params.k
        if inst.kind in SENDER_KINDS:
            if inst.sender in inst.submissions:
                out = inst.submissions[inst.sender]
            else:
                submitted = [inst.submissions[p] for p in sorted(inst.submissions)]
                if self.adversary is not None:
                    out = self.adversary.pick_oracle_output(inst, submitted, self)
                else:
                    out = min(submitted, key=_canon) if submitted else BOT
        else:
            honest_vals = [inst.submissions[p] for p in sorted(self.honest)]
            if len(set(map(_canon, honest_vals))) == 1:
                out = honest_vals[0]
            else:
                submitted = [inst.submissions[p] for p in sorted(inst.submissions)]
                if self.adversary is not None:
                    out = self.adversary.pick_oracle_output(inst, submitted, self)
                else:
                    out = min(submitted, key=_canon)
        cost = oracle_model_cost(inst.kind, inst.value_bits, n, k)
        honest_cost = cost * len(self.honest) // n
        self.metrics.add(honest_cost, step=f"oracle:{inst.instance}", oracle=inst.kind)
        for pid in range(1, n + 1):
            env = Envelope(
                seq=self.next_seq(), src=0, dst=pid, kind="oracle_out", payload=out,
                bits=0, step=f"oracle:{inst.instance}", instance=inst.instance,
                sent_tick=self.tick,
            )
            self.pending.append(env)
            self._pending_age[env.seq] = self._event_steps

    def _fire_ready_oracles(self) -> None:
        for name in sorted(self.oracles):
            inst = self.oracles[name]
            if not inst.fired:
                self._consult_adversary_oracle(inst)
                if self._oracle_ready(inst):
                    self._fire_oracle(inst)

    # --- party stepping ------------------------------------------------------

    def _resume(self, handle: PartyHandle, first: bool = False) -> None:
        if handle.done or handle.gen is None:
            return
        try:
            wait = next(handle.gen) if first else handle.gen.send(None)
            handle.waiting = wait
        except StopIteration as stop:
            handle.done = True
            handle.waiting = None
            if stop.value is not None:
                if handle.has_output:
                    raise AssertionError(f"party {handle.pid} produced two outputs")
                handle.output = stop.value
                handle.has_output = True
        except StopProtocol:
            handle.done = True
            handle.waiting = None

    def _runnable(self, handle: PartyHandle) -> bool:
        if handle.done or handle.gen is None:
            return False
        w = handle.waiting
        if isinstance(w, Until):
            return bool(w.pred())
        return False

    def _deliver(self, env: Envelope) -> None:
        self.parties[env.dst].ctx.mailbox.append(env)
        if env.dst in self.honest:
            # diagnostic only: includes Byzantine-sent traffic, never claimed
            self._received_bits += env.bits
        if self.trace is not None:
            self.trace.append(
                {"tick": self.tick, "from": env.src, "to": env.dst,
                 "msg_kind": env.kind, "bits": env.bits}
            )

    # --- main loops ----------------------------------------------------------

    def run(self) -> None:
        if self.mode == "rounds":
            self._run_rounds()
        else:
            self._run_events()
        self.metrics.extra["received_bits_total"] = self._received_bits

    def _run_rounds(self) -> None:
        for pid in sorted(self.parties):
            self._resume(self.parties[pid], first=True)
        self._fire_ready_oracles()
        rounds = 0
        while any(not h.done for h in self.parties.values()):
            rounds += 1
            if rounds > self.max_rounds:
                raise RuntimeError("round limit exceeded; protocol did not terminate")
            self.tick = rounds
            batch = sorted(self.pending, key=lambda e: e.seq)
            self.pending.clear()
            self._pending_age.clear()
            for env in batch:
                self._deliver(env)
            for pid in sorted(self.parties):
                h = self.parties[pid]
                if not h.done and isinstance(h.waiting, (NextRound, Until)):
                    if isinstance(h.waiting, Until) and not h.waiting.pred():
                        continue
                    self._resume(h)
            self._fire_ready_oracles()
        self.metrics.rounds_or_events_elapsed = rounds

    def _run_events(self) -> None:
        # Events-mode wait predicates must depend only on the waiting party's
        # own mailbox and state, so only the delivery target needs re-checking.
        n_fair = 10 * self.params.n * self.params.n
        for pid in sorted(self.parties):
            self._resume(self.parties[pid], first=True)
        self._fire_ready_oracles()
        while self.pending:
            self._event_steps += 1
            if self._event_steps > self.max_events:
                raise RuntimeError("event limit exceeded")
            self.tick = self._event_steps
            # pending stays in send order, so the oldest envelope sits at 0
            if self._event_steps - self._pending_age[self.pending[0].seq] >= n_fair:
                idx = 0
            else:
                idx = self.policy.pick(self.pending, self.rng)
            env = self.pending.pop(idx)
            del self._pending_age[env.seq]
            self._deliver(env)
            handle = self.parties[env.dst]
            while self._runnable(handle):
                self._resume(handle)
            self._fire_ready_oracles()
        self.metrics.rounds_or_events_elapsed = self._event_steps

    def outputs(self) -> dict[int, object]:
        return {pid: h.output for pid, h in self.parties.items() if h.has_output}


def _canon(v) -> tuple:
    """Total order over oracle values of mixed types."""
    if isinstance(v, bytes):
        return (1, v)
    if isinstance(v, int):
        return (0, v.to_bytes(8, "big", signed=False) if v >= 0 else b"")
    return (2, repr(v).encode())


def outputs_digest(outputs: dict[int, object]) -> str:
    h = hashlib.sha256()
    for pid in sorted(outputs):
        v = outputs[pid]
        if v is BOT:
            enc = b"<bot>"
        elif isinstance(v, bytes):
            enc = v
        else:
            enc = repr(v).encode()
        h.update(pid.to_bytes(4, "big"))
        h.update(len(enc).to_bytes(8, "big"))
        h.update(enc)
    return h.hexdigest()
