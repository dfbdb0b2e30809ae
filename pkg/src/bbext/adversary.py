"""Scripted Byzantine adversaries and the standard battery.

A script fixes the corrupt set at session start (static corruption), builds
the behavior of each corrupt party (silent, honest-with-hooks, or fully
custom), chooses ideal-oracle inputs/outputs where the definitions leave
slack, and picks the delivery policy in events mode.

Corrupt-party traffic is never metered; honest code is never altered.
"""

from __future__ import annotations

import random
from typing import Callable

from . import blocks
from .multisig import msig_combine
from .simnet import (
    BOT,
    Ctx,
    LifoPolicy,
    RandomPolicy,
    SchedulerPolicy,
    StarvePolicy,
    StopProtocol,
    _canon,
)


class AdversaryScript:
    """Base script: no corruption at all."""

    name = "honest"

    def corrupt_set(self, n: int, t: int, sender: int | None) -> frozenset[int]:
        return frozenset()

    def make_party(self, pid: int, honest_factory: Callable, env) -> Callable | None:
        """Behavior of corrupt party pid; None means fully silent."""
        return None

    def oracle_submissions(self, inst, engine) -> dict[int, object]:
        """Extra ideal-oracle inputs on behalf of corrupt parties."""
        return {}

    def pick_oracle_output(self, inst, submitted: list, engine):
        """Output choice when the definition does not pin one."""
        if not submitted:
            return BOT
        return min(submitted, key=_canon)

    def scheduler_policy(self, corrupt: frozenset[int], seed: int) -> SchedulerPolicy:
        return SchedulerPolicy()

    def _rng(self, seed: int) -> random.Random:
        return random.Random((self.name, seed).__repr__())


def _tail_corrupt(n: int, t: int, exclude: frozenset[int] = frozenset()) -> frozenset[int]:
    picked: list[int] = []
    for pid in range(n, 0, -1):
        if len(picked) == t:
            break
        if pid not in exclude:
            picked.append(pid)
    return frozenset(picked)


class CtxProxy:
    """Wraps a party context so scripts can rewrite sends and oracle inputs."""

    def __init__(self, ctx: Ctx, send_hook=None, oracle_hook=None, crash_after_steps=None):
        self._ctx = ctx
        self._send_hook = send_hook
        self._oracle_hook = oracle_hook
        self._crash_after = crash_after_steps
        self._steps_seen = 0

    def __getattr__(self, item):
        return getattr(self._ctx, item)

    def set_step(self, label: str) -> None:
        self._steps_seen += 1
        if self._crash_after is not None and self._steps_seen > self._crash_after:
            raise StopProtocol()
        self._ctx.set_step(label)

    def send(self, dst, kind, payload, bits, step=None, instance=None, oracle=None):
        if self._send_hook is not None:
            out = self._send_hook(self._ctx, dst, kind, payload)
            if out is None:
                return
            kind, payload = out
        self._ctx.send(dst, kind, payload, bits, step=step, instance=instance, oracle=oracle)

    def broadcast(self, kind, payload, bits, step=None, instance=None, oracle=None):
        for dst in range(1, self._ctx.params.n + 1):
            if dst != self._ctx.pid:
                self.send(dst, kind, payload, bits, step=step, instance=instance, oracle=oracle)

    def oracle_submit(self, kind, value, value_bits, instance=None, sender=None):
        inst = instance or self._ctx._auto_instance(kind)
        if self._oracle_hook is not None:
            value = self._oracle_hook(self._ctx, kind, inst, value)
        self._ctx.engine.oracle_submit(self._ctx.pid, kind, inst, value, value_bits, sender)
        return inst

    def ideal_oracle(self, kind, value, value_bits, instance=None, sender=None):
        inst = self.oracle_submit(kind, value, value_bits, instance, sender)
        yield from self._ctx.wait_oracle(inst)
        return self._ctx.oracle_result(inst)

    def set_happy(self, value: bool) -> None:
        self._ctx.happy = bool(value)  # corrupt parties may flap the flag


def hooked(honest_factory, send_hook=None, oracle_hook=None, crash_after_steps=None):
    def factory(ctx: Ctx):
        proxy = CtxProxy(ctx, send_hook=send_hook, oracle_hook=oracle_hook,
                         crash_after_steps=crash_after_steps)
        return honest_factory(proxy)

    return factory


class Silent(AdversaryScript):
    """Corrupt parties never speak; sender stays honest."""

    name = "silent"

    def corrupt_set(self, n, t, sender):
        return _tail_corrupt(n, t, exclude=frozenset({sender} if sender else ()))


class CrashAtStep(AdversaryScript):
    """Honest behavior until the s-th step marker, then nothing."""

    def __init__(self, steps: int, name: str):
        self.steps = steps
        self.name = name

    def corrupt_set(self, n, t, sender):
        return _tail_corrupt(n, t)

    def make_party(self, pid, honest_factory, env):
        return hooked(honest_factory, crash_after_steps=self.steps)


class Equivocator(AdversaryScript):
    """Different payload bytes to odd and even recipients."""

    name = "equivocator"

    _KINDS = ("payload", "sym_self", "v_vec", "e_vec", "maj_val")

    def corrupt_set(self, n, t, sender):
        base = {sender} if sender else set()
        return frozenset(base) | _tail_corrupt(n, t - len(base), exclude=frozenset(base))

    def make_party(self, pid, honest_factory, env):
        def send_hook(ctx, dst, kind, payload):
            if kind in self._KINDS and dst % 2 == 0:
                if isinstance(payload, bytes):
                    payload = bytes(b ^ 0xFF for b in payload)
                elif isinstance(payload, int):
                    payload = payload ^ ((1 << ctx.params.n) - 1)
            return kind, payload

        return hooked(honest_factory, send_hook=send_hook)


class CorruptShareSender(AdversaryScript):
    """Wrong coded value under the original (now stale) witness."""

    name = "corrupt_share"

    def corrupt_set(self, n, t, sender):
        base = {sender} if sender else set()
        return frozenset(base) | _tail_corrupt(n, t - len(base), exclude=frozenset(base))

    def make_party(self, pid, honest_factory, env):
        def send_hook(ctx, dst, kind, payload):
            if kind in ("share_pkg", "share_fwd") and isinstance(payload, blocks.SharePackage):
                share = payload.indexed_share
                flipped = bytes(b ^ 0xA5 for b in share.share)
                payload = blocks.SharePackage(
                    indexed_share=blocks.IndexedShare(index=share.index, share=flipped),
                    witness=payload.witness,
                )
            return kind, payload

        return hooked(honest_factory, send_hook=send_hook)


class ForgedWitness(AdversaryScript):
    """Keeps the coded value but attaches fabricated witness bytes."""

    name = "forge_witness"

    def corrupt_set(self, n, t, sender):
        base = {sender} if sender else set()
        return frozenset(base) | _tail_corrupt(n, t - len(base), exclude=frozenset(base))

    def make_party(self, pid, honest_factory, env):
        rng = self._rng(env.seed * 1000 + pid)

        def send_hook(ctx, dst, kind, payload):
            if kind in ("share_pkg", "share_fwd") and isinstance(payload, blocks.SharePackage):
                fake = bytes(rng.randrange(256) for _ in range(len(payload.witness.data)))
                payload = blocks.SharePackage(
                    indexed_share=payload.indexed_share,
                    witness=type(payload.witness)(data=fake,
                                                  nominal_bits=payload.witness.nominal_bits),
                )
            return kind, payload

        return hooked(honest_factory, send_hook=send_hook)


class WrongHappy(AdversaryScript):
    """Claims readiness it does not have: flips agreement-oracle inputs."""

    name = "wrong_happy"

    def corrupt_set(self, n, t, sender):
        return _tail_corrupt(n, t)

    def make_party(self, pid, honest_factory, env):
        rng = self._rng(env.seed * 1000 + pid)

        def oracle_hook(ctx, kind, instance, value):
            if instance.startswith("ba_happy"):
                return 1
            if instance.startswith("ba_commit") and isinstance(value, bytes):
                return bytes(rng.randrange(256) for _ in range(len(value)))
            return value

        return hooked(honest_factory, oracle_hook=oracle_hook)

    def pick_oracle_output(self, inst, submitted, engine):
        # prefer a corrupt submission when the definition allows a choice
        corrupt_vals = [v for p, v in sorted(inst.submissions.items()) if p not in engine.honest]
        if corrupt_vals:
            return corrupt_vals[0]
        return super().pick_oracle_output(inst, submitted, engine)


class OracleLiar(AdversaryScript):
    """Silent on the wire, loud toward the ideal oracles."""

    name = "oracle_liar"

    def corrupt_set(self, n, t, sender):
        return _tail_corrupt(n, t, exclude=frozenset({sender} if sender else ()))

    def oracle_submissions(self, inst, engine):
        rng = random.Random((self.name, inst.instance).__repr__())
        subs = {}
        for pid in range(1, engine.params.n + 1):
            if pid not in engine.honest:
                if inst.value_bits == 1:
                    subs[pid] = rng.randrange(2)
                else:
                    width = max(inst.value_bits // 8, 1)
                    subs[pid] = bytes(rng.randrange(256) for _ in range(width))
        return subs

    def pick_oracle_output(self, inst, submitted, engine):
        corrupt_vals = [v for p, v in sorted(inst.submissions.items()) if p not in engine.honest]
        if corrupt_vals:
            return corrupt_vals[0]
        return super().pick_oracle_output(inst, submitted, engine)


class PartialPayloadSender(AdversaryScript):
    """Sender reveals the payload to a single honest party; the commitment
    and the witnessed shares still flow, so reconstruction must carry."""

    name = "partial_payload"

    def corrupt_set(self, n, t, sender):
        return frozenset({sender}) if sender else _tail_corrupt(n, t)

    def make_party(self, pid, honest_factory, env):
        target = min(p for p in range(1, env.params.n + 1) if p not in env.corrupt)

        def send_hook(ctx, dst, kind, payload):
            if kind == "payload" and dst != target:
                return None
            return kind, payload

        return hooked(honest_factory, send_hook=send_hook)


class WithholdCertificate(AdversaryScript):
    """Iterated-broadcast attack: the corrupt coalition releases witnessed
    shares and a coalition-signed readiness chain to one honest party only,
    at iteration |coalition|, forcing last-iteration acceptance elsewhere."""

    name = "withhold_cert"

    def corrupt_set(self, n, t, sender):
        base = {sender} if sender else set()
        return frozenset(base) | _tail_corrupt(n, t - len(base), exclude=frozenset(base))

    def make_party(self, pid, honest_factory, env):
        if env.spec.name != "sync-bb-highthresh" or pid != env.sender:
            return None  # co-conspirators only lend their signatures

        def party(ctx: Ctx):
            params = ctx.params
            m = env.inputs.get(env.sender, b"")
            shares = blocks.encode(m, params.b, params.n, bit_len=params.l)
            rich = blocks.eval_shares(ctx.session.ak, shares)
            ctx.oracle_submit("sync_bb", rich.data, params.k, instance="bb_commit",
                              sender=ctx.pid)
            yield from ctx.wait_oracle("bb_commit")
            target = min(p for p in range(1, params.n + 1) if p not in env.corrupt)
            release_iter = max(len(env.corrupt), 1)
            tag = b"HAPPY/" + ctx.session.session_id.encode()
            cert = None
            for signer in sorted(env.corrupt):
                sig = ctx.session.msig.sign(signer, tag)
                cert = sig if cert is None else msig_combine(cert, sig)
            packages = blocks.make_packages(shares, ctx.session.ak, rich)
            for r in range(1, params.t + 2):
                if r == release_iter:
                    ctx.send(target, "happy_cert", cert, bits=params.k + params.n,
                             step="distribute")
                    for j, pkg in sorted(packages.items()):
                        if j != ctx.pid:
                            ctx.send(j, "share_pkg", pkg, bits=pkg.nominal_bits(),
                                     step="distribute")
                yield from ctx.wait_rounds(2)

        return party


class ConflictingViews(AdversaryScript):
    """Sends a different consistency vector / core set to every recipient."""

    name = "conflicting_views"

    def corrupt_set(self, n, t, sender):
        return _tail_corrupt(n, t)

    def make_party(self, pid, honest_factory, env):
        rng = self._rng(env.seed * 1000 + pid)

        def send_hook(ctx, dst, kind, payload):
            if kind in ("v_vec", "e_vec") and isinstance(payload, int):
                return kind, rng.getrandbits(ctx.params.n)
            if kind == "ok":
                # acknowledge toward half the recipients only
                if dst % 2 == 0:
                    return None
            return kind, payload

        return hooked(honest_factory, send_hook=send_hook)


class JunkInjector(AdversaryScript):
    """Sprays structurally malformed payloads of every message kind; honest
    parties must ignore them without crashing or losing their guarantees."""

    name = "junk_injector"

    _KINDS = ("payload", "share_pkg", "share_fwd", "happy_cert", "sym_self",
              "sym_priv", "v_vec", "e_vec", "maj_val", "ok", "ds", "rb", "aba")
    _INSTANCES = (None, "ba_commit", "ba_happy", "bb_commit", "rb_commit",
                  "flag/1", "flag/abc", "flag/999", "bb0", "rb0", "aba0")

    def corrupt_set(self, n, t, sender):
        return _tail_corrupt(n, t, exclude=frozenset({sender} if sender else ()))

    def make_party(self, pid, honest_factory, env):
        rng = self._rng(env.seed * 991 + pid)

        def junk_value(depth=0):
            draws = [
                lambda: rng.randrange(-5, 300),
                lambda: bytes(rng.randrange(256) for _ in range(rng.randrange(0, 8))),
                lambda: "text",
                lambda: None,
                lambda: (rng.randrange(5), rng.randrange(5)),
                lambda: ("est", rng.randrange(3), rng.randrange(4)),
                lambda: ("send", b"x"),
                lambda: [1, 2],
                lambda: 2**80,
            ]
            if depth == 0:
                draws.append(lambda: (junk_value(1), junk_value(1), junk_value(1)))
            return rng.choice(draws)()

        def party(ctx):
            from .accumulator import Witness
            from .blocks import IndexedShare, SharePackage
            for _ in range(12 * ctx.params.n):
                dst = rng.randrange(1, ctx.params.n + 1)
                if dst == ctx.pid:
                    continue
                kind = rng.choice(self._KINDS)
                payload = junk_value()
                if kind in ("share_pkg", "share_fwd") and rng.random() < 0.5:
                    payload = SharePackage(
                        indexed_share=IndexedShare(
                            index=rng.choice([dst, 0, 70000, "x"]),
                            share=rng.choice([b"\x00\x01", "nope", b""]),
                        ),
                        witness=rng.choice([
                            Witness(data=b"\x00" * 8, nominal_bits=8),
                            "bogus",
                            None,
                        ]),
                    )
                ctx.send(dst, kind, payload, bits=8,
                         instance=rng.choice(self._INSTANCES), step="junk")
            return None
            yield  # pragma: no cover

        return party


class PushyChoice(AdversaryScript):
    """Silent corrupt set; ideal-oracle slack resolved toward the largest
    submitted value, which drives the reconstruction paths on split inputs."""

    name = "pushy_choice"

    def corrupt_set(self, n, t, sender):
        return _tail_corrupt(n, t, exclude=frozenset({sender} if sender else ()))

    def pick_oracle_output(self, inst, submitted, engine):
        if not submitted:
            return BOT
        return max(submitted, key=_canon)


class ScheduledHonest(AdversaryScript):
    """No corruption; the network itself misbehaves within fairness."""

    def __init__(self, policy_name: str):
        self.policy_name = policy_name
        self.name = f"sched_{policy_name}"

    def corrupt_set(self, n, t, sender):
        return frozenset()

    def scheduler_policy(self, corrupt, seed):
        if self.policy_name == "lifo":
            return LifoPolicy()
        if self.policy_name == "random":
            return RandomPolicy()
        raise ValueError(self.policy_name)


class StarvingScheduler(AdversaryScript):
    """Silent corrupt set plus a policy that starves honest traffic."""

    name = "sched_starve"

    def corrupt_set(self, n, t, sender):
        return _tail_corrupt(n, t, exclude=frozenset({sender} if sender else ()))

    def scheduler_policy(self, corrupt, seed):
        return StarvePolicy(corrupt)


def adversary_battery() -> list[AdversaryScript]:
    """The standard scripts every protocol battery runs against."""
    return [
        AdversaryScript(),
        Silent(),
        CrashAtStep(2, "crash_early"),
        CrashAtStep(4, "crash_mid"),
        Equivocator(),
        CorruptShareSender(),
        ForgedWitness(),
        WrongHappy(),
        OracleLiar(),
        PushyChoice(),
        JunkInjector(),
        PartialPayloadSender(),
        WithholdCertificate(),
        ConflictingViews(),
        ScheduledHonest("lifo"),
        ScheduledHonest("random"),
        StarvingScheduler(),
    ]
