"""Asynchronous authenticated extension protocols for t < n/3.

Same commitment-then-disseminate structure as the synchronous variants, but
steps fire as soon as enough messages arrive. The reliable-broadcast variant
additionally re-distributes after reconstructing, which is what carries a
single honest output to everyone when the sender is faulty.
"""

from __future__ import annotations

from .. import blocks
from ..oracles import ba_oracle, bcast_oracle
from ..simnet import BOT, Ctx, Until
from .base import ProtocolSpec, bare_acc


def _wait_mail(ctx: Ctx):
    size = len(ctx.mailbox)
    return Until(lambda: len(ctx.mailbox) > size)


def _encode_input(ctx: Ctx, message: bytes, bit_len: int | None = None):
    params = ctx.params
    shares = blocks.encode(message, params.b, params.n,
                           bit_len=params.l if bit_len is None else bit_len)
    ctx.engine.metrics.extra.setdefault("share_bits", 8 * len(shares[0].share))
    z = blocks.eval_shares(ctx.session.ak, shares)
    return shares, z


class _FwdTracker:
    """First forwarded package per sender, verified against the commitment."""

    def __init__(self, ctx: Ctx, z):
        self.ctx = ctx
        self.z = z
        self.table: dict[int, blocks.SharePackage] = {}
        self._scanned = 0

    def update(self) -> int:
        box = self.ctx.inbox(kind="share_fwd")
        for env in box[self._scanned :]:
            if env.src not in self.table and blocks.verify_package(
                self.ctx.session.ak, self.z, env.payload, expect_index=env.src
            ):
                self.table[env.src] = env.payload
        self._scanned = len(box)
        return len(self.table)


def async_ba_third(ctx: Ctx, my_input: bytes, sender: int | None = None):
    """Agreement for t < n/3 with eventual delivery."""
    params = ctx.params
    ctx.set_step("encode")
    shares, z_mine = _encode_input(ctx, my_input)
    z = yield from ba_oracle(ctx, "async_ba_kbit", "ba_commit", z_mine.data, params.k)
    happy = z == z_mine.data
    ctx.set_happy(happy)
    vote = yield from ba_oracle(ctx, "async_ba_bit", "ba_happy", int(happy), 1)
    if vote != 1:
        return BOT
    z_acc = bare_acc(z, params.k)
    ctx.set_step("distribute")
    if happy:
        blocks.distribute(ctx, shares, ctx.session.ak, z_mine, step="distribute")
    ctx.set_step("share")
    mine = None
    while mine is None:
        for env in ctx.inbox(kind="share_pkg"):
            if blocks.verify_package(ctx.session.ak, z_acc, env.payload, expect_index=ctx.pid):
                mine = env.payload
                break
        if mine is None:
            yield _wait_mail(ctx)
    ctx.broadcast("share_fwd", mine, bits=mine.nominal_bits(), step="share")
    ctx.self_deliver("share_fwd", mine, step="share")
    if happy:
        assert z_mine.data == z
        return my_input
    ctx.set_step("reconstruct")
    tracker = _FwdTracker(ctx, z_acc)
    while tracker.update() < params.n - params.t:
        yield _wait_mail(ctx)
    got = blocks.reconstruct(tracker.table, ctx.session.ak, z_acc, d0=params.t, b=params.b)
    if got is None:
        raise AssertionError(f"party {ctx.pid}: reconstruction failed after a carried happy vote")
    return got[0]


def async_rb_third(ctx: Ctx, my_input: bytes | None, sender: int):
    """Reliable broadcast for t < n/3: all-or-none delivery under a faulty
    sender; every reconstructing party re-distributes its result."""
    params = ctx.params
    ctx.set_step("payload")
    z_bytes_own = None
    if ctx.pid == sender:
        shares, z_mine = _encode_input(ctx, my_input)
        z_bytes_own = z_mine.data
        ctx.broadcast("payload", my_input, bits=params.l, step="payload")
    z = yield from bcast_oracle(ctx, "async_rb", "rb_commit", sender, z_bytes_own, params.k)
    if not isinstance(z, bytes):
        return None  # commitment never resolves to a usable value
    z_acc = bare_acc(z, params.k)

    happy = False
    message = my_input if ctx.pid == sender else None
    happy_known = ctx.pid == sender
    my_shares = None
    if ctx.pid == sender:
        happy = z_mine.data == z
        ctx.set_happy(happy)
        my_shares = shares
        if happy:
            ctx.set_step("distribute")
            blocks.distribute(ctx, my_shares, ctx.session.ak, z_mine, step="distribute")
    forwarded = None
    tracker = _FwdTracker(ctx, z_acc)
    while True:
        if not happy_known:
            payloads = ctx.inbox(kind="payload", frm=sender)
            if payloads:
                happy_known = True
                m = payloads[0].payload
                if isinstance(m, bytes):
                    try:
                        cand_shares, cand_z = _encode_input(ctx, m)
                    except ValueError:
                        cand_shares, cand_z = None, None
                    if cand_z is not None and cand_z.data == z:
                        happy = True
                        ctx.set_happy(True)
                        message = m
                        my_shares = cand_shares
                        ctx.set_step("distribute")
                        blocks.distribute(ctx, my_shares, ctx.session.ak, cand_z, step="distribute")
        if forwarded is None:
            for env in ctx.inbox(kind="share_pkg"):
                if blocks.verify_package(ctx.session.ak, z_acc, env.payload, expect_index=ctx.pid):
                    forwarded = env.payload
                    ctx.set_step("share")
                    ctx.broadcast("share_fwd", forwarded, bits=forwarded.nominal_bits(), step="share")
                    ctx.self_deliver("share_fwd", forwarded, step="share")
                    break
        if happy and forwarded is not None:
            return message
        if not happy and forwarded is not None and tracker.update() >= params.n - params.t:
            ctx.set_step("reconstruct")
            got = blocks.reconstruct(tracker.table, ctx.session.ak, z_acc,
                                     d0=params.t, b=params.b)
            if got is not None:
                m, bit_len = got
                rebuilt = blocks.encode(m, params.b, params.n, bit_len=bit_len)
                rich = blocks.eval_shares(ctx.session.ak, rebuilt)
                if rich.data == z:
                    ctx.set_step("redistribute")
                    blocks.distribute(ctx, rebuilt, ctx.session.ak, rich, step="redistribute")
                    return m
                # the committed set decodes but is not the canonical encoding
                # of any message (e.g. padded with extra zero stripes): no
                # party can ever be happy with it and witnesses for canonical
                # shares cannot exist, so nobody outputs - an allowed outcome
                # under a faulty sender
        yield _wait_mail(ctx)


ASYNC_PROTOCOLS = [
    ProtocolSpec(name="async-ba-third", mode="events", kind="ba", regime="third_async",
                 party=async_ba_third),
    ProtocolSpec(name="async-rb-third", mode="events", kind="rb", regime="third_async",
                 party=async_rb_third),
]
