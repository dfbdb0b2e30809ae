"""Synchronous authenticated extension protocols.

All three share the same skeleton: agree on a short commitment to the coded
share set, mark parties whose local message matches as happy, let happy
parties distribute witnessed shares, and let everyone else reconstruct.
"""

from __future__ import annotations

from .. import blocks
from ..multisig import MultiSig, msig_combine
from ..oracles import ba_oracle, bcast_oracle
from ..simnet import BOT, Ctx, NEXT_ROUND
from .base import (
    ProtocolSpec,
    bare_acc,
    first_valid_own_package,
    forwarded_packages,
    shared_sync_tail,
)


def _encode_input(ctx: Ctx, message: bytes):
    params = ctx.params
    shares = blocks.encode(message, params.b, params.n, bit_len=params.l)
    ctx.engine.metrics.extra.setdefault("share_bits", 8 * len(shares[0].share))
    z = blocks.eval_shares(ctx.session.ak, shares)
    return shares, z


def sync_ba_half(ctx: Ctx, my_input: bytes, sender: int | None = None):
    """Agreement for t < n/2: k-bit agreement on the commitment, one-bit
    agreement on the happy flags, then distribute / forward / reconstruct."""
    ctx.set_step("encode")
    shares, z_mine = _encode_input(ctx, my_input)
    z = yield from ba_oracle(ctx, "sync_ba", "ba_commit", z_mine.data, ctx.params.k)
    happy = z == z_mine.data
    ctx.set_happy(happy)
    vote = yield from ba_oracle(ctx, "sync_ba", "ba_happy", int(happy), 1)
    out = yield from shared_sync_tail(ctx, z if isinstance(z, bytes) else b"", happy,
                                      my_input, shares, 1 if vote == 1 else 0)
    if happy and out is not BOT:
        assert out == my_input, "happy party must output its own message"
    return out


def sync_bb_half(ctx: Ctx, my_input: bytes | None, sender: int):
    """Broadcast for t < n/2: the sender fans out the payload and broadcasts
    the commitment; the rest matches the agreement protocol."""
    params = ctx.params
    ctx.set_step("payload")
    message = None
    z_bytes_own = None
    shares = None
    if ctx.pid == sender:
        message = my_input
        shares, z_mine = _encode_input(ctx, message)
        z_bytes_own = z_mine.data
        ctx.broadcast("payload", message, bits=params.l, step="payload")
    z = yield from bcast_oracle(ctx, "sync_bb", "bb_commit", sender, z_bytes_own, params.k)
    if ctx.pid != sender:
        payloads = ctx.inbox(kind="payload", frm=sender)
        if payloads:
            message = payloads[0].payload
    happy = False
    if isinstance(message, bytes) and isinstance(z, bytes):
        try:
            shares, z_mine = _encode_input(ctx, message)
            happy = z_mine.data == z
        except ValueError:
            happy = False
    ctx.set_happy(happy)
    vote = yield from ba_oracle(ctx, "sync_ba", "ba_happy", int(happy), 1)
    return (
        yield from shared_sync_tail(ctx, z if isinstance(z, bytes) else b"", happy,
                                    message, shares, 1 if vote == 1 else 0)
    )


def _happy_tag(ctx: Ctx) -> bytes:
    return b"HAPPY/" + ctx.session.session_id.encode()


def _best_cert(ctx: Ctx, envs, exclude: int) -> tuple[int, MultiSig | None]:
    """Longest valid happy certificate among envelopes, counting signers
    other than the excluded party."""
    best_len, best = 0, None
    for env in envs:
        cert = env.payload
        if not isinstance(cert, MultiSig):
            continue
        if not ctx.session.msig.verify(cert, _happy_tag(ctx)):
            continue
        r = len(cert.signers - {exclude})
        if r > best_len:
            best_len, best = r, cert
    return best_len, best


def sync_bb_high_threshold(ctx: Ctx, my_input: bytes | None, sender: int):
    """Broadcast for t < (1-eps)n: t+1 iterations of distribute / forward /
    reconstruct, gated by a growing chain of signatures on a HAPPY marker so
    that a party only accepts in iteration r with r signers vouching."""
    params = ctx.params
    auth = ctx.session.msig
    happy = False
    output = BOT
    my_shares = None
    trigger_cert: MultiSig | None = None
    z_bytes_own = None
    ctx.set_step("commit")
    if ctx.pid == sender:
        happy = True
        output = my_input
        my_shares, z_mine = _encode_input(ctx, my_input)
        z_bytes_own = z_mine.data
    ctx.set_happy(happy)
    z = yield from bcast_oracle(ctx, "sync_bb", "bb_commit", sender, z_bytes_own, params.k)
    z_acc = bare_acc(z if isinstance(z, bytes) else b"", params.k)

    distributed = False
    shared = False
    reconstructed = False
    cert_ptr = 0
    for r in range(1, params.t + 2):
        ctx.set_step("distribute")
        if happy and not distributed:
            distributed = True
            own_sig = auth.sign(ctx.pid, _happy_tag(ctx))
            cert = msig_combine(trigger_cert, own_sig) if trigger_cert else own_sig
            ctx.broadcast("happy_cert", cert, bits=params.k + params.n, step="distribute")
            rich = blocks.eval_shares(ctx.session.ak, my_shares)
            assert rich.data == z, "distributing party's shares must match the agreed commitment"
            blocks.distribute(ctx, my_shares, ctx.session.ak, rich, step="distribute")
        yield NEXT_ROUND
        cert_envs = ctx.inbox(kind="happy_cert")[cert_ptr:]
        cert_ptr += len(cert_envs)
        ctx.set_step("share")
        if not shared:
            mine = first_valid_own_package(ctx, z_acc)
            if mine is not None:
                shared = True
                ctx.broadcast("share_fwd", mine, bits=mine.nominal_bits(), step="share")
                ctx.self_deliver("share_fwd", mine, step="share")
        yield NEXT_ROUND
        # reconstruction: no communication
        if not reconstructed:
            chain_len, cert = _best_cert(ctx, cert_envs, exclude=ctx.pid)
            if chain_len >= r:
                table = forwarded_packages(ctx)
                got = blocks.reconstruct(table, ctx.session.ak, z_acc, d0=params.t, b=params.b)
                if got is not None:
                    m, bit_len = got
                    rebuilt = blocks.encode(m, params.b, params.n, bit_len=bit_len)
                    if blocks.eval_shares(ctx.session.ak, rebuilt).data == z:
                        reconstructed = True
                        ctx.set_happy(True)
                        happy = True
                        output = m
                        my_shares = rebuilt
                        trigger_cert = cert
                        ctx.engine.metrics.extra[f"happy_iter/{ctx.pid}"] = r
    return output


SYNC_PROTOCOLS = [
    ProtocolSpec(name="sync-ba-half", mode="rounds", kind="ba", regime="half",
                 party=sync_ba_half),
    ProtocolSpec(name="sync-bb-half", mode="rounds", kind="bb", regime="half",
                 party=sync_bb_half),
    ProtocolSpec(name="sync-bb-highthresh", mode="rounds", kind="bb",
                 regime="one_minus_eps", party=sync_bb_high_threshold),
]
