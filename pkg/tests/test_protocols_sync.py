from collections import Counter

import pytest

from bbext.adversary import (
    AdversaryScript,
    CorruptShareSender,
    Equivocator,
    ForgedWitness,
    OracleLiar,
    PushyChoice,
    Silent,
    WithholdCertificate,
    WrongHappy,
    adversary_battery,
)
from bbext.checks import build_inputs, evaluate_run
from bbext.protocols import SessionParams
from bbext.runner import run
from bbext.simnet import BOT


def p_half(n=4, l=96):
    return SessionParams(n=n, t=(n - 1) // 2, l=l, k=128, threshold_regime="half")


def p_eps(n=4, eps=0.5, l=96):
    return SessionParams(n=n, t=int((1 - eps) * n), l=l, k=128,
                         threshold_regime="one_minus_eps", epsilon=eps)


M = bytes(range(12))


class SilentSender(AdversaryScript):
    name = "silent_sender"

    def corrupt_set(self, n, t, sender):
        return frozenset({sender} if sender else ())


def test_agreement_unanimous_inputs():
    params = p_half()
    res = run("sync-ba-half", params, {i: M for i in range(1, 5)}, seed=0)
    assert all(res.outputs[p] == M for p in res.honest)


def test_agreement_commitment_never_held_yields_bottom():
    params = p_half()
    inputs = {i: bytes([i]) * 12 for i in range(1, 5)}
    res = run("sync-ba-half", params, inputs, adversary=OracleLiar(), seed=1)
    assert all(res.outputs[p] is BOT for p in res.honest)


def test_agreement_three_of_four_share_input():
    params = p_half()
    inputs = {1: M, 2: M, 3: M, 4: b"x" * 12}
    for script in (Silent(), PushyChoice(), WrongHappy()):
        res = run("sync-ba-half", params, inputs, adversary=script, seed=2)
        outs = [res.outputs[p] for p in sorted(res.honest)]
        assert len({repr(v) for v in outs}) == 1, script.name


def test_reconstruction_path_matches_direct_output():
    # pushy oracle choice adopts a held commitment on split inputs, forcing
    # the unhappy parties through reconstruction
    params = p_half()
    inputs = {1: M, 2: M, 3: M, 4: b"y" * 12}
    res = run("sync-ba-half", params, inputs, adversary=PushyChoice(), seed=5)
    assert all(res.outputs[p] == M for p in res.honest)


def test_broadcast_honest_sender():
    params = p_half()
    res = run("sync-bb-half", params, {1: M}, seed=0)
    assert all(res.outputs[p] == M for p in res.honest)


def test_broadcast_silent_sender_all_bottom():
    params = p_half()
    res = run("sync-bb-half", params, {1: M}, adversary=SilentSender(), seed=0)
    assert all(res.outputs[p] is BOT for p in res.honest)


def test_broadcast_equivocating_payload_converges():
    params = p_half()
    for seed in range(10):
        res = run("sync-bb-half", params, {1: M}, adversary=Equivocator(), seed=seed)
        outs = [res.outputs[p] for p in sorted(res.honest)]
        assert len({repr(v) for v in outs}) == 1


@pytest.mark.parametrize("script", [CorruptShareSender(), ForgedWitness()])
def test_tampered_packages_are_erased_not_believed(script):
    params = p_half(n=7)
    inputs = {i: M for i in range(1, 8)}
    res = run("sync-ba-half", params, inputs, adversary=script, seed=3)
    assert all(res.outputs[p] == M for p in res.honest)


def test_high_threshold_honest_sender_all_epsilons():
    for n, eps in [(4, 0.5), (4, 0.25), (7, 0.5), (10, 0.25)]:
        params = p_eps(n=n, eps=eps)
        res = run("sync-bb-highthresh", params, {1: M}, seed=0)
        assert all(res.outputs[p] == M for p in res.honest), (n, eps)


def test_high_threshold_silent_sender_bottom():
    params = p_eps()
    res = run("sync-bb-highthresh", params, {1: M}, adversary=SilentSender(), seed=0)
    assert all(res.outputs[p] is BOT for p in res.honest)


def test_high_threshold_withholder_accepts_in_final_iteration():
    params = p_eps(n=4, eps=0.5)  # t = 2, iterations 1..3
    adv = WithholdCertificate()
    res = run("sync-bb-highthresh", params, {1: M}, adversary=adv, seed=0, trace=True)
    assert all(res.outputs[p] == M for p in res.honest)
    iters = {int(k.split("/")[1]): v for k, v in res.metrics.extra.items()
             if k.startswith("happy_iter/")}
    honest_iters = {p: r for p, r in iters.items() if p in res.honest}
    assert honest_iters, "no honest party recorded a happy iteration"
    assert max(honest_iters.values()) == params.t + 1
    assert min(honest_iters.values()) == len(res.corrupt)


def test_high_threshold_one_shot_steps():
    # every party's distribution / sharing traffic appears at most once
    params = p_eps(n=7, eps=0.5)
    res = run("sync-bb-highthresh", params, {1: M}, seed=1, trace=True)
    per_party_pkg = Counter()
    per_party_fwd = Counter()
    per_party_cert = Counter()
    for rec in res.trace:
        if rec["msg_kind"] == "share_pkg":
            per_party_pkg[rec["from"]] += 1
        elif rec["msg_kind"] == "share_fwd":
            per_party_fwd[rec["from"]] += 1
        elif rec["msg_kind"] == "happy_cert":
            per_party_cert[rec["from"]] += 1
    n = params.n
    assert all(v <= n - 1 for v in per_party_pkg.values())
    assert all(v <= n - 1 for v in per_party_fwd.values())
    assert all(v <= n - 1 for v in per_party_cert.values())


def test_full_battery_spot_check_n7():
    # one seed through every script at n=7 for each synchronous protocol
    for protocol, params in [("sync-ba-half", p_half(n=7)),
                             ("sync-bb-half", p_half(n=7)),
                             ("sync-bb-highthresh", p_eps(n=7, eps=0.5))]:
        kind = "ba" if protocol.endswith("ba-half") else "bb"
        for script in adversary_battery():
            inputs = build_inputs(kind, params, 9, "majority")
            res = run(protocol, params, inputs, adversary=script, seed=9)
            sender = None if kind == "ba" else 1
            assert not evaluate_run(kind, inputs, sender, res), (protocol, script.name)


class CertGames(AdversaryScript):
    """Coalition sender plays readiness-certificate games: rotating single
    targets, per-recipient equivocation, or a full-length chain up front."""

    def __init__(self, mode):
        self.mode = mode
        self.name = f"certgames_{mode}"

    def corrupt_set(self, n, t, sender):
        from bbext.adversary import _tail_corrupt

        base = {sender} if sender else set()
        return frozenset(base) | _tail_corrupt(n, max(t - len(base), 0),
                                               exclude=frozenset(base))

    def make_party(self, pid, honest_factory, env):
        if pid != env.sender:
            return None
        mode = self.mode

        def party(ctx):
            from bbext import blocks
            from bbext.multisig import msig_combine

            params = ctx.params
            m = env.inputs.get(env.sender, b"")
            shares = blocks.encode(m, params.b, params.n, bit_len=params.l)
            rich = blocks.eval_shares(ctx.session.ak, shares)
            ctx.oracle_submit("sync_bb", rich.data, params.k, instance="bb_commit",
                              sender=ctx.pid)
            yield from ctx.wait_oracle("bb_commit")
            tag = b"HAPPY/" + ctx.session.session_id.encode()
            sigs = {s: ctx.session.msig.sign(s, tag) for s in sorted(env.corrupt)}
            packages = blocks.make_packages(shares, ctx.session.ak, rich)
            honest = [p for p in range(1, params.n + 1) if p not in env.corrupt]
            for r in range(1, params.t + 2):
                if r == 1 and mode != "nodistribute":
                    for j, pkg in sorted(packages.items()):
                        if j != ctx.pid:
                            ctx.send(j, "share_pkg", pkg, bits=pkg.nominal_bits(),
                                     step="d")
                cert = None
                for s in sorted(env.corrupt)[: min(r, len(env.corrupt))]:
                    cert = sigs[s] if cert is None else msig_combine(cert, sigs[s])
                if mode == "rotate":
                    ctx.send(honest[(r - 1) % len(honest)], "happy_cert", cert,
                             bits=params.k + params.n, step="d")
                elif mode == "equivocate":
                    for i, h in enumerate(honest):
                        c2 = cert if i % 2 == 0 else sigs[sorted(env.corrupt)[0]]
                        ctx.send(h, "happy_cert", c2, bits=params.k + params.n,
                                 step="d")
                elif mode == "nodistribute":
                    for h in honest:
                        ctx.send(h, "happy_cert", cert, bits=params.k + params.n,
                                 step="d")
                yield from ctx.wait_rounds(2)

        return party


@pytest.mark.parametrize("mode", ["rotate", "equivocate", "nodistribute"])
def test_high_threshold_certificate_games_keep_agreement(mode):
    for n, eps in [(4, 0.5), (7, 0.25)]:
        params = p_eps(n=n, eps=eps)
        for seed in range(15):
            res = run("sync-bb-highthresh", params, {1: M},
                      adversary=CertGames(mode), seed=seed)
            assert not evaluate_run("bb", {1: M}, 1, res), (n, eps, mode, seed)
            outs = [res.outputs[p] for p in sorted(res.honest)]
            assert len({repr(v) for v in outs}) == 1
            if mode == "nodistribute":
                assert outs[0] is BOT  # certificates alone never convince


def test_ideal_and_concrete_oracles_output_equivalent():
    params = p_half()
    inputs = {i: M for i in range(1, 5)}
    ideal = run("sync-ba-half", params, inputs, adversary=Silent(), seed=4)
    concrete = run("sync-ba-half", params, inputs, adversary=Silent(), seed=4,
                   oracle_impl={"sync_ba": "concrete"})
    assert ideal.outputs == concrete.outputs
    bb_ideal = run("sync-bb-half", params, {1: M}, adversary=Silent(), seed=4)
    bb_concrete = run("sync-bb-half", params, {1: M}, adversary=Silent(), seed=4,
                      oracle_impl={"sync_bb": "concrete", "sync_ba": "concrete"})
    assert bb_ideal.outputs == bb_concrete.outputs
