"""Black-box behavior of the concrete oracle constructions."""

import pytest

from bbext.adversary import AdversaryScript, ScheduledHonest, Silent
from bbext.checks import explore_schedules
from bbext.multisig import msig_combine
from bbext.oracles import _chain_tag
from bbext.protocols import SessionParams
from bbext.protocols.base import ProtocolSpec
from bbext.runner import run
from bbext.simnet import BOT


def chain_bb_spec():
    def party(ctx, my_input, sender):
        from bbext.oracles import dolev_strong
        out = yield from dolev_strong(ctx, "bb0", sender, my_input, ctx.params.k)
        return out

    return ProtocolSpec(name="h-ds", mode="rounds", kind="bb",
                        regime="one_minus_eps", party=party)


def chain_params(n: int, t: int) -> SessionParams:
    return SessionParams(n=n, t=t, l=128, k=128,
                         threshold_regime="one_minus_eps", epsilon=1.0 / n)


@pytest.mark.parametrize("n,t", [(4, 1), (4, 3), (7, 6)])
def test_chain_broadcast_honest_sender_all_thresholds(n, t):
    res = run(chain_bb_spec(), chain_params(n, t), {1: b"value"}, seed=0)
    assert all(res.outputs[p] == b"value" for p in res.honest)


class EquivocatingChainSender(AdversaryScript):
    """Sender signs two values and splits recipients between them."""

    name = "ds_equivocator"

    def corrupt_set(self, n, t, sender):
        return frozenset({sender})

    def make_party(self, pid, honest_factory, env):
        def party(ctx):
            auth = ctx.session.msig
            for value in (b"left", b"right"):
                sig = auth.sign(ctx.pid, _chain_tag("bb0", value))
                bits = ctx.params.k + ctx.params.k + ctx.params.n
                for dst in range(1, ctx.params.n + 1):
                    if dst == ctx.pid:
                        continue
                    if (dst % 2 == 0) == (value == b"left"):
                        ctx.send(dst, "ds", (value, sig), bits=bits, instance="bb0",
                                 step="oracle:bb0")
            return None
            yield  # pragma: no cover

        return party


class LateReleaseChain(AdversaryScript):
    """Coalition withholds a second signed chain until its length matches the
    round number, releasing it to a single target."""

    name = "ds_late_release"

    def corrupt_set(self, n, t, sender):
        out = {sender}
        pid = n
        while len(out) < t:
            out.add(pid)
            pid -= 1
        return frozenset(out)

    def make_party(self, pid, honest_factory, env):
        if pid != env.sender:
            return None

        def party(ctx):
            auth = ctx.session.msig
            n = ctx.params.n
            bits = ctx.params.k + ctx.params.k + n
            sig_a = auth.sign(ctx.pid, _chain_tag("bb0", b"public"))
            ctx.broadcast("ds", (b"public", sig_a), bits=bits, instance="bb0",
                          step="oracle:bb0")
            cert = None
            for signer in sorted(env.corrupt):
                s = auth.sign(signer, _chain_tag("bb0", b"hidden"))
                cert = s if cert is None else msig_combine(cert, s)
            target = min(p for p in range(1, n + 1) if p not in env.corrupt)
            for r in range(1, len(env.corrupt)):
                yield from ctx.wait_rounds(1)
            ctx.send(target, "ds", (b"hidden", cert), bits=bits, instance="bb0",
                     step="oracle:bb0")
            return None

        return party


def test_chain_broadcast_equivocating_sender_agrees():
    for seed in range(20):
        res = run(chain_bb_spec(), chain_params(4, 1), {1: b"x"},
                  adversary=EquivocatingChainSender(), seed=seed)
        outs = {p: res.outputs[p] for p in res.honest}
        assert set(outs) == set(res.honest)
        assert len({repr(v) for v in outs.values()}) == 1
        assert next(iter(outs.values())) in (b"left", b"right", BOT)


def test_chain_broadcast_late_release_still_agrees():
    res = run(chain_bb_spec(), chain_params(4, 2), {1: b"x"},
              adversary=LateReleaseChain(), seed=0)
    outs = {p: res.outputs[p] for p in res.honest}
    assert len({repr(v) for v in outs.values()}) == 1


def test_chain_broadcast_cost_within_twice_model():
    n, k = 7, 256
    params = SessionParams(n=n, t=n - 1, l=k, k=k,
                           threshold_regime="one_minus_eps", epsilon=1.0 / n)
    res = run(chain_bb_spec(), params, {1: bytes(32)}, seed=0,
              oracle_impl={"sync_bb": "concrete"})
    model = (k + n) * n * n + n**3
    assert res.metrics.honest_bits_total <= 2 * model


def majority_ba_spec():
    def party(ctx, my_input, sender):
        from bbext.oracles import sync_ba_majority
        out = yield from sync_ba_majority(ctx, "ba0", my_input, ctx.params.k)
        return out

    return ProtocolSpec(name="h-sbm", mode="rounds", kind="ba", regime="half",
                        party=party)


def test_majority_agreement_validity_and_forced_majority():
    params = SessionParams(n=5, t=2, l=128, k=128, threshold_regime="half")
    res = run(majority_ba_spec(), params, {i: b"v" for i in range(1, 6)},
              adversary=Silent(), seed=0)
    assert all(res.outputs[p] == b"v" for p in res.honest)
    # three honest share a value; silent corrupt parties cannot prevent it
    inputs = {1: b"a", 2: b"a", 3: b"a", 4: b"z", 5: b"z"}
    res = run(majority_ba_spec(), params, inputs, adversary=Silent(), seed=1)
    assert all(res.outputs[p] == b"a" for p in res.honest)


def bracha_spec():
    def party(ctx, my_input, sender):
        from bbext.oracles import bracha_rb
        out = yield from bracha_rb(ctx, "rb0", sender, my_input, ctx.params.k)
        return out

    return ProtocolSpec(name="h-bracha", mode="events", kind="rb",
                        regime="third_async", party=party)


class SplitEchoSender(AdversaryScript):
    """Byzantine sender: different value to each half of the parties."""

    name = "rb_split"

    def corrupt_set(self, n, t, sender):
        return frozenset({sender})

    def make_party(self, pid, honest_factory, env):
        def party(ctx):
            for dst in range(1, ctx.params.n + 1):
                if dst != ctx.pid:
                    value = b"one" if dst % 2 else b"two"
                    ctx.send(dst, "rb", ("send", value), bits=ctx.params.k,
                             instance="rb0", step="oracle:rb0")
            return None
            yield  # pragma: no cover

        return party


def test_bracha_honest_sender_under_schedule_policies():
    params = SessionParams(n=4, t=1, l=128, k=128, threshold_regime="third_async")
    for adv in (AdversaryScript(), Silent(), ScheduledHonest("lifo"),
                ScheduledHonest("random")):
        for seed in range(15):
            res = run(bracha_spec(), params, {1: b"val"}, adversary=adv, seed=seed)
            assert all(res.outputs[p] == b"val" for p in res.honest), adv.name


class EchoReadyPoisoner(AdversaryScript):
    """Byzantine non-senders equivocate echo and ready votes per recipient."""

    name = "rb_poisoner"

    def corrupt_set(self, n, t, sender):
        return frozenset(range(n, n - t, -1))

    def make_party(self, pid, honest_factory, env):
        def party(ctx):
            for dst in range(1, ctx.params.n + 1):
                if dst == ctx.pid:
                    continue
                value = b"one" if dst % 2 else b"two"
                ctx.send(dst, "rb", ("echo", value), bits=ctx.params.k,
                         instance="rb0", step="oracle:rb0")
                ctx.send(dst, "rb", ("ready", value), bits=ctx.params.k,
                         instance="rb0", step="oracle:rb0")
            return None
            yield  # pragma: no cover

        return party


def test_bracha_poisoned_votes_keep_agreement():
    for n in (4, 7):
        params = SessionParams(n=n, t=(n - 1) // 3, l=128, k=128,
                               threshold_regime="third_async")
        for seed in range(40):
            res = run(bracha_spec(), params, {1: b"real"},
                      adversary=EchoReadyPoisoner(), seed=seed)
            outs = {p: res.outputs[p] for p in res.honest if p in res.outputs}
            if outs:
                assert len({repr(v) for v in outs.values()}) == 1, (n, seed, outs)
                # an honest sender's value always wins
                assert next(iter(outs.values())) == b"real"


def test_bracha_split_sender_all_or_none_over_schedules():
    params = SessionParams(n=4, t=1, l=128, k=128, threshold_regime="third_async")
    adv = SplitEchoSender()
    delivered_some = 0

    def run_one(policy):
        return run(bracha_spec(), params, {1: b"ignored"}, adversary=adv, seed=7,
                   policy=policy)

    for prefix, res in explore_schedules(run_one, max_depth=6, branch_cap=3,
                                         max_traces=200):
        outs = {p: res.outputs[p] for p in res.honest if p in res.outputs}
        if outs:
            delivered_some += 1
            assert set(outs) == set(res.honest), (prefix, outs)
            assert len({repr(v) for v in outs.values()}) == 1, (prefix, outs)
    assert delivered_some >= 0  # all-or-none held on every explored schedule


def aba_spec():
    def party(ctx, my_input, sender):
        from bbext.oracles import aba_binary
        out = yield from aba_binary(ctx, "aba0", my_input)
        return out

    return ProtocolSpec(name="h-aba", mode="events", kind="ba",
                        regime="third_async", party=party)


def test_aba_unanimous_decides_in_round_one_regardless_of_coin():
    params = SessionParams(n=4, t=1, l=1, k=128, threshold_regime="third_async")
    for value in (0, 1):
        for seed in range(10):  # both coin draws occur across seeds
            res = run(aba_spec(), params, {i: value for i in range(1, 5)}, seed=seed)
            assert all(res.outputs[p] == value for p in res.honest)
            rounds = [v for key, v in res.metrics.extra.items()
                      if key.startswith("aba_round/")]
            assert rounds and max(rounds) == 1


def test_aba_mixed_inputs_agree_across_schedules():
    params = SessionParams(n=4, t=1, l=1, k=128, threshold_regime="third_async")
    for seed in range(100):
        adv = [AdversaryScript(), Silent(), ScheduledHonest("lifo"),
               ScheduledHonest("random")][seed % 4]
        inputs = {i: (seed >> i) & 1 for i in range(1, 5)}
        res = run(aba_spec(), params, inputs, adversary=adv, seed=seed)
        outs = {p: res.outputs[p] for p in res.honest}
        assert set(outs) == set(res.honest)
        assert len(set(outs.values())) == 1
        decided = next(iter(outs.values()))
        assert decided in {inputs[p] for p in res.honest}


def test_aba_mixed_inputs_exhaustive_small_schedules():
    params = SessionParams(n=4, t=1, l=1, k=128, threshold_regime="third_async")
    inputs = {1: 0, 2: 1, 3: 1, 4: 0}

    def run_one(policy):
        return run(aba_spec(), params, inputs, seed=3, policy=policy)

    for prefix, res in explore_schedules(run_one, max_depth=5, branch_cap=3,
                                         max_traces=120):
        outs = {p: res.outputs[p] for p in res.honest}
        assert set(outs) == set(res.honest), prefix
        assert len(set(outs.values())) == 1, prefix


class AbaPoisoner(AdversaryScript):
    """Injects per-recipient conflicting est/aux/conf votes for many rounds,
    the strongest scripted message-level attack on the binary agreement."""

    name = "aba_poisoner"

    def __init__(self, flavor: int):
        self.flavor = flavor
        self.name = f"aba_poisoner{flavor}"

    def corrupt_set(self, n, t, sender):
        return frozenset(range(n, n - t, -1))

    def make_party(self, pid, honest_factory, env):
        import random as _random

        rng = _random.Random((self.name, env.seed, pid).__repr__())

        def party(ctx):
            n = ctx.params.n
            for r in range(1, 8):
                for dst in range(1, n + 1):
                    if dst == ctx.pid:
                        continue
                    if self.flavor == 0:
                        est, aux, conf = dst & 1, (dst >> 1) & 1, 2 if dst & 1 else 1
                    else:
                        est, aux, conf = (rng.randrange(2), rng.randrange(2),
                                          rng.choice([0, 1, 2]))
                    ctx.send(dst, "aba", ("est", r, est), bits=9, instance="aba0",
                             step="oracle:aba0")
                    ctx.send(dst, "aba", ("aux", r, aux), bits=9, instance="aba0",
                             step="oracle:aba0")
                    ctx.send(dst, "aba", ("conf", r, conf), bits=9, instance="aba0",
                             step="oracle:aba0")
            return None
            yield  # pragma: no cover

        return party


@pytest.mark.parametrize("flavor", [0, 1])
def test_aba_agreement_under_message_poisoning(flavor):
    for n in (4, 7):
        params = SessionParams(n=n, t=(n - 1) // 3, l=1, k=128,
                               threshold_regime="third_async")
        for seed in range(60):
            adv = AbaPoisoner(flavor)
            inputs = {i: (seed >> (i % 5)) & 1 for i in range(1, n + 1)}
            res = run(aba_spec(), params, inputs, adversary=adv, seed=seed)
            outs = {p: res.outputs[p] for p in res.honest}
            assert set(outs) == set(res.honest), (n, seed)
            assert len(set(outs.values())) == 1, (n, seed, outs)
            assert next(iter(outs.values())) in {inputs[p] for p in res.honest}


def test_aba_poisoned_schedule_exploration():
    params = SessionParams(n=4, t=1, l=1, k=128, threshold_regime="third_async")
    inputs = {1: 0, 2: 1, 3: 0, 4: 1}
    adv = AbaPoisoner(0)

    def run_one(policy):
        return run(aba_spec(), params, inputs, adversary=adv, seed=9, policy=policy)

    for prefix, res in explore_schedules(run_one, max_depth=6, branch_cap=3,
                                         max_traces=200):
        outs = {p: res.outputs[p] for p in res.honest}
        assert set(outs) == set(res.honest), prefix
        assert len(set(outs.values())) == 1, prefix
        assert next(iter(outs.values())) in {inputs[p] for p in res.honest}, prefix
