"""Error-free (signature-free) extension protocols for t = floor((n-1)/3).

Messages are cut into t+1 blocks, so the n-symbol code corrects up to t
wrong symbols. Parties cross-check each other's symbols, build a local
consistency graph, extract a star from it, and derive a core set whose
honest members provably hold one common message. Majority votes over those
sets recover one symbol per party, and decoding the collected symbols
yields the output.
"""

from __future__ import annotations

from .. import blocks, rs
from ..oracles import BrachaMachine, parallel_chain_bcast
from ..simnet import Ctx, NEXT_ROUND, Until
from ..star import NOSTAR, PartyGraph, derive_fe, star
from .base import ProtocolSpec


def _require_ef_threshold(ctx: Ctx) -> None:
    n, t = ctx.params.n, ctx.params.t
    if t != (n - 1) // 3:
        raise ValueError("error-free protocols fix t = floor((n-1)/3)")


def _flag_owner(instance: str, n: int) -> int | None:
    tail = instance.split("/", 1)[1]
    if not tail.isdigit():
        return None
    j = int(tail)
    return j if 1 <= j <= n else None


def _popcount_set(bitmap: int, n: int) -> frozenset[int]:
    bitmap &= (1 << n) - 1
    return frozenset(j + 1 for j in range(n) if bitmap & (1 << j))


def _strict_majority(votes: list[bytes], member_count: int) -> bytes | None:
    threshold = (member_count + 2) // 2  # ceil((count+1)/2)
    counts: dict[bytes, int] = {}
    for v in votes:
        counts[v] = counts.get(v, 0) + 1
        if counts[v] >= threshold:
            return v
    return None


def _greedy_common_vote(candidates: list[int], e_vecs: dict[int, int],
                        priv_sym: dict[int, bytes], n: int, t: int) -> bytes | None:
    """Scan core sets in ascending owner order; the first symbol value backed
    by t+1 sets with equal strict-majority votes wins."""
    counts: dict[bytes, int] = {}
    for x in sorted(candidates):
        bitmap = e_vecs.get(x)
        if bitmap is None:
            continue
        members = _popcount_set(bitmap, n)
        if not members:
            continue
        votes = [priv_sym[j] for j in sorted(members) if j in priv_sym]
        maj = _strict_majority(votes, len(members))
        if maj is None:
            continue
        counts[maj] = counts.get(maj, 0) + 1
        if counts[maj] >= t + 1:
            return maj
    return None


def _decode_symbol_table(majs: dict[int, bytes], n: int, t: int, share_len: int,
                         max_errors: int, absent_as_error: bool) -> bytes | None:
    """Decode from per-party symbol votes.

    Wrong-length entries count toward the error budget. Absent entries are
    zero-filled errors in the synchronous protocol (fixed error budget t,
    no erasures) and erasures in the asynchronous retry loop.
    """
    symbols: list = [None] * n
    for j in range(1, n + 1):
        raw = majs.get(j)
        if isinstance(raw, bytes) and len(raw) == share_len:
            symbols[j - 1] = rs.unpack_symbols(raw)
        elif j in majs or absent_as_error:
            symbols[j - 1] = rs.unpack_symbols(bytes(share_len))
    cw = rs.Codeword(symbols=symbols, n=n, b=t + 1)
    erasures = sum(1 for s in symbols if s is None)
    try:
        data = rs.rs_decode(cw, max_errors, erasures)
    except ValueError:
        return None
    if data is None:
        return None
    try:
        payload, _ = rs.bits_from_data(data)
    except ValueError:
        return None
    return payload


def ef_sync_ba(ctx: Ctx, my_input: bytes, sender: int | None = None):
    """Synchronous error-free agreement; falls back to the all-zero message
    when fewer than 2t+1 parties report a usable core set."""
    _require_ef_threshold(ctx)
    params = ctx.params
    n, t = params.n, params.t
    ctx.set_step("symbols")
    shares = blocks.encode(my_input, t + 1, n, bit_len=params.l)
    row = {j: shares[j - 1].share for j in range(1, n + 1)}
    sbits = 8 * len(row[1])
    ctx.engine.metrics.extra.setdefault("share_bits", sbits)
    self_sym: dict[int, bytes] = {ctx.pid: row[ctx.pid]}
    priv_sym: dict[int, bytes] = {ctx.pid: row[ctx.pid]}
    ctx.broadcast("sym_self", row[ctx.pid], bits=sbits, step="symbols")
    for j in range(1, n + 1):
        if j != ctx.pid:
            ctx.send(j, "sym_priv", row[j], bits=sbits, step="symbols")
    yield NEXT_ROUND

    ctx.set_step("vectors")
    for env in ctx.inbox(kind="sym_self"):
        if isinstance(env.payload, bytes):
            self_sym.setdefault(env.src, env.payload)
    for env in ctx.inbox(kind="sym_priv"):
        if isinstance(env.payload, bytes):
            priv_sym.setdefault(env.src, env.payload)
    v = 1 << (ctx.pid - 1)
    for j in range(1, n + 1):
        if j != ctx.pid and j in self_sym and j in priv_sym:
            if row[j] == self_sym[j] and row[ctx.pid] == priv_sym[j]:
                v |= 1 << (j - 1)
    vectors: dict[int, int] = {ctx.pid: v}
    ctx.broadcast("v_vec", v, bits=n, step="vectors")
    yield NEXT_ROUND

    ctx.set_step("core")
    for env in ctx.inbox(kind="v_vec"):
        if isinstance(env.payload, int):
            vectors.setdefault(env.src, env.payload & ((1 << n) - 1))
    edges = [
        (x, y)
        for x in range(1, n + 1)
        for y in range(x + 1, n + 1)
        if x in vectors and y in vectors
        and vectors[x] & (1 << (y - 1)) and vectors[y] & (1 << (x - 1))
    ]
    graph = PartyGraph.from_edges(n, edges)
    result = star(graph, n, t)
    e_set: frozenset[int] = frozenset()
    if result is not NOSTAR:
        fe = derive_fe(graph, result.C, result.D, n, t)
        if fe is not None:
            e_set = fe[1]
    flag = 1 if e_set else 0
    ctx.set_step("flags")
    e_vecs: dict[int, int] = {}
    if e_set:
        bitmap = sum(1 << (j - 1) for j in e_set)
        e_vecs[ctx.pid] = bitmap
        ctx.broadcast("e_vec", bitmap, bits=n, step="flags")
    impl = ctx.session.oracle_impl.get("sync_bb", "ideal")
    flags: dict[int, object] = {}
    if impl == "ideal":
        for j in range(1, n + 1):
            ctx.oracle_submit("sync_bb", flag if j == ctx.pid else None, 1,
                              instance=f"flag/{j}", sender=j)
        while not all(ctx.has_oracle_result(f"flag/{j}") for j in range(1, n + 1)):
            yield NEXT_ROUND
        flags = {j: ctx.oracle_result(f"flag/{j}") for j in range(1, n + 1)}
    else:
        flags = yield from parallel_chain_bcast(ctx, "flag", flag, 1, "sync_bb")

    ctx.set_step("majority")
    ones = [j for j in range(1, n + 1) if flags.get(j) == 1]
    if len(ones) < 2 * t + 1:
        return bytes((params.l + 7) // 8)
    for env in ctx.inbox(kind="e_vec"):
        if isinstance(env.payload, int):
            e_vecs.setdefault(env.src, env.payload)
    maj = _greedy_common_vote(
        [x for x in ones if x in e_vecs], e_vecs, priv_sym, n, t
    )
    assert maj is not None, "a common symbol group must exist once 2t+1 flags carry"
    majs: dict[int, bytes] = {ctx.pid: maj}
    ctx.broadcast("maj_val", maj, bits=sbits, step="majority")
    yield NEXT_ROUND

    ctx.set_step("decode")
    for env in ctx.inbox(kind="maj_val"):
        majs.setdefault(env.src, env.payload)
    payload = _decode_symbol_table(majs, n, t, len(row[1]), max_errors=t,
                                   absent_as_error=True)
    assert payload is not None, "decoding must carry with 2t+1 honest symbols"
    return payload


def ef_async_rb(ctx: Ctx, my_input: bytes | None, sender: int):
    """Asynchronous error-free reliable broadcast: consistency edges arrive
    one acknowledgement pair at a time, the star is re-extracted per new
    edge, and decoding retries as symbol votes accumulate."""
    _require_ef_threshold(ctx)
    params = ctx.params
    n, t = params.n, params.t
    share_len = rs.share_bits(params.l, t + 1) // 8
    ctx.engine.metrics.extra.setdefault("share_bits", 8 * share_len)
    impl = ctx.session.oracle_impl.get("async_rb", "ideal")

    message: bytes | None = None
    row: dict[int, bytes] = {}
    self_sym: dict[int, bytes] = {}
    priv_sym: dict[int, bytes] = {}
    ok_sent: set[int] = set()
    ok_seen: dict[int, set[int]] = {}
    graph = PartyGraph(n=n, rows=tuple([0] * n))
    frozen = False
    flags: dict[int, object] = {}
    e_vecs: dict[int, int] = {}
    majs: dict[int, bytes] = {}
    maj_sent = False
    machines: dict[int, BrachaMachine] = {}

    def machine(j: int) -> BrachaMachine:
        if j not in machines:
            machines[j] = BrachaMachine(ctx, f"flag/{j}", j, 1)
        return machines[j]

    def adopt_message(m: bytes) -> None:
        nonlocal message
        if message is not None or not isinstance(m, bytes):
            return
        message = m
        ctx.set_step("symbols")
        shares = blocks.encode(message, t + 1, n, bit_len=8 * len(message))
        for j in range(1, n + 1):
            row[j] = shares[j - 1].share
        self_sym.setdefault(ctx.pid, row[ctx.pid])
        priv_sym.setdefault(ctx.pid, row[ctx.pid])
        ctx.broadcast("sym_self", row[ctx.pid], bits=8 * len(row[ctx.pid]), step="symbols")
        for j in range(1, n + 1):
            if j != ctx.pid:
                ctx.send(j, "sym_priv", row[j], bits=8 * len(row[j]), step="symbols")
        for j in list(self_sym):
            maybe_ok(j)

    def maybe_ok(j: int) -> None:
        if j == ctx.pid or j in ok_sent or not row:
            return
        if j in self_sym and j in priv_sym and row[j] == self_sym[j]:
            ok_sent.add(j)
            ctx.set_step("acks")
            ctx.broadcast("ok", (ctx.pid, j), bits=32, step="acks")
            note_ok(ctx.pid, j)

    def note_ok(x: int, y: int) -> None:
        nonlocal graph, frozen
        if not isinstance(y, int) or not (1 <= y <= n) or x == y:
            return
        ok_seen.setdefault(x, set()).add(y)
        if frozen:
            return
        if y in ok_seen and x in ok_seen[y] and not graph.has_edge(x, y):
            graph = graph.with_edge(x, y)
            result = star(graph, n, t)
            if result is NOSTAR:
                return
            fe = derive_fe(graph, result.C, result.D, n, t)
            if fe is None:
                return
            e_set = fe[1]
            frozen = True
            bitmap = sum(1 << (j - 1) for j in e_set)
            e_vecs[ctx.pid] = bitmap
            ctx.set_step("flags")
            if impl == "ideal":
                ctx.oracle_submit("async_rb", 1, 1, instance=f"flag/{ctx.pid}", sender=ctx.pid)
            else:
                machine(ctx.pid).start(1)
            ctx.broadcast("e_vec", bitmap, bits=n, step="flags")

    if ctx.pid == sender and my_input is not None:
        ctx.set_step("payload")
        ctx.broadcast("payload", my_input, bits=params.l, step="payload")
        adopt_message(my_input)

    scanned = 0
    while True:
        box = ctx.mailbox
        for env in box[scanned:]:
            if env.kind == "payload" and env.src == sender:
                adopt_message(env.payload)
            elif env.kind == "sym_self" and isinstance(env.payload, bytes):
                if env.src not in self_sym:
                    self_sym[env.src] = env.payload
                    maybe_ok(env.src)
            elif env.kind == "sym_priv" and isinstance(env.payload, bytes):
                if env.src not in priv_sym:
                    priv_sym[env.src] = env.payload
                    maybe_ok(env.src)
            elif env.kind == "ok":
                try:
                    x, y = env.payload
                except (TypeError, ValueError):
                    continue
                if x == env.src:
                    note_ok(x, y)
            elif env.kind == "rb" and env.instance and env.instance.startswith("flag/"):
                j = _flag_owner(env.instance, n)
                if j is not None:
                    machine(j).feed(env)
            elif (env.kind == "oracle_out" and env.src == 0 and env.instance
                  and env.instance.startswith("flag/")):
                j = _flag_owner(env.instance, n)
                if j is not None:
                    flags.setdefault(j, env.payload)
            elif env.kind == "e_vec" and isinstance(env.payload, int):
                e_vecs.setdefault(env.src, env.payload)
            elif env.kind == "maj_val":
                majs.setdefault(env.src, env.payload)
        scanned = len(box)
        for j, m in machines.items():
            if m.has_delivered:
                flags.setdefault(j, m.delivered)
        ones = [j for j in range(1, n + 1) if flags.get(j) == 1]
        if not maj_sent and len(ones) >= 2 * t + 1:
            maj = _greedy_common_vote(
                [x for x in ones if x in e_vecs], e_vecs, priv_sym, n, t
            )
            if maj is not None:
                maj_sent = True
                majs.setdefault(ctx.pid, maj)
                ctx.set_step("majority")
                ctx.broadcast("maj_val", maj, bits=8 * share_len, step="majority")
        if len(majs) >= 2 * t + 1:
            max_errors = min(len(majs) - (2 * t + 1), t)
            payload = _decode_symbol_table(majs, n, t, share_len, max_errors,
                                           absent_as_error=False)
            if payload is not None:
                return payload
        size = len(ctx.mailbox)
        if size == scanned:
            yield Until(lambda: len(ctx.mailbox) > size)


EF_PROTOCOLS = [
    ProtocolSpec(name="ef-sync-ba-third", mode="rounds", kind="ba", regime="third_sync_ef",
                 party=ef_sync_ba),
    ProtocolSpec(name="ef-async-rb-third", mode="events", kind="rb", regime="third_async",
                 party=ef_async_rb),
]
