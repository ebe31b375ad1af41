"""Reassignment mechanisms.

All mechanisms return assignments over divisions 1..n with the identity
owner map (division i brings worker i).  The partition-based mechanisms
(chain dictatorship, two-stage dictatorship) additionally guarantee complete
exchange: nobody ends up with their own worker, because choice sets never
contain the chooser's own worker.  The draft mechanism achieves the same
without a partition via its endgame rule; the backward top-trading variant
deliberately does not (divisions may keep their own worker).

Cores are plain functions over order tuples so that exhaustive sweeps can
skip dataclass construction; public ``run_*`` wrappers take a Problem and
return (Assignment, Trace) or Assignment.
"""

from __future__ import annotations

import random

from .model import (
    Assignment,
    FinalOrder,
    Infeasible,
    MalformedProblem,
    MechanismId,
    Problem,
    Trace,
    TraceStep,
)
from .partition import canonical_partition

MECHANISM_TAGS = ("csd", "tsd", "cettc", "bttc", "ttc", "npb", "sd")


def effective_partition(problem: Problem):
    """The problem's partition, or the canonical one for its size."""
    if problem.partition is not None:
        return problem.partition
    return canonical_partition(problem.n)


def _group_tables(partition):
    """(group_of, pools): division -> group index, group index -> worker tuple."""
    group_of = {}
    for k, g in enumerate(partition.groups):
        for i in g.divisions:
            group_of[i] = k
    pools = tuple(g.workers for g in partition.groups)
    return group_of, pools


def _first_available(order, available):
    for w in order:
        if w in available:
            return w
    raise AssertionError("empty choice set")  # pools are sized to never run dry


# -- serial dictatorships ---------------------------------------------------


def _sd_groups_core(orders, order, group_of, pools):
    n = len(orders)
    taken = set()
    mapping = [0] * n
    for i in order:
        pool = pools[group_of[i]]
        w = _first_available(orders[i - 1], set(pool) - taken)
        mapping[i - 1] = w
        taken.add(w)
    return tuple(mapping)


def run_sd_within_groups(problem: Problem, order) -> Assignment:
    """Serial dictatorship where each division picks from its own group pool.

    ``order`` is a FinalOrder or a sequence of divisions.  Outcomes depend
    only on the order restricted to each group, not on the interleaving.
    """
    partition = effective_partition(problem)
    seq = order.global_order if isinstance(order, FinalOrder) else tuple(order)
    group_of, pools = _group_tables(partition)
    return Assignment(_sd_groups_core(problem.profile.orders, seq, group_of, pools))


# -- chain dictatorship (single stage) --------------------------------------


def _csd_core(orders, priority, group_of, pools):
    n = len(orders)
    pr_pos = {i: p for p, i in enumerate(priority)}
    taken = set()
    unchosen = set(range(1, n + 1))
    mapping = [0] * n
    steps = []
    chooser, kind = priority[0], "start"
    for t in range(1, n + 1):
        pool = set(pools[group_of[chooser]]) - taken
        w = _first_available(orders[chooser - 1], pool)
        mapping[chooser - 1] = w
        taken.add(w)
        unchosen.discard(chooser)
        steps.append((t, chooser, w, kind))
        if not unchosen:
            break
        if w in unchosen:  # owner of worker w is division w
            chooser, kind = w, "owner-call"
        else:
            chooser, kind = min(unchosen, key=pr_pos.__getitem__), "fallback"
    return tuple(mapping), steps


def run_csd(problem: Problem) -> tuple[Assignment, Trace]:
    """Chain dictatorship: each pick hands the turn to the owner of the taken
    worker; if that owner already chose, the turn falls back to the best
    remaining division in the priority order."""
    partition = effective_partition(problem)
    group_of, pools = _group_tables(partition)
    mapping, steps = _csd_core(problem.profile.orders, problem.priority, group_of, pools)
    return Assignment(mapping), Trace(tuple(TraceStep(*s) for s in steps))


# -- two-stage dictatorship --------------------------------------------------


def _tsd_nominations(orders, priority, group_of, pools):
    available = set(range(1, len(orders) + 1))
    noms = []
    for i in priority:
        pool = set(pools[group_of[i]]) & available
        w = _first_available(orders[i - 1], pool)
        available.discard(w)
        noms.append((i, w))
    return noms


def _tsd_core(orders, priority, group_of, pools):
    noms = _tsd_nominations(orders, priority, group_of, pools)
    # Owners of nominated workers, in nomination order, become the final
    # priority; the assignment is a fresh groupwise dictatorship under it.
    final = tuple(w for _, w in noms)  # owner of worker w is division w
    mapping = _sd_groups_core(orders, final, group_of, pools)
    return mapping, noms, final


def run_tsd(problem: Problem) -> tuple[Assignment, Trace]:
    """Two-stage dictatorship.

    Stage 1 walks the priority order; each division nominates its favorite
    still-unnominated worker in its pool.  Owners of nominated workers, in
    nomination order, form the final priority.  Stage 2 reruns the groupwise
    dictatorship from scratch under that final priority.  The trace records
    the stage-1 nominations.
    """
    partition = effective_partition(problem)
    group_of, pools = _group_tables(partition)
    mapping, noms, _ = _tsd_core(problem.profile.orders, problem.priority, group_of, pools)
    steps = tuple(
        TraceStep(t, i, w, "nominate") for t, (i, w) in enumerate(noms, start=1)
    )
    return Assignment(mapping), Trace(steps)


def final_order(problem: Problem, mechanism: str) -> FinalOrder:
    """The division order a mechanism effectively runs its dictatorship in.

    For "csd" this is the realized chooser sequence; for "tsd" it is the
    owner sequence of stage-1 nominations.  Running run_sd_within_groups on
    the result reproduces the mechanism's assignment.
    """
    partition = effective_partition(problem)
    group_of, pools = _group_tables(partition)
    if mechanism == "csd":
        _, steps = _csd_core(problem.profile.orders, problem.priority, group_of, pools)
        seq = tuple(s[1] for s in steps)
    elif mechanism == "tsd":
        _, _, seq = _tsd_core(problem.profile.orders, problem.priority, group_of, pools)
    else:
        raise MalformedProblem(f"no final order for mechanism {mechanism!r}")
    return FinalOrder.from_global(seq, partition)


# -- top trading cycles, complete-exchange variant ---------------------------


def initial_derangement(n: int, mu0="cyclic", seed: int | None = None):
    """Resolve the starting endowment swap for the trading mechanism.

    "cyclic" shifts every worker by one; "random" draws uniformly among all
    derangements by rejection (requires a seed for reproducibility); an
    explicit sequence is validated.
    """
    if n < 2:
        raise Infeasible("complete exchange needs at least two divisions")
    if mu0 == "cyclic":
        return tuple(i % n + 1 for i in range(1, n + 1))
    if mu0 == "random":
        if seed is None:
            raise MalformedProblem("random initial swap needs a seed")
        rng = random.Random(seed)
        ids = list(range(1, n + 1))
        while True:
            rng.shuffle(ids)
            if all(w != i for i, w in enumerate(ids, start=1)):
                return tuple(ids)
    mu0 = tuple(mu0)
    if len(mu0) != n or set(mu0) != set(range(1, n + 1)):
        raise MalformedProblem(f"initial swap must be a permutation of 1..{n}")
    if any(w == i for i, w in enumerate(mu0, start=1)):
        raise MalformedProblem("initial swap must not fix any division's own worker")
    return mu0


def _cycles(succ, nodes):
    """Cycles of a functional graph restricted to ``nodes``, each cycle as a
    tuple starting at its smallest member, cycles sorted by that member."""
    nodes = set(nodes)
    on_cycle = set()
    seen = set()
    for start in nodes:
        if start in seen:
            continue
        path = []
        pos = {}
        v = start
        while v not in pos and v not in seen:
            pos[v] = len(path)
            path.append(v)
            v = succ[v]
        if v in pos:  # fresh cycle closed
            on_cycle.update(path[pos[v] :])
        seen.update(path)
    out = []
    done = set()
    for v in sorted(on_cycle):
        if v in done:
            continue
        cyc = [v]
        w = succ[v]
        while w != v:
            cyc.append(w)
            w = succ[w]
        done.update(cyc)
        out.append(tuple(cyc))
    return out


def _cettc_core(orders, mu0):
    n = len(orders)
    holder = {mu0[i - 1]: i for i in range(1, n + 1)}  # worker -> temp owner
    active = set(range(1, n + 1))
    mapping = [0] * n
    events = []
    rnd = 0
    while active:
        rnd += 1
        avail = {mu0[j - 1] for j in active}
        point = {}
        for i in active:
            point[i] = _first_available(orders[i - 1], avail - {i})
        succ = {i: holder[point[i]] for i in active}
        for cyc in _cycles(succ, active):
            for i in cyc:
                mapping[i - 1] = point[i]
                events.append((i, point[i]))
            active.difference_update(cyc)
    return tuple(mapping), events


def run_cettc(problem: Problem, mu0="cyclic", seed: int | None = None) -> tuple[Assignment, Trace]:
    """Top trading cycles after a preference-independent full swap.

    Everyone first swaps to the initial derangement mu0, then trades: each
    division points at its best still-present worker other than its own
    original one, workers point at their temporary holders, and all cycles
    clear each round.  The own-worker exclusion keeps the final assignment a
    derangement regardless of preferences.
    """
    mu0 = initial_derangement(problem.n, mu0, seed)
    mapping, events = _cettc_core(problem.profile.orders, mu0)
    steps = tuple(
        TraceStep(t, i, w, "cycle") for t, (i, w) in enumerate(events, start=1)
    )
    return Assignment(mapping), Trace(steps)


def _ttc_core(orders):
    n = len(orders)
    active = set(range(1, n + 1))
    mapping = [0] * n
    while active:
        point = {i: _first_available(orders[i - 1], active) for i in active}
        for cyc in _cycles(point, active):  # worker j's owner is division j
            for i in cyc:
                mapping[i - 1] = point[i]
            active.difference_update(cyc)
    return tuple(mapping)


def run_ttc(problem: Problem) -> Assignment:
    """Classic top trading cycles from the identity endowment (divisions may
    keep their own worker)."""
    return Assignment(_ttc_core(problem.profile.orders))


# -- backward top trading cycles ---------------------------------------------


def _bttc_core(orders):
    n = len(orders)
    ranks = tuple({w: r for r, w in enumerate(o)} for o in orders)

    def pref(i, a, b):
        return ranks[i - 1][a] < ranks[i - 1][b]

    # Forward pass: point at the best other remaining division's worker
    # (self if alone); remove every cycle each step.
    active = set(range(1, n + 1))
    p = {}
    stages = []  # list of (step, [cycles...])
    step = 0
    while active:
        step += 1
        for i in active:
            others = active - {i}
            p[i] = min(others, key=ranks[i - 1].__getitem__) if others else i
        cycs = _cycles({i: p[i] for i in active}, active)
        stages.append((step, cycs))
        for cyc in cycs:
            active.difference_update(cyc)

    # Backward pass: a cycle unwinds (members keep their own workers) iff
    # every member prefers own to pointed worker and nobody settled in a
    # later step prefers any of this cycle's workers to what they got.
    mapping = [0] * n
    decided = []
    labels = {}
    for step, cycs in reversed(stages):
        for cyc in cycs:
            stay = all(pref(i, i, p[i]) for i in cyc)
            if stay and decided:
                stay = all(pref(j, mapping[j - 1], x) for j in decided for x in cyc)
            for i in cyc:
                mapping[i - 1] = i if stay else p[i]
        for cyc in cycs:
            decided.extend(cyc)
            for i in cyc:
                labels[i] = "stay" if mapping[i - 1] == i else "trade"
    events = []
    for step, cycs in stages:
        for cyc in cycs:
            for i in cyc:
                events.append((i, mapping[i - 1], labels[i]))
    return tuple(mapping), events


def run_bttc(problem: Problem) -> tuple[Assignment, Trace]:
    """Backward top trading cycles.

    Forward, divisions repeatedly point at their favorite worker among the
    other remaining divisions' own workers and all cycles are removed each
    step.  Backward from the last step, each cycle either unwinds to own
    workers or executes its trades; unwinding requires unanimous own-worker
    preference inside the cycle and no envy from divisions settled later.
    The output need not be a derangement.
    """
    mapping, events = _bttc_core(problem.profile.orders)
    steps = tuple(
        TraceStep(t, i, w, kind) for t, (i, w, kind) in enumerate(events, start=1)
    )
    return Assignment(mapping), Trace(steps)


# -- nomination draft ---------------------------------------------------------


def npb_draft_priority(problem: Problem) -> tuple[int, ...]:
    """Draft order: clubs sorted by votes received on their own player
    (descending), ties broken by the problem's priority."""
    return _npb_draft(problem.profile.orders, problem.priority)


def _npb_draft(orders, priority):
    n = len(orders)
    vote = {}
    for i in range(1, n + 1):
        vote[i] = next(w for w in orders[i - 1] if w != i)
    count = {i: 0 for i in range(1, n + 1)}
    for w in vote.values():
        count[w] += 1
    pr_pos = {i: p for p, i in enumerate(priority)}
    draft = sorted(range(1, n + 1), key=lambda i: (-count[i], pr_pos[i]))
    return tuple(draft)


def _npb_core(orders, priority):
    n = len(orders)
    if n < 3:
        raise Infeasible("the draft mechanism needs at least three clubs")
    vote = {i: next(w for w in orders[i - 1] if w != i) for i in range(1, n + 1)}
    draft = _npb_draft(orders, priority)
    draft_pos = {i: p for p, i in enumerate(draft)}
    available = set(range(1, n + 1))
    unassigned = set(range(1, n + 1))
    mapping = [0] * n
    steps = []
    chooser, kind = draft[0], "start"
    for t in range(1, n + 1):
        if len(unassigned) == 2:
            # Endgame: take the other remaining club's player.  Chain
            # structure guarantees it is still on the board.
            other = (unassigned - {chooser}).pop()
            assert other in available, "endgame player already taken"
            w, kind = other, "last-two"
        elif len(unassigned) == 1:
            w = next(iter(available))
            assert w != chooser, "last club left with its own player"
        elif vote[chooser] in available:
            w = vote[chooser]
        else:
            w = _first_available(orders[chooser - 1], available - {chooser})
        mapping[chooser - 1] = w
        available.discard(w)
        unassigned.discard(chooser)
        steps.append((t, chooser, w, kind))
        if not unassigned:
            break
        if w in unassigned:  # club w still to move owns player w
            chooser, kind = w, "owner-call"
        else:
            chooser, kind = min(unassigned, key=draft_pos.__getitem__), "fallback"
    return tuple(mapping), steps, draft


def run_npb(problem: Problem) -> tuple[Assignment, Trace]:
    """Nomination draft.

    Each club's vote is the top player on its list other than its own; clubs
    are ordered by votes received on their player (priority breaks ties).
    The first club picks, then the owner of the picked player moves next
    (fallback: best unassigned club in draft order).  A club takes its voted
    player if still available, otherwise its favorite available player other
    than its own; when only two clubs remain, the mover must take the other
    remaining club's player, which forces a full exchange.
    """
    mapping, steps, _ = _npb_core(problem.profile.orders, problem.priority)
    return Assignment(mapping), Trace(tuple(TraceStep(*s) for s in steps))


# -- dispatch -----------------------------------------------------------------


def run_mechanism(mechanism: MechanismId | str, problem: Problem) -> Assignment:
    """Run a mechanism by id and return just the assignment."""
    mid = MechanismId(mechanism) if isinstance(mechanism, str) else mechanism
    if mid.tag == "csd":
        return run_csd(problem)[0]
    if mid.tag == "tsd":
        return run_tsd(problem)[0]
    if mid.tag == "cettc":
        return run_cettc(problem, mid.mu0 or "cyclic", mid.seed)[0]
    if mid.tag == "bttc":
        return run_bttc(problem)[0]
    if mid.tag == "ttc":
        return run_ttc(problem)
    if mid.tag == "npb":
        return run_npb(problem)[0]
    if mid.tag == "sd":
        # Baseline: serial dictatorship within groups under a fixed
        # exogenous order (no endogenous order stage).
        return run_sd_within_groups(problem, mid.order or problem.priority)
    raise MalformedProblem(f"unknown mechanism {mid.tag!r}")
