"""Property verification by enumeration.

Checks strategyproofness (sp), respect of improvements (ri), complete
exchange (ce), efficiency among derangements (cee), efficiency among
partition-feasible assignments (eap), plain Pareto efficiency (pareto) and
own-position invariance for any mechanism, either exhaustively over a profile
space or on seeded samples.

Mechanisms that never read where a division ranks its own worker (the
partition mechanisms and the draft) are swept over the reduced space of
orders over the other workers, own worker appended last; own-position
invariance is what makes that equivalent to the full space, and is itself
checked exhaustively by check_own_position_invariance.  Mechanisms that do
read own positions (sd, ttc, bttc) are swept over full orders.

Exhaustive sweeps precompute one outcome per profile and then resolve
deviations and improvements as O(1) table lookups, so the n = 4 sweeps touch
tens of millions of profile pairs in seconds.  Reports are deterministic:
witnesses are minimal in enumeration order regardless of --jobs.
"""

from __future__ import annotations

import itertools
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

from .mechanisms import (
    _bttc_core,
    _cettc_core,
    _csd_core,
    _group_tables,
    _npb_core,
    _sd_groups_core,
    _tsd_core,
    _ttc_core,
    initial_derangement,
)
from .model import (
    Assignment,
    EnumerationBoundExceeded,
    MalformedProblem,
    MechanismId,
    PreferenceProfile,
    all_full_orders,
    all_orders_excluding,
)
from .partition import canonical_partition

_EXHAUSTIVE_MAX_N = 4
_CEE_SET_MAX_N = 9
_EAP_GROUP_MAX = 8
_PARETO_MAX_N = 7
_SCAN_MAX_N = 3

REDUCED_TAGS = frozenset({"csd", "tsd", "cettc", "npb", "sd"})


@dataclass(frozen=True)
class Scope:
    """What a check ran over: the whole space, or seeded samples."""

    kind: str  # "exhaustive" | "sampled"
    n: int
    count: int | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in ("exhaustive", "sampled"):
            raise MalformedProblem(f"unknown scope kind {self.kind!r}")
        if self.kind == "sampled" and (self.count is None or self.seed is None):
            raise MalformedProblem("sampled scopes need count and seed")

    def to_dict(self):
        d = {"kind": self.kind, "n": self.n}
        if self.kind == "sampled":
            d["count"] = self.count
            d["seed"] = self.seed
        return d


@dataclass
class PropertyReport:
    """Outcome of one property check."""

    prop: str
    mechanism: str
    scope: Scope
    holds: bool
    checked: int
    comparisons: int | None
    witness: dict | None
    elapsed: float
    note: str = ""

    @property
    def verdict(self) -> str:
        return "holds" if self.holds else "fails"

    def to_dict(self):
        return {
            "property": self.prop,
            "mechanism": self.mechanism,
            "scope": self.scope.to_dict(),
            "verdict": self.verdict,
            "checked": self.checked,
            "comparisons": self.comparisons,
            "witness": self.witness,
            "elapsed_s": round(self.elapsed, 3),
            "note": self.note,
        }


# -- efficiency oracles -------------------------------------------------------


@lru_cache(maxsize=None)
def derangements(n: int) -> tuple[tuple[int, ...], ...]:
    """All assignments without fixed points, lexicographically sorted."""
    if n > _CEE_SET_MAX_N:
        raise EnumerationBoundExceeded(f"derangement enumeration capped at n={_CEE_SET_MAX_N}")
    return tuple(
        p
        for p in itertools.permutations(range(1, n + 1))
        if all(w != i for i, w in enumerate(p, start=1))
    )


def _orders_of(profile) -> tuple[tuple[int, ...], ...]:
    if isinstance(profile, PreferenceProfile):
        return profile.orders
    return tuple(tuple(o) for o in profile)


def _rank_maps(orders):
    return tuple({w: r for r, w in enumerate(o)} for o in orders)


def _dominates(ranks, a, b) -> bool:
    strict = False
    for i, ra in enumerate(ranks):
        x, y = ra[a[i]], ra[b[i]]
        if x > y:
            return False
        if x < y:
            strict = True
    return strict


def is_ce_efficient(profile, mapping) -> bool:
    """True iff no derangement Pareto-dominates the given derangement."""
    orders = _orders_of(profile)
    ranks = _rank_maps(orders)
    m = tuple(mapping.mapping if isinstance(mapping, Assignment) else mapping)
    return not any(_dominates(ranks, d, m) for d in derangements(len(orders)))


def cee_set(profile) -> list[tuple[int, ...]]:
    """All derangements not Pareto-dominated by another derangement.

    Skyline construction: candidates in increasing total-rank order can only
    be dominated by already-kept assignments (a dominator has strictly
    smaller total, and domination is transitive), so one pass suffices.
    """
    orders = _orders_of(profile)
    n = len(orders)
    if n > _CEE_SET_MAX_N:
        raise EnumerationBoundExceeded(f"cee_set is capped at n={_CEE_SET_MAX_N}")
    ranks = _rank_maps(orders)
    pool = sorted(derangements(n), key=lambda d: sum(r[w] for r, w in zip(ranks, d)))
    front: list[tuple[int, ...]] = []
    for cand in pool:
        if not any(_dominates(ranks, kept, cand) for kept in front):
            front.append(cand)
    return sorted(front)


def eap_feasible(partition, mapping) -> bool:
    """True iff every division's worker comes from its own group pool."""
    m = tuple(mapping.mapping if isinstance(mapping, Assignment) else mapping)
    return all(
        m[i - 1] in set(g.workers) for g in partition.groups for i in g.divisions
    )


def eap_efficient(profile, partition, mapping) -> bool:
    """True iff the assignment is partition-feasible and no feasible
    assignment Pareto-dominates it.

    Feasible assignments factor into independent per-group bijections and
    preferences do not interact across groups, so a dominating feasible
    assignment exists iff some single group admits a within-group
    reassignment that is weakly better for all its members and strictly
    better for one.  Each group is checked by direct enumeration.
    """
    orders = _orders_of(profile)
    ranks = _rank_maps(orders)
    m = tuple(mapping.mapping if isinstance(mapping, Assignment) else mapping)
    if not eap_feasible(partition, m):
        return False
    for g in partition.groups:
        divs = g.divisions
        if len(divs) > _EAP_GROUP_MAX:
            raise EnumerationBoundExceeded(
                f"group efficiency check capped at groups of {_EAP_GROUP_MAX}"
            )
        if len(divs) == 1:
            continue
        cur = [ranks[i - 1][m[i - 1]] for i in divs]
        for perm in itertools.permutations(g.workers):
            strict = False
            for i, w, c in zip(divs, perm, cur):
                r = ranks[i - 1][w]
                if r > c:
                    break
                if r < c:
                    strict = True
            else:
                if strict:
                    return False
    return True


def pareto_efficient(profile, mapping) -> bool:
    """True iff no assignment at all Pareto-dominates this one."""
    orders = _orders_of(profile)
    n = len(orders)
    if n > _PARETO_MAX_N:
        raise EnumerationBoundExceeded(f"pareto check capped at n={_PARETO_MAX_N}")
    ranks = _rank_maps(orders)
    m = tuple(mapping.mapping if isinstance(mapping, Assignment) else mapping)
    return not any(
        _dominates(ranks, p, m) for p in itertools.permutations(range(1, n + 1))
    )


# -- improvements -------------------------------------------------------------


def _raised_orders(order, i):
    """Orders obtained from ``order`` by moving worker i weakly up, keeping
    everyone else's relative positions.  Includes ``order`` itself (last)."""
    order = tuple(order)
    pos = order.index(i)
    rest = order[:pos] + order[pos + 1 :]
    return [rest[:q] + (i,) + rest[q:] for q in range(pos + 1)]


def is_improvement(base, improved, i: int) -> bool:
    """True iff ``improved`` raises worker i for the other divisions: division
    i's own order is unchanged, every other order keeps its relative order
    over workers other than i, and i moves weakly up in it."""
    b = _orders_of(base)
    c = _orders_of(improved)
    if len(b) != len(c) or b[i - 1] != c[i - 1]:
        return False
    for j in range(1, len(b) + 1):
        if j == i:
            continue
        ob, oc = b[j - 1], c[j - 1]
        if tuple(w for w in ob if w != i) != tuple(w for w in oc if w != i):
            return False
        if oc.index(i) > ob.index(i):
            return False
    return True


def enumerate_improvements(profile, i: int):
    """Yield every profile obtainable by weakly raising worker i in the other
    divisions' orders (division i's order fixed).  Includes the input."""
    orders = _orders_of(profile)
    wrap = isinstance(profile, PreferenceProfile)
    variants = [
        [orders[j - 1]] if j == i else _raised_orders(orders[j - 1], i)
        for j in range(1, len(orders) + 1)
    ]
    for combo in itertools.product(*variants):
        yield PreferenceProfile(combo) if wrap else combo


def certify_ri_violation(base, improved, i: int, outcome_base, outcome_improved) -> bool:
    """True iff ``improved`` is a valid improvement for i over ``base`` and i
    strictly loses by it: its base worker beats its improved worker in its
    own (unchanged) order."""
    if not is_improvement(base, improved, i):
        return False
    b = _orders_of(base)
    ob = tuple(outcome_base.mapping if isinstance(outcome_base, Assignment) else outcome_base)
    oi = tuple(
        outcome_improved.mapping
        if isinstance(outcome_improved, Assignment)
        else outcome_improved
    )
    order = b[i - 1]
    return order.index(ob[i - 1]) < order.index(oi[i - 1])


# -- profile spaces -----------------------------------------------------------


class _ProfileSpace:
    """Indexable space of profiles: per division a list of full orders."""

    def __init__(self, n: int, reduced: bool):
        self.n = n
        self.reduced = reduced
        if reduced:
            self.orders = tuple(
                tuple(o + (i,) for o in all_orders_excluding(n, i))
                for i in range(1, n + 1)
            )
        else:
            full = tuple(all_full_orders(n))
            self.orders = tuple(full for _ in range(n))
        self.radix = len(self.orders[0])
        self.size = self.radix**n
        # pow[j]: weight of division j+1's digit; last digit varies fastest,
        # matching itertools.product enumeration order.
        self.pows = tuple(self.radix ** (n - 1 - j) for j in range(n))
        self.order_index = tuple(
            {o: k for k, o in enumerate(lst)} for lst in self.orders
        )
        self.rank_maps = tuple(
            tuple({w: r for r, w in enumerate(o)} for o in lst) for lst in self.orders
        )

    def digits_of(self, idx: int):
        out = []
        for p in self.pows:
            out.append(idx // p)
            idx %= p
        return tuple(out)

    def profile_at(self, idx: int):
        return tuple(self.orders[j][d] for j, d in enumerate(self.digits_of(idx)))

    def iter_profiles(self, lo: int = 0, hi: int | None = None):
        """Yield (idx, digits, orders) over [lo, hi) in enumeration order."""
        hi = self.size if hi is None else hi
        for idx in range(lo, hi):
            digits = self.digits_of(idx)
            yield idx, digits, tuple(self.orders[j][d] for j, d in enumerate(digits))


@lru_cache(maxsize=None)
def _space(n: int, reduced: bool) -> _ProfileSpace:
    return _ProfileSpace(n, reduced)


@lru_cache(maxsize=None)
def _perm_codes(n: int):
    perms = tuple(itertools.permutations(range(1, n + 1)))
    return perms, {p: c for c, p in enumerate(perms)}


# -- mechanism runners --------------------------------------------------------


def as_mechanism_id(mechanism) -> MechanismId:
    if isinstance(mechanism, MechanismId):
        return mechanism
    if isinstance(mechanism, str):
        return MechanismId(mechanism)
    raise MalformedProblem(f"not a mechanism: {mechanism!r}")


def mechanism_to_dict(mid: MechanismId) -> dict:
    d: dict = {"tag": mid.tag}
    if mid.mu0 is not None:
        d["mu0"] = list(mid.mu0) if not isinstance(mid.mu0, str) else mid.mu0
    if mid.order is not None:
        d["order"] = list(mid.order)
    if mid.seed is not None:
        d["seed"] = mid.seed
    return d


def mechanism_from_dict(d) -> MechanismId:
    mu0 = d.get("mu0")
    if isinstance(mu0, list):
        mu0 = tuple(mu0)
    order = d.get("order")
    return MechanismId(
        d["tag"],
        mu0=mu0,
        order=tuple(order) if order is not None else None,
        seed=d.get("seed"),
    )


def uses_reduced_space(mechanism) -> bool:
    return as_mechanism_id(mechanism).tag in REDUCED_TAGS


class _Runner:
    """Closure over everything but the orders, for sweep speed."""

    def __init__(self, mid: MechanismId, n: int, partition=None, priority=None):
        self.mid = mid
        self.n = n
        self.priority = tuple(priority) if priority else tuple(range(1, n + 1))
        self.partition = None
        if mid.tag in ("csd", "tsd", "sd"):
            self.partition = partition if partition is not None else canonical_partition(n)
            self._group_of, self._pools = _group_tables(self.partition)
        elif partition is not None:
            self.partition = partition  # kept for eap checks on any mechanism
            self._group_of, self._pools = _group_tables(partition)
        if mid.tag == "cettc":
            self.mu0 = initial_derangement(n, mid.mu0 or "cyclic", mid.seed)
        if mid.tag == "sd":
            self.order = tuple(mid.order) if mid.order else self.priority

    def __call__(self, orders) -> tuple[int, ...]:
        tag = self.mid.tag
        if tag == "csd":
            return _csd_core(orders, self.priority, self._group_of, self._pools)[0]
        if tag == "tsd":
            return _tsd_core(orders, self.priority, self._group_of, self._pools)[0]
        if tag == "cettc":
            return _cettc_core(orders, self.mu0)[0]
        if tag == "npb":
            return _npb_core(orders, self.priority)[0]
        if tag == "bttc":
            return _bttc_core(orders)[0]
        if tag == "ttc":
            return _ttc_core(orders)
        if tag == "sd":
            return _sd_groups_core(orders, self.order, self._group_of, self._pools)
        raise MalformedProblem(f"unknown mechanism {tag!r}")

    def label(self) -> str:
        return str(self.mid)

    def problem_dict(self, orders) -> dict:
        d: dict = {
            "n": self.n,
            "preferences": [list(o) for o in orders],
            "priority": list(self.priority),
        }
        if self.mid.tag in ("csd", "tsd", "sd"):
            d["partition"] = [
                {"divisions": list(g.divisions), "workers": list(g.workers)}
                for g in self.partition.groups
            ]
        return d


def _make_runner(mechanism, n, partition=None, priority=None) -> _Runner:
    return _Runner(as_mechanism_id(mechanism), n, partition, priority)


def _outcome_table(runner: _Runner, space: _ProfileSpace):
    perms, code = _perm_codes(space.n)
    table = [0] * space.size
    idx = 0
    for combo in itertools.product(*space.orders):
        table[idx] = code[runner(combo)]
        idx += 1
    return table


# -- exhaustive sweep internals ----------------------------------------------

# Shared state for forked sweep workers; index-range tasks read it after fork.
_SWEEP = {}


def _require_exhaustive_bound(n):
    if n > _EXHAUSTIVE_MAX_N:
        raise EnumerationBoundExceeded(
            f"exhaustive sweeps are capped at n={_EXHAUSTIVE_MAX_N}"
        )


def _sp_scan(lo, hi):
    """Scan base profiles in [lo, hi) for a profitable misreport.  Returns
    (profiles_scanned, comparisons, violation or None); stops at the first
    violation, which is minimal in (base index, division, misreport digit)."""
    space = _SWEEP["space"]
    table = _SWEEP["table"]
    perms, _ = _perm_codes(space.n)
    n = space.n
    radix = space.radix
    pows = space.pows
    rank_maps = space.rank_maps
    comparisons = 0
    for idx in range(lo, hi):
        digits = space.digits_of(idx)
        out = perms[table[idx]]
        for j in range(n):  # division j+1
            rk = rank_maps[j][digits[j]]
            got = rk[out[j]]
            base_contrib = digits[j] * pows[j]
            stem = idx - base_contrib
            for alt in range(radix):
                if alt == digits[j]:
                    continue
                comparisons += 1
                out2 = perms[table[stem + alt * pows[j]]]
                if rk[out2[j]] < got:
                    return idx - lo + 1, comparisons, (idx, j + 1, alt)
    return hi - lo, comparisons, None


def _ri_scan(lo, hi):
    """Scan base profiles in [lo, hi) for an improvement that hurts its
    subject.  Returns (profiles_scanned, comparisons, violation or None)."""
    space = _SWEEP["space"]
    table = _SWEEP["table"]
    raises = _SWEEP["raises"]  # raises[i-1][j][digit] = [(delta, alt_digit)...]
    perms, _ = _perm_codes(space.n)
    n = space.n
    rank_maps = space.rank_maps
    comparisons = 0
    for idx in range(lo, hi):
        digits = space.digits_of(idx)
        out = perms[table[idx]]
        for i in range(1, n + 1):
            rk = rank_maps[i - 1][digits[i - 1]]
            got = rk[out[i - 1]]
            # partial sums over other divisions' raise options
            idxs = [idx]
            for j in range(n):
                if j == i - 1:
                    continue
                opts = raises[i - 1][j][digits[j]]
                if opts:
                    idxs = [ix + d for ix in idxs for d in (0, *opts)]
            for ix in idxs:
                if ix == idx:
                    continue
                comparisons += 1
                if rk[perms[table[ix]][i - 1]] > got:
                    return idx - lo + 1, comparisons, (idx, i, ix)
    return hi - lo, comparisons, None


def _outcome_scan(lo, hi):
    """Scan outcomes in [lo, hi) against a per-profile predicate."""
    space = _SWEEP["space"]
    table = _SWEEP["table"]
    kind = _SWEEP["outcome_kind"]
    partition = _SWEEP.get("partition")
    perms, _ = _perm_codes(space.n)
    n = space.n
    checked = 0
    for idx in range(lo, hi):
        checked += 1
        out = perms[table[idx]]
        if kind == "ce":
            if any(w == i for i, w in enumerate(out, start=1)):
                return checked, None, (idx, out)
            continue
        orders = space.profile_at(idx)
        if kind == "cee":
            ok = all(w != i for i, w in enumerate(out, start=1)) and is_ce_efficient(
                orders, out
            )
        elif kind == "eap":
            ok = eap_efficient(orders, partition, out)
        else:  # pareto
            ok = pareto_efficient(orders, out)
        if not ok:
            return checked, None, (idx, out)
    return checked, None, None


def _run_ranged(scan, size, jobs):
    """Run a range scan over [0, size), possibly split across processes.

    The merged violation is minimal in enumeration order (chunk ranges are
    disjoint and each chunk stops at its first hit), so reports are identical
    for any job count.  Aggregate counts are meaningful only when no
    violation is found; callers report the witness position otherwise.
    """
    if jobs <= 1:
        return scan(0, size)
    import multiprocessing as mp

    step = max(1, -(-size // (jobs * 8)))
    chunks = []
    lo = 0
    while lo < size:
        chunks.append((lo, min(size, lo + step)))
        lo += step
    checked = 0
    comparisons = 0
    best = None
    ctx = mp.get_context("fork")
    with ProcessPoolExecutor(max_workers=jobs, mp_context=ctx) as pool:
        for c, comp, vio in pool.map(scan, *zip(*chunks)):
            checked += c
            comparisons += 0 if comp is None else comp
            if vio is not None and (best is None or vio[0] < best[0]):
                best = vio
    return checked, comparisons, best


# -- public checks ------------------------------------------------------------


def _sample_orders(rng, n, reduced):
    orders = []
    for i in range(1, n + 1):
        pool = [w for w in range(1, n + 1) if w != i] if reduced else list(range(1, n + 1))
        rng.shuffle(pool)
        if reduced:
            pool.append(i)
        orders.append(tuple(pool))
    return tuple(orders)


def _finish(prop, runner, scope, holds, checked, comparisons, witness, t0, note=""):
    return PropertyReport(
        prop=prop,
        mechanism=runner.label(),
        scope=scope,
        holds=holds,
        checked=checked,
        comparisons=comparisons,
        witness=witness,
        elapsed=time.perf_counter() - t0,
        note=note,
    )


def _scope_or_default(scope, n):
    if scope is None:
        return Scope("exhaustive", n)
    if scope.n != n:
        raise MalformedProblem("scope.n must match n")
    return scope


def check_sp(mechanism, n, scope=None, *, partition=None, priority=None, jobs=1):
    """No division can gain by misreporting its order, all else fixed."""
    t0 = time.perf_counter()
    mid = as_mechanism_id(mechanism)
    scope = _scope_or_default(scope, n)
    runner = _make_runner(mid, n, partition, priority)
    reduced = uses_reduced_space(mid)

    if scope.kind == "sampled":
        rng = random.Random(scope.seed)
        comparisons = 0
        for k in range(scope.count):
            orders = _sample_orders(rng, n, reduced)
            out = runner(orders)
            for i in range(1, n + 1):
                lie = _sample_orders(rng, n, reduced)[i - 1]
                if lie == orders[i - 1]:
                    continue
                comparisons += 1
                out2 = runner(tuple(lie if j == i else orders[j - 1] for j in range(1, n + 1)))
                if orders[i - 1].index(out2[i - 1]) < orders[i - 1].index(out[i - 1]):
                    wit = _sp_witness(runner, orders, i, lie, out, out2)
                    return _finish("sp", runner, scope, False, k + 1, None, wit, t0)
        return _finish("sp", runner, scope, True, scope.count, comparisons, None, t0)

    _require_exhaustive_bound(n)
    space = _space(n, reduced)
    _SWEEP.clear()
    _SWEEP["space"] = space
    _SWEEP["table"] = _outcome_table(runner, space)
    checked, comparisons, vio = _run_ranged(_sp_scan, space.size, jobs)
    if vio is None:
        return _finish("sp", runner, scope, True, space.size, comparisons, None, t0)
    idx, i, alt = vio
    orders = space.profile_at(idx)
    lie = space.orders[i - 1][alt]
    out = runner(orders)
    out2 = runner(tuple(lie if j == i else orders[j - 1] for j in range(1, n + 1)))
    wit = _sp_witness(runner, orders, i, lie, out, out2)
    return _finish("sp", runner, scope, False, idx + 1, None, wit, t0)


def _sp_witness(runner, orders, i, lie, out, out2):
    return {
        "kind": "sp",
        "mechanism": mechanism_to_dict(runner.mid),
        "division": i,
        "problem": runner.problem_dict(orders),
        "misreport": list(lie),
        "outcome": list(out),
        "misreport_outcome": list(out2),
        "received": out[i - 1],
        "misreport_received": out2[i - 1],
    }


def check_ri(mechanism, n, scope=None, *, partition=None, priority=None, jobs=1):
    """A division never loses when other divisions rank its worker higher."""
    t0 = time.perf_counter()
    mid = as_mechanism_id(mechanism)
    scope = _scope_or_default(scope, n)
    runner = _make_runner(mid, n, partition, priority)
    reduced = uses_reduced_space(mid)

    if scope.kind == "sampled":
        rng = random.Random(scope.seed)
        comparisons = 0
        for k in range(scope.count):
            orders = _sample_orders(rng, n, reduced)
            out = runner(orders)
            for i in range(1, n + 1):
                improved = []
                for j in range(1, n + 1):
                    o = orders[j - 1]
                    if j == i:
                        improved.append(o)
                        continue
                    opts = _raised_orders(o, i)
                    improved.append(opts[rng.randrange(len(opts))])
                improved = tuple(improved)
                if improved == orders:
                    continue
                comparisons += 1
                out2 = runner(improved)
                if orders[i - 1].index(out2[i - 1]) > orders[i - 1].index(out[i - 1]):
                    wit = _ri_witness(runner, orders, improved, i, out, out2)
                    return _finish("ri", runner, scope, False, k + 1, None, wit, t0)
        return _finish("ri", runner, scope, True, scope.count, comparisons, None, t0)

    _require_exhaustive_bound(n)
    space = _space(n, reduced)
    # raises[i-1][j][digit]: index deltas that weakly raise worker i in
    # division j+1's order, identity excluded.
    raises = []
    for i in range(1, n + 1):
        per_div = []
        for j in range(n):
            col = []
            for digit, order in enumerate(space.orders[j]):
                if j == i - 1:
                    col.append(())
                    continue
                deltas = []
                for alt_order in _raised_orders_reduced(order, i, space.reduced):
                    alt = space.order_index[j][alt_order]
                    if alt != digit:
                        deltas.append((alt - digit) * space.pows[j])
                col.append(tuple(deltas))
            per_div.append(col)
        raises.append(per_div)
    _SWEEP.clear()
    _SWEEP["space"] = space
    _SWEEP["table"] = _outcome_table(runner, space)
    _SWEEP["raises"] = raises
    checked, comparisons, vio = _run_ranged(_ri_scan, space.size, jobs)
    if vio is None:
        return _finish("ri", runner, scope, True, space.size, comparisons, None, t0)
    idx, i, idx2 = vio
    orders = space.profile_at(idx)
    improved = space.profile_at(idx2)
    out = runner(orders)
    out2 = runner(improved)
    wit = _ri_witness(runner, orders, improved, i, out, out2)
    return _finish("ri", runner, scope, False, idx + 1, None, wit, t0)


def _raised_orders_reduced(order, i, reduced):
    """Raise options for worker i in a full order; in reduced spaces the own
    worker stays pinned last so results remain space members."""
    if not reduced:
        return _raised_orders(order, i)
    head, own = order[:-1], order[-1]
    return [h + (own,) for h in _raised_orders(head, i)]


def _ri_witness(runner, orders, improved, i, out, out2):
    return {
        "kind": "ri",
        "mechanism": mechanism_to_dict(runner.mid),
        "division": i,
        "problem": runner.problem_dict(orders),
        "improved_problem": runner.problem_dict(improved),
        "outcome": list(out),
        "improved_outcome": list(out2),
        "received": out[i - 1],
        "improved_received": out2[i - 1],
    }


def _check_outcomes(prop, mechanism, n, scope, partition, priority, jobs):
    t0 = time.perf_counter()
    mid = as_mechanism_id(mechanism)
    scope = _scope_or_default(scope, n)
    if prop == "eap" and partition is None:
        partition = canonical_partition(n)
    runner = _make_runner(mid, n, partition, priority)
    reduced = uses_reduced_space(mid)

    def bad(orders, out):
        if prop == "ce":
            return any(w == i for i, w in enumerate(out, start=1))
        if prop == "cee":
            return any(w == i for i, w in enumerate(out, start=1)) or not is_ce_efficient(
                orders, out
            )
        if prop == "eap":
            return not eap_efficient(orders, partition, out)
        return not pareto_efficient(orders, out)

    def witness(orders, out):
        wit = {
            "kind": prop,
            "mechanism": mechanism_to_dict(mid),
            "problem": runner.problem_dict(orders),
            "outcome": list(out),
        }
        if prop == "ce":
            wit["fixed_points"] = [i for i, w in enumerate(out, start=1) if w == i]
        elif prop == "cee":
            doms = [list(d) for d in derangements(n) if _dominates(_rank_maps(orders), d, out)]
            wit["dominating"] = doms[:1]
        elif prop == "eap":
            wit["partition"] = [
                {"divisions": list(g.divisions), "workers": list(g.workers)}
                for g in partition.groups
            ]
        return wit

    if scope.kind == "sampled":
        rng = random.Random(scope.seed)
        for k in range(scope.count):
            orders = _sample_orders(rng, n, reduced)
            out = runner(orders)
            if bad(orders, out):
                return _finish(prop, runner, scope, False, k + 1, None, witness(orders, out), t0)
        return _finish(prop, runner, scope, True, scope.count, None, None, t0)

    _require_exhaustive_bound(n)
    space = _space(n, reduced)
    _SWEEP.clear()
    _SWEEP["space"] = space
    _SWEEP["table"] = _outcome_table(runner, space)
    _SWEEP["outcome_kind"] = prop
    _SWEEP["partition"] = partition
    checked, _, vio = _run_ranged(_outcome_scan, space.size, jobs)
    if vio is None:
        return _finish(prop, runner, scope, True, space.size, None, None, t0)
    idx, out = vio
    orders = space.profile_at(idx)
    return _finish(prop, runner, scope, False, idx + 1, None, witness(orders, out), t0)


def check_ce(mechanism, n, scope=None, *, partition=None, priority=None, jobs=1):
    """Every output is a derangement: nobody keeps their own worker."""
    return _check_outcomes("ce", mechanism, n, scope, partition, priority, jobs)


def check_cee(mechanism, n, scope=None, *, partition=None, priority=None, jobs=1):
    """Every output is a derangement no other derangement Pareto-dominates."""
    return _check_outcomes("cee", mechanism, n, scope, partition, priority, jobs)


def check_eap(mechanism, n, scope=None, *, partition=None, priority=None, jobs=1):
    """Every output is partition-feasible and efficient among feasibles."""
    return _check_outcomes("eap", mechanism, n, scope, partition, priority, jobs)


def check_pareto(mechanism, n, scope=None, *, partition=None, priority=None, jobs=1):
    """Every output is Pareto-efficient among all assignments."""
    return _check_outcomes("pareto", mechanism, n, scope, partition, priority, jobs)


def check_own_position_invariance(mechanism, n, scope=None, *, partition=None, priority=None):
    """Moving a division's own worker around its own order never changes the
    outcome.  This is what justifies sweeping own-last profiles only."""
    t0 = time.perf_counter()
    mid = as_mechanism_id(mechanism)
    scope = _scope_or_default(scope, n)
    runner = _make_runner(mid, n, partition, priority)

    def variants(order, i):
        head = tuple(w for w in order if w != i)
        return [head[:q] + (i,) + head[q:] for q in range(n)]

    def scan_profile(orders, out):
        for i in range(1, n + 1):
            for var in variants(orders[i - 1], i):
                if var == orders[i - 1]:
                    continue
                moved = tuple(var if j == i else orders[j - 1] for j in range(1, n + 1))
                if runner(moved) != out:
                    return {
                        "kind": "own-position",
                        "mechanism": mechanism_to_dict(mid),
                        "division": i,
                        "problem": runner.problem_dict(orders),
                        "moved_problem": runner.problem_dict(moved),
                        "outcome": list(out),
                        "moved_outcome": list(runner(moved)),
                    }
        return None

    if scope.kind == "sampled":
        rng = random.Random(scope.seed)
        for k in range(scope.count):
            orders = _sample_orders(rng, n, reduced=False)
            wit = scan_profile(orders, runner(orders))
            if wit is not None:
                return _finish("own-position", runner, scope, False, k + 1, None, wit, t0)
        return _finish("own-position", runner, scope, True, scope.count, None, None, t0)

    _require_exhaustive_bound(n)
    space = _space(n, reduced=True)
    checked = 0
    for idx, digits, orders in space.iter_profiles():
        checked += 1
        wit = scan_profile(orders, runner(orders))
        if wit is not None:
            return _finish("own-position", runner, scope, False, checked, None, wit, t0)
    return _finish("own-position", runner, scope, True, checked, None, None, t0)


CHECKS = {
    "sp": check_sp,
    "ri": check_ri,
    "ce": check_ce,
    "cee": check_cee,
    "eap": check_eap,
    "pareto": check_pareto,
    "own-position": check_own_position_invariance,
}


def revalidate_witness(witness: dict) -> bool:
    """Replay a witness through the public mechanism API and confirm it still
    exhibits the claimed violation.  Independent of the sweep fast paths."""
    from .mechanisms import run_mechanism
    from .model import AssignmentPartition, Problem, problem_from_dict

    mid = mechanism_from_dict(witness["mechanism"])
    kind = witness["kind"]
    problem = problem_from_dict(witness["problem"])
    out = run_mechanism(mid, problem)
    if list(out.mapping) != list(witness["outcome"]):
        return False
    if kind == "sp":
        i = witness["division"]
        lied = Problem(
            profile=problem.profile.with_order(i, witness["misreport"]),
            priority=problem.priority,
            partition=problem.partition,
            names=problem.names,
        )
        out2 = run_mechanism(mid, lied)
        if list(out2.mapping) != list(witness["misreport_outcome"]):
            return False
        return problem.profile.prefers(i, out2.worker_of(i), out.worker_of(i))
    if kind == "ri":
        i = witness["division"]
        improved = problem_from_dict(witness["improved_problem"])
        out2 = run_mechanism(mid, improved)
        if list(out2.mapping) != list(witness["improved_outcome"]):
            return False
        return certify_ri_violation(problem.profile, improved.profile, i, out, out2)
    if kind == "ce":
        return not out.is_derangement()
    if kind == "cee":
        return not out.is_derangement() or not is_ce_efficient(problem.profile, out)
    if kind == "eap":
        partition = AssignmentPartition(
            tuple((tuple(g["divisions"]), tuple(g["workers"])) for g in witness["partition"])
        )
        return not eap_efficient(problem.profile, partition, out)
    if kind == "pareto":
        return not pareto_efficient(problem.profile, out)
    if kind == "own-position":
        moved = problem_from_dict(witness["moved_problem"])
        return run_mechanism(mid, moved).mapping != out.mapping
    raise MalformedProblem(f"unknown witness kind {kind!r}")


# -- universal selection scan -------------------------------------------------


@dataclass
class SelectionScanReport:
    """Result of scanning every single-valued selection from the efficient
    derangement sets for a respect-of-improvements violation."""

    n: int
    profiles: int
    rules: int
    violating_rules: int
    all_violate: bool
    sample_witness: dict | None = None

    def to_dict(self):
        return {
            "n": self.n,
            "profiles": self.profiles,
            "rules": self.rules,
            "violating_rules": self.violating_rules,
            "all_violate": self.all_violate,
            "sample_witness": self.sample_witness,
        }


def scan_ce_efficient_selections(n: int = 3) -> SelectionScanReport:
    """Check that no selection rule picking from the efficient derangement
    set at every profile can respect improvements.

    Profiles are enumerated own-last (a rule restricted to those profiles is
    still a rule, so a violation inside the subspace indicts every rule).
    Every combination of per-profile choices is tried against every
    improvement pair inside the subspace.
    """
    if n > _SCAN_MAX_N:
        raise EnumerationBoundExceeded(f"selection scan is capped at n={_SCAN_MAX_N}")
    space = _space(n, reduced=True)
    profiles = [orders for _, _, orders in space.iter_profiles()]
    sets = [cee_set(p) for p in profiles]
    index = {p: k for k, p in enumerate(profiles)}

    # improvement pairs staying inside the own-last subspace
    pairs = []  # (base index, improved index, division)
    for k, orders in enumerate(profiles):
        for i in range(1, n + 1):
            variants = [
                [orders[j - 1]]
                if j == i
                else _raised_orders_reduced(orders[j - 1], i, True)
                for j in range(1, n + 1)
            ]
            for combo in itertools.product(*variants):
                if combo == orders:
                    continue
                pairs.append((k, index[combo], i))

    rules = 0
    violating = 0
    sample = None
    for choice in itertools.product(*sets):
        rules += 1
        hit = None
        for kb, ki, i in pairs:
            base_out, imp_out = choice[kb], choice[ki]
            order = profiles[kb][i - 1]
            if order.index(imp_out[i - 1]) > order.index(base_out[i - 1]):
                hit = (kb, ki, i)
                break
        if hit is not None:
            violating += 1
            if sample is None:
                kb, ki, i = hit
                sample = {
                    "kind": "ri",
                    "division": i,
                    "problem": {"n": n, "preferences": [list(o) for o in profiles[kb]],
                                "priority": list(range(1, n + 1))},
                    "improved_problem": {"n": n, "preferences": [list(o) for o in profiles[ki]],
                                         "priority": list(range(1, n + 1))},
                    "outcome": list(choice[kb]),
                    "improved_outcome": list(choice[ki]),
                }
    return SelectionScanReport(
        n=n,
        profiles=len(profiles),
        rules=rules,
        violating_rules=violating,
        all_violate=violating == rules,
        sample_witness=sample,
    )


# No mechanism can both select from the efficient derangement sets and
# respect improvements at n=3; this alias names the scan after the claim.
universal_impossibility_scan = scan_ce_efficient_selections
