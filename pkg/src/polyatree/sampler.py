"""Uniform sampling of rooted trees, random automorphisms, and the induced
fixed-point decompositions, plus deterministic Monte Carlo experiments.

Sampling follows the classical remove-a-subtree recursion on

    (n-1) * t_n = sum_{j,d} t_{n-j*d} * d * t_d,

choosing (j, d) by drawing one uniform big integer below (n-1)*t_n; no
floating point enters the choice, so the tree law is exactly uniform.
Experiments derive one child random stream per trial from (seed, trial
index), which makes every aggregate independent of chunking and worker
count.
"""

from __future__ import annotations

import bisect
import random
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2

from .errors import ConsistencyError, ResourceCapError, UsageError
from .trees import AutomorphismElement, CanonicalTree, _intern, compare_canonical, enumerate_trees, leaf

mpz = gmpy2.mpz

DEFAULT_SEED = 0x5EED_0001
DEFAULT_TABLE_CAP = 20000
DEFAULT_DIRECT_LIMIT = 12

_CACHE_BLOCKS = 32
_MAX_CACHED_SIZES = 4096

# size -> every canonical tree of that size, for the direct small-size draw
_direct_pool: dict[int, tuple[CanonicalTree, ...]] = {}


def _pool(k: int) -> tuple[CanonicalTree, ...]:
    p = _direct_pool.get(k)
    if p is None:
        p = enumerate_trees(k)
        _direct_pool[k] = p
    return p


@dataclass(frozen=True)
class RngStream:
    """A named deterministic stream: (seed, stream) seeds an independent
    Mersenne generator through the string "seed|stream"."""

    seed: int = DEFAULT_SEED
    stream: int = 0

    def rng(self) -> random.Random:
        return random.Random(f"{self.seed}|{self.stream}")

    def child(self, stream: int) -> "RngStream":
        return RngStream(self.seed, stream)


class SamplerTables:
    """Big-integer tables t_n, s_n = sum_{m|n} m*t_m and w_d = d*t_d used by
    the sampler, grown on demand up to a hard cap."""

    def __init__(self, limit: int = DEFAULT_TABLE_CAP):
        self.limit = limit
        self.t: list = [mpz(0), mpz(1)]
        self.s: list = [mpz(0), mpz(1)]
        self.w: list = [mpz(0), mpz(1)]
        self._cums: dict[int, tuple[list, object]] = {}
        self._bounds: dict[int, int] = {}

    @property
    def size(self) -> int:
        return len(self.t) - 1

    def ensure(self, n: int) -> None:
        if n <= self.size:
            return
        if n > self.limit:
            raise ResourceCapError(f"sampler table capped at n <= {self.limit} (asked {n})")
        t, s, w = self.t, self.s, self.w
        n0 = len(t)
        s.extend(mpz(0) for _ in range(len(s), n + 1))
        for m in range(1, n0):
            mt = m * t[m]
            start = ((n0 + m - 1) // m) * m
            for i in range(start, n + 1, m):
                s[i] += mt
        for nn in range(n0, n + 1):
            acc = mpz(0)
            for i in range(1, nn):
                acc += t[nn - i] * s[i]
            q, r = gmpy2.f_divmod(acc, nn - 1)
            if r:
                raise ConsistencyError(f"tree-count recurrence not divisible at n={nn}")
            t.append(q)
            w.append(nn * q)
            mt = nn * q
            for i in range(nn, n + 1, nn):
                s[i] += mt

    def counts(self, N: int) -> list[int]:
        self.ensure(N)
        return [int(v) for v in self.t[: N + 1]]

    def _block_cums(self, n: int):
        got = self._cums.get(n)
        if got is not None:
            return got
        t, s = self.t, self.s
        cums = []
        acc = mpz(0)
        # deeper caches pay off at small n where the integers are short
        blocks = _CACHE_BLOCKS if n > 1024 else 4 * _CACHE_BLOCKS
        lo = max(1, n - blocks)
        for k in range(n - 1, lo - 1, -1):
            acc += t[n - k] * s[k]
            cums.append(acc)
        out = (cums, acc)
        if len(self._cums) < _MAX_CACHED_SIZES:
            self._cums[n] = out
        return out

    def bound(self, n: int) -> int:
        b = self._bounds.get(n)
        if b is None:
            b = int((n - 1) * self.t[n])
            if len(self._bounds) < _MAX_CACHED_SIZES:
                self._bounds[n] = b
        return b


_shared_tables: SamplerTables | None = None


def shared_tables() -> SamplerTables:
    global _shared_tables
    if _shared_tables is None:
        _shared_tables = SamplerTables()
    return _shared_tables


def _pick_removal(n: int, rng: random.Random, tables: SamplerTables) -> tuple[int, int]:
    """Choose (j, d) with probability t_{n-j*d} * d * t_d / ((n-1) * t_n).

    Pairs are scanned grouped by k = j*d, k descending (the probability mass
    concentrates at small n-k), and inside a group by j ascending."""
    t, w = tables.t, tables.w
    r = rng.randrange(tables.bound(n))
    cums, total = tables._block_cums(n)
    if r < total:
        i = bisect.bisect_right(cums, r)
        k = n - 1 - i
        if i:
            r -= cums[i - 1]
    else:
        r -= total
        k = n - 1 - len(cums)
        while k >= 1:
            blk = t[n - k] * tables.s[k]
            if r < blk:
                break
            r -= blk
            k -= 1
        else:
            raise ConsistencyError("removal scan exhausted the weight table")
    tm = t[n - k]
    j = 1
    while True:
        if k % j == 0:
            wt = tm * w[k // j]
            if r < wt:
                return j, k // j
            r -= wt
        j += 1


def _attach(base: CanonicalTree, j: int, copy: CanonicalTree) -> CanonicalTree:
    classes = base.classes
    for i, (c, m) in enumerate(classes):
        if c is copy:
            return _intern(classes[:i] + ((c, m + j),) + classes[i + 1 :])
    pos = 0
    while pos < len(classes) and compare_canonical(classes[pos][0], copy) < 0:
        pos += 1
    return _intern(classes[:pos] + ((copy, j),) + classes[pos:])


def sample_tree(
    n: int,
    rng: random.Random,
    tables: SamplerTables | None = None,
    direct_limit: int = DEFAULT_DIRECT_LIMIT,
) -> CanonicalTree:
    """An exactly uniform random rooted tree with n nodes.

    Subproblems of size <= direct_limit are drawn by uniform index into the
    enumerated canonical list instead of recursing; pass direct_limit=0 to
    force the full recursive construction. Either way the law is exactly
    uniform."""
    if n < 1:
        raise UsageError("sample_tree needs n >= 1")
    tables = tables or shared_tables()
    tables.ensure(n)
    direct = min(direct_limit, 12)
    pools = {k: _pool(k) for k in range(1, min(direct, n) + 1)}
    # op stack encoded as ints: arg<<1 is "sample size arg", arg<<1|1 is
    # "attach arg copies of the next value to the one after it"
    ops: list[int] = [n << 1]
    vals: list[CanonicalTree] = []
    the_leaf = leaf()
    while ops:
        op = ops.pop()
        arg = op >> 1
        if not op & 1:
            if arg == 1:
                vals.append(the_leaf)
            elif arg <= direct:
                p = pools[arg]
                vals.append(p[rng.randrange(len(p))])
            else:
                j, d = _pick_removal(arg, rng, tables)
                ops.append(j << 1 | 1)
                ops.append((arg - j * d) << 1)
                ops.append(d << 1)
        else:
            base = vals.pop()
            copy = vals.pop()
            vals.append(_attach(base, arg, copy))
    out = vals[0]
    if out.size != n:
        raise ConsistencyError("sampled tree has the wrong size")
    return out


def sample_automorphism(tree: CanonicalTree, rng: random.Random) -> AutomorphismElement:
    """A uniform automorphism: an independent uniform permutation for every
    child class of every node, drawn in preorder (flat child order)."""
    EXPAND, BUILD = 0, 1
    work: list = [(EXPAND, tree)]
    results: list[AutomorphismElement] = []
    while work:
        tag, payload = work.pop()
        if tag == EXPAND:
            node = payload
            perms = []
            for _sub, mult in node.classes:
                if mult == 1:
                    perms.append((0,))
                else:
                    p = list(range(mult))
                    rng.shuffle(p)
                    perms.append(tuple(p))
            work.append((BUILD, (node, perms)))
            for sub, mult in reversed(node.classes):
                for _ in range(mult):
                    work.append((EXPAND, sub))
        else:
            node, perms = payload
            subs: list[tuple[AutomorphismElement, ...]] = []
            for _sub, mult in reversed(node.classes):
                grp = [results.pop() for _ in range(mult)]
                grp.reverse()
                subs.append(tuple(grp))
            subs.reverse()
            results.append(AutomorphismElement(node, tuple(perms), tuple(subs)))
    return results[0]


@dataclass(frozen=True)
class Decomposition:
    """Fixed-point decomposition of (tree, automorphism): the fixed nodes
    (preorder indices; always ancestor-closed and containing the root) and,
    per fixed node, the total size of the child-subtree copies moved by the
    automorphism at that node."""

    tree: CanonicalTree
    c_nodes: frozenset[int]
    forests: dict[int, int]

    @property
    def c_size(self) -> int:
        return len(self.c_nodes)

    @property
    def max_forest(self) -> int:
        return max(self.forests.values(), default=0)

    def mask(self) -> str:
        return "".join("1" if i in self.c_nodes else "0" for i in range(self.tree.size))

    def to_record(self) -> dict:
        return {
            "n": self.tree.size,
            "tree": self.tree.parens,
            "c_nodes": self.mask(),
            "c_size": self.c_size,
            "max_forest": self.max_forest,
            "forests": [[i, self.forests[i]] for i in sorted(self.forests)],
        }


def decompose(tree: CanonicalTree, element: AutomorphismElement) -> Decomposition:
    """Split the tree at the fixed points of the automorphism. Validates that
    the element really is an automorphism of this tree."""
    if element.tree is not tree:
        raise UsageError("automorphism element belongs to a different tree")
    c_list: list[int] = []
    forests: dict[int, int] = {}
    moved_total = 0
    stack: list[tuple[CanonicalTree, AutomorphismElement, int, bool]] = [(tree, element, 0, True)]
    while stack:
        node, el, base, fixed = stack.pop()
        if el.tree is not node or len(el.perms) != len(node.classes) or len(el.subs) != len(node.classes):
            raise UsageError("automorphism element does not match the tree shape")
        fsize = 0
        off = 1
        for (sub, mult), pi, inner in zip(node.classes, el.perms, el.subs):
            if len(pi) != mult or len(inner) != mult or sorted(pi) != list(range(mult)):
                raise UsageError("invalid copy permutation in automorphism element")
            sz = sub.size
            for cidx in range(mult):
                stays = pi[cidx] == cidx
                stack.append((sub, inner[cidx], base + off + cidx * sz, fixed and stays))
                if fixed and not stays:
                    fsize += sz
            off += mult * sz
        if fixed:
            c_list.append(base)
            forests[base] = fsize
            moved_total += fsize
    if len(c_list) + moved_total != tree.size or 0 not in forests:
        raise ConsistencyError("decomposition does not partition the tree")
    return Decomposition(tree=tree, c_nodes=frozenset(c_list), forests=forests)


def sample_decomposition(n: int, rng: random.Random, tables: SamplerTables | None = None) -> Decomposition:
    """sample_tree, then sample_automorphism, then decompose, on one stream."""
    tree = sample_tree(n, rng, tables)
    element = sample_automorphism(tree, rng)
    return decompose(tree, element)


def _decomposition_counts(tree: CanonicalTree, rng: random.Random) -> tuple[int, list[int]]:
    """Fixed-point count and per-fixed-node forest sizes for a fresh uniform
    automorphism, drawing copy permutations only where they can still affect
    the fixed set (the law of the result matches the composed route)."""
    forests: list[int] = []
    stack: list[CanonicalTree] = [tree]
    while stack:
        node = stack.pop()
        fsize = 0
        for sub, mult in node.classes:
            if mult == 1:
                stack.append(sub)
                continue
            p = list(range(mult))
            rng.shuffle(p)
            moved = 0
            for cidx in range(mult):
                if p[cidx] == cidx:
                    stack.append(sub)
                else:
                    moved += 1
            fsize += moved * sub.size
        forests.append(fsize)
    return len(forests), forests


@dataclass
class ExperimentStats:
    """Aggregates of repeated decompositions of uniform size-n trees.

    Histograms are kept as integer counts so merges are exact and
    order-independent; derived floats are computed on demand."""

    n: int
    trials: int
    seed: int
    all_nodes: bool = False
    c_sum: int = 0
    c_sumsq: int = 0
    hist_counts: dict[int, int] = field(default_factory=dict)
    hist_total: int = 0
    ln_counts: dict[int, int] = field(default_factory=dict)

    def merge(self, other: "ExperimentStats") -> None:
        self.c_sum += other.c_sum
        self.c_sumsq += other.c_sumsq
        self.hist_total += other.hist_total
        for k, v in other.hist_counts.items():
            self.hist_counts[k] = self.hist_counts.get(k, 0) + v
        for k, v in other.ln_counts.items():
            self.ln_counts[k] = self.ln_counts.get(k, 0) + v

    @property
    def mean_c(self) -> float:
        return self.c_sum / self.trials

    @property
    def var_c(self) -> float:
        if self.trials < 2:
            return 0.0
        exact = (Fraction(self.c_sumsq) - Fraction(self.c_sum) ** 2 / self.trials) / (self.trials - 1)
        return float(exact)

    def histogram(self) -> dict[int, float]:
        return {m: cnt / self.hist_total for m, cnt in sorted(self.hist_counts.items())}

    @property
    def ln_mean(self) -> float:
        return sum(m * c for m, c in self.ln_counts.items()) / self.trials

    @property
    def ln_var(self) -> float:
        if self.trials < 2:
            return 0.0
        s1 = sum(m * c for m, c in self.ln_counts.items())
        s2 = sum(m * m * c for m, c in self.ln_counts.items())
        exact = (Fraction(s2) - Fraction(s1) ** 2 / self.trials) / (self.trials - 1)
        return float(exact)

    def ln_quantile(self, q: float) -> int:
        if not 0 < q <= 1:
            raise UsageError("quantile level must be in (0, 1]")
        need = q * self.trials
        acc = 0
        for m in sorted(self.ln_counts):
            acc += self.ln_counts[m]
            if acc >= need:
                return m
        return max(self.ln_counts, default=0)

    def to_record(self) -> dict:
        return {
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "all_nodes": self.all_nodes,
            "mean_c": self.mean_c,
            "var_c": self.var_c,
            "mean_c_over_n": self.mean_c / self.n,
            "var_c_over_n": self.var_c / self.n,
            "ln_mean": self.ln_mean,
            "ln_var": self.ln_var,
            "ln_q50": self.ln_quantile(0.5),
            "ln_q90": self.ln_quantile(0.9),
            "ln_q99": self.ln_quantile(0.99),
            "forest_size_histogram": {str(m): f for m, f in self.histogram().items()},
        }


def _run_range(n: int, seed: int, start: int, stop: int, all_nodes: bool, tables: SamplerTables) -> ExperimentStats:
    out = ExperimentStats(n=n, trials=stop - start, seed=seed, all_nodes=all_nodes)
    hist = out.hist_counts
    ln_hist = out.ln_counts
    for trial in range(start, stop):
        rng = RngStream(seed, trial).rng()
        tree = sample_tree(n, rng, tables)
        c_count, forests = _decomposition_counts(tree, rng)
        out.c_sum += c_count
        out.c_sumsq += c_count * c_count
        if all_nodes:
            for f in forests:
                hist[f] = hist.get(f, 0) + 1
            out.hist_total += c_count
        else:
            f = forests[rng.randrange(c_count)]
            hist[f] = hist.get(f, 0) + 1
            out.hist_total += 1
        mx = max(forests)
        ln_hist[mx] = ln_hist.get(mx, 0) + 1
    return out


def run_experiment(n: int, trials: int, seed: int = DEFAULT_SEED, workers: int = 1,
                   all_nodes: bool = False, tables: SamplerTables | None = None) -> ExperimentStats:
    """Decompose `trials` independent uniform size-n trees along fresh uniform
    automorphisms and aggregate fixed-point counts, the forest size at a
    random fixed node (or at every fixed node with all_nodes=True), and the
    per-trial largest forest.

    Trial `i` uses the stream RngStream(seed, i), so results are identical
    for any worker count or chunking. Copy permutations are drawn lazily
    along the fixed skeleton, which leaves the decomposition law exactly the
    one of sample_decomposition."""
    if trials < 1:
        raise UsageError("need at least one trial")
    if workers < 1:
        raise UsageError("workers must be >= 1")
    tables = tables or shared_tables()
    tables.ensure(n)
    if workers == 1:
        return _run_range(n, seed, 0, trials, all_nodes, tables)
    import multiprocessing

    global _fork_tables
    ctx = multiprocessing.get_context("fork")
    step = max(1, trials // (workers * 4))
    chunks = [(n, seed, lo, min(lo + step, trials), all_nodes) for lo in range(0, trials, step)]
    total = ExperimentStats(n=n, trials=trials, seed=seed, all_nodes=all_nodes)
    _fork_tables = tables  # children inherit the built tables through fork
    try:
        with ctx.Pool(workers) as pool:
            for part in pool.starmap(_forked_range, chunks):
                total.merge(part)
    finally:
        _fork_tables = None
    return total


_fork_tables: SamplerTables | None = None


def _forked_range(n: int, seed: int, start: int, stop: int, all_nodes: bool) -> ExperimentStats:
    return _run_range(n, seed, start, stop, all_nodes, _fork_tables or shared_tables())
