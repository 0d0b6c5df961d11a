"""Canonical unlabeled rooted trees and automorphism brute-force machinery.

Trees are hash-consed: structurally equal trees are the same object, so
equality is identity and child multisets can be grouped in O(deg). A node
stores its children as *classes*, pairs (subtree, multiplicity), sorted in
canonical order (size descending, then parenthesization descending). The
registry holds weak references so trees built transiently by the sampler
can be reclaimed.
"""

from __future__ import annotations

import itertools
import weakref
from fractions import Fraction
from functools import cmp_to_key
from math import factorial
from typing import Iterable, Iterator, Sequence

from .errors import ConsistencyError, ResourceCapError, UsageError
from .series import UPOLY_ONE, UPolynomial

DEFAULT_TREE_ENUM_CAP = 16
DEFAULT_FOREST_ENUM_CAP = 14
DEFAULT_GROUP_CAP = 20000

_registry: "weakref.WeakValueDictionary[tuple, CanonicalTree]" = weakref.WeakValueDictionary()
_uid_counter = itertools.count(1)

_CLOSE = object()


class CanonicalTree:
    """An interned rooted tree; build through tree_from_children or the parsers."""

    __slots__ = ("classes", "size", "uid", "_parens", "_aut", "_fpp", "_orbits", "__weakref__")

    def __init__(self, classes: tuple[tuple["CanonicalTree", int], ...], size: int, uid: int):
        self.classes = classes
        self.size = size
        self.uid = uid
        self._parens: str | None = None
        self._aut: int | None = None
        self._fpp: UPolynomial | None = None
        self._orbits: int | None = None

    @property
    def children(self) -> tuple["CanonicalTree", ...]:
        """Flat child tuple in canonical order, copies adjacent."""
        return tuple(c for c, m in self.classes for _ in range(m))

    @property
    def parens(self) -> str:
        if self._parens is None:
            parts: list[str] = []
            stack: list = [self]
            while stack:
                x = stack.pop()
                if x is _CLOSE:
                    parts.append(")")
                    continue
                if x._parens is not None:
                    parts.append(x._parens)
                    continue
                parts.append("(")
                stack.append(_CLOSE)
                for c, m in reversed(x.classes):
                    for _ in range(m):
                        stack.append(c)
            self._parens = "".join(parts)
        return self._parens

    def to_level_sequence(self) -> str:
        """Preorder depth sequence with the root at depth 1, e.g. "1 2 2 2"."""
        depths: list[int] = []
        stack: list[tuple[CanonicalTree, int]] = [(self, 1)]
        while stack:
            node, d = stack.pop()
            depths.append(d)
            for c, m in reversed(node.classes):
                for _ in range(m):
                    stack.append((c, d + 1))
        return " ".join(map(str, depths))

    def __repr__(self) -> str:
        return f"CanonicalTree({self.parens!r})"

    def __len__(self) -> int:
        return self.size


def _intern(classes: tuple[tuple[CanonicalTree, int], ...]) -> CanonicalTree:
    key = tuple((c.uid, m) for c, m in classes)
    node = _registry.get(key)
    if node is None:
        size = 1 + sum(m * c.size for c, m in classes)
        node = CanonicalTree(classes, size, next(_uid_counter))
        _registry[key] = node
    return node


def compare_canonical(a: CanonicalTree, b: CanonicalTree) -> int:
    """-1 if a precedes b in canonical order (size desc, parens desc), else 1; 0 iff same tree."""
    if a is b:
        return 0
    if a.size != b.size:
        return -1 if a.size > b.size else 1
    return -1 if a.parens > b.parens else 1


_desc_key = cmp_to_key(compare_canonical)

_LEAF = _intern(())


def leaf() -> CanonicalTree:
    return _LEAF


def tree_from_children(children: Iterable[CanonicalTree]) -> CanonicalTree:
    """Root node over an unordered collection of canonical subtrees."""
    counts: dict[CanonicalTree, int] = {}
    for c in children:
        if not isinstance(c, CanonicalTree):
            raise UsageError("children must be CanonicalTree instances")
        counts[c] = counts.get(c, 0) + 1
    ordered = sorted(counts, key=_desc_key)
    return _intern(tuple((c, counts[c]) for c in ordered))


def canonical_form(obj) -> CanonicalTree:
    """Canonicalize a rooted tree given as nested sequences (a node is the
    sequence of its children, in any order); CanonicalTree passes through."""
    if isinstance(obj, CanonicalTree):
        return obj
    if isinstance(obj, str):
        return parse_parens(obj)
    if not isinstance(obj, (list, tuple)):
        raise UsageError(f"cannot interpret {type(obj).__name__} as a tree")
    return tree_from_children(canonical_form(c) for c in obj)


def parse_parens(s: str) -> CanonicalTree:
    """Parse a balanced-parenthesis serialization such as "(()()())"."""
    stack: list[list[CanonicalTree]] = []
    root: CanonicalTree | None = None
    for ch in s.strip():
        if ch == "(":
            stack.append([])
        elif ch == ")":
            if not stack:
                raise UsageError("unbalanced parentheses")
            node = tree_from_children(stack.pop())
            if stack:
                stack[-1].append(node)
            elif root is None:
                root = node
            else:
                raise UsageError("more than one root")
        elif not ch.isspace():
            raise UsageError(f"unexpected character {ch!r}")
    if stack or root is None:
        raise UsageError("unbalanced parentheses")
    return root


def parse_level_sequence(s: str) -> CanonicalTree:
    """Parse a preorder depth sequence ("1 2 2 2"); depths may start anywhere."""
    try:
        depths = [int(tok) for tok in s.replace(",", " ").split()]
    except ValueError as exc:
        raise UsageError(f"bad level sequence: {exc}") from None
    if not depths:
        raise UsageError("empty level sequence")
    base = depths[0]
    stack: list[list[CanonicalTree]] = [[]]
    prev = base - 1
    for d in depths:
        if d <= base - 1 or d > prev + 1:
            raise UsageError("level sequence is not a valid preorder walk")
        while prev >= d:
            node = tree_from_children(stack.pop())
            stack[-1].append(node)
            prev -= 1
        stack.append([])
        prev = d
    while len(stack) > 1:
        node = tree_from_children(stack.pop())
        stack[-1].append(node)
    roots = stack[0]
    if len(roots) != 1:
        raise UsageError("level sequence describes a forest, not a tree")
    return roots[0]


def _postorder_distinct(root: CanonicalTree, done) -> list[CanonicalTree]:
    """Distinct subtrees of root, children before parents, skipping nodes
    already marked done (a predicate)."""
    order: list[CanonicalTree] = []
    seen: set[int] = set()
    stack: list[tuple[CanonicalTree, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if node.uid in seen or done(node):
            continue
        seen.add(node.uid)
        stack.append((node, True))
        for c, _m in node.classes:
            stack.append((c, False))
    return order


# ---------------------------------------------------------------------------
# automorphism counts, fixed-point polynomials, orbit counts

_derangement_cache = [1, 0]


def derangements(k: int) -> int:
    while len(_derangement_cache) <= k:
        r = len(_derangement_cache)
        _derangement_cache.append((r - 1) * (_derangement_cache[r - 1] + _derangement_cache[r - 2]))
    return _derangement_cache[k]


def aut_order(tree: CanonicalTree) -> int:
    """|Aut(tree)| = prod over child classes of k! * |Aut(subtree)|^k."""
    if tree._aut is None:
        for node in _postorder_distinct(tree, lambda n: n._aut is not None):
            a = 1
            for c, m in node.classes:
                a *= factorial(m) * c._aut ** m
            node._aut = a
    return tree._aut


def _sym_fixed_average(k: int, p: UPolynomial) -> UPolynomial:
    # average of s^{fix(pi)} over pi in S_k with s := p; the permutations with
    # exactly j fixed points number binom(k,j) * derangements(k-j)
    acc = UPolynomial([Fraction(derangements(k))])
    power = UPOLY_ONE
    binom = 1
    for j in range(1, k + 1):
        power = power * p
        binom = binom * (k - j + 1) // j
        acc = acc + power * Fraction(binom * derangements(k - j))
    return acc * Fraction(1, factorial(k))


def fixed_point_polynomial(tree: CanonicalTree) -> UPolynomial:
    """t_T(u) = average of u^{#fixed nodes} over the automorphisms of T,
    computed through the wreath-product structure of Aut(T)."""
    if tree._fpp is None:
        for node in _postorder_distinct(tree, lambda n: n._fpp is not None):
            poly = UPOLY_ONE
            for c, m in node.classes:
                poly = poly * _sym_fixed_average(m, c._fpp)
            node._fpp = poly.shift(1)  # the root is always fixed
    return tree._fpp


def orbit_count(tree: CanonicalTree) -> int:
    """Number of node orbits under Aut(tree); each child class contributes
    the orbits of one representative subtree."""
    if tree._orbits is None:
        for node in _postorder_distinct(tree, lambda n: n._orbits is not None):
            node._orbits = 1 + sum(c._orbits for c, _m in node.classes)
    return tree._orbits


# ---------------------------------------------------------------------------
# enumeration

_tree_lists: dict[int, tuple[CanonicalTree, ...]] = {}


def _ordered_trees_upto(s: int) -> tuple[tuple[CanonicalTree, ...], list[int]]:
    """All trees of size <= s in canonical (descending) order, plus offsets:
    offsets[r] = first index whose tree has size <= r."""
    chunks = [_enumerate_size(k) for k in range(s, 0, -1)]
    flat: list[CanonicalTree] = []
    offsets = [0] * (s + 1)
    for k, chunk in zip(range(s, 0, -1), chunks):
        offsets[k] = len(flat)
        flat.extend(chunk)
    return tuple(flat), offsets


def _multisets(total: int, idx: int, min_mult: int, flat: Sequence[CanonicalTree], offsets: list[int]) -> Iterator[tuple[tuple[CanonicalTree, int], ...]]:
    if total == 0:
        yield ()
        return
    i = max(idx, offsets[total])
    for pos in range(i, len(flat)):
        tr = flat[pos]
        sz = tr.size
        top = total // sz
        if top < min_mult:
            continue
        for m in range(min_mult, top + 1):
            rest = total - m * sz
            if rest == 0:
                yield ((tr, m),)
            else:
                for tail in _multisets(rest, pos + 1, min_mult, flat, offsets):
                    yield ((tr, m),) + tail


def _enumerate_size(n: int) -> tuple[CanonicalTree, ...]:
    if n in _tree_lists:
        return _tree_lists[n]
    if n == 1:
        out: tuple[CanonicalTree, ...] = (_LEAF,)
    else:
        flat, offsets = _ordered_trees_upto(n - 1)
        out = tuple(sorted((_intern(cls) for cls in _multisets(n - 1, 0, 1, flat, offsets)), key=_desc_key))
    _tree_lists[n] = out
    return out


def enumerate_trees(n: int, cap: int = DEFAULT_TREE_ENUM_CAP) -> tuple[CanonicalTree, ...]:
    """All unlabeled rooted trees with n nodes, canonical order."""
    if n < 1:
        raise UsageError("tree enumeration needs n >= 1")
    if n > cap:
        raise ResourceCapError(f"tree enumeration capped at n <= {cap} (asked {n})")
    return _enumerate_size(n)


class ForestSpec:
    """A forest in which every distinct tree occurs with multiplicity >= 2,
    stored as canonical classes (tree, multiplicity)."""

    __slots__ = ("classes", "size")

    def __init__(self, classes: Iterable[tuple[CanonicalTree, int]]):
        cls = tuple(sorted(classes, key=lambda cm: _desc_key(cm[0])))
        for tr, m in cls:
            if m < 2:
                raise UsageError("forest multiplicities must be >= 2")
        if len({tr.uid for tr, _ in cls}) != len(cls):
            raise UsageError("forest classes must use distinct trees")
        self.classes = cls
        self.size = sum(m * tr.size for tr, m in cls)

    def __eq__(self, other) -> bool:
        return isinstance(other, ForestSpec) and self.classes == other.classes

    def __hash__(self) -> int:
        return hash(tuple((tr.uid, m) for tr, m in self.classes))

    def __repr__(self) -> str:
        inner = ", ".join(f"{m}*{tr.parens}" for tr, m in self.classes)
        return f"ForestSpec({inner})"


def enumerate_forests(n: int, cap: int = DEFAULT_FOREST_ENUM_CAP) -> tuple[ForestSpec, ...]:
    """All repeated forests (every multiplicity >= 2) of total size n;
    n = 0 gives the empty forest, n = 1 gives nothing."""
    if n < 0:
        raise UsageError("forest enumeration needs n >= 0")
    if n > cap:
        raise ResourceCapError(f"forest enumeration capped at n <= {cap} (asked {n})")
    if n == 0:
        return (ForestSpec(()),)
    flat, offsets = _ordered_trees_upto(n)
    return tuple(ForestSpec(cls) for cls in _multisets(n, 0, 2, flat, offsets))


def forest_weight(forest: ForestSpec) -> Fraction:
    """Fraction of automorphisms of the forest that fix no node at all.

    Every tree automorphism fixes its root, so an automorphism of the forest
    is fixed-point-free iff each class permutation is a derangement; the
    inner automorphisms cancel, leaving prod derangements(m)/m!.
    """
    w = Fraction(1)
    for _tr, m in forest.classes:
        w *= Fraction(derangements(m), factorial(m))
    return w


def dn_oracle(n: int, cap: int = DEFAULT_FOREST_ENUM_CAP) -> Fraction:
    """d_n summed tree-by-tree over the enumerated forests of size n;
    independent of the series recurrence."""
    return sum((forest_weight(f) for f in enumerate_forests(n, cap)), Fraction(0))


def tcn_polynomial_oracle(n: int, cap: int = DEFAULT_TREE_ENUM_CAP) -> UPolynomial:
    """Sum of fixed_point_polynomial over all trees of size n; independent
    route to row n of the bivariate table from ctree_polynomials."""
    acc = UPolynomial([])
    for tr in enumerate_trees(n, cap):
        acc = acc + fixed_point_polynomial(tr)
    return acc


# ---------------------------------------------------------------------------
# explicit automorphism elements (definitional oracle path)


class AutomorphismElement:
    """One automorphism of a canonical tree.

    perms[i] is the permutation of the copy positions of class i at the root
    (perms[i][c] = image position), subs[i][c] the automorphism applied inside
    copy c before it lands on its image position.
    """

    __slots__ = ("tree", "perms", "subs")

    def __init__(self, tree: CanonicalTree, perms: tuple[tuple[int, ...], ...], subs: tuple[tuple["AutomorphismElement", ...], ...]):
        self.tree = tree
        self.perms = perms
        self.subs = subs

    def fixed_count(self) -> int:
        total = 0
        stack: list[AutomorphismElement] = [self]
        while stack:
            el = stack.pop()
            total += 1  # the root of this fragment stays put
            for pi, inner in zip(el.perms, el.subs):
                for c, img in enumerate(pi):
                    if img == c:
                        stack.append(inner[c])
        return total

    def is_identity(self) -> bool:
        stack: list[AutomorphismElement] = [self]
        while stack:
            el = stack.pop()
            for pi, inner in zip(el.perms, el.subs):
                for c, img in enumerate(pi):
                    if img != c:
                        return False
                    stack.append(inner[c])
        return True

    def as_permutation(self) -> tuple[int, ...]:
        """Image of every node under the automorphism, nodes indexed by
        preorder position in the canonical traversal."""
        n = self.tree.size
        out = [0] * n
        stack: list[tuple[AutomorphismElement, int, int]] = [(self, 0, 0)]
        while stack:
            el, src, dst = stack.pop()
            out[src] = dst
            off = 1
            for (sub, mult), pi, inner in zip(el.tree.classes, el.perms, el.subs):
                sz = sub.size
                for c in range(mult):
                    stack.append((inner[c], src + off + c * sz, dst + off + pi[c] * sz))
                off += mult * sz
        return tuple(out)

    def __repr__(self) -> str:
        return f"AutomorphismElement(tree={self.tree.parens!r}, perms={self.perms!r})"


def identity_element(tree: CanonicalTree) -> AutomorphismElement:
    perms = []
    subs = []
    for c, m in tree.classes:
        perms.append(tuple(range(m)))
        ic = identity_element(c)
        subs.append((ic,) * m)
    return AutomorphismElement(tree, tuple(perms), tuple(subs))


def aut_elements(tree: CanonicalTree, cap: int = DEFAULT_GROUP_CAP) -> tuple[AutomorphismElement, ...]:
    """Every automorphism, enumerated definitionally from the child classes."""
    if aut_order(tree) > cap:
        raise ResourceCapError(f"automorphism group of order {aut_order(tree)} exceeds cap {cap}")
    memo: dict[int, tuple[AutomorphismElement, ...]] = {}

    def build(node: CanonicalTree) -> tuple[AutomorphismElement, ...]:
        got = memo.get(node.uid)
        if got is not None:
            return got
        per_class: list[list[tuple[tuple[int, ...], tuple[AutomorphismElement, ...]]]] = []
        for c, m in node.classes:
            inner_pool = build(c)
            combos = []
            for pi in itertools.permutations(range(m)):
                for inner in itertools.product(inner_pool, repeat=m):
                    combos.append((pi, inner))
            per_class.append(combos)
        elems = []
        for choice in itertools.product(*per_class):
            perms = tuple(pi for pi, _ in choice)
            subs = tuple(inner for _, inner in choice)
            elems.append(AutomorphismElement(node, perms, subs))
        out = tuple(elems)
        memo[node.uid] = out
        return out

    return build(tree)


def forest_aut_order(forest: ForestSpec) -> int:
    a = 1
    for tr, m in forest.classes:
        a *= factorial(m) * aut_order(tr) ** m
    return a


def forest_weight_oracle(forest: ForestSpec, size_cap: int = 6) -> Fraction:
    """Definitional forest weight: enumerate the full automorphism group of
    the forest and count the elements without fixed nodes. Deliberately
    brute force; capped by total size."""
    if forest.size > size_cap:
        raise ResourceCapError(f"definitional forest oracle capped at size {size_cap}")
    per_class = []
    for tr, m in forest.classes:
        pool = aut_elements(tr)
        fixes = [el.fixed_count() for el in pool]
        combos = []
        for pi in itertools.permutations(range(m)):
            ones = [c for c in range(m) if pi[c] == c]
            for inner in itertools.product(range(len(pool)), repeat=m):
                combos.append(sum(fixes[inner[c]] for c in ones))
        per_class.append(combos)
    free = 0
    total = 0
    for fix_counts in itertools.product(*per_class):
        total += 1
        if sum(fix_counts) == 0:
            free += 1
    if total != forest_aut_order(forest):
        raise ConsistencyError("forest group enumeration disagrees with the order formula")
    return Fraction(free, total)
