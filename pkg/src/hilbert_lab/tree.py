"""Binary interval trees over ordered regular sets and ordered tree embeddings.

A set E in [0, 1] is given by its complementary gaps, ordered by decreasing
length (ties left to right). Removing the first k gaps splits [0, 1] into k+1
closed intervals; each removal splits one interval into two children, which
gives a binary tree. The tree distance between two points is the length of the
smallest tree interval containing both.

Vertices are addressed by words in ``{l, r}*``. Standard Cantor sets with an
integer parameter use exact rational arithmetic throughout.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    BaseMapNotInjective,
    ExponentOrder,
    InsufficientGaps,
    InvalidParameter,
    NotInSet,
    NotOrderPreserving,
)

Number = Fraction | float


def _as_parameter(p) -> Number:
    if isinstance(p, Fraction):
        return p
    p = float(p)
    if not p > 2.0:
        raise InvalidParameter(f"p must exceed 2, got {p}")
    return Fraction(int(p)) if p.is_integer() else p


def _coerce(x, exact: bool) -> Number:
    if not exact:
        return float(x)
    if isinstance(x, float):
        # floats such as 1/3 are read back as the nearest simple rational
        return Fraction(x).limit_denominator(10**15)
    return Fraction(x)


# ---------------------------------------------------------------------------------
# Sets
# ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class OrderedRegularSet:
    """Closed set ``[0, 1]`` minus an ordered list of open gaps."""

    gaps: tuple[tuple[Number, Number], ...]
    exact: bool
    p: Number | None = None  # parameter of a standard Cantor set

    @classmethod
    def standard(cls, p, generations: int) -> "OrderedRegularSet":
        """Standard Cantor set ``C_p`` with its gaps up to ``generations``."""
        p = _as_parameter(p)
        exact = isinstance(p, Fraction)
        one = Fraction(1) if exact else 1.0
        gaps = []
        starts = [one * 0]
        length = one
        for _ in range(generations):
            length = length / p
            gaps.extend((c + length, c + (p - 1) * length) for c in starts)
            starts = [c + d for c in starts for d in (0, (p - 1) * length)]
        return cls(tuple(gaps), exact, p)

    @classmethod
    def from_gaps(cls, gaps: Iterable[Sequence], exact: bool | None = None) -> "OrderedRegularSet":
        gaps = [tuple(g) for g in gaps]
        if exact is None:
            exact = all(isinstance(v, (Fraction, int)) for g in gaps for v in g)
        gaps = [(_coerce(a, exact), _coerce(b, exact)) for a, b in gaps]
        for a, b in gaps:
            if not 0 < a < b < 1:
                raise InvalidParameter(f"gap ({a}, {b}) must satisfy 0 < a < b < 1")
        by_pos = sorted(gaps)
        for (a0, b0), (a1, b1) in zip(by_pos, by_pos[1:]):
            if a1 < b0:
                raise InvalidParameter(f"gaps ({a0}, {b0}) and ({a1}, {b1}) overlap")
        # float lengths that agree to ~1e-15 count as ties and run left to right
        key = (lambda g: (-(g[1] - g[0]), g[0])) if exact else (lambda g: (-round(float(g[1] - g[0]), 15), g[0]))
        return cls(tuple(sorted(gaps, key=key)), exact)

    def __len__(self) -> int:
        return len(self.gaps)

    def truncation(self, k: int) -> list[tuple[Number, Number]]:
        """The ``k + 1`` closed intervals left after removing the first k gaps."""
        if k > len(self.gaps):
            raise InsufficientGaps(f"only {len(self.gaps)} gaps available, asked for {k}")
        one = Fraction(1) if self.exact else 1.0
        cuts = sorted(self.gaps[:k])
        out = []
        start = one * 0
        for a, b in cuts:
            out.append((start, a))
            start = b
        out.append((start, one))
        return out


# ---------------------------------------------------------------------------------
# Explicit trees
# ---------------------------------------------------------------------------------


@dataclass
class Vertex:
    word: str
    a: Number
    b: Number
    parent: str | None
    created: int  # number of gaps removed when the vertex appeared
    split_by: int | None = None  # index of the gap that splits it

    @property
    def length(self) -> Number:
        return self.b - self.a


@dataclass
class CantorTree:
    """Binary tree of the intervals produced by successive gap removals."""

    vertices: dict[str, Vertex]
    leaves: list[str]  # in left-to-right order
    gaps_used: int
    exact: bool
    source: OrderedRegularSet = field(repr=False)

    def length(self, word: str) -> Number:
        return self.vertices[word].length

    def children(self, word: str) -> tuple[str, str] | None:
        if word + "l" in self.vertices:
            return word + "l", word + "r"
        return None

    def internal(self) -> list[str]:
        return [w for w in self.vertices if w + "l" in self.vertices]

    def locate(self, x) -> str:
        """Leaf containing the point ``x``; raises NotInSet inside a removed gap."""
        x = _coerce(x, self.exact)
        if not 0 <= x <= 1:
            raise NotInSet(f"{x} is outside [0, 1]")
        word = ""
        while (kids := self.children(word)) is not None:
            left, right = (self.vertices[k] for k in kids)
            if x <= left.b:
                word = left.word
            elif x >= right.a:
                word = right.word
            else:
                raise NotInSet(f"{x} lies in the removed gap ({left.b}, {right.a})")
        return word

    def leaf_table(self):
        """Arrays describing the leaves for vectorised distance queries.

        Returns ``(starts, ends, scale, separator, gap_vertex_length)`` where
        coordinates are integer numerators over ``scale`` for exact trees,
        ``separator[i]`` is the index of the gap between leaves i and i+1, and
        ``gap_vertex_length[j]`` the length of the vertex split by gap j.
        """
        leaves = [self.vertices[w] for w in self.leaves]
        split = {v.split_by: v for v in self.vertices.values() if v.split_by is not None}
        # the gap between consecutive leaves splits their lowest common ancestor
        separator = [
            self.vertices[w0[: common_prefix(w0, w1)]].split_by for w0, w1 in zip(self.leaves, self.leaves[1:])
        ]
        lengths = [split[j].length for j in range(self.gaps_used)]
        if self.exact:
            values = [v.a for v in leaves] + [v.b for v in leaves] + lengths
            scale = math.lcm(*(q.denominator for q in values))
            dtype = object if scale > 2**52 else np.int64

            def to_int(seq):
                return np.array([int(q * scale) for q in seq], dtype=dtype)

            return (
                to_int([v.a for v in leaves]),
                to_int([v.b for v in leaves]),
                scale,
                np.array(separator, dtype=np.int64),
                to_int(lengths),
            )
        return (
            np.array([v.a for v in leaves], dtype=float),
            np.array([v.b for v in leaves], dtype=float),
            1.0,
            np.array(separator, dtype=np.int64),
            np.array(lengths, dtype=float),
        )


def build_tree(regular_set: OrderedRegularSet, depth_gaps: int) -> CantorTree:
    """Remove the first ``depth_gaps`` gaps one at a time, splitting one leaf each time."""
    if depth_gaps < 0:
        raise InvalidParameter("number of gaps must be nonnegative")
    if depth_gaps > len(regular_set.gaps):
        raise InsufficientGaps(f"only {len(regular_set.gaps)} gaps available, asked for {depth_gaps}")
    one = Fraction(1) if regular_set.exact else 1.0
    root = Vertex("", one * 0, one, None, 0)
    vertices = {"": root}
    starts = [root.a]
    words = [""]
    for k, (a, b) in enumerate(regular_set.gaps[:depth_gaps]):
        i = bisect.bisect_right(starts, a) - 1
        leaf = vertices[words[i]]
        if not (leaf.a < a and b < leaf.b):
            raise InvalidParameter(f"gap ({a}, {b}) is not interior to a current interval")
        leaf.split_by = k
        left = Vertex(leaf.word + "l", leaf.a, a, leaf.word, k + 1)
        right = Vertex(leaf.word + "r", b, leaf.b, leaf.word, k + 1)
        vertices[left.word] = left
        vertices[right.word] = right
        words[i] = left.word
        starts.insert(i + 1, b)
        words.insert(i + 1, right.word)
    return CantorTree(vertices, words, depth_gaps, regular_set.exact, regular_set)


def tree_distance(tree: CantorTree, x, y) -> Number:
    """Length of the smallest tree interval containing both points (0 if x == y)."""
    x = _coerce(x, tree.exact)
    y = _coerce(y, tree.exact)
    tree.locate(x)
    tree.locate(y)
    if x == y:
        return x * 0
    word = ""
    while (kids := tree.children(word)) is not None:
        left, right = (tree.vertices[k] for k in kids)
        if x <= left.b and y <= left.b:
            word = left.word
        elif x >= right.a and y >= right.a:
            word = right.word
        else:
            break
    return tree.length(word)


def branch_ratio_check(tree: CantorTree) -> Number:
    """Largest ratio max/min of the three pieces (child, gap, child) over internal vertices."""
    worst = None
    for word in tree.internal():
        v = tree.vertices[word]
        u, w = (tree.vertices[c] for c in tree.children(word))
        parts = (u.length, w.length, v.length - u.length - w.length)
        ratio = max(parts) / min(parts)
        worst = ratio if worst is None else max(worst, ratio)
    if worst is None:
        raise InsufficientGaps("tree has no internal vertex")
    return worst


# ---------------------------------------------------------------------------------
# Bi-Lipschitz comparison with the Euclidean metric
# ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class BiLipschitzReport:
    max_ratio_up: float  # max |x - y| / d_T, at most 1
    max_ratio_down: float  # max d_T / |x - y|
    k_bound: float  # 3 * branch ratio
    pairs: int
    same_leaf_pairs: int  # truncation-limited pairs
    euclid_le_tree: bool  # |x - y| <= d_T on every pair (exact for exact trees)
    within_bound: bool


def _range_min_table(values: np.ndarray) -> list[np.ndarray]:
    table = [values]
    span = 1
    while 2 * span <= len(values):
        prev = table[-1]
        table.append(np.minimum(prev[:-span], prev[span:]))
        span *= 2
    return table


def _range_min(table: list[np.ndarray], lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Minimum of ``values[lo:hi]`` (hi > lo) for arrays of bounds."""
    width = hi - lo
    level = np.floor(np.log2(np.maximum(width, 1))).astype(int)
    out = np.empty(len(lo), dtype=table[0].dtype)
    for k in np.unique(level):
        sel = level == k
        out[sel] = np.minimum(table[k][lo[sel]], table[k][hi[sel] - (1 << k)])
    return out


def leaf_endpoint_pairs(tree: CantorTree) -> tuple[np.ndarray, np.ndarray]:
    """All unordered pairs of distinct leaf endpoints, as point indices.

    Point ``2 i`` is the left endpoint of leaf i and ``2 i + 1`` its right endpoint.
    """
    n = 2 * len(tree.leaves)
    i, j = np.triu_indices(n, k=1)
    return i, j


def bilipschitz_check(
    tree: CantorTree,
    pairs: str | int | tuple[np.ndarray, np.ndarray] = "exhaustive",
    seed: int = 0,
    chunk: int = 1 << 20,
) -> BiLipschitzReport:
    """Compare d_T with |x - y| over leaf-endpoint pairs.

    ``pairs`` is ``"exhaustive"``, a sample size, or explicit point-index arrays
    (see :func:`leaf_endpoint_pairs`). Pairs inside one leaf use the leaf length
    as d_T and are counted as truncation-limited.
    """
    starts, ends, scale, separator, gap_len = tree.leaf_table()
    points = np.empty(2 * len(starts), dtype=starts.dtype)
    points[0::2] = starts
    points[1::2] = ends
    leaf_len = ends - starts
    n = len(points)
    if isinstance(pairs, str):
        if pairs != "exhaustive":
            raise InvalidParameter(f"unknown pair mode {pairs!r}")
        pi, pj = leaf_endpoint_pairs(tree)
    elif isinstance(pairs, int):
        rng = np.random.default_rng(seed)
        pi = rng.integers(0, n, size=pairs)
        pj = rng.integers(0, n, size=pairs)
        keep = pi != pj
        pi, pj = np.minimum(pi, pj)[keep], np.maximum(pi, pj)[keep]
    else:
        pi, pj = (np.asarray(a, dtype=np.int64) for a in pairs)
        pi, pj = np.minimum(pi, pj), np.maximum(pi, pj)
    table = _range_min_table(separator) if len(separator) else None
    k_hat = float(branch_ratio_check(tree)) if tree.gaps_used else 1.0
    k_bound = 3.0 * k_hat
    up = 0.0
    down = 0.0
    same = 0
    ok_le = True
    for start in range(0, len(pi), chunk):
        a = pi[start : start + chunk]
        b = pj[start : start + chunk]
        la, lb = a // 2, b // 2
        euclid = points[b] - points[a]
        d_t = leaf_len[la].copy()
        cross = la != lb
        same += int(np.count_nonzero(~cross))
        if np.any(cross):
            gap_idx = _range_min(table, la[cross], lb[cross])
            d_t[cross] = gap_len[gap_idx]
        ok_le &= bool(np.all(euclid <= d_t))
        e = euclid.astype(float)
        d = d_t.astype(float)
        up = max(up, float(np.max(e / d)))
        down = max(down, float(np.max(d / e)))
    return BiLipschitzReport(up, down, k_bound, int(len(pi)), same, ok_le, down <= k_bound * (1 + 1e-12))


# ---------------------------------------------------------------------------------
# Standard trees (implicit)
# ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class StandardTree:
    """The full binary tree of a standard Cantor set, addressed by words."""

    p: Number

    @classmethod
    def of(cls, p) -> "StandardTree":
        return cls(_as_parameter(p))

    @property
    def exact(self) -> bool:
        return isinstance(self.p, Fraction)

    @property
    def dimension(self) -> float:
        return math.log(2.0) / math.log(float(self.p))

    def length(self, word: str) -> Number:
        return self.p ** -len(word) if self.exact else float(self.p) ** -len(word)

    def start(self, word: str) -> Number:
        p = self.p
        one = Fraction(1) if self.exact else 1.0
        x = one * 0
        scale = one
        for c in word:
            scale = scale / p
            if c == "r":
                x += (p - 1) * scale
        return x

    def interval(self, word: str) -> tuple[Number, Number]:
        a = self.start(word)
        return a, a + self.length(word)

    def smallest_vertex(self, y0, y1, max_depth: int) -> str:
        """Deepest vertex (down to ``max_depth``) containing both points."""
        p = self.p
        lo, hi = (y0, y1) if y0 <= y1 else (y1, y0)
        a = Fraction(0) if self.exact else 0.0
        length = Fraction(1) if self.exact else 1.0
        word = ""
        for _ in range(max_depth):
            step = length / p
            if hi <= a + step:
                word += "l"
            elif lo >= a + length - step:
                word += "r"
                a = a + length - step
            else:
                break
            length = step
        return word

    def contains(self, y, depth: int) -> bool:
        """Whether ``y`` lies in the depth-``depth`` truncation of the set."""
        p = self.p
        a = Fraction(0) if self.exact else 0.0
        length = Fraction(1) if self.exact else 1.0
        for _ in range(depth):
            step = length / p
            if y <= a + step:
                pass
            elif y >= a + length - step:
                a = a + length - step
            else:
                return False
            length = step
        return a <= y <= a + length


def common_prefix(u: str, v: str) -> int:
    n = 0
    for a, b in zip(u, v):
        if a != b:
            break
        n += 1
    return n


def all_words(depth: int) -> list[str]:
    words = [""]
    for _ in range(depth):
        words = [w + c for w in words for c in "lr"]
    return words


# ---------------------------------------------------------------------------------
# Embeddings
# ---------------------------------------------------------------------------------


@dataclass
class OrderedEmbedding:
    """Vertex map from a source tree into a standard target tree.

    ``vertex_map`` sends source words to target words; ``flips`` is the set of
    target prefixes (in the coordinates of the unflipped map) at which the
    digit following the prefix is complemented.
    """

    source: CantorTree | StandardTree
    target: StandardTree
    depth: int
    vertex_map: dict[str, str]
    flips: frozenset[str] = frozenset()
    flip_count: int = 0
    levels: tuple[int, ...] = ()

    def image(self, word: str) -> str:
        return apply_flips(self.vertex_map[word], self.flips)

    def source_length(self, word: str) -> Number:
        return self.source.length(word)

    def source_start(self, word: str) -> Number:
        if isinstance(self.source, StandardTree):
            return self.source.start(word)
        return self.source.vertices[word].a

    def leaves(self) -> list[str]:
        if isinstance(self.source, StandardTree):
            return all_words(self.depth)
        return list(self.source.leaves)

    def internal(self) -> list[str]:
        if isinstance(self.source, StandardTree):
            return [w for n in range(self.depth) for w in all_words(n)]
        return self.source.internal()

    @property
    def order_preserved(self) -> bool:
        return order_preserved(self)

    def distortion(self, pairs: int | None = None, seed: int = 0) -> tuple[float, float]:
        return embedding_distortion(self, pairs, seed)

    def boundary_map(self, x):
        """Image of a source point: endpoints of source leaves go to endpoints of their images."""
        src_exact = self.source.exact
        x = _coerce(x, src_exact)
        if isinstance(self.source, StandardTree):
            word = self.source.smallest_vertex(x, x, self.depth)
            if len(word) < self.depth:
                raise NotInSet(f"{x} is not in the depth-{self.depth} source set")
            a, b = self.source.interval(word)
        else:
            word = self.source.locate(x)
            a, b = self.source.vertices[word].a, self.source.vertices[word].b
        ta, tb = self.target.interval(self.image(word))
        if x == a:
            return ta
        if x == b:
            return tb
        frac = (x - a) / (b - a)
        return ta + (tb - ta) * (frac if self.target.exact else float(frac))


def apply_flips(word: str, flips: frozenset[str]) -> str:
    """Apply the branch-flip automorphism encoded by ``flips`` to a target word."""
    if not flips:
        return word
    out = []
    for k, c in enumerate(word):
        if word[:k] in flips:
            c = "r" if c == "l" else "l"
        out.append(c)
    return "".join(out)


def _invert_flips(word: str, flips: frozenset[str]) -> str:
    """Preimage of ``word`` under :func:`apply_flips`."""
    out = ""
    for c in word:
        if out in flips:
            c = "r" if c == "l" else "l"
        out += c
    return out


def level_map(p_src, p_tgt, depth: int) -> tuple[int, ...]:
    """Target level ``m_n = round(n log p_src / log p_tgt)`` for source levels 0..depth."""
    c = math.log(float(p_src)) / math.log(float(p_tgt))
    return tuple(int(math.floor(n * c + 0.5)) for n in range(depth + 1))


def embed_standard(p_src, p_tgt, depth: int) -> OrderedEmbedding:
    """Order-preserving digit-block embedding ``C_{p_src} -> C_{p_tgt}``.

    Source digit n is written into the block of target levels
    ``m_{n-1} + 1 .. m_n``, repeated across the block, so that tree distances
    ``p_src^-n`` go to ``p_tgt^-m_n``, which differ by a bounded factor.
    """
    src = StandardTree.of(p_src)
    tgt = StandardTree.of(p_tgt)
    if not src.dimension < tgt.dimension:
        raise ExponentOrder(
            f"source dimension {src.dimension:.4f} must be below target dimension {tgt.dimension:.4f}"
        )
    if depth < 1:
        raise InvalidParameter("depth must be at least 1")
    levels = level_map(src.p, tgt.p, depth)
    vmap = {}
    for n in range(depth + 1):
        for w in all_words(n):
            vmap[w] = "".join(c * (levels[k + 1] - levels[k]) for k, c in enumerate(w))
    return OrderedEmbedding(src, tgt, depth, vmap, levels=levels)


def embed_ordered(
    src: CantorTree | StandardTree,
    tgt: StandardTree,
    base_map: Callable,
    depth: int | None = None,
    max_target_depth: int = 64,
) -> OrderedEmbedding:
    """Send each source vertex to the smallest target vertex containing the images of its endpoints."""
    if not isinstance(tgt, StandardTree):
        raise InvalidParameter("the target tree must be a standard Cantor tree")
    if isinstance(src, StandardTree):
        if depth is None:
            raise InvalidParameter("depth is required for a standard source tree")
        words = [w for n in range(depth + 1) for w in all_words(n)]
        interval = src.interval
        leaves = all_words(depth)
    else:
        depth = max(len(w) for w in src.leaves)
        words = list(src.vertices)
        interval = lambda w: (src.vertices[w].a, src.vertices[w].b)
        leaves = list(src.leaves)
    vmap = {}
    for w in words:
        a, b = interval(w)
        vmap[w] = tgt.smallest_vertex(base_map(a), base_map(b), max_target_depth)
    images = {}
    for w in leaves:
        for x in interval(w):
            y = base_map(x)
            if y in images and images[y] != x:
                raise BaseMapNotInjective(f"points {images[y]} and {x} both map to {y}")
            images[y] = x
    return OrderedEmbedding(src, tgt, depth, vmap)


def order_preserved(emb: OrderedEmbedding) -> bool:
    """Every left child maps to the left of its sibling's image."""
    for w in emb.internal():
        left = emb.image(w + "l")
        right = emb.image(w + "r")
        n = common_prefix(left, right)
        if n == min(len(left), len(right)) or left[n] != "l":
            return False
    return True


def reorder_flips(emb: OrderedEmbedding) -> OrderedEmbedding:
    """Compose with target branch flips, shortest source words first, until order holds.

    At a source vertex whose children land in the wrong order, the target
    subtrees below the branching vertex of the two images are swapped. Such a
    flip is a d_T isometry of the standard target and only affects pairs
    branching at that vertex, so each vertex is fixed once.
    """
    flips = set(emb.flips)
    count = 0
    for w in sorted(emb.internal(), key=len):
        left = apply_flips(emb.vertex_map[w + "l"], frozenset(flips))
        right = apply_flips(emb.vertex_map[w + "r"], frozenset(flips))
        n = common_prefix(left, right)
        if n == min(len(left), len(right)):
            raise NotOrderPreserving(f"children of {w!r} map to nested target vertices")
        if left[n] == "r":
            pre = _invert_flips(left[:n], frozenset(flips))
            flips ^= {pre}
            count += 1
    return OrderedEmbedding(
        emb.source, emb.target, emb.depth, emb.vertex_map, frozenset(flips), emb.flip_count + count, emb.levels
    )


def flip_isometry_check(target: StandardTree, flips: frozenset[str], depth: int) -> bool:
    """Exhaustively confirm d_T(phi a, phi b) = d_T(a, b) on all depth-``depth`` leaf pairs."""
    words = all_words(depth)
    image = [apply_flips(w, flips) for w in words]
    if len(set(image)) != len(image):
        return False
    for i in range(len(words)):
        for j in range(i + 1, len(words)):
            if common_prefix(words[i], words[j]) != common_prefix(image[i], image[j]):
                return False
    return True


def embedding_distortion(emb: OrderedEmbedding, pairs: int | None = None, seed: int = 0) -> tuple[float, float]:
    """``(max d_T'/d_T, max d_T/d_T')`` over leaf pairs, d_T' measured on images.

    With ``pairs=None`` every pair of distinct leaves is covered exactly: a pair
    branching at source vertex v has ratio determined by v alone, so the maximum
    runs over internal vertices (plus each leaf against itself).
    """
    src_len = emb.source_length
    tgt = emb.target
    ratios = []
    if pairs is None:
        for w in emb.internal():
            n = common_prefix(emb.image(w + "l"), emb.image(w + "r"))
            ratios.append(float(tgt.length("x" * n)) / float(src_len(w)))
        for w in emb.leaves():
            ratios.append(float(tgt.length(emb.image(w))) / float(src_len(w)))
    else:
        leaves = emb.leaves()
        rng = np.random.default_rng(seed)
        idx = rng.integers(0, len(leaves), size=(pairs, 2))
        idx = np.concatenate([idx, np.column_stack([np.arange(len(leaves) - 1), np.arange(1, len(leaves))])])
        for i, j in idx:
            u, v = leaves[i], leaves[j]
            if i == j:
                n_src, n_tgt = u, emb.image(u)
                ratios.append(float(tgt.length(n_tgt)) / float(src_len(n_src)))
                continue
            cp = u[: common_prefix(u, v)]
            n = common_prefix(emb.image(u), emb.image(v))
            ratios.append(float(tgt.length("x" * n)) / float(src_len(cp)))
    ratios = np.array(ratios)
    return float(ratios.max()), float((1.0 / ratios).max())


def distortion_constant(emb: OrderedEmbedding, pairs: int | None = None, seed: int = 0) -> float:
    up, down = embedding_distortion(emb, pairs, seed)
    return max(up, down)


def embed_greedy(src: CantorTree, tgt: StandardTree) -> OrderedEmbedding:
    """Size-matched order-preserving vertex assignment for a general source tree.

    A child of size l goes to the target level closest to ``log(1/l) / log p``
    (at least one below its parent's image), descending through the parent's
    left (right) child and continuing with the same digit.
    """
    p = float(tgt.p)
    vmap = {"": ""}
    for w in sorted(src.vertices, key=len):
        kids = src.children(w)
        if kids is None:
            continue
        base = vmap[w]
        for kid, digit in zip(kids, "lr"):
            size = float(src.length(kid))
            level = max(len(base) + 1, int(math.floor(math.log(1.0 / size) / math.log(p) + 0.5)))
            vmap[kid] = base + digit * (level - len(base))
    depth = max(len(w) for w in src.leaves)
    return OrderedEmbedding(src, tgt, depth, vmap)


# ---------------------------------------------------------------------------------
# Linear extension
# ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearExtension:
    """Extension of a map on E to [0, 1], linear on each listed gap."""

    gaps: tuple[tuple[Number, Number], ...]
    images: tuple[tuple[Number, Number], ...]
    base: Callable

    def __call__(self, x):
        i = bisect.bisect_right(self._starts, x) - 1
        if i >= 0:
            a, b = self.gaps[i]
            if a < x < b:
                fa, fb = self.images[i]
                frac = (x - a) / (b - a)
                return fa + (fb - fa) * frac
        return self.base(x)

    @property
    def _starts(self):
        return [g[0] for g in self.gaps]


def extend_linear(base_map: Callable, gaps: Sequence[tuple[Number, Number]]) -> LinearExtension:
    """Fill every gap linearly between the images of its endpoints.

    Requires 0 and 1 in E and a strictly increasing map on the gap endpoints.
    """
    gaps = tuple(sorted((a, b) for a, b in gaps))
    points = [0] + [v for g in gaps for v in g] + [1]
    images = [base_map(x) for x in points]
    for (x0, y0), (x1, y1) in zip(zip(points, images), zip(points[1:], images[1:])):
        if not y1 > y0:
            raise NotOrderPreserving(f"map is not strictly increasing between {x0} and {x1}")
    gap_images = tuple((base_map(a), base_map(b)) for a, b in gaps)
    return LinearExtension(gaps, gap_images, base_map)
