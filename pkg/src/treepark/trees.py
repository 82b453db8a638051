"""Random rooted trees with parent links pointing toward the root.

A tree is stored as a parent array with ``-1`` at the root.  Four ensembles are
provided: uniform rooted labelled (Cayley) trees, Galton-Watson trees, trees
conditioned to survive via a size-biased spine, and complete binary trees.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Union

import numpy as np

from . import _kernels
from .errors import InvalidArgument, ValidationError
from .laws import Law, Poisson
from .pmf import Pmf

NO_PARENT = _kernels.NO_PARENT

INITIAL_BUFFER = 1024

# Default population cap for Galton-Watson sampling; critical trees are a.s.
# finite but heavy-tailed, so some cap is always needed.
DEFAULT_MAX_VERTICES = 10 ** 6


@dataclass(frozen=True)
class Cayley:
    n: int


@dataclass(frozen=True)
class GaltonWatson:
    truncated: bool


@dataclass(frozen=True)
class Spine:
    spine_len: int
    truncated: bool = False
    bush_depth: int | None = None


@dataclass(frozen=True)
class CompleteBinary:
    depth: int


@dataclass(frozen=True)
class Given:
    """Trees built by hand or read from a file."""


Origin = Union[Cayley, GaltonWatson, Spine, CompleteBinary, Given]


@dataclass(frozen=True, eq=False)
class RootedTree:
    parent: np.ndarray
    root: int
    origin: Origin = Given()

    def __post_init__(self):
        parent = np.array(self.parent, dtype=np.int64)
        if parent.ndim != 1 or parent.size == 0:
            raise InvalidArgument("a tree needs at least one vertex")
        parent.setflags(write=False)
        object.__setattr__(self, "parent", parent)
        object.__setattr__(self, "root", int(self.root))

    @property
    def n_vertices(self) -> int:
        return self.parent.size

    def __len__(self):
        return self.parent.size

    def __repr__(self):
        return f"RootedTree(n_vertices={self.n_vertices}, root={self.root}, origin={self.origin})"

    @cached_property
    def children(self) -> list[np.ndarray]:
        """Child index arrays, in increasing index (generation) order."""
        kids = np.flatnonzero(self.parent >= 0)
        order = np.argsort(self.parent[kids], kind="stable")
        kids = kids[order]
        bounds = np.searchsorted(self.parent[kids], np.arange(self.n_vertices + 1))
        return [kids[bounds[v]:bounds[v + 1]] for v in range(self.n_vertices)]

    @cached_property
    def order(self) -> np.ndarray:
        """Leaf-to-root order: every vertex appears before its parent."""
        out = _kernels.leaf_to_root_order(self.parent, self.root)
        if out.size != self.n_vertices:
            raise ValidationError([f"only {out.size} of {self.n_vertices} vertices reach the root"])
        out.setflags(write=False)
        return out

    def height(self) -> int:
        depth = np.zeros(self.n_vertices, np.int64)
        for v in self.order[::-1]:
            p = self.parent[v]
            if p >= 0:
                depth[v] = depth[p] + 1
        return int(depth.max())

    def subtree_vertices(self, v: int) -> np.ndarray:
        """All descendants of ``v`` including ``v``."""
        stack, out = [int(v)], []
        while stack:
            u = stack.pop()
            out.append(u)
            stack.extend(self.children[u].tolist())
        return np.array(sorted(out), dtype=np.int64)

    def induced(self, keep) -> tuple[RootedTree, np.ndarray]:
        """Tree on the vertex set ``keep`` (which must contain the root and be
        closed under taking parents).  Returns the new tree and the map from new
        to old labels."""
        keep = np.unique(np.asarray(keep, dtype=np.int64))
        relabel = np.full(self.n_vertices, -1, np.int64)
        relabel[keep] = np.arange(keep.size)
        if relabel[self.root] < 0:
            raise InvalidArgument("the kept vertex set must contain the root")
        old_parent = self.parent[keep]
        if np.any((old_parent >= 0) & (relabel[np.maximum(old_parent, 0)] < 0)):
            raise InvalidArgument("the kept vertex set must be closed under parents")
        new_parent = np.where(old_parent >= 0, relabel[np.maximum(old_parent, 0)], NO_PARENT)
        return RootedTree(new_parent, int(relabel[self.root])), keep

    def to_edge_list(self) -> str:
        lines = [f"{self.n_vertices} {self.root}"]
        lines += [f"{v} {p}" for v, p in enumerate(self.parent) if p >= 0]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_edge_list(cls, text: str) -> RootedTree:
        rows = [line.split() for line in text.splitlines() if line.strip()]
        if not rows:
            raise InvalidArgument("empty edge list")
        try:
            n, root = int(rows[0][0]), int(rows[0][1])
            edges = [(int(a), int(b)) for a, b in rows[1:]]
        except (ValueError, IndexError) as exc:
            raise InvalidArgument("malformed edge list") from exc
        if n < 1 or len(edges) != n - 1:
            raise InvalidArgument(f"expected {n - 1} edges, found {len(edges)}")
        parent = np.full(n, NO_PARENT, np.int64)
        for child, par in edges:
            if not (0 <= child < n and 0 <= par < n) or parent[child] != NO_PARENT:
                raise InvalidArgument(f"bad edge {child} {par}")
            parent[child] = par
        tree = cls(parent, root)
        validate_tree(tree)
        return tree

    def write(self, path) -> None:
        Path(path).write_text(self.to_edge_list())

    @classmethod
    def read(cls, path) -> RootedTree:
        return cls.from_edge_list(Path(path).read_text())


def tree_violations(tree: RootedTree) -> list[str]:
    """All structural invariants that ``tree`` breaks (empty when valid)."""
    problems = []
    n, parent = tree.n_vertices, tree.parent
    roots = np.flatnonzero(parent == NO_PARENT)
    if roots.size != 1:
        problems.append(f"expected exactly one root sentinel, found {roots.size}")
    if not 0 <= tree.root < n or parent[tree.root] != NO_PARENT:
        problems.append(f"root {tree.root} does not carry the sentinel")
    if np.any((parent < NO_PARENT) | (parent >= n)):
        problems.append("parent index out of range")
    if problems:
        return problems
    reached = _kernels.leaf_to_root_order(parent, tree.root).size
    if reached != n:
        problems.append(f"{n - reached} vertices do not reach the root (cycle)")
    for u, kids in enumerate(tree.children):
        if np.any(parent[kids] != u):
            problems.append(f"children of {u} disagree with parent links")
    if sum(k.size for k in tree.children) != n - 1:
        problems.append("children lists do not cover every non-root vertex")
    origin = tree.origin
    if isinstance(origin, Spine):
        L = origin.spine_len
        if tree.root != 0 or L > n or np.any(parent[1:L] != np.arange(L - 1)):
            problems.append("spine vertices 0..L-1 do not form a path rooted at 0")
    if isinstance(origin, Cayley) and origin.n != n:
        problems.append("Cayley origin size mismatch")
    if isinstance(origin, CompleteBinary) and n != 2 ** (origin.depth + 1) - 1:
        problems.append("complete binary tree has the wrong size")
    return problems


def validate_tree(tree: RootedTree) -> RootedTree:
    problems = tree_violations(tree)
    if problems:
        raise ValidationError(problems)
    return tree


# ---------------------------------------------------------------- ensembles


def sample_cayley_tree(n: int, rng: np.random.Generator) -> RootedTree:
    """Uniform random rooted labelled tree on ``n`` vertices (n^(n-1) choices)."""
    if int(n) != n or n < 1:
        raise InvalidArgument(f"n must be a positive integer, got {n!r}")
    parent = np.empty(n, np.int64)
    order = np.empty(n, np.int64)
    root = _kernels.prufer_rooted_tree(rng, int(n), parent, order)
    tree = RootedTree(parent, root, Cayley(int(n)))
    order.setflags(write=False)
    tree.__dict__["order"] = order
    return tree


def _grow(run, cap: int, rng: np.random.Generator, floor: int = 1):
    """Call ``run(size)`` with growing buffers up to ``cap``.

    A run that fills a buffer smaller than ``cap`` is replayed from the saved
    generator state, so the result is the same draw a full-size buffer gives.
    """
    state = rng.bit_generator.state
    size = min(cap, max(INITIAL_BUFFER, floor))
    while True:
        count, truncated, buf = run(size)
        if not truncated or size >= cap:
            return count, truncated, buf
        rng.bit_generator.state = state
        size = min(cap, 4 * size)


def sample_gw_tree(offspring: Law, max_vertices: int, rng: np.random.Generator, *,
                   max_depth: int | None = None) -> RootedTree:
    """Breadth-first Galton-Watson tree, cut off (and flagged) at ``max_vertices``.

    With ``max_depth`` the tree is the generation-``max_depth`` prefix; this cut
    is part of the requested law and is not flagged.
    """
    if int(max_vertices) != max_vertices or max_vertices < 1:
        raise InvalidArgument("max_vertices must be a positive integer")
    if max_depth is not None and max_depth < 0:
        raise InvalidArgument("max_depth must be non-negative")
    cdf = offspring.sampling_cdf()
    depth_arg = -1 if max_depth is None else int(max_depth)

    def run(size):
        buf = np.empty(size, np.int64)
        count, truncated = _kernels.gw_bfs(rng, cdf, size, depth_arg, buf, 0)
        return count, truncated, buf

    count, truncated, buf = _grow(run, int(max_vertices), rng)
    return RootedTree(buf[:count].copy(), 0, GaltonWatson(bool(truncated)))


@lru_cache(maxsize=64)
def size_biased_law(offspring: Law) -> Pmf:
    """nu_hat(k) = (k + 1) nu(k + 1) / mu, the off-spine child count on the spine."""
    mu = offspring.mean
    if not mu > 0 or not math.isfinite(mu):
        raise InvalidArgument("size biasing needs a positive finite offspring mean")
    if mu > 1 + 1e-12:
        raise InvalidArgument(f"offspring mean {mu:g} > 1: the spine construction needs mu <= 1")
    if isinstance(offspring, Poisson):
        # the Poisson family is a fixed point of size biasing
        return offspring.table()
    nu = offspring.table().probs
    if nu.size == 1:
        return Pmf.point(0)
    probs = np.arange(1, nu.size) * nu[1:] / mu
    tail = max(0.0, 1.0 - math.fsum(probs))
    return Pmf(probs, tail)


def _spine_tables(offspring: Law):
    mu = offspring.mean
    if mu > 1 + 1e-12:
        raise InvalidArgument(f"offspring mean {mu:g} > 1: spine trees need critical or subcritical offspring")
    return _size_biased_cdf(offspring), offspring.sampling_cdf()


@lru_cache(maxsize=64)
def _size_biased_cdf(offspring: Law) -> np.ndarray:
    table = size_biased_law(offspring).sampling_cdf()
    table.setflags(write=False)
    return table


def sample_spine_tree(offspring: Law, spine_len: int, rng: np.random.Generator, *,
                      bush_depth: int | None = None,
                      max_vertices: int = 10 ** 7) -> RootedTree:
    """Finite spine prefix 0..L-1 (root 0) of the size-biased construction.

    Each spine vertex gets a size-biased number of off-spine children, each the
    root of an independent Galton-Watson tree.  ``bush_depth`` limits bush
    vertices to that distance below the spine (``None`` means unlimited); if the
    total reaches ``max_vertices`` the tree is cut and flagged as truncated.
    """
    if int(spine_len) != spine_len or spine_len < 1:
        raise InvalidArgument("spine_len must be a positive integer")
    if max_vertices < spine_len:
        raise InvalidArgument("max_vertices must cover the spine")
    cdf_hat, cdf_off = _spine_tables(offspring)
    depth_arg = -1 if bush_depth is None else int(bush_depth)

    def run(size):
        parent = np.empty(size, np.int64)
        depth = np.empty(size, np.int64)
        count, truncated = _kernels.spine_tree(rng, int(spine_len), cdf_hat, cdf_off, depth_arg,
                                               size, parent, depth)
        return count, truncated, parent

    count, truncated, parent = _grow(run, int(max_vertices), rng, floor=2 * int(spine_len))
    return RootedTree(parent[:count].copy(), 0,
                      Spine(int(spine_len), bool(truncated), bush_depth))


def complete_binary_tree(depth: int) -> RootedTree:
    """Complete binary tree with levels 0..depth; vertex i has parent (i - 1) // 2."""
    if int(depth) != depth or depth < 0:
        raise InvalidArgument("depth must be a non-negative integer")
    n = 2 ** (int(depth) + 1) - 1
    parent = (np.arange(n) - 1) // 2
    parent[0] = NO_PARENT
    return RootedTree(parent, 0, CompleteBinary(int(depth)))


def path_tree(n: int) -> RootedTree:
    """Directed path with root 0 and parent[i] = i - 1."""
    if n < 1:
        raise InvalidArgument("path needs at least one vertex")
    return RootedTree(np.arange(-1, n - 1), 0)


def star_tree(leaves: int) -> RootedTree:
    return RootedTree(np.r_[NO_PARENT, np.zeros(leaves, np.int64)], 0)
