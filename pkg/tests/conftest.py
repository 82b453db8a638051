import itertools

import numpy as np
import pytest

from treepark.trees import RootedTree


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def all_rooted_trees(n):
    """Every rooted labelled tree on n vertices, as parent tuples, by brute force."""
    out = []
    for root in range(n):
        others = [v for v in range(n) if v != root]
        for choice in itertools.product(range(n), repeat=n - 1):
            parent = [-1] * n
            for v, p in zip(others, choice):
                parent[v] = p
            if any(parent[v] == v for v in others):
                continue
            ok = True
            for v in others:
                seen, u = 0, v
                while u != root and seen <= n:
                    u, seen = parent[u], seen + 1
                if u != root:
                    ok = False
                    break
            if ok:
                out.append(tuple(parent))
    return out


def canonical_shape(parent):
    """Isomorphism class of a rooted unordered tree as a nested sorted tuple."""
    n = len(parent)
    kids = {v: [] for v in range(n)}
    root = None
    for v, p in enumerate(parent):
        if p < 0:
            root = v
        else:
            kids[p].append(v)

    def shape(v):
        return tuple(sorted(shape(c) for c in kids[v]))

    return shape(root)


def random_small_tree(rng, max_n=12):
    n = int(rng.integers(1, max_n + 1))
    parent = np.full(n, -1)
    perm = rng.permutation(n)
    for i in range(1, n):
        parent[perm[i]] = perm[rng.integers(0, i)]
    return RootedTree(parent, int(perm[0]))


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line per acceptance criterion."""
    state = {}

    def report(number: int, detail: str):
        state["line"] = (number, detail)

    yield report
    if "line" in state:
        number, detail = state["line"]
        failed = request.node.rep_call.failed if hasattr(request.node, "rep_call") else True
        line = f"{'FAIL' if failed else 'PASS'} criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print("\n" + line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
