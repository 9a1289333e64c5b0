import numpy as np
import pytest

from spectral_pgo.graph import PoseGraph
from spectral_pgo.lie import Pose, exp_map

_ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number: int, title: str, ok: bool, detail: str = "") -> None:
    line = f"AC{number:02d} {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
    print(line)
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def random_pd(rng, ell, cond=50.0):
    q, _ = np.linalg.qr(rng.normal(size=(ell, ell)))
    ev = np.exp(rng.uniform(0.0, np.log(cond), ell))
    m = (q * ev) @ q.T
    return 0.5 * (m + m.T)


def random_connected_pairs(rng, n, extra):
    """Random spanning tree plus ``extra`` random non-loop edges (parallels allowed)."""
    order = rng.permutation(n)
    pairs = [(int(order[rng.integers(0, t)]), int(order[t])) for t in range(1, n)]
    for _ in range(extra):
        i, k = rng.choice(n, 2, replace=False)
        pairs.append((int(i), int(k)))
    return pairs


def random_pose(rng, dim, scale=1.0):
    v = rng.normal(size=3 if dim == 2 else 6)
    v[: dim] *= scale
    # keep the rotation angle well inside (-pi, pi)
    rot = v[dim:]
    norm = np.linalg.norm(rot)
    if norm > 2.5:
        v[dim:] = rot * (2.5 / norm)
    return exp_map(v)


def random_graph(rng, n, extra, dim=2, info="pd", poses=True):
    ell = 3 if dim == 2 else 6
    pairs = random_connected_pairs(rng, n, extra)
    if info == "pd":
        infos = [random_pd(rng, ell) for _ in pairs]
    else:
        infos = [float(rng.uniform(1.0, 20.0)) * np.eye(ell) for _ in pairs]
    ps = [random_pose(rng, dim, 3.0) for _ in range(n)] if poses else None
    return PoseGraph.from_edges(n, pairs, infos, dim=dim, poses=ps)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


PHI_BAR = np.array([[11.11, -3.0, 0.0], [-3.0, 6.25, 0.0], [0.0, 0.0, 250.0]])
IDENTITY2 = Pose.identity(2)


def spanning_tree_weight_sum(n, pairs, weights):
    """Sum over all spanning trees of the product of edge weights, by enumeration."""
    from itertools import combinations

    total = 0.0
    for subset in combinations(range(len(pairs)), n - 1):
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        ok = True
        for j in subset:
            a, b = find(pairs[j][0]), find(pairs[j][1])
            if a == b:
                ok = False
                break
            parent[a] = b
        if ok:
            total += float(np.prod([weights[j] for j in subset]))
    return total
