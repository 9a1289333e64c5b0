"""Compare the compiled and pure-numpy assembly kernels.

    python benchmarks/bench_kernels.py [--nodes 1000] [--dim 2] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from spectral_pgo import kernels
from spectral_pgo.fim import vertex_adjoints
from spectral_pgo.synth import SynthSpec, synthesize


def cases(graph):
    """Kernel calls on preallocated outputs, so allocation is not timed."""
    n, ell = graph.n, graph.ell
    lap_buf = np.zeros((n, n))
    fim_buf = np.zeros((n * ell, n * ell))
    i, k = graph.edge_index
    infos = graph.infos
    ads = vertex_adjoints(graph)[i]
    weights = np.linalg.eigvalsh(infos)[:, -1]
    return {
        "scatter_laplacian": lambda impl: kernels.scatter_laplacian(
            lap_buf, i, k, weights, impl=impl),
        "scatter_blocks": lambda impl: kernels.scatter_blocks(
            fim_buf, i, k, infos, impl=impl),
        "congruence": lambda impl: kernels.congruence(ads, infos, impl=impl),
    }


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--nodes", type=int, default=1000)
    p.add_argument("--dim", type=int, choices=[2, 3], default=2)
    p.add_argument("--loop-prob", type=float, default=0.2)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()

    graph = synthesize(SynthSpec(nodes=args.nodes, dim=args.dim, loop_prob=args.loop_prob,
                                 info="corr", eta=0.3))
    backends = kernels.available_backends()
    print(f"n={graph.n} m={graph.m} ell={graph.ell} backends={sorted(backends)} "
          f"default={kernels.BACKEND}")
    print(f"{'kernel':<20}" + "".join(f"{name + ' [ms]':>16}" for name in sorted(backends))
          + f"{'speedup':>10}")
    for name, fn in cases(graph).items():
        ref = None
        times = {}
        for backend in sorted(backends):
            impl = backends[backend]
            out = np.array(fn(impl))
            if ref is None:
                ref = out
            elif name == "congruence":
                np.testing.assert_allclose(out, ref, rtol=1e-12, atol=1e-9)
            times[backend] = min(timeit.repeat(lambda: fn(impl), number=1, repeat=args.repeat))
        speedup = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{name:<20}" + "".join(f"{1e3 * times[b]:>16.3f}" for b in sorted(backends))
              + f"{speedup:>9.1f}x")


if __name__ == "__main__":
    main()
