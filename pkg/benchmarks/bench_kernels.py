"""Time the compiled and pure-Python kernels on the case-study workload.

Usage::

    python benchmarks/bench_kernels.py [--input CSV] [--repeat 5]

Inputs default to the bundled 78x44 matrix and its weighted top-K graphs.
Each row reports the best of ``--repeat`` runs per backend and the speedup.
"""
import argparse
import time

import numpy as np

from sparsim._backend import available_backends
from sparsim.community import TIE_REL_TOL
from sparsim.dataset import bundled_dataset_path, load_csv
from sparsim.graph import build_topk
from sparsim.similarity import pairwise_matrix


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def workloads(m, ks):
    sim = pairwise_matrix(m, "weighted")
    yield "weighted_pairwise", lambda k: k.weighted_pairwise(m.values, m.observed)
    for top in ks:
        g = build_topk(sim, top)
        if top > len(g.nodes) * (len(g.nodes) - 1) // 2:
            continue
        indptr, indices, eids, edge_list = g.to_csr()
        index = {v: i for i, v in enumerate(g.nodes)}
        edges = np.array([(index[u], index[v]) for u, v in g.edges()], dtype=np.intc)
        args = (g.n_nodes, indptr, indices, eids, len(edge_list))
        yield f"edge_betweenness k={top}", lambda k, a=args: k.edge_betweenness(*a)
        yield (
            f"girvan_newman k={top}",
            lambda k, n=g.n_nodes, e=edges: k.girvan_newman_removals(n, e, 5, TIE_REL_TOL),
        )


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--input", default=str(bundled_dataset_path()))
    parser.add_argument("--top-k", type=int, nargs="+", default=[100, 600, 1200])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    backends = available_backends()
    if "cython" not in backends:
        print("compiled extension not importable; timing the Python backend only")
    m = load_csv(args.input)
    names = sorted(backends, reverse=True)  # python first
    print(f"{'kernel':<28}" + "".join(f"{n:>12}" for n in names) + ("   speedup" if len(names) == 2 else ""))
    for label, fn in workloads(m, args.top_k):
        secs = {n: best_of(lambda: fn(backends[n]), args.repeat) for n in names}
        row = f"{label:<28}" + "".join(f"{secs[n]:>11.4f}s" for n in names)
        if len(names) == 2:
            row += f"{secs['python'] / secs['cython']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
