"""Compare the numba and pure-numpy kernel paths.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each row times one kernel on a real model workload and checks that both
paths return the same numbers.
"""

import argparse
import time

import numpy as np

from qdlab import _kernels
from qdlab.hilbert import StateVector, _pack_ops
from qdlab.models import Model, ModelSpec
from qdlab.spectra import _trace_parts


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def workloads():
    for spec in (ModelSpec.dual(2, 3, 0), ModelSpec.dual(3, 3, 1), ModelSpec.dual(4, 2, 2)):
        model = Model(spec)
        dim = spec.dim
        diag, left, right = _trace_parts(model)
        D, L, R = _pack_ops(diag), _pack_ops(left), _pack_ops(right)
        xs, ws = _kernels.diagonal_weights_numpy(dim, D)

        psi = StateVector.basis(model.layout, np.zeros(model.layout.n_sites, dtype=np.int64))
        P = _pack_ops(model.ops.E + model.ops.B + model.ops.A)

        yield spec.label, "diagonal_weights", (
            lambda: _kernels.diagonal_weights_numba(dim, D),
            lambda: _kernels.diagonal_weights_numpy(dim, D),
        )
        yield spec.label, "trace_sweep", (
            lambda: _kernels.trace_sweep_numba(xs, ws, L, R, dim),
            lambda: _kernels.trace_sweep_numpy(xs, ws, L, R, dim),
        )
        yield spec.label, "apply_sparse", (
            lambda: _kernels.apply_sparse_numba(psi.idx, psi.amp, P, dim),
            lambda: _kernels.apply_sparse_numpy(psi.idx, psi.amp, P, dim),
        )


def agree(a, b):
    if isinstance(a, tuple):
        return all(agree(x, y) for x, y in zip(a, b))
    return np.allclose(np.asarray(a), np.asarray(b), atol=1e-9)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _kernels.numba is None:
        raise SystemExit("numba is not installed; nothing to compare")

    print(f"{'model':<14} {'kernel':<17} {'numba s':>9} {'numpy s':>9} {'speedup':>8}  agree")
    for label, name, (fast, slow) in workloads():
        fast()  # compile outside the timing
        t_fast, a = best_of(fast, args.repeat)
        t_slow, b = best_of(slow, args.repeat)
        print(f"{label:<14} {name:<17} {t_fast:9.4f} {t_slow:9.4f} {t_slow / t_fast:8.1f}  {agree(a, b)}")


if __name__ == "__main__":
    main()
