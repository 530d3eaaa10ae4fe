"""Time the numba kernels against their pure-numpy twins.

Each workload runs once untimed (this triggers JIT compilation), then the
best of ``--repeat`` runs is reported.  Outputs of the two backends are
compared before timing so a fast wrong kernel cannot win.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--quick]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from stateprep import _kernels
from stateprep.angles import alphas_from_thetas
from stateprep.diag import synth_diag_no_ancilla
from stateprep.qsp import prepare_state
from stateprep.sim import basis_bits


def best_of(fn, repeat):
    fn()  # warmup / compile
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def workloads(quick: bool):
    rng = np.random.default_rng(0)
    n_fwht = 16 if quick else 20
    a = rng.normal(size=1 << n_fwht)
    yield (
        f"fwht n={n_fwht}",
        lambda: _kernels.fwht_numpy(a),
        lambda: _kernels.fwht_numba(a),
        np.allclose,
    )

    n = 8 if quick else 10
    th = rng.uniform(-np.pi, np.pi, 1 << n)
    th[0] = 0
    diag = synth_diag_no_ancilla(alphas_from_thetas(th), n)
    kinds, q0, q1, ang = diag.arrays()
    yield (
        f"asap_depth {len(diag)} gates",
        lambda: _kernels.asap_depth_numpy(q0, q1, diag.num_qubits),
        lambda: _kernels.asap_depth_numba(q0, q1, diag.num_qubits),
        lambda x, y: x == y,
    )

    bits = basis_bits(range(1 << n), n, diag.num_qubits)
    yield (
        f"track_phases {1 << n} inputs x {len(diag)} gates",
        lambda: _kernels.track_phases_numpy(kinds, q0, q1, ang, bits),
        lambda: _kernels.track_phases_numba(kinds, q0, q1, ang, bits),
        lambda x, y: np.array_equal(x[0], y[0]) and np.allclose(x[1], y[1]),
    )

    ns = 7 if quick else 9
    v = rng.normal(size=1 << ns) + 1j * rng.normal(size=1 << ns)
    circ, _, _ = prepare_state(v / np.linalg.norm(v), 4 * ns)
    ck, c0, c1, ca = circ.arrays()
    keys = np.zeros((1, max(1, (circ.num_qubits + 63) // 64)), dtype=np.uint64)
    amps = np.ones(1, dtype=complex)
    yield (
        f"sparse_run {circ.num_qubits} qubits x {len(circ)} gates",
        lambda: _kernels.sparse_run_numpy(ck, c0, c1, ca, keys, amps, 0, 1e-14),
        lambda: _kernels.sparse_run_numba(ck, c0, c1, ca, keys, amps, 0, 1e-14),
        lambda x, y: x[2] == y[2],
    )


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--quick", action="store_true", help="smaller workloads")
    args = p.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        print("numba is not importable; both columns would time the numpy path")
        return 1
    print(f"{'workload':<44}{'numpy ms':>11}{'numba ms':>11}{'speedup':>9}")
    for name, slow, fast, same in workloads(args.quick):
        if not same(slow(), fast()):
            raise SystemExit(f"{name}: backends disagree")
        t_np = best_of(slow, args.repeat)
        t_nb = best_of(fast, args.repeat)
        print(f"{name:<44}{t_np * 1e3:>11.2f}{t_nb * 1e3:>11.2f}{t_np / t_nb:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
