"""Timing comparison of the compiled and numpy hierarchy kernels.

Builds one representative hierarchy for the four-bath molecule, times
the full right-hand-side evaluation with both backends on identical
random inputs, and verifies the outputs agree to rounding.

Run as: python benchmarks/bench_rhs.py [--K 1] [--L 6] [--repeats 20]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from hhdyn import _heom_py, heom, model

try:
    from hhdyn import _heom_core
except ImportError:
    _heom_core = None


def build_workspace(K: int, L: int):
    params = model.ModelParams(t0=1.0, U=6.0, eta=2.0, gamma=0.3, beta=1.0)
    hs, couplings, expansions, rho0 = heom.hubbard_holstein_setup(params, K)
    from hhdyn.hierarchy import build_hierarchy

    hierarchy = build_hierarchy(len(couplings), K, L, system_dim=4)
    ws = heom._Workspace(hs, couplings, expansions, hierarchy, True, True)
    rng = np.random.default_rng(7)
    A = rng.normal(size=(hierarchy.n_ados, 4, 4)) + 1j * rng.normal(
        size=(hierarchy.n_ados, 4, 4)
    )
    return ws, np.ascontiguousarray(A)


def time_kernel(fn, ws, A, repeats: int) -> tuple[float, np.ndarray]:
    out = np.empty_like(A)
    args = (
        A, out, ws.hs, ws.damp, ws.tmat, ws.g_up, ws.g_dn,
        ws.b_up, ws.b_dn, ws.plus, ws.minus,
    )
    fn(*args)  # warm up
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, out.copy()


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--K", type=int, default=1)
    parser.add_argument("--L", type=int, default=6)
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()

    ws, A = build_workspace(args.K, args.L)
    n = len(A)
    print(f"hierarchy: K={args.K} L={args.L} -> {n} operators of size 4x4")

    t_py, out_py = time_kernel(_heom_py.rhs_diag, ws, A, args.repeats)
    print(f"numpy kernel    : {t_py * 1e3:8.3f} ms  ({t_py / n * 1e9:7.1f} ns/operator)")

    if _heom_core is None:
        print("compiled kernel : not built")
        return
    t_cy, out_cy = time_kernel(_heom_core.rhs_diag, ws, A, args.repeats)
    print(f"compiled kernel : {t_cy * 1e3:8.3f} ms  ({t_cy / n * 1e9:7.1f} ns/operator)")
    print(f"speedup         : {t_py / t_cy:8.2f}x")

    dev = np.max(np.abs(out_py - out_cy)) / max(np.max(np.abs(out_py)), 1e-300)
    print(f"max relative deviation between backends: {dev:.2e}")
    if dev > 1e-12:
        raise SystemExit("backends disagree beyond rounding")


if __name__ == "__main__":
    main()
