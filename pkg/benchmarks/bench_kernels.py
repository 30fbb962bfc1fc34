"""Wall-time comparison of the compiled and pure-numpy integration lanes.

Runs the reference phase-gate schedule (full exchange model) through both
kernel implementations on identical inputs: once through the density lane
(the decoherence-sweep hot path) and once through the pure-state lane
(the holonomy-diagnostic hot path).  Reports the best-of-N wall time per
lane and the worst elementwise deviation between their outputs.

Usage:
    python3 benchmarks/bench_kernels.py [--points-per-period N] [--repeat K]
"""

import argparse
import time

import numpy as np

import holosim.engine as engine
from holosim.engine import NoiseSpec, collapse_operators, process_matrix, propagate_unitary
from holosim.scenarios import (
    MODE_FULL,
    computational_basis,
    named_recipes,
    scenario_model,
    schedule_segments,
)

KAPPA = 2.0 * np.pi * 5.0e3  # mid-sweep decoherence tick


def available_lanes():
    lanes = {}
    try:
        from holosim import _core

        lanes["compiled"] = _core
    except ImportError:
        pass
    from holosim import _core_py

    lanes["python"] = _core_py
    return lanes


def bench_lane(kernels, segments, model, basis, ppp, repeat):
    """Best-of-N times for the density and state lanes under one kernel set."""
    noise = NoiseSpec(relaxation_rate=KAPPA / (2 * np.pi), dephasing_rate=KAPPA / (2 * np.pi))
    saved = engine._kernels
    engine._kernels = kernels
    try:
        t_density = []
        channel = None
        for _ in range(repeat):
            start = time.perf_counter()
            channel = process_matrix(
                segments, collapse_operators(model, noise), basis, points_per_period=ppp
            )
            t_density.append(time.perf_counter() - start)

        t_state = []
        psis = None
        for _ in range(repeat):
            start = time.perf_counter()
            psis = basis
            for ham, t0, t1 in segments:
                psis = propagate_unitary(ham, psis, t0, t1, ppp)
            t_state.append(time.perf_counter() - start)
    finally:
        engine._kernels = saved
    return min(t_density), min(t_state), channel.out_ops, psis


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points-per-period", type=int, default=200, metavar="N")
    parser.add_argument("--repeat", type=int, default=3, metavar="K")
    args = parser.parse_args()

    model = scenario_model("fig2_up")
    (recipe,) = named_recipes("fig2_up", model)
    segments, t_end = schedule_segments((recipe,), model, MODE_FULL)
    basis = computational_basis(model)
    lanes = available_lanes()

    print(f"workload: full-model phase gate, {t_end * 1e9:.1f} ns schedule, "
          f"dim {basis.shape[1]}, points_per_period {args.points_per_period}")
    if "compiled" not in lanes:
        print("compiled extension not built; timing the python lane only")

    results = {}
    for name, kernels in lanes.items():
        td, ts, ops, psis = bench_lane(
            kernels, segments, model, basis, args.points_per_period, args.repeat
        )
        results[name] = (td, ts, ops, psis)
        print(f"{name:>9}: density lane {td:8.3f} s   state lane {ts:8.3f} s")

    if len(results) == 2:
        td_c, ts_c, ops_c, psis_c = results["compiled"]
        td_p, ts_p, ops_p, psis_p = results["python"]
        print(f"  speedup: density lane {td_p / td_c:5.1f}x   state lane {ts_p / ts_c:5.1f}x")
        print(f"  lane deviation: density {np.max(np.abs(ops_c - ops_p)):.3e}   "
              f"state {np.max(np.abs(psis_c - psis_p)):.3e}")


if __name__ == "__main__":
    main()
