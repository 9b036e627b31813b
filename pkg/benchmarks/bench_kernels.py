"""Wall-clock comparison of the numba kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--samples 20000]
"""
from __future__ import annotations

import argparse
import time

from moyalrg import CutoffSpec, ModelParams, catalog_get, fourpoint_irregular, schwinger_mc
from moyalrg.renorm_fit import external_momenta


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--samples", type=int, default=20_000)
    args = ap.parse_args(argv)

    params = ModelParams()
    cut = CutoffSpec.uv(100.0)
    cases = {
        "fourpoint_sum (K=0.7)": lambda b: fourpoint_irregular(0.7, params, backend=b),
        "mc_weights tadpole_np": lambda b: schwinger_mc(
            catalog_get("tadpole_np"), params, external_momenta(2, 1.0), cut, args.samples,
            adapt_samples=args.samples // 4, backend=b),
        "mc_weights sunset_np": lambda b: schwinger_mc(
            catalog_get("sunset_np"), params, external_momenta(2, 1.0), cut, args.samples,
            adapt_samples=args.samples // 4, backend=b),
    }
    print(f"{'kernel':28s}{'numba [s]':>12s}{'numpy [s]':>12s}{'speedup':>10s}")
    for name, run in cases.items():
        run("numba")  # compile outside the timing
        t_nb = best_of(lambda: run("numba"), args.repeat)
        t_np = best_of(lambda: run("numpy"), args.repeat)
        print(f"{name:28s}{t_nb:12.4f}{t_np:12.4f}{t_np / t_nb:10.1f}")


if __name__ == "__main__":
    main()
