"""Compare the compiled and numpy orbit-scan kernels.

    python3 benchmarks/bench_scan.py [--count 2000000] [--repeat 3]
"""

import argparse
import time

import numpy as np

from brsets.lattice import RotationContext
from brsets.region import construct, geometry
from brsets.scan import OrbitScanner, available_backends

CASES = [
    ("s=1 golden, 1 step", ("0.618033988749894848204586834365638117720309179805762862135449",), [1]),
    ("s=2, 4 steps", ("0.414213562373095048801688724209698078569671875376948073176680",
                      "0.732050807568877293527446341505872366942805253810380628055807"), [1, 2, 1, 2]),
    ("s=3, 10 steps", ("0.259921049894873164767210607278228350570251464701507980081975",
                       "0.442249570307408382321638310780109588391869253499350577546417",
                       "0.587401051968199474751705639272308260391493327899853009808285"),
     [1, 2, 3, 1, 2, 3, 1, 2, 3, 1]),
]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=2_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = available_backends()
    print(f"backends: {', '.join(backends)}; {args.count} orbit points per run")
    print(f"{'case':<22}{'candidates':>11}" + "".join(f"{b + ' [s]':>14}" for b in backends) + f"{'speedup':>10}")
    for name, alpha, steps in CASES:
        geom = geometry(construct(RotationContext(alpha), steps))
        row, results = [], []
        for b in backends:
            sc = OrbitScanner(geom, b)
            dt, out = best_of(lambda: sc.members((0,) * geom.s, 0, args.count)[0], args.repeat)
            row.append(dt)
            results.append(out)
        assert all(np.array_equal(results[0], r) for r in results[1:]), "backends disagree"
        speed = f"{row[0] / row[-1]:>9.1f}x" if len(row) > 1 else f"{'-':>10}"
        print(f"{name:<22}{len(geom.candidate_shifts):>11}" + "".join(f"{t:>14.3f}" for t in row) + speed)


if __name__ == "__main__":
    main()
