"""Compare the compiled training kernels against the pure-Python fallback.

Runs the same seeded training workload twice, once per backend (the fallback
is selected in a subprocess via TWOTIER_DISABLE_NUMBA=1), times both, and
checks that the per-episode reward streams are bitwise identical.

    python3 benchmarks/bench_kernels.py [--episodes N] [--repeats K]
"""

import argparse
import hashlib
import json
import os
import statistics
import subprocess
import sys
import time

WORKLOADS = [
    # (algorithm, traces, policy, decay) int codes, one per kernel variant
    (0, 0, 0, 0),
    (0, 1, 0, 1),
    (1, 0, 1, 0),
    (1, 1, 1, 1),
]


def run_workload(episodes: int, repeats: int) -> dict:
    import numpy as np

    from twotier.accel import USE_NUMBA
    from twotier.agent import train_cartpole
    from twotier.params import Algorithm, AlgorithmParams, Policy, StructuralParams

    params = AlgorithmParams(n_bins=8, n_bins_angle=8)

    def one_pass():
        chunks = []
        for seed, (b0, b1, b2, b3) in enumerate(WORKLOADS):
            structural = StructuralParams(Algorithm(b0), bool(b1), Policy(b2), bool(b3))
            rewards = train_cartpole(structural, params, episodes, np.random.default_rng(seed))
            chunks.append(rewards)
        return np.concatenate(chunks)

    compile_start = time.perf_counter()
    rewards = one_pass()  # warm-up; pays any JIT compilation
    compile_time = time.perf_counter() - compile_start

    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        rewards = one_pass()
        times.append(time.perf_counter() - start)

    return {
        "backend": "compiled" if USE_NUMBA else "pure",
        "warmup_s": compile_time,
        "median_s": statistics.median(times),
        "digest": hashlib.sha256(rewards.tobytes()).hexdigest(),
        "episodes": episodes * len(WORKLOADS),
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--episodes", type=int, default=300, help="episodes per workload")
    parser.add_argument("--repeats", type=int, default=5, help="timed passes per backend")
    parser.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args(argv)

    if args.worker:
        print(json.dumps(run_workload(args.episodes, args.repeats)))
        return 0

    results = []
    for disable in ("0", "1"):
        env = dict(os.environ, TWOTIER_DISABLE_NUMBA=disable)
        proc = subprocess.run(
            [
                sys.executable,
                os.path.abspath(__file__),
                "--worker",
                "--episodes",
                str(args.episodes),
                "--repeats",
                str(args.repeats),
            ],
            env=env,
            capture_output=True,
            text=True,
        )
        if proc.returncode != 0:
            sys.stderr.write(proc.stderr)
            return proc.returncode
        results.append(json.loads(proc.stdout.strip().splitlines()[-1]))

    compiled, pure = results
    print(f"{'backend':<10} {'warmup_s':>9} {'median_s':>9} {'us/episode':>11}  digest")
    for r in results:
        per_ep = 1e6 * r["median_s"] / r["episodes"]
        print(
            f"{r['backend']:<10} {r['warmup_s']:>9.2f} {r['median_s']:>9.4f} "
            f"{per_ep:>11.1f}  {r['digest'][:16]}"
        )
    identical = compiled["digest"] == pure["digest"]
    speedup = pure["median_s"] / compiled["median_s"]
    print(f"speedup: {speedup:.1f}x   outputs bitwise identical: {'yes' if identical else 'NO'}")
    return 0 if identical else 1


if __name__ == "__main__":
    sys.exit(main())
