"""Campaign execution and result files.

One campaign is (optimizer, repetition); repetition r runs with campaign
seed base_seed + r.  Campaigns are independent, so they may run in parallel
worker processes; rows are gathered and written by a single writer in
(optimizer, seed, evaluation index) order, which makes `results.csv`
byte-identical across runs and worker counts.  Wall-clock timings are
inherently non-reproducible, so they go to a `timings.csv` sidecar instead
of the main table.

Floats are serialized with repr(), the shortest digit string that
round-trips, so parse(emit(rows)) is exact.
"""

import csv
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .config import CampaignConfig, ConfigError
from .tuner import OPTIMIZER_RUNNERS, TuningReport

RESULT_COLUMNS = [
    "optimizer",
    "seed",
    "eval_index",
    "algorithm",
    "eligibility_traces",
    "policy",
    "epsilon_decay",
    "alpha",
    "epsilon",
    "gamma",
    "tau",
    "lam",
    "epsilon_decay_rate",
    "n_bins",
    "n_bins_angle",
    "f_value",
    "incumbent",
]

SUMMARY_COLUMNS = [
    "optimizer",
    "eval_index",
    "incumbent_mean",
    "incumbent_ci95",
    "cumulative_mean",
    "cumulative_ci95",
]

TIMING_COLUMNS = ["optimizer", "seed", "eval_index", "wall_time"]

RESULTS_FILE = "results.csv"
SUMMARY_FILE = "summary.csv"
TIMINGS_FILE = "timings.csv"
BEST_FILE = "best.txt"


def _result_rows(report: TuningReport) -> list[list[str]]:
    rows = []
    for i, res in enumerate(report.results):
        s = res.point.structural
        a = res.point.algorithm
        rows.append(
            [
                report.optimizer,
                str(report.campaign_seed),
                str(i),
                str(int(s.algorithm)),
                str(int(s.eligibility_traces)),
                str(int(s.policy)),
                str(int(s.epsilon_decay)),
                repr(a.alpha),
                repr(a.epsilon),
                repr(a.gamma),
                repr(a.tau),
                repr(a.lam),
                repr(a.epsilon_decay_rate),
                str(a.n_bins),
                str(a.n_bins_angle),
                repr(res.f_value),
                repr(report.incumbents[i]),
            ]
        )
    return rows


def _timing_rows(report: TuningReport) -> list[list[str]]:
    return [
        [report.optimizer, str(report.campaign_seed), str(i), repr(res.wall_time)]
        for i, res in enumerate(report.results)
    ]


def _write_csv(path: str, header: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _best_line(report: TuningReport) -> str:
    idx = report.incumbents.index(report.best_f)
    s = report.best_point.structural
    a = report.best_point.algorithm
    fields = [
        f"{report.optimizer}:",
        f"f={report.best_f!r}",
        f"seed={report.campaign_seed}",
        f"eval_index={idx}",
        f"algorithm={s.algorithm.label}",
        f"eligibility_traces={int(s.eligibility_traces)}",
        f"policy={s.policy.label}",
        f"epsilon_decay={int(s.epsilon_decay)}",
        f"alpha={a.alpha!r}",
        f"epsilon={a.epsilon!r}",
        f"gamma={a.gamma!r}",
        f"tau={a.tau!r}",
        f"lam={a.lam!r}",
        f"epsilon_decay_rate={a.epsilon_decay_rate!r}",
        f"n_bins={a.n_bins}",
        f"n_bins_angle={a.n_bins_angle}",
    ]
    return " ".join(fields)


def _run_job(config: CampaignConfig, optimizer: str, repetition: int) -> TuningReport:
    return OPTIMIZER_RUNNERS[optimizer](config, config.base_seed + repetition)


def run_campaign(config: CampaignConfig) -> int:
    """Run every (optimizer, repetition) campaign and write the output files.

    Returns 0 on success, 1 if any campaign aborted (the completed ones are
    still written).
    """
    jobs = [(name, rep) for name in config.optimizers for rep in range(config.repetitions)]
    reports: dict[tuple[str, int], TuningReport] = {}
    failures: list[tuple[str, int, str]] = []
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = {job: pool.submit(_run_job, config, *job) for job in jobs}
            for job, future in futures.items():
                exc = future.exception()
                if exc is not None:
                    failures.append((job[0], job[1], f"{type(exc).__name__}: {exc}"))
                else:
                    reports[job] = future.result()
    else:
        for job in jobs:
            try:
                reports[job] = _run_job(config, *job)
            except Exception as exc:  # record and continue with the other campaigns
                failures.append((job[0], job[1], f"{type(exc).__name__}: {exc}"))

    os.makedirs(config.out_dir, exist_ok=True)
    result_rows = []
    timing_rows = []
    for job in jobs:
        if job in reports:
            result_rows.extend(_result_rows(reports[job]))
            timing_rows.extend(_timing_rows(reports[job]))
    results_path = os.path.join(config.out_dir, RESULTS_FILE)
    _write_csv(results_path, RESULT_COLUMNS, result_rows)
    _write_csv(os.path.join(config.out_dir, TIMINGS_FILE), TIMING_COLUMNS, timing_rows)
    summarize(
        results_path,
        os.path.join(config.out_dir, SUMMARY_FILE),
        t_interval=config.t_interval,
    )

    best_lines = []
    for name in config.optimizers:
        candidates = [reports[job] for job in jobs if job[0] == name and job in reports]
        if not candidates:
            continue
        best = candidates[0]
        for report in candidates[1:]:
            if report.best_f > best.best_f:
                best = report
        best_lines.append(_best_line(best))
    with open(os.path.join(config.out_dir, BEST_FILE), "w", encoding="utf-8") as fh:
        fh.write("\n".join(best_lines) + ("\n" if best_lines else ""))

    for name, rep, message in failures:
        print(f"campaign failed: optimizer={name} repetition={rep}: {message}", file=sys.stderr)
    return 1 if failures else 0


def _interval_factor(n: int, t_interval: bool) -> float:
    if n < 2:
        return 0.0
    if t_interval:
        from scipy.stats import t

        return float(t.ppf(0.975, n - 1))
    return 1.96


def _mean_halfwidth(values: list[float], t_interval: bool) -> tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    mean = float(np.mean(arr))
    if arr.size < 2:
        return mean, 0.0
    hw = _interval_factor(arr.size, t_interval) * float(np.std(arr, ddof=1)) / math.sqrt(arr.size)
    return mean, hw


def summarize(in_path: str, out_path: str, t_interval: bool = False) -> None:
    """Aggregate a results table into per-evaluation-index summary curves.

    For each optimizer and evaluation index: the across-seed mean and 95%
    confidence half-width of the incumbent, and of the cumulative reward
    (running sum of f within each seed).  Recomputing from a results.csv
    written by run_campaign reproduces its summary.csv byte for byte.
    """
    try:
        fh = open(in_path, "r", newline="", encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read results file {in_path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in RESULT_COLUMNS:
            if column not in header:
                raise ConfigError(f"results schema mismatch: missing column '{column}'")
        for column in header:
            if column not in RESULT_COLUMNS:
                raise ConfigError(f"results schema mismatch: unexpected column '{column}'")
        # per optimizer (in first-appearance order): seed -> [(index, f, incumbent)]
        optimizers: list[str] = []
        traces: dict[str, dict[int, list[tuple[int, float, float]]]] = {}
        for rownum, row in enumerate(reader, start=2):
            name = row["optimizer"]
            try:
                seed = int(row["seed"])
                idx = int(row["eval_index"])
            except ValueError as exc:
                raise ConfigError(f"line {rownum}: bad integer in column 'seed'/'eval_index': {exc}") from exc
            try:
                f_value = float(row["f_value"])
            except ValueError as exc:
                raise ConfigError(f"line {rownum}: bad float in column 'f_value'") from exc
            try:
                incumbent = float(row["incumbent"])
            except ValueError as exc:
                raise ConfigError(f"line {rownum}: bad float in column 'incumbent'") from exc
            if name not in traces:
                optimizers.append(name)
                traces[name] = {}
            traces[name].setdefault(seed, []).append((idx, f_value, incumbent))

    out_rows = []
    for name in optimizers:
        by_index_incumbent: dict[int, list[float]] = {}
        by_index_cumulative: dict[int, list[float]] = {}
        for seed in sorted(traces[name]):
            entries = sorted(traces[name][seed])
            running = 0.0
            for idx, f_value, incumbent in entries:
                running += f_value
                by_index_incumbent.setdefault(idx, []).append(incumbent)
                by_index_cumulative.setdefault(idx, []).append(running)
        for idx in sorted(by_index_incumbent):
            inc_mean, inc_hw = _mean_halfwidth(by_index_incumbent[idx], t_interval)
            cum_mean, cum_hw = _mean_halfwidth(by_index_cumulative[idx], t_interval)
            out_rows.append(
                [name, str(idx), repr(inc_mean), repr(inc_hw), repr(cum_mean), repr(cum_hw)]
            )
    _write_csv(out_path, SUMMARY_COLUMNS, out_rows)
