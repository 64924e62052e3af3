"""Workload counters and the audits that turn probabilistic claims into checks.

Counters are passive tallies collected during the build/query phases; they
never influence control flow, so runs with counters disabled emit
byte-identical certificates. Audits check the structural or directional
form of the accounting and concentration claims (caps and ratios, not the
existence-quantified constants).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .seedrand import Params


class Counters:
    """Tallies for one run: per-(layer, level) class activity and collision
    counts, per-edge and per-anchor keep totals, materializations, and
    phase wall times."""

    __slots__ = ("per_level", "kept", "k_e", "w_total", "d_plus", "phase_times")

    def __init__(self):
        self.per_level: Dict[Tuple[int, int], List[int]] = {}  # (i, r) -> [classes, materialized, collisions]
        self.kept: Dict[Tuple[int, int], int] = {}  # (x, i) -> kept out-arcs
        self.k_e: Dict[Tuple[int, int], int] = {}  # (x, y) -> layers keeping the arc
        self.w_total = 0
        self.d_plus: List[int] = []
        self.phase_times: Dict[str, float] = {}

    def level(self, i: int, r: int) -> List[int]:
        row = self.per_level.get((i, r))
        if row is None:
            row = [0, 0, 0]
            self.per_level[(i, r)] = row
        return row

    def k_tot(self, x: int) -> int:
        return sum(v for (xx, _), v in self.kept.items() if xx == x)

    def k_tot_all(self, n: int) -> List[int]:
        totals = [0] * n
        for (x, _), v in self.kept.items():
            totals[x] += v
        return totals


@dataclass
class AccountingReport:
    passed: bool
    max_ratio: float  # max over (i, r) of collisions / classes
    cap: int  # c0 * groups
    violations: List[Tuple[int, int, int, int]] = field(default_factory=list)  # (i, r, q, classes)


def accounting_audit(counters: Counters, params: Params) -> AccountingReport:
    """Check the one-shot cap Q_(i,r) <= c0 * groups * |classes_(i,r)|.

    With honest counters this is structural (each probed pair fires at most
    once per group); the audit exists to catch accounting regressions and
    to report the observed worst ratio.
    """
    cap = params.c0 * params.groups
    max_ratio = 0.0
    violations = []
    for (i, r), (classes, _mat, q) in sorted(counters.per_level.items()):
        if classes == 0:
            if q > 0:
                violations.append((i, r, q, classes))
            continue
        max_ratio = max(max_ratio, q / classes)
        if q > cap * classes:
            violations.append((i, r, q, classes))
    return AccountingReport(passed=not violations, max_ratio=max_ratio, cap=cap, violations=violations)


@dataclass
class KeepConcentrationReport:
    passed: bool
    max_stat: float  # max over anchors of (K_tot - 6 ln n) / max(1, d+)
    exceed_fraction: float  # fraction of anchors with K_tot > C*d+ + 6 ln n at C=3
    max_k_e: int  # largest per-edge keep total observed
    k_e_cap: float  # schedule mass + 6 ln n


def keep_concentration_audit(counters: Counters, params: Params) -> KeepConcentrationReport:
    """Directional check of the retention totals.

    Per anchor: K_tot(x) must stay below C * d+(x) + 6 ln n at C = 3.
    Per edge: the bound is audited through the single max-K_e statistic
    against schedule mass + 6 ln n rather than per-edge assertions. The
    audit passes only when both hold, so a tampered schedule (the
    negative control) fails visibly.
    """
    n = max(2, params.n)
    log_term = 6.0 * math.log(n)
    totals = counters.k_tot_all(params.n) if params.n else []
    max_stat = 0.0
    exceed = 0
    active = 0
    for x, k_tot in enumerate(totals):
        if k_tot == 0:
            continue
        active += 1
        d_plus = counters.d_plus[x] if x < len(counters.d_plus) else 0
        max_stat = max(max_stat, (k_tot - log_term) / max(1, d_plus))
        if k_tot > 3 * d_plus + log_term:
            exceed += 1
    frac = exceed / active if active else 0.0
    max_k_e = max(counters.k_e.values(), default=0)
    mass = sum(params.keep_rate(i) for i in range(1, params.layers + 1))
    k_e_cap = mass + log_term
    return KeepConcentrationReport(
        passed=exceed == 0 and max_k_e <= k_e_cap,
        max_stat=max_stat,
        exceed_fraction=frac,
        max_k_e=max_k_e,
        k_e_cap=k_e_cap,
    )


@dataclass
class HitRateRow:
    n: int
    trials: int
    single_group_hits: int
    all_group_hits: int
    single_group_rate: float
    all_group_rate: float
    both_arcs_kept: int  # trials where some layer kept both planted arcs (diagnostic)


@dataclass
class HitRateReport:
    rows: List[HitRateRow]
    slope: float  # fitted a in rate ~ a / log2(n), least squares through the origin

    def rate_ratio(self) -> Optional[float]:
        """single-group rate at the smallest n over the largest n."""
        first, last = self.rows[0], self.rows[-1]
        if last.single_group_rate == 0.0:
            return None
        return first.single_group_rate / last.single_group_rate


def _hit_trial(job) -> Tuple[int, int, int]:
    """One planted-triangle trial; runs in a worker process."""
    from . import pipeline
    from .graphio import gen_planted_triangle, orient
    from .seedrand import SeedBundle

    n, m, trial, gen_seed, params, single_params = job
    g = gen_planted_triangle(n, m, seed=gen_seed + trial)
    og = orient(g)
    master = f"{(n << 32) + trial:064x}"
    single_hit = 0
    all_hit = 0
    if single_params is not None:
        out, _ = pipeline.detect(og, master, single_params)
        single_hit = int(out is not None)
    if params is not None:
        out, _ = pipeline.detect(og, master, params)
        all_hit = int(out is not None)
    probe = params if params is not None else single_params
    kept = int(_planted_arcs_kept(og, SeedBundle(master, probe)))
    return single_hit, all_hit, kept


def _run_trials(jobs, workers: int):
    if workers <= 1:
        return [_hit_trial(job) for job in jobs]
    import multiprocessing

    with multiprocessing.Pool(workers) as pool:
        # imap preserves submission order, so aggregation is deterministic.
        return list(pool.imap(_hit_trial, jobs, chunksize=8))


def hit_rate_experiment(
    n_values: List[int],
    trials: int,
    preset: str = "reduced",
    avg_degree: float = 6.0,
    base_gen_seed: int = 1,
    modes: Tuple[str, ...] = ("single", "all"),
    workers: int = 1,
) -> HitRateReport:
    """Planted-triangle detection frequency with one bucket group vs all groups.

    Each trial draws a fresh planted-triangle graph and a fresh master seed;
    a hit means the run reports YES. The diagnostic column counts trials
    where any layer retained both planted triangle arcs at the anchor,
    which upper-bounds every achievable hit rate under the dyadic keep
    schedule. Trials may run in parallel worker processes; results are
    aggregated in trial order, so the report is identical at any worker
    count.
    """
    from .seedrand import with_overrides

    rows = []
    for n in n_values:
        m = math.ceil(n * avg_degree / 2)
        base = Params.make(n, preset=preset) if "all" in modes else None
        single = (
            with_overrides(Params.make(n, preset=preset), groups_override=1)
            if "single" in modes
            else None
        )
        jobs = [(n, m, trial, base_gen_seed, base, single) for trial in range(trials)]
        results = _run_trials(jobs, workers)
        hits_single = sum(r[0] for r in results)
        hits_all = sum(r[1] for r in results)
        kept_both = sum(r[2] for r in results)
        rows.append(
            HitRateRow(
                n=n,
                trials=trials,
                single_group_hits=hits_single,
                all_group_hits=hits_all,
                single_group_rate=hits_single / trials,
                all_group_rate=hits_all / trials,
                both_arcs_kept=kept_both,
            )
        )
    num = sum(r.single_group_rate / math.log2(r.n) for r in rows)
    den = sum(1.0 / (math.log2(r.n) ** 2) for r in rows)
    slope = num / den if den else 0.0
    return HitRateReport(rows=rows, slope=slope)


def group_sweep_experiment(
    n: int,
    trials: int,
    group_counts: List[int],
    preset: str = "full",
    avg_degree: float = 6.0,
    base_gen_seed: int = 1,
    workers: int = 1,
) -> List[Tuple[int, int, float]]:
    """YES rate as a function of the pinned group count R (same trials)."""
    from .seedrand import with_overrides

    m = math.ceil(n * avg_degree / 2)
    out = []
    for r_count in group_counts:
        params = with_overrides(Params.make(n, preset=preset), groups_override=r_count)
        jobs = [(n, m, trial, base_gen_seed, params, None) for trial in range(trials)]
        results = _run_trials(jobs, workers)
        hits = sum(r[1] for r in results)
        out.append((r_count, hits, hits / trials))
    return out


def _planted_arcs_kept(og, bundle) -> bool:
    """Did any layer keep both triangle arcs at the planted anchor?"""
    tri = og.base.planted
    if tri is None:
        return False
    anchor = min(tri, key=lambda v: (og.base.degree(v), v))
    mates = [v for v in tri if v != anchor]
    kept = [set(bundle.keep_layers(anchor, v)) for v in mates]
    return bool(kept[0] & kept[1])


@dataclass
class BenchRow:
    n: int
    m: int
    build_time: float
    query_time: float
    verify_time: float
    peak_bytes: int
    time_norm: float  # (build + query) / (m * log2(n)^2)
    bytes_norm: float  # peak_bytes / (m * log2(n))


def scaling_bench(
    n_values: List[int],
    preset: str = "reduced",
    avg_degree: float = 6.0,
    gen_seed: int = 7,
    repeats: int = 2,
) -> List[BenchRow]:
    """Wall time and peak traced memory across a doubling ladder of n.

    Timings take the fastest of `repeats` runs (small-n rows are otherwise
    at the mercy of scheduler noise); memory is the peak across them.
    """
    import tracemalloc

    from . import pipeline
    from .graphio import gen_er_sparse, orient
    from .verifier import verify_no

    rows = []
    for n in n_values:
        g = gen_er_sparse(n, avg_degree, seed=gen_seed)
        og = orient(g)
        params = Params.make(n, preset=preset)
        master = f"{n:064x}"
        best_total = best_verify = float("inf")
        build_t = query_t = 0.0
        peak = 0
        for _ in range(max(1, repeats)):
            tracemalloc.start()
            t0 = time.perf_counter()
            result = pipeline.run(og, master, params)
            t1 = time.perf_counter()
            verdict = verify_no(og, result.certificate)
            t2 = time.perf_counter()
            _, run_peak = tracemalloc.get_traced_memory()
            tracemalloc.stop()
            assert verdict.kind in ("accept_no", "accept_yes")
            peak = max(peak, run_peak)
            if t1 - t0 < best_total:
                best_total = t1 - t0
                build_t = result.counters.phase_times.get("build", 0.0) if result.counters else 0.0
                query_t = result.counters.phase_times.get("query", 0.0) if result.counters else 0.0
            best_verify = min(best_verify, t2 - t1)
        lg = math.log2(max(2, n))
        rows.append(
            BenchRow(
                n=n,
                m=g.m,
                build_time=build_t,
                query_time=query_t,
                verify_time=best_verify,
                peak_bytes=peak,
                time_norm=best_total / (max(1, g.m) * lg * lg),
                bytes_norm=peak / (max(1, g.m) * lg),
            )
        )
    return rows


def write_csv(path: str, header: List[str], rows: List[List]) -> None:
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
