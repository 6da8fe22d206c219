"""Replication driver for size tables and power curves.

Each cell runs an :class:`~tvalpha.dgp.ExperimentPlan` for a number of
replications, records the six p-values per replication, and aggregates
rejection frequencies with Monte Carlo standard errors. Grids of cells are
written to CSV with a manifest that makes reruns skip completed cells.
"""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .blocklength import select_block_length
from .classical import cc_indep, max_test_indep, sum_test_indep
from .dependent import BootstrapPlan, LrvConfig, default_bandwidth, dependent_battery
from .dgp import ExperimentPlan, simulate_panel
from .errors import TvalphaError
from .outcome import TEST_NAMES
from .sieve import fit_sieve
from .splines import SplineConfig, build_basis, build_design

logger = logging.getLogger(__name__)


def replicate_once(plan: ExperimentPlan, rep: int, calibration: str = "adjusted") -> dict:
    """Run one full replication of a cell and return its six p-values.

    The panel stream is seeded by (plan.seed, rep) and the bootstrap by
    (plan.seed, rep, 1), so results are independent of execution order.
    """
    rng = np.random.default_rng(np.random.SeedSequence(entropy=plan.seed, spawn_key=(rep,)))
    panel, factors = simulate_panel(plan, rng)
    cfg = SplineConfig.from_basis_dim(plan.basis_dim, plan.spline_order)
    basis = build_basis(plan.T, cfg)
    fit = fit_sieve(panel, build_design(basis, factors))

    if plan.block_length is not None:
        ell = plan.block_length
    else:
        centered = fit.residuals - fit.residuals.mean(axis=0)
        ell = select_block_length(centered).selected
    bandwidth = plan.bandwidth if plan.bandwidth is not None else default_bandwidth(plan.T)

    boot_seed = int(
        np.random.SeedSequence(entropy=plan.seed, spawn_key=(rep, 1)).generate_state(1)[0]
    )
    bplan = BootstrapPlan(block_length=ell, replications=plan.bootstrap_reps, seed=boot_seed)
    dsum, dmax, dcc = dependent_battery(fit, LrvConfig(bandwidth=bandwidth), bplan, calibration)
    s = sum_test_indep(fit)
    mx = max_test_indep(fit)
    cc = cc_indep(s.p_value, mx.p_value)

    out = {o.name: o.p_value for o in (s, mx, cc, dsum, dmax, dcc)}
    out["block_length"] = ell
    out["bandwidth"] = bandwidth
    return out


def _replicate_star(args):
    plan, rep, calibration = args
    return rep, replicate_once(plan, rep, calibration)


@dataclass(frozen=True)
class CellResult:
    """All replication-level p-values for one cell plus metadata."""

    plan: ExperimentPlan
    p_values: pd.DataFrame
    block_lengths: np.ndarray
    bandwidth: int
    elapsed: float

    def rejection_rate(self, test: str, level: float | None = None) -> float:
        level = self.plan.level if level is None else level
        return float((self.p_values[test] < level).mean())

    def mc_se(self, test: str, level: float | None = None) -> float:
        p = self.rejection_rate(test, level)
        return float(np.sqrt(p * (1.0 - p) / len(self.p_values)))

    def row(self) -> dict:
        """One table row: cell identifiers plus per-test frequencies."""
        alt = self.plan.resolved_alpha()
        row = {
            "example": self.plan.example,
            "T": self.plan.T,
            "N": self.plan.N,
            "dependence": str(self.plan.dependence),
            "innovation": self.plan.innovation,
            "sparsity": alt.sparsity if alt else 0,
            "c_scale": alt.c_scale if alt else 0.0,
            "level": self.plan.level,
            "replications": self.plan.replications,
            "bootstrap_reps": self.plan.bootstrap_reps,
            "seed": self.plan.seed,
            "bandwidth": self.bandwidth,
            "block_length_median": float(np.median(self.block_lengths)),
        }
        for name in TEST_NAMES:
            row[f"reject_{name}"] = self.rejection_rate(name)
            row[f"se_{name}"] = self.mc_se(name)
        return row


def run_cell(
    plan: ExperimentPlan, n_jobs: int = 1, calibration: str = "adjusted"
) -> CellResult:
    """Run every replication of one cell, optionally across processes.

    Raises the first replication failure with its replication index, since a
    partial cell is not a valid size or power estimate.
    """
    t0 = time.time()
    results: dict[int, dict] = {}
    args = [(plan, rep, calibration) for rep in range(plan.replications)]
    try:
        if n_jobs > 1:
            with ProcessPoolExecutor(max_workers=n_jobs) as pool:
                for rep, res in pool.map(_replicate_star, args, chunksize=4):
                    results[rep] = res
        else:
            for a in args:
                rep, res = _replicate_star(a)
                results[rep] = res
    except TvalphaError as exc:
        done = len(results)
        raise TvalphaError(
            f"cell failed after {done} replications (seed={plan.seed}): {exc}"
        ) from exc

    frame = pd.DataFrame.from_records([results[r] for r in range(plan.replications)])
    return CellResult(
        plan=plan,
        p_values=frame[list(TEST_NAMES)],
        block_lengths=frame["block_length"].to_numpy(),
        bandwidth=int(frame["bandwidth"].iloc[0]),
        elapsed=time.time() - t0,
    )


def cell_key(plan: ExperimentPlan) -> str:
    """Stable identifier for the manifest, derived from the plan contents."""
    return json.dumps(plan.to_dict(), sort_keys=True)


def run_grid(
    plans: list[ExperimentPlan],
    out_dir,
    n_jobs: int = 1,
    calibration: str = "adjusted",
) -> pd.DataFrame:
    """Run a list of cells, writing results.csv, curves.csv, and a manifest.

    Cells whose key already appears in the manifest are skipped, so an
    interrupted grid resumes where it stopped. Output files contain no
    timestamps; identical plans and seeds give byte-identical files.
    """
    from pathlib import Path

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = out_dir / "manifest.json"
    manifest: dict[str, dict] = {}
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text())

    for i, plan in enumerate(plans):
        key = cell_key(plan)
        if key in manifest:
            logger.info("cell %d/%d already complete, skipping", i + 1, len(plans))
            continue
        result = run_cell(plan, n_jobs=n_jobs, calibration=calibration)
        manifest[key] = result.row()
        tmp = manifest_path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(manifest, sort_keys=True, indent=1))
        tmp.replace(manifest_path)
        logger.info(
            "cell %d/%d done in %.1fs: %s",
            i + 1,
            len(plans),
            result.elapsed,
            {t: round(result.rejection_rate(t), 3) for t in TEST_NAMES},
        )

    columns = [
        "example", "T", "N", "dependence", "innovation", "sparsity", "c_scale",
        "level", "replications", "bootstrap_reps", "seed", "bandwidth",
        "block_length_median",
    ]
    for name in TEST_NAMES:
        columns += [f"reject_{name}", f"se_{name}"]
    rows = [manifest[cell_key(p)] for p in plans if cell_key(p) in manifest]
    table = pd.DataFrame.from_records(rows, columns=columns)
    if not rows:
        table = table.iloc[0:0]
    if not table.empty:
        table = table.sort_values(["example", "dependence", "T", "N", "innovation", "sparsity"])
        table.to_csv(out_dir / "results.csv", index=False)
        long = table.melt(
            id_vars=[c for c in table.columns if not c.startswith(("reject_", "se_"))],
            value_vars=[f"reject_{t}" for t in TEST_NAMES],
            var_name="test",
            value_name="rejection_rate",
        )
        long["test"] = long["test"].str.removeprefix("reject_")
        long.to_csv(out_dir / "curves.csv", index=False)
    else:
        (out_dir / "results.csv").write_text("")
        (out_dir / "curves.csv").write_text("")
    return table
