"""Experiment orchestration: dispatch a parsed config to a module
pipeline, collect emitted files through a single writer, and report.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import phasefield as pf
from .config import ExperimentConfig, parse_cuts, parse_profile, surface_norm_from
from .elasticity import ElasticDensity
from .geometry import Segment, VoidSet
from .grid import Grid, write_grid_dump
from .recovery import RecoveryParams, graph_approx, phasefield_recovery
from .sharp import FilmConfig, VoidConfig, energy_G_relaxed
from .slicing import collapse_lowerbound_check, fubini_residual

SUBCOMMANDS = ("evaluate", "minimize", "gamma-sweep", "slice-check", "recovery", "collapse-bench")


@dataclass
class RunReport:
    subcommand: str
    status: int = 0  # 0 pass, 1 usage error, 2 numerical assertion failure
    wall_time: float = 0.0
    config_hash: str = ""
    energies: dict = field(default_factory=dict)
    checks: list[str] = field(default_factory=list)
    manifest: list[str] = field(default_factory=list)

    def to_text(self) -> str:
        lines = [
            f"subcommand: {self.subcommand}",
            f"status: {self.status}",
            f"wall_time_s: {self.wall_time:.3f}",
            f"config_hash: {self.config_hash}",
        ]
        for k, v in self.energies.items():
            lines.append(f"energy {k}: {v!r}")
        lines.extend(f"check: {c}" for c in self.checks)
        lines.append("manifest:")
        lines.extend(f"  {m}" for m in self.manifest)
        return "\n".join(lines) + "\n"


class _Collector:
    """Single writer for all emitted files."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.names: list[str] = []
        out_dir.mkdir(parents=True, exist_ok=True)

    def text(self, name: str, content: str):
        (self.out_dir / name).write_text(content)
        self.names.append(name)

    def grid(self, name: str, a, grid):
        write_grid_dump(self.out_dir / name, a, grid)
        self.names.append(name)


def _density(cfg: ExperimentConfig) -> ElasticDensity:
    p = cfg.get("physics", "p")
    if p == 2.0:
        return ElasticDensity.hooke(cfg.get("physics", "mu"), cfg.get("physics", "lambda"))
    return ElasticDensity.ppow(p)


def _grid(cfg: ExperimentConfig) -> Grid:
    return Grid.film(
        cfg.get("geometry", "L"),
        cfg.get("geometry", "M"),
        cfg.get("geometry", "nx"),
        cfg.get("geometry", "ny"),
    )


def _substrate_datum(grid: Grid, delta: float) -> np.ndarray:
    """Mismatch datum (delta * x, 0), the strained-substrate boundary field."""
    u0 = grid.zeros_vector()
    xs = grid.xs()
    u0[:, :, 0] = delta * xs[None, :]
    return u0


def _phase_kwargs(cfg: ExperimentConfig) -> dict:
    eta = cfg.get("phase", "eta")
    from .wells import WELLS

    kw = dict(
        p=cfg.get("physics", "p"),
        well=WELLS[cfg.get("phase", "W")],
        tol_energy=cfg.get("phase", "tol_energy"),
        tol_cg=cfg.get("phase", "tol_cg"),
        max_outer=cfg.get("phase", "max_outer"),
        max_inner=cfg.get("phase", "max_inner"),
        tilt_delta=cfg.get("phase", "tilt"),
    )
    if eta != "default":
        kw["eta"] = eta
    return kw


def run(cfg: ExperimentConfig, subcommand: str, out_dir, seed: int | None = None) -> RunReport:
    if subcommand not in SUBCOMMANDS:
        return RunReport(subcommand, status=1, checks=[f"unknown subcommand {subcommand!r}"])
    report = RunReport(subcommand, config_hash=cfg.hash())
    t0 = time.perf_counter()
    col = _Collector(Path(out_dir))
    if seed is not None:
        cfg.values[("phase", "seed")] = seed
    try:
        _DISPATCH[subcommand](cfg, col, report)
    except Exception as exc:
        report.status = 2
        report.checks.append(f"FAIL {type(exc).__name__}: {exc}")
    report.wall_time = time.perf_counter() - t0
    report.manifest = list(col.names) + ["run_report.txt"]
    col.text("run_report.txt", report.to_text())
    return report


def _check(report: RunReport, ok: bool, label: str):
    report.checks.append(("PASS " if ok else "FAIL ") + label)
    if not ok:
        report.status = 2


# ----------------------------------------------------------------------
# subcommand pipelines
# ----------------------------------------------------------------------


def _run_evaluate(cfg: ExperimentConfig, col: _Collector, report: RunReport):
    grid = _grid(cfg)
    profile = parse_profile(cfg.get("film", "profile"), grid.L, grid.M)
    cuts = parse_cuts(cfg.get("film", "cuts"))
    u0 = _substrate_datum(grid, cfg.get("physics", "delta_mismatch"))
    u = u0.copy()
    xs, ys = np.meshgrid(grid.xs(), grid.ys())
    u[ys > profile.value(grid.xs())[None, :] + 1e-12] = 0.0
    e = energy_G_relaxed(FilmConfig(grid, profile, u, cuts, u0), _density(cfg))
    col.text("energies.csv", "label,bulk,surface1,surface2,total\n" + e.row("relaxed_film") + "\n")
    report.energies["relaxed_total"] = e.total
    _check(report, np.isfinite(e.total), "finite relaxed energy")


def _scenario(cfg: ExperimentConfig, grid: Grid) -> pf.SweepScenario:
    vm = cfg.get("constraint", "volume_m")
    return pf.SweepScenario(
        grid=grid,
        density=_density(cfg),
        u0=_substrate_datum(grid, cfg.get("physics", "delta_mismatch")),
        volume_m=None if vm == "none" else vm,
        init=cfg.get("phase", "init"),
        seed=cfg.get("phase", "seed"),
        params=_phase_kwargs(cfg),
    )


def _emit_flags(cfg) -> set:
    return {f.strip() for f in cfg.get("output", "emit").split(",") if f.strip()}


def _trace_csv(state: pf.PhaseState) -> str:
    rows = ["step,label,energy"]
    rows += [f"{k},{label},{e!r}" for k, (label, e) in enumerate(state.trace)]
    return "\n".join(rows) + "\n"


def _monotone_half_steps(state: pf.PhaseState) -> bool:
    es = state.half_step_energies()
    return all(b <= a + 1e-12 * max(1.0, abs(a)) for a, b in zip(es, es[1:]))


def _run_minimize(cfg: ExperimentConfig, col: _Collector, report: RunReport):
    grid = _grid(cfg)
    sc = _scenario(cfg, grid)
    eps = cfg.get("phase", "eps")[0]
    row = pf.run_scenario(eps, sc)
    emit = _emit_flags(cfg)
    if "trace" in emit:
        col.text("trace.csv", _trace_csv(row.state))
    if "fields" in emit:
        col.grid("v.txt", row.state.v, grid)
        col.grid("u_x.txt", row.state.u[:, :, 0], grid)
        col.grid("u_y.txt", row.state.u[:, :, 1], grid)
    report.energies["total"] = row.total
    report.energies["relaxed_of_extracted"] = row.relaxed_of_extracted
    _check(report, _monotone_half_steps(row.state), "energy trace non-increasing")
    _check(report, not pf.phase_violations(row.state.v, grid), "final phase field admissible")


def _run_gamma_sweep(cfg: ExperimentConfig, col: _Collector, report: RunReport):
    grid = _grid(cfg)
    sc = _scenario(cfg, grid)
    threads = max(1, int(os.environ.get("SFL_THREADS", "1")))
    rows = pf.gamma_sweep(cfg.get("phase", "eps"), sc, threads=threads)
    csv = "eps,total,elastic,surface_proxy,l1_to_sharp\n" + "\n".join(r.csv() for r in rows) + "\n"
    col.text("sweep.csv", csv)
    emit = _emit_flags(cfg)
    for r in rows:
        if "fields" in emit and np.isfinite(r.total):
            col.grid(f"v_eps_{r.eps!r}.txt", r.state.v, grid)
        report.energies[f"total@{r.eps!r}"] = r.total
        _check(report, _monotone_half_steps(r.state), f"trace monotone at eps={r.eps!r}")
        _check(
            report,
            r.total >= r.relaxed_of_extracted - 0.05 or not np.isfinite(r.total),
            f"diffuse total dominates relaxed energy of extraction at eps={r.eps!r}",
        )


def _run_slice_check(cfg: ExperimentConfig, col: _Collector, report: RunReport):
    grid = _grid(cfg)
    r = cfg.get("slice", "rect")
    B = VoidSet.rectangle(*r)
    delta = cfg.get("physics", "delta_mismatch")
    u = _substrate_datum(grid, delta if delta != 0.0 else 0.1)
    norm = surface_norm_from(cfg)
    eps = cfg.get("slice", "slice_eps")
    spacing = cfg.get("slice", "line_spacing")
    if spacing == "default":
        spacing = 0.5 * min(grid.hx, grid.hy)
    ndir = cfg.get("slice", "directions")
    dirs = [(1.0, 0.0), (0.0, 1.0)]
    fan = max(ndir - 2, 0)
    dirs += [
        (float(np.cos(th)), float(np.sin(th)))
        for th in np.pi * (np.arange(fan) + 0.5) / fan
    ]
    rows = ["xi,eps,lhs,rhs,residual"]
    worst = 0.0
    for xi in dirs:
        lhs, rhs, res = fubini_residual(
            u, B, grid, xi, eps, cfg.get("physics", "p"), norm, spacing
        )
        worst = max(worst, res / max(abs(rhs), 1.0))
        rows.append(f"{xi[0]!r} {xi[1]!r},{eps!r},{lhs!r},{rhs!r},{res!r}")
    col.text("slice.csv", "\n".join(rows) + "\n")
    report.energies["worst_relative_residual"] = worst
    _check(report, worst < 0.05, "slice residuals small on the direction fan")


def _run_recovery(cfg: ExperimentConfig, col: _Collector, report: RunReport):
    grid = _grid(cfg)
    profile = parse_profile(cfg.get("film", "profile"), grid.L, grid.M)
    cuts = parse_cuts(cfg.get("film", "cuts"))
    params = RecoveryParams(
        target=cfg.get("recovery", "target"),
        delta=cfg.get("recovery", "delta"),
        sigma=cfg.get("recovery", "sigma"),
    )
    g, rep = graph_approx(profile, cuts, params, cap=grid.M)
    v = phasefield_recovery(
        g, grid, cfg.get("recovery", "rec_eps"), cuts=cuts, transition_mult=params.transition_mult
    )
    col.text(
        "g.csv",
        "x,g\n" + "\n".join(f"{x!r},{h!r}" for x, h in zip(g.xs, g.hs)) + "\n",
    )
    col.grid("v.txt", v, grid)
    col.text(
        "recovery.csv",
        "eps,delta,sigma,l1_err,surface_err\n"
        f"{params.target!r},{params.delta!r},{params.sigma!r},{rep.l1_err!r},{rep.surface_err!r}\n",
    )
    report.energies["surface_err"] = rep.surface_err
    _check(report, rep.within(params.target), "graph approximation within target")


def _run_collapse(cfg: ExperimentConfig, col: _Collector, report: RunReport):
    grid = _grid(cfg)
    ell = cfg.get("collapse", "crack_len")
    n_max = cfg.get("collapse", "n_max")
    xmid, ymid = 0.5 * (grid.x0 + grid.x1), 0.5 * (grid.y0 + grid.y1)
    norm = surface_norm_from(cfg)
    u = grid.zeros_vector()
    configs = [
        VoidConfig(
            grid,
            VoidSet.rectangle(xmid - ell / 2, xmid + ell / 2, ymid - 2.0**-n / 2, ymid + 2.0**-n / 2),
            u,
        )
        for n in range(1, n_max + 1)
    ]
    crack = Segment((xmid - ell / 2, ymid), (xmid + ell / 2, ymid), (0.0, 1.0))
    rep = collapse_lowerbound_check(configs, [crack], VoidSet.empty(), norm)
    rows = ["n,thickness,surface,limit,gap"]
    for n, (s, gap) in enumerate(zip(rep["surfaces"], rep["gaps"]), start=1):
        rows.append(f"{n},{2.0**-n!r},{s!r},{rep['limit_surface']!r},{gap!r}")
    col.text("collapse.csv", "\n".join(rows) + "\n")
    report.energies["final_gap"] = rep["gaps"][-1]
    _check(report, rep["ok"], "collapse gap nonnegative")
    _check(
        report,
        all(b <= a for a, b in zip(rep["gaps"], rep["gaps"][1:])),
        "collapse gap decreasing",
    )


_DISPATCH = {
    "evaluate": _run_evaluate,
    "minimize": _run_minimize,
    "gamma-sweep": _run_gamma_sweep,
    "slice-check": _run_slice_check,
    "recovery": _run_recovery,
    "collapse-bench": _run_collapse,
}
