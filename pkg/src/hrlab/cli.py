"""Command-line front end.

Every subcommand produces a flat table of rows with the fixed columns

    experiment,N,p,a,ell,R,seed,metric,value,bound,flag

rendered as CSV (byte-identical across runs with the same arguments) or as
JSON with a metadata header (config hash, seed, package version, wall
time; the wall-time field makes JSON output non-reproducible by design).
``flag`` is one of pass/fail/info/exploratory; the process exits nonzero
exactly when a pass-checked row failed.

Configuration comes from an INI file (section/keys below) and is
overridden by command-line flags; the worker count falls back to the
``HRL_JOBS`` environment variable.  Unknown sections or keys are rejected.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import io
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__, corpus, functionals, ops1d, quotients
from .model import AngularMode, OneDimConfig, ParameterError, SpaceParams
from .quadrature import sphere_rule

__all__ = ["ReportRow", "RunConfig", "ConfigError", "load_config", "run", "render", "main"]

COLUMNS = ("experiment", "N", "p", "a", "ell", "R", "seed", "metric", "value", "bound", "flag")

COMMANDS = (
    "verify-1d",
    "verify-decomp",
    "constants",
    "quotient",
    "degeneracy",
    "stress",
    "sweep",
    "report",
)

FORMAT_VERSION = "1"

#: Acceptance thresholds mirrored by the row bounds (direction per metric).
SHARP_TARGETS: Tuple[Tuple[str, int, float], ...] = (
    ("hardy", 3, 0.97),
    ("rellich", 5, 0.95),
    ("hardy_rellich", 3, 0.95),
    ("hardy_rellich", 4, 0.95),
    ("hardy_rellich", 5, 0.95),
)


class ConfigError(ValueError):
    """Malformed configuration file or invalid option value."""


@dataclass(frozen=True)
class ReportRow:
    experiment: str
    metric: str
    value: Optional[float] = None
    bound: Optional[float] = None
    flag: str = "info"
    N: Optional[int] = None
    p: Optional[float] = None
    a: Optional[float] = None
    ell: Optional[int] = None
    R: Optional[float] = None
    seed: Optional[int] = None


def _passfail(ok: bool) -> str:
    return "pass" if ok else "fail"


@dataclass(frozen=True)
class RunConfig:
    """Resolved run options (defaults + config file + flag overrides)."""

    seed: int = 0
    jobs: Optional[int] = None
    fmt: str = "csv"
    out: Optional[str] = None
    domain: Tuple[float, float] = (1e-3, 1e3)
    n_free: int = 120
    ell_max: int = 3
    n_starts: int = 6
    budget: int = 3000
    n_ang: int = 32
    r_powers: Tuple[int, ...] = tuple(range(4, 13))
    config_sha256: str = ""

    @property
    def r_grid(self) -> Tuple[float, ...]:
        return tuple(2.0**k for k in self.r_powers)


_SCHEMA: Dict[str, Tuple[str, ...]] = {
    "run": ("format_version", "seed", "jobs", "format", "out"),
    "quotient": ("domain_min", "domain_max", "n_free", "ell_max"),
    "maximize": ("n_starts", "budget", "n_ang"),
    "sweep": ("r_powers",),
}


def _parse_r_powers(text: str) -> Tuple[int, ...]:
    text = text.strip()
    if "-" in text and "," not in text:
        lo, hi = text.split("-", 1)
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(tok) for tok in text.split(",") if tok.strip())


def load_config(path: str) -> RunConfig:
    """Parse and validate an INI config; raise ConfigError on any surprise."""
    cp = configparser.ConfigParser()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        cp.read_string(raw, source=path)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc

    if "run" not in cp or "format_version" not in cp["run"]:
        raise ConfigError("config must carry [run] format_version")
    if cp["run"]["format_version"].strip() != FORMAT_VERSION:
        raise ConfigError(
            f"unsupported format_version {cp['run']['format_version']!r}; "
            f"this build reads version {FORMAT_VERSION}"
        )
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key in cp[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")

    cfg = RunConfig(config_sha256=hashlib.sha256(raw.encode("utf-8")).hexdigest())
    try:
        run_sec = cp["run"]
        if "seed" in run_sec:
            cfg = replace(cfg, seed=run_sec.getint("seed"))
        if "jobs" in run_sec:
            cfg = replace(cfg, jobs=run_sec.getint("jobs"))
        if "format" in run_sec:
            fmt = run_sec["format"].strip()
            if fmt not in ("csv", "json"):
                raise ConfigError(f"format must be csv or json, got {fmt!r}")
            cfg = replace(cfg, fmt=fmt)
        if "out" in run_sec and run_sec["out"].strip():
            cfg = replace(cfg, out=run_sec["out"].strip())
        if "quotient" in cp:
            q = cp["quotient"]
            lo = q.getfloat("domain_min", cfg.domain[0])
            hi = q.getfloat("domain_max", cfg.domain[1])
            cfg = replace(
                cfg,
                domain=(lo, hi),
                n_free=q.getint("n_free", cfg.n_free),
                ell_max=q.getint("ell_max", cfg.ell_max),
            )
        if "maximize" in cp:
            m = cp["maximize"]
            cfg = replace(
                cfg,
                n_starts=m.getint("n_starts", cfg.n_starts),
                budget=m.getint("budget", cfg.budget),
                n_ang=m.getint("n_ang", cfg.n_ang),
            )
        if "sweep" in cp and "r_powers" in cp["sweep"]:
            cfg = replace(cfg, r_powers=_parse_r_powers(cp["sweep"]["r_powers"]))
    except ValueError as exc:
        raise ConfigError(f"invalid config value: {exc}") from exc
    if not (0 < cfg.domain[0] < cfg.domain[1]):
        raise ConfigError(f"need 0 < domain_min < domain_max, got {cfg.domain}")
    if len(cfg.r_powers) < 2:
        raise ConfigError("sweep needs at least two r_powers")
    return cfg


def _resolve_jobs(flag: Optional[int], cfg: RunConfig) -> int:
    if flag is not None:
        jobs = flag
    elif os.environ.get("HRL_JOBS"):
        try:
            jobs = int(os.environ["HRL_JOBS"])
        except ValueError as exc:
            raise ConfigError(f"HRL_JOBS must be an integer: {exc}") from exc
    elif cfg.jobs is not None:
        jobs = cfg.jobs
    else:
        jobs = 1
    if jobs < 1:
        raise ConfigError(f"jobs must be >= 1, got {jobs}")
    return jobs


# ---------------------------------------------------------------------------
# Subcommand row builders
# ---------------------------------------------------------------------------


def _rows_constants(cfg: RunConfig) -> List[ReportRow]:
    rows = []
    for N, a in ((1, 0.0), (2, 0.0), (3, 0.0), (4, 0.0), (2, 0.5), (3, -1.0)):
        rows.append(
            ReportRow(
                "constants",
                "tracked_constant",
                value=quotients.tracked_constant(N, a),
                N=N,
                p=float(N),
                a=a,
            )
        )
    for problem, N in (
        ("hardy", 3),
        ("hardy", 4),
        ("rellich", 5),
        ("hardy_rellich", 3),
        ("hardy_rellich", 4),
        ("hardy_rellich", 5),
    ):
        entry = quotients.catalog(problem, N, 2.0)
        rows.append(
            ReportRow(
                "constants",
                f"catalog_{problem}",
                value=entry.value,
                N=N,
                p=2.0,
                ell=entry.attained_ell,
            )
        )
    for N, a, q in ((3, 0.0, 2.0), (3, 2.9, 2.0), (3, -2.9, 2.0), (2, -2.5, 2.0)):
        rep = quotients.weight_class_check(N, a, q)
        rows.append(
            ReportRow(
                "constants",
                f"in_A_{q:g}",
                value=float(rep.in_Aq),
                bound=rep.upper,
                N=N,
                a=a,
            )
        )
        rows.append(
            ReportRow(
                "constants",
                "in_A_inf",
                value=float(rep.in_Ainf),
                bound=rep.lower,
                N=N,
                a=a,
            )
        )
    return rows


def _rows_verify_1d(cfg: RunConfig) -> List[ReportRow]:
    seed = cfg.seed
    rows: List[ReportRow] = []
    fields = corpus.generate(
        corpus.CorpusSpec("random_radial", seed=seed, count=3, N=3)
    )
    profiles = [f.profile for f in fields]

    configs = (
        OneDimConfig(p=2.0, a=2.0, b=1.0, alpha=0.0),
        OneDimConfig(p=3.0, a=2.0, b=1.0, alpha=0.0),
        OneDimConfig(p=2.0, a=3.0, b=2.0, alpha=1.0),
    )
    for c in configs:
        for prof in profiles:
            chk = ops1d.prop_bound_check(c, prof)
            rows.append(
                ReportRow(
                    "verify-1d",
                    f"prop_bound_ratio_a{c.a:g}_b{c.b:g}_alpha{c.alpha:g}",
                    value=chk.ratio,
                    bound=1.0,
                    flag=_passfail(chk.ok),
                    p=c.p,
                    a=c.a,
                    seed=seed,
                )
            )

    # Tonelli: p = 1 with f >= 0 makes the bound an exact equality
    tonelli = OneDimConfig(p=1.0, a=2.0, b=1.0, alpha=0.0)
    for prof in profiles:
        nonneg = prof.with_coefficients(np.abs(prof.coefficients))
        chk = ops1d.prop_bound_check(tonelli, nonneg)
        ok = abs(chk.ratio - 1.0) <= ops1d.REL_TOL_EQUALITY
        rows.append(
            ReportRow(
                "verify-1d",
                "tonelli_equality_ratio",
                value=chk.ratio,
                bound=1.0,
                flag=_passfail(ok),
                p=1.0,
                a=2.0,
                seed=seed,
            )
        )

    for prof in profiles:
        chk = ops1d.identity_check(prof)
        rows.append(
            ReportRow(
                "verify-1d",
                "ratio_identity_residual",
                value=chk.normalized,
                bound=ops1d.REL_TOL_RESIDUAL,
                flag=_passfail(chk.ok),
                seed=seed,
            )
        )
        cw = ops1d.cw10_check(prof)
        rows.append(
            ReportRow(
                "verify-1d",
                "cw10_ratio",
                value=cw.ratio,
                bound=1.0,
                flag=_passfail(cw.ok),
                p=1.0,
                seed=seed,
            )
        )

    for n, k in ((1, 0), (1, 1), (1, 2), (2, 0), (2, 1), (3, 0)):
        chk = ops1d.corollary22_check(profiles[0], n, k, p=2.0, alpha=0.0)
        rows.append(
            ReportRow(
                "verify-1d",
                f"cor22_n{n}_k{k}_ratio",
                value=chk.ratio,
                bound=1.0,
                flag=_passfail(chk.ok),
                p=2.0,
                seed=seed,
            )
        )

    hardy_fields = corpus.generate(
        corpus.CorpusSpec("near_extremal_hardy", seed=seed, count=3, N=1)
    )
    for f in hardy_fields:
        chk = ops1d.hardy1d_quotient(f.profile, p=2.0, beta=-3.0)
        rows.append(
            ReportRow(
                "verify-1d",
                "hardy1d_sharp_fraction",
                value=chk.sharp_fraction,
                bound=0.9,
                flag=_passfail(chk.ok and chk.sharp_fraction >= 0.9),
                p=2.0,
                seed=seed,
            )
        )

    # randomized exponent grid over a wider pool, 500 cases
    pool = [
        f.profile
        for f in corpus.generate(
            corpus.CorpusSpec("random_radial", seed=seed, count=10, N=3)
        )
    ]
    rng = np.random.default_rng(corpus.child_seed(seed, "verify-1d-grid"))
    for i in range(500):
        p = float(rng.uniform(1.0, 4.0))
        a = float(rng.uniform(1.2, 3.0))
        b = float(rng.uniform(0.0, 2.0))
        alpha = p * (a - 1.0) - float(rng.uniform(0.1, 2.0))
        chk = ops1d.prop_bound_check(
            OneDimConfig(p=p, a=a, b=b, alpha=alpha), pool[i % len(pool)]
        )
        rows.append(
            ReportRow(
                "verify-1d",
                "prop_bound_ratio_randomized",
                value=chk.ratio,
                bound=1.0,
                flag=_passfail(chk.ok),
                p=p,
                a=a,
                seed=seed,
            )
        )
    return rows


def _rows_verify_decomp(cfg: RunConfig) -> List[ReportRow]:
    seed = cfg.seed
    rows: List[ReportRow] = []
    for N in (2, 3):
        fields = corpus.generate(
            corpus.CorpusSpec("random_separable", seed=seed, count=2, N=N, p=2.0)
        )
        fields += corpus.generate(
            corpus.CorpusSpec("random_radial", seed=seed, count=1, N=N, p=2.0)
        )
        for f in fields:
            rep = functionals.lhs_functional(f)
            rel = abs(rep.split_defect) / rep.value if rep.value > 0 else 0.0
            rows.append(
                ReportRow(
                    "verify-decomp",
                    "split_defect_rel",
                    value=rel,
                    bound=functionals.REL_TOL_IDENTITY,
                    flag=_passfail(rel <= functionals.REL_TOL_IDENTITY),
                    N=N,
                    p=2.0,
                    a=0.0,
                    ell=None if f.is_radial else f.mode.ell,
                    seed=seed,
                )
            )

    blow = functionals.remark_blowup_report(16.0)
    rows.append(
        ReportRow(
            "verify-decomp",
            "grad_identity_residual_rel",
            value=abs(blow.identity_defect) / blow.scale,
            bound=functionals.REL_TOL_IDENTITY,
            flag=_passfail(blow.identity_ok),
            N=2,
            p=2.0,
            a=0.0,
            ell=1,
            R=16.0,
        )
    )

    for N in (2, 3, 4):
        conv = functionals.convexity_check(N, seed=seed)
        rel = max(conv.max_defect, 0.0) / conv.scale
        rows.append(
            ReportRow(
                "verify-decomp",
                "convexity_max_defect_rel",
                value=rel,
                bound=1e-12,
                flag=_passfail(conv.ok),
                N=N,
                seed=seed,
            )
        )

    # closed-form angular moments against explicit sphere quadrature
    for N in (2, 3):
        for ell in (1, 2, 3):
            mode = AngularMode(ell, N)
            t, w = sphere_rule(N, 128)
            c0 = float(np.sum(w * mode.value(t) ** 2))
            c2 = float(np.sum(w * mode.sphere_hessian_sq(t)))
            lam = mode.eigenvalue
            closed = lam * lam - (N - 2.0) * lam
            err = abs(c2 / c0 - closed) / closed
            rows.append(
                ReportRow(
                    "verify-decomp",
                    "sphere_hessian_moment_rel_err",
                    value=err,
                    bound=1e-10,
                    flag=_passfail(err <= 1e-10),
                    N=N,
                    ell=ell,
                )
            )
    return rows


def _rows_quotient(cfg: RunConfig) -> List[ReportRow]:
    rows: List[ReportRow] = []
    for problem, N, frac in SHARP_TARGETS:
        rep = quotients.reproduce_sharp(
            problem, N, ell_max=cfg.ell_max, domain=cfg.domain, n_free=cfg.n_free
        )
        for ell, value in rep.per_ell:
            rows.append(
                ReportRow(
                    "quotient",
                    f"{problem}_quotient",
                    value=value,
                    N=N,
                    p=2.0,
                    a=0.0,
                    ell=ell,
                )
            )
        rows.append(
            ReportRow(
                "quotient",
                f"{problem}_sharp_fraction",
                value=rep.fraction,
                bound=frac,
                flag=_passfail(rep.fraction >= frac),
                N=N,
                p=2.0,
                a=0.0,
                ell=rep.best_ell,
            )
        )

    # dual-route solver agreement on a deliberately small system
    basis = quotients.SplineBasis.log_spaced(0.5, 8.0, 5)
    pair = quotients.assemble_forms(
        "hardy", SpaceParams(N=3, p=2.0), 0, basis
    )
    eig = quotients.max_generalized_eig(pair)
    orc = quotients.det_bisection_max_eig(pair.A, pair.B)
    gap = abs(eig.value - orc) / abs(orc)
    rows.append(
        ReportRow(
            "quotient",
            "eig_bisection_rel_gap",
            value=gap,
            bound=1e-9,
            flag=_passfail(gap <= 1e-9 and eig.ok),
            N=3,
            p=2.0,
            ell=0,
        )
    )
    return rows


def _rows_degeneracy(cfg: RunConfig) -> List[ReportRow]:
    rep = quotients.rellich_degeneracy(cfg.r_grid)
    rows: List[ReportRow] = []
    for R, q1, qr in zip(rep.R_values, rep.ell1_quotients, rep.radial_quotients):
        rows.append(
            ReportRow(
                "degeneracy", "ell1_lap_over_rellich", value=q1, N=2, p=2.0, ell=1, R=R
            )
        )
        rows.append(
            ReportRow(
                "degeneracy", "radial_lap_over_rellich", value=qr, N=2, p=2.0, ell=0, R=R
            )
        )
    rows.append(
        ReportRow(
            "degeneracy",
            "ell1_strictly_decreasing",
            value=float(rep.ell1_strictly_decreasing),
            bound=1.0,
            flag=_passfail(rep.ell1_strictly_decreasing),
            N=2,
            p=2.0,
            ell=1,
        )
    )
    rows.append(
        ReportRow(
            "degeneracy",
            "final_ell1",
            value=rep.final_ell1,
            bound=0.1,
            flag=_passfail(rep.final_ell1 < 0.1),
            N=2,
            p=2.0,
            ell=1,
            R=rep.R_values[-1],
        )
    )
    rows.append(
        ReportRow(
            "degeneracy",
            "radial_floor",
            value=rep.radial_floor,
            bound=0.05,
            flag=_passfail(rep.radial_floor >= 0.05),
            N=2,
            p=2.0,
            ell=0,
        )
    )
    return rows


def _rows_stress(cfg: RunConfig) -> List[ReportRow]:
    seed = cfg.seed
    rows: List[ReportRow] = []
    fields = corpus.generate(
        corpus.CorpusSpec("near_extremal_hardy", seed=seed, count=5, N=1)
    )
    for f in fields:
        chk = ops1d.hardy1d_quotient(f.profile, p=2.0, beta=-3.0)
        rows.append(
            ReportRow(
                "stress",
                "hardy1d_sharp_fraction",
                value=chk.sharp_fraction,
                bound=0.9,
                flag=_passfail(chk.ok and chk.sharp_fraction >= 0.9),
                p=2.0,
                seed=seed,
            )
        )

    wide = quotients.reproduce_sharp(
        "hardy", 3, ell_max=1, domain=(1e-9, 1e9), n_free=150
    )
    rows.append(
        ReportRow(
            "stress",
            "hardy_wide_domain_fraction",
            value=wide.fraction,
            bound=0.95,
            flag=_passfail(wide.fraction >= 0.95),
            N=3,
            p=2.0,
            a=0.0,
            ell=wide.best_ell,
        )
    )
    return rows


def _blowup_rows_for(R: float) -> List[ReportRow]:
    rep = functionals.remark_blowup_report(R)
    base = dict(N=2, p=2.0, a=0.0, ell=1, R=R)
    return [
        ReportRow("sweep", "hardy_term", value=rep.hardy_term, **base),
        ReportRow("sweep", "rellich_term", value=rep.rellich_term, **base),
        ReportRow("sweep", "lap_term", value=rep.lap_term, **base),
        ReportRow("sweep", "lhs_grad", value=rep.lhs_grad, **base),
        ReportRow(
            "sweep",
            "grad_identity_residual_rel",
            value=abs(rep.identity_defect) / rep.scale,
            bound=functionals.REL_TOL_IDENTITY,
            flag=_passfail(rep.identity_ok),
            **base,
        ),
    ]


def _rows_sweep(cfg: RunConfig, jobs: int) -> List[ReportRow]:
    Rs = cfg.r_grid
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_blowup_rows_for, Rs))
    else:
        chunks = [_blowup_rows_for(R) for R in Rs]
    rows = [row for chunk in chunks for row in chunk]

    by_metric: Dict[str, List[float]] = {}
    for chunk in chunks:
        for row in chunk:
            by_metric.setdefault(row.metric, []).append(row.value)

    for metric in ("hardy_term", "rellich_term"):
        series = by_metric[metric]
        growth = series[-1] / series[0]
        rows.append(
            ReportRow(
                "sweep",
                f"{metric}_growth",
                value=growth,
                bound=3.0,
                flag=_passfail(growth >= 3.0),
                N=2,
                p=2.0,
                ell=1,
            )
        )
    lap = by_metric["lap_term"]
    lap_dev = max(abs(v - lap[0]) for v in lap) / lap[0]
    rows.append(
        ReportRow(
            "sweep",
            "lap_term_rel_spread",
            value=lap_dev,
            bound=1e-8,
            flag=_passfail(lap_dev <= 1e-8),
            N=2,
            p=2.0,
            ell=1,
        )
    )

    for problem in quotients.RATIO_PROBLEMS:
        series = quotients.plateau_ratio_series(problem, Rs)
        for R, ratio in zip(series.R_values, series.ratios):
            rows.append(
                ReportRow(
                    "sweep",
                    f"plateau_{problem}",
                    value=ratio,
                    flag="exploratory",
                    N=2,
                    p=2.0,
                    ell=1,
                    R=R,
                )
            )
    return rows


def _rows_maximize(cfg: RunConfig) -> List[ReportRow]:
    rows: List[ReportRow] = []
    for N in (2, 3):
        params = SpaceParams(N=N)  # p = N, a = 0
        for problem in quotients.RATIO_PROBLEMS:
            rep = quotients.maximize_ratio_pN(
                problem,
                params,
                n_starts=cfg.n_starts,
                budget=cfg.budget,
                seed=cfg.seed,
                n_ang=cfg.n_ang,
            )
            if rep.tracked_bound is not None:
                flag = _passfail(rep.value <= rep.tracked_bound)
            else:
                flag = "exploratory"
            rows.append(
                ReportRow(
                    "report",
                    f"max_{problem}",
                    value=rep.value,
                    bound=rep.tracked_bound,
                    flag=flag,
                    N=N,
                    p=float(N),
                    a=0.0,
                    ell=rep.best_ell,
                    seed=cfg.seed,
                )
            )
    return rows


def run(command: str, cfg: RunConfig, jobs: int = 1) -> List[ReportRow]:
    """Execute one subcommand and return its rows."""
    if command == "constants":
        return _rows_constants(cfg)
    if command == "verify-1d":
        return _rows_verify_1d(cfg)
    if command == "verify-decomp":
        return _rows_verify_decomp(cfg)
    if command == "quotient":
        return _rows_quotient(cfg)
    if command == "degeneracy":
        return _rows_degeneracy(cfg)
    if command == "stress":
        return _rows_stress(cfg)
    if command == "sweep":
        return _rows_sweep(cfg, jobs)
    if command == "report":
        rows: List[ReportRow] = []
        rows += _rows_constants(cfg)
        rows += _rows_verify_1d(cfg)
        rows += _rows_verify_decomp(cfg)
        rows += _rows_quotient(cfg)
        rows += _rows_degeneracy(cfg)
        rows += _rows_stress(cfg)
        rows += _rows_sweep(cfg, jobs)
        rows += _rows_maximize(cfg)
        return rows
    raise ConfigError(f"unknown command {command!r}")


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format(float(v), ".17g")


def render(rows: Sequence[ReportRow], fmt: str, metadata: Optional[dict] = None) -> str:
    """CSV (deterministic bytes) or JSON (metadata header + typed rows)."""
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in rows:
            writer.writerow([_cell(getattr(row, col)) for col in COLUMNS])
        return buf.getvalue()
    if fmt == "json":
        payload = {
            "metadata": metadata or {},
            "rows": [
                {col: getattr(row, col) for col in COLUMNS if getattr(row, col) is not None}
                for row in rows
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    raise ConfigError(f"format must be csv or json, got {fmt!r}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="hrlab",
        description="Weighted Hardy-Rellich laboratory: verification and sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="INI config file")
        sp.add_argument("--seed", type=int, help="root seed (overrides config)")
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"), dest="fmt")
        sp.add_argument(
            "--jobs",
            type=int,
            help="worker threads for sweeps (flag > HRL_JOBS > config > 1)",
        )
    args = parser.parse_args(argv)

    t0 = time.perf_counter()
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        if args.fmt is not None:
            cfg = replace(cfg, fmt=args.fmt)
        if args.out is not None:
            cfg = replace(cfg, out=args.out)
        jobs = _resolve_jobs(args.jobs, cfg)
        rows = run(args.command, cfg, jobs)
    except (ConfigError, ParameterError) as exc:
        print(f"hrlab: {exc}", file=sys.stderr)
        return 2

    metadata = {
        "command": args.command,
        "config_sha256": cfg.config_sha256,
        "seed": cfg.seed,
        "version": __version__,
        "wall_time_s": round(time.perf_counter() - t0, 3),
    }
    text = render(rows, cfg.fmt, metadata)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 1 if any(row.flag == "fail" for row in rows) else 0


if __name__ == "__main__":
    sys.exit(main())
