"""Experiment orchestration: declarative configs, seeded replication, CLI.

Each experiment resolves a model and two start policies, runs synchronously
coupled replications on hashed per-replication substreams, and aggregates
distance metrics over a fixed time grid.  Outputs are an RFC-4180 CSV of
result rows plus a run manifest JSON (config echo, code version, wall
time, warnings).  Given an identical config and seed the CSV is
byte-identical across runs.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .model import (
    ModelError, RbmSpec, build_asymmetric_atlas, build_band_model,
    build_symmetric_atlas, check_assumptions, derived_params, r_inverse,
    spec_from_json_dict, start_set_bound,
)
from .skorokhod import ReflectionError, simulate, simulate_ensemble
from .coupling import geometric_weights, hit_counter, u_beta_series, couple
from .derivative import (
    derivative_evolve, finite_diff_derivative, rw_distribution_mc,
)
from .stationary import (
    PerturbationSpec, alpha_Y, atlas_stationary_rates, burnin_stationary,
    n_schedule, perturbed_start, sample_atlas_stationary, sample_perturbation,
    validate_n_schedule,
)


class ConfigError(ValueError):
    """Invalid experiment configuration; message carries the field path."""


EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


@dataclass
class ResultRow:
    t: float
    metric: str
    mean: float
    stderr: float
    n_effective: int
    model: str
    d: int
    seed: int

    def as_list(self) -> list:
        return [_fmt(self.t), self.metric, _fmt(self.mean), _fmt(self.stderr),
                str(self.n_effective), self.model, str(self.d), str(self.seed)]


def _fmt(x: float) -> str:
    return repr(float(x))


def aggregate(values) -> tuple[float, float]:
    """Deterministic mean and standard error (replication-index order)."""
    vals = [float(v) for v in values]
    n = len(vals)
    mean = math.fsum(vals) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in vals) / (n - 1)
    return mean, math.sqrt(var / n)


@dataclass
class StartPolicy:
    kind: str                         # fixed | stationary | stationary_perturbed
    vector: Optional[np.ndarray] = None
    pspec: Optional[PerturbationSpec] = None

    @classmethod
    def from_doc(cls, doc, path: str) -> "StartPolicy":
        if not isinstance(doc, dict) or "kind" not in doc:
            raise ConfigError(f"{path}: expected an object with a 'kind' field")
        kind = doc["kind"]
        if kind == "fixed":
            if "vector" not in doc:
                raise ConfigError(f"{path}.vector: required for fixed starts")
            v = np.asarray(doc["vector"], dtype=float)
            if np.any(v < 0):
                raise ConfigError(f"{path}.vector: entries must be nonnegative")
            return cls(kind="fixed", vector=v)
        if kind == "stationary":
            return cls(kind="stationary")
        if kind == "stationary_perturbed":
            if "pspec" not in doc:
                raise ConfigError(f"{path}.pspec: required for perturbed starts")
            try:
                pspec = PerturbationSpec.from_json_dict(doc["pspec"])
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"{path}.pspec: {exc}") from exc
            return cls(kind="stationary_perturbed", pspec=pspec)
        raise ConfigError(f"{path}.kind: unknown start kind {kind!r}")


def resolve_model(doc, path: str = "model") -> RbmSpec:
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected an object")
    try:
        if "builder" in doc:
            b = doc["builder"]
            if b == "symmetric_atlas":
                return build_symmetric_atlas(int(doc["d"]))
            if b == "asymmetric_atlas":
                return build_asymmetric_atlas(int(doc["d"]), float(doc["p"]))
            if b == "band":
                return build_band_model(
                    int(doc["d"]), int(doc["j0"]), np.asarray(doc["P"], dtype=float),
                    np.asarray(doc["mu"], dtype=float),
                    np.asarray(doc["sigma"], dtype=float),
                    label=doc.get("label", "band"))
            raise ConfigError(f"{path}.builder: unknown builder {b!r}")
        return spec_from_json_dict(doc)
    except KeyError as exc:
        raise ConfigError(f"{path}.{exc.args[0]}: required field missing") from exc
    except ModelError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


@dataclass
class ExperimentConfig:
    experiment: str
    model_doc: dict
    start: StartPolicy
    comparison_start: StartPolicy
    t_grid: list
    h: float
    n_reps: int
    seed: int
    beta: Optional[float] = None
    d_prime: Optional[int] = None
    B: Optional[float] = None
    eps: float = 1e-4
    i0: int = 1
    n_walk: int = 0
    burn_T: float = 50.0
    burn_h: float = 0.02
    out: Optional[str] = None
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config: expected a JSON object")
        exp = doc.get("experiment")
        if exp not in ("decay", "perturbation", "derivative_validation", "assumption_check"):
            raise ConfigError(f"experiment: unknown experiment {exp!r}")
        if "model" not in doc:
            raise ConfigError("model: required field missing")
        t_grid = doc.get("t_grid", [])
        if not t_grid and "T" in doc:
            t_grid = [float(doc["T"])]
        if not isinstance(t_grid, list) or not t_grid:
            raise ConfigError("t_grid: required non-empty list")
        if any(b <= a for a, b in zip(t_grid, t_grid[1:])):
            raise ConfigError("t_grid: must be strictly increasing")
        h = float(doc.get("h", 0.0))
        if h <= 0:
            raise ConfigError("h: must be positive")
        n_reps = int(doc.get("n_reps", 0))
        if n_reps < 1:
            raise ConfigError("n_reps: must be >= 1")
        start = StartPolicy.from_doc(doc.get("start", {"kind": "stationary"}), "start")
        comparison = StartPolicy.from_doc(
            doc.get("comparison_start", {"kind": "stationary"}), "comparison_start")
        return cls(
            experiment=exp,
            model_doc=doc["model"],
            start=start,
            comparison_start=comparison,
            t_grid=[float(t) for t in t_grid],
            h=h,
            n_reps=n_reps,
            seed=int(doc.get("seed", 0)),
            beta=float(doc["beta"]) if "beta" in doc else None,
            d_prime=int(doc["d_prime"]) if "d_prime" in doc else None,
            B=float(doc["B"]) if "B" in doc else None,
            eps=float(doc.get("eps", 1e-4)),
            i0=int(doc.get("i0", 1)),
            n_walk=int(doc.get("n_walk", 0)),
            burn_T=float(doc.get("burn_T", 50.0)),
            burn_h=float(doc.get("burn_h", 0.02)),
            out=doc.get("out"),
            raw=doc,
        )


def _start_rng(master_seed: int, rep: int) -> np.random.Generator:
    # distinct third component keeps start draws off the Brownian substream
    return np.random.default_rng(np.random.SeedSequence([master_seed, rep, 1]))


def _draw_starts(spec: RbmSpec, cfg: ExperimentConfig, warnings: list) -> np.ndarray:
    """(n_reps, 2, d) start array; arm 0 primary, arm 1 comparison.

    Stationary arms of one replication share a single draw, so identical
    policies give identical starts, and a perturbed start sits on top of
    the comparison arm's stationary vector.  Models without the exact
    product-exponential law get their stationary draws from one batched
    burn-in sweep on a dedicated seed stream.
    """
    is_atlas = bool(np.max(np.abs(spec.P - 0.5 * (np.eye(spec.d, k=1) + np.eye(spec.d, k=-1)))) < 1e-12)
    starts = np.empty((cfg.n_reps, 2, spec.d))
    for pol in (cfg.start, cfg.comparison_start):
        if pol.kind == "fixed" and pol.vector.shape != (spec.d,):
            raise ConfigError(
                f"start.vector: length {pol.vector.size} does not match d={spec.d}")
    if cfg.start.kind == "fixed" and cfg.B is not None:
        needed = start_set_bound(spec, cfg.start.vector)
        if needed > cfg.B:
            warnings.append(
                f"start.vector outside start set: needs B >= {needed:.6g}, "
                f"config B = {cfg.B:.6g}")
    needs_stationary = "stationary" in (cfg.start.kind, cfg.comparison_start.kind) \
        or "stationary_perturbed" in (cfg.start.kind, cfg.comparison_start.kind)
    stat_draws = None
    if needs_stationary:
        if is_atlas:
            stat_draws = np.stack([
                sample_atlas_stationary(spec.d, rng=_start_rng(cfg.seed, r))
                for r in range(cfg.n_reps)])
        else:
            x0 = np.broadcast_to(burnin_stationary(spec, 0.0, cfg.burn_h),
                                 (cfg.n_reps, 1, spec.d))
            res = simulate_ensemble(spec, x0, T=cfg.burn_T, h=cfg.burn_h,
                                    master_seed=_sub_seed(cfg.seed, 7001))
            stat_draws = res.final_X[:, 0, :]
    for r in range(cfg.n_reps):
        for arm, pol in ((0, cfg.start), (1, cfg.comparison_start)):
            if pol.kind == "fixed":
                starts[r, arm] = pol.vector
            elif pol.kind == "stationary":
                starts[r, arm] = stat_draws[r]
            else:
                Y = sample_perturbation(pol.pspec, spec.d, rng=_start_rng(cfg.seed, r))
                starts[r, arm] = perturbed_start(stat_draws[r], Y)
    return starts


def run_decay_experiment(cfg: ExperimentConfig) -> tuple[list, dict]:
    """Coupled-distance decay curve over the time grid."""
    spec = resolve_model(cfg.model_doc)
    warnings: list = []
    starts = _draw_starts(spec, cfg, warnings)
    res = simulate_ensemble(spec, starts, T=cfg.t_grid[-1], h=cfg.h,
                            master_seed=cfg.seed, t_snapshots=cfg.t_grid)
    rows = []
    w = geometric_weights(spec.d, cfg.beta) if cfg.beta is not None else None
    # with a zero comparison arm the weighted norm of R^{-1} delta is the
    # u series; from a stationary primary it estimates the stationary one
    zero_comp = cfg.comparison_start.kind == "fixed" \
        and not np.any(cfg.comparison_start.vector)
    u_metric = None
    if zero_comp and w is not None:
        u_metric = "u_pi" if cfg.start.kind == "stationary" else "u_beta"
        Rinv_T = r_inverse(spec.P).T
    for k, t in enumerate(res.t_snapshots):
        diff = res.X_snapshots[k, :, 0, :] - res.X_snapshots[k, :, 1, :]
        adiff = np.abs(diff)
        mean, se = aggregate(adiff.sum(axis=1))
        rows.append(ResultRow(t, "l1", mean, se, cfg.n_reps, spec.label, spec.d, cfg.seed))
        if w is not None:
            mean, se = aggregate(adiff @ w)
            rows.append(ResultRow(t, "weighted_l1_beta", mean, se, cfg.n_reps,
                                  spec.label, spec.d, cfg.seed))
        if u_metric is not None:
            mean, se = aggregate(np.abs(diff @ Rinv_T) @ w)
            rows.append(ResultRow(t, u_metric, mean, se, cfg.n_reps,
                                  spec.label, spec.d, cfg.seed))
    return rows, {"warnings": warnings}


def run_perturbation_experiment(cfg: ExperimentConfig) -> tuple[list, dict]:
    """Perturbed-vs-stationary decay with tail-schedule overlay rows."""
    spec = resolve_model(cfg.model_doc)
    if cfg.start.kind != "stationary_perturbed":
        raise ConfigError("start.kind: perturbation experiment needs stationary_perturbed")
    pspec = cfg.start.pspec
    warnings = validate_n_schedule(pspec, cfg.t_grid)
    starts = _draw_starts(spec, cfg, warnings)
    res = simulate_ensemble(spec, starts, T=cfg.t_grid[-1], h=cfg.h,
                            master_seed=cfg.seed, t_snapshots=cfg.t_grid)
    rows = []
    for k, t in enumerate(res.t_snapshots):
        diff = np.abs(res.X_snapshots[k, :, 0, :] - res.X_snapshots[k, :, 1, :])
        mean, se = aggregate(diff.sum(axis=1))
        rows.append(ResultRow(t, "l1", mean, se, cfg.n_reps, spec.label, spec.d, cfg.seed))
        n_t = n_schedule(pspec, t)
        rows.append(ResultRow(t, "n_t", float(n_t), 0.0, 0, spec.label, spec.d, cfg.seed))
        rows.append(ResultRow(t, "alpha_Y_nt", alpha_Y(pspec, n_t), 0.0, 0,
                              spec.label, spec.d, cfg.seed))
        shape = n_t * t ** (-3.0 / 32.0) if t > 0 else math.inf
        rows.append(ResultRow(t, "bound_shape", shape, 0.0, 0, spec.label, spec.d,
                              cfg.seed))
    return rows, {"warnings": warnings}


def run_derivative_validation(cfg: ExperimentConfig) -> tuple[list, dict]:
    """Finite differences vs the crossing recursion vs walk Monte Carlo."""
    spec = resolve_model(cfg.model_doc)
    T = cfg.t_grid[-1]
    if cfg.start.kind == "fixed":
        x = cfg.start.vector
    else:
        x = 1.0 / atlas_stationary_rates(spec.d)   # stationary mean, interior
    gaps, divergent, mass_defects, survivals = [], 0, [], []
    walk_checked = walk_ok = 0
    n_walk_envs = 0
    for r in range(cfg.n_reps):
        fd = finite_diff_derivative(spec, x, cfg.i0, eps=cfg.eps, T=T, h=cfg.h,
                                    seed=_sub_seed(cfg.seed, r))
        state = derivative_evolve(fd.log, cfg.i0, spec.R, T)
        mass_defects.append(state.max_mass_defect)
        survivals.append(1.0 - state.w0)
        if fd.divergent:
            divergent += 1
        else:
            gaps.append(fd.sup_gap)
        if cfg.n_walk > 0 and n_walk_envs < 25:
            n_walk_envs += 1
            freq = rw_distribution_mc(fd.log, cfg.i0, T, cfg.n_walk,
                                      seed=_sub_seed(cfg.seed, 10_000 + r))
            exact = state.distribution()
            se = np.sqrt(np.maximum(exact * (1.0 - exact), 0.0) / cfg.n_walk)
            within = np.abs(freq - exact) <= 3.0 * se + 1e-12
            walk_checked += within.size
            walk_ok += int(np.count_nonzero(within))
    exclusion = divergent / cfg.n_reps
    summary = {
        "n_runs": cfg.n_reps,
        "n_divergent": divergent,
        "exclusion_rate": exclusion,
        "max_sup_gap": max(gaps) if gaps else None,
        "mean_sup_gap": (math.fsum(gaps) / len(gaps)) if gaps else None,
        "max_mass_defect": max(mass_defects),
        "walk_states_checked": walk_checked,
        "walk_states_within_3sigma": walk_ok,
    }
    surv_mean, surv_se = aggregate(survivals)
    rows = [
        ResultRow(T, "fd_gap_supnorm", summary["mean_sup_gap"] or 0.0, 0.0,
                  len(gaps), spec.label, spec.d, cfg.seed),
        ResultRow(T, "exclusion_rate", exclusion, 0.0, cfg.n_reps, spec.label,
                  spec.d, cfg.seed),
        ResultRow(T, "survival", surv_mean, surv_se, cfg.n_reps, spec.label,
                  spec.d, cfg.seed),
    ]
    return rows, {"warnings": [], "summary": summary}


def _sub_seed(master: int, index: int) -> int:
    return int(np.random.SeedSequence([master, index]).generate_state(1)[0])


RUNNERS = {
    "decay": run_decay_experiment,
    "perturbation": run_perturbation_experiment,
    "derivative_validation": run_derivative_validation,
}


def write_rows_csv(rows, out) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["t", "metric", "mean", "stderr", "n_effective", "model", "d", "seed"])
    for row in rows:
        writer.writerow(row.as_list())


def rows_csv_text(rows) -> str:
    buf = io.StringIO()
    write_rows_csv(rows, buf)
    return buf.getvalue()


def run_experiment(cfg: ExperimentConfig) -> tuple[str, dict]:
    """Run the configured experiment; returns (csv_text, manifest_dict)."""
    if cfg.experiment == "assumption_check":
        raise ConfigError("experiment: use the 'check' subcommand for assumption checks")
    t0 = time.time()
    rows, extra = RUNNERS[cfg.experiment](cfg)
    manifest = {
        "config": cfg.raw,
        "version": __version__,
        "wall_time_s": round(time.time() - t0, 3),
    }
    manifest.update(extra)
    return rows_csv_text(rows), manifest


# ---------------------------------------------------------------------------
# command-line interface


def _load_config(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file {path} does not exist")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path}: invalid JSON ({exc})") from exc


def _write_output(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_check(doc: dict, out: Optional[str]) -> int:
    spec = resolve_model(doc.get("model", {}))
    constants = doc.get("constants")
    if constants == "auto" or constants is None:
        constants = default_constants_for(spec)
    report = check_assumptions(spec, constants, mode=doc.get("mode", "main"),
                               beta=doc.get("beta"), delta=doc.get("delta"))
    _write_output(json.dumps(report.to_json_dict(), indent=2, default=str) + "\n", out)
    return EXIT_OK


def default_constants_for(spec: RbmSpec) -> dict:
    """Family constants for models that print them (asymmetric Atlas, band)."""
    if "p" in spec.meta:
        p = spec.meta["p"]
        q = 1.0 - p
        return {"C": 1.0 / (p - q), "M": 1.0 / (p - q), "alpha": q / p,
                "b0": (p - q) / p ** 2, "r_star": 0.0, "k0": 2,
                "sigma_lo": math.sqrt(2.0), "sigma_hi": math.sqrt(2.0)}
    if "band_alpha_prime" in spec.meta:
        ap = spec.meta["band_alpha_prime"]
        j0 = spec.meta["band_j0"]
        sigma = spec.sigma_diag()
        b0 = min(derived_params(spec, k).b_low_k for k in range(2, spec.d + 1))
        return {"C": 1.0 / (1.0 - ap), "M": 1.0 / (1.0 - ap),
                "alpha": ap ** (1.0 / j0), "b0": b0, "r_star": 0.0, "k0": 2,
                "sigma_lo": float(np.min(sigma)), "sigma_hi": float(np.max(sigma))}
    raise ConfigError("constants: no default constants for this model family")


def _cmd_simulate(doc: dict, out: Optional[str]) -> int:
    spec = resolve_model(doc.get("model", {}))
    for name in ("x0", "T", "h"):
        if name not in doc:
            raise ConfigError(f"{name}: required field missing")
    path = simulate(spec, np.asarray(doc["x0"], dtype=float), float(doc["T"]),
                    float(doc["h"]), seed=int(doc.get("seed", 0)))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["step", "t", "i", "X", "L"])
    for j in range(path.n_steps + 1):
        t = j * path.h
        for i in range(spec.d):
            writer.writerow([j, _fmt(t), i + 1, _fmt(path.X[j, i]), _fmt(path.L[j, i])])
    _write_output(buf.getvalue(), out)
    return EXIT_OK


def _cmd_couple(doc: dict, out: Optional[str]) -> int:
    spec = resolve_model(doc.get("model", {}))
    for name in ("x", "x_tilde", "T", "h"):
        if name not in doc:
            raise ConfigError(f"{name}: required field missing")
    beta = float(doc.get("beta", 0.5))
    d_prime = int(doc.get("d_prime", spec.d))
    coupled = couple(spec, np.asarray(doc["x"], dtype=float),
                     np.asarray(doc["x_tilde"], dtype=float),
                     float(doc["T"]), float(doc["h"]), seed=int(doc.get("seed", 0)))
    zero_comparison = not np.any(coupled.x_tilde)
    u = u_beta_series(coupled, beta) if zero_comparison else None
    counter = hit_counter(coupled.path_x, d_prime)
    w = geometric_weights(spec.d, beta)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "u_beta", "l1_delta", "weighted_l1_delta", "N_dprime"])
    for j in range(coupled.path_x.n_steps + 1):
        t = j * coupled.h
        adx = np.abs(coupled.delta_X[j])
        writer.writerow([
            _fmt(t),
            _fmt(u[j]) if u is not None else "",
            _fmt(adx.sum()),
            _fmt(adx @ w),
            counter.N_of_t(t),
        ])
    _write_output(buf.getvalue(), out)
    return EXIT_OK


def _cmd_derivative(doc: dict, out: Optional[str]) -> int:
    spec = resolve_model(doc.get("model", {}))
    cfg = ExperimentConfig.from_json_dict({**doc, "experiment": "derivative_validation"})
    T = cfg.t_grid[-1]
    x = cfg.start.vector if cfg.start.kind == "fixed" \
        else 1.0 / atlas_stationary_rates(spec.d)
    first = None
    divergent = 0
    for r in range(cfg.n_reps):
        fd = finite_diff_derivative(spec, x, cfg.i0, eps=cfg.eps, T=T, h=cfg.h,
                                    seed=_sub_seed(cfg.seed, r))
        if fd.divergent:
            divergent += 1
        elif first is None:
            first = fd
    if first is None:
        raise ReflectionError("all runs divergent; no derivative estimate")
    state = derivative_evolve(first.log, cfg.i0, spec.R, T)
    payload = {
        "S": state.S.tolist(),
        "w0": state.w0,
        "wdp1": state.wdp1,
        "finite_diff": first.gradient.tolist(),
        "exclusionRate": divergent / cfg.n_reps,
    }
    _write_output(json.dumps(payload, indent=2) + "\n", out)
    return EXIT_OK


def _cmd_experiment(doc: dict, out: Optional[str]) -> int:
    cfg = ExperimentConfig.from_json_dict(doc)
    csv_text, manifest = run_experiment(cfg)
    target = out or cfg.out
    _write_output(csv_text, target)
    if target:
        Path(target + ".manifest.json").write_text(
            json.dumps(manifest, indent=2, default=str) + "\n")
    return EXIT_OK


def cli_main(argv) -> int:
    parser = argparse.ArgumentParser(
        prog="orthant",
        description="Reflected-Brownian-motion simulation and coupling diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("check", "simulate", "couple", "derivative", "perturb", "experiment"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)
        if name == "derivative":
            p.add_argument("--i0", type=int, default=None)
            p.add_argument("--eps", type=float, default=None)
            p.add_argument("--n-walk", type=int, default=None)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        doc = _load_config(args.config)
        if args.seed is not None:
            doc["seed"] = args.seed
        for flag in ("i0", "eps", "n_walk"):
            if getattr(args, flag, None) is not None:
                doc[flag] = getattr(args, flag)
        if args.command == "check":
            return _cmd_check(doc, args.out)
        if args.command == "simulate":
            return _cmd_simulate(doc, args.out)
        if args.command == "couple":
            return _cmd_couple(doc, args.out)
        if args.command == "derivative":
            return _cmd_derivative(doc, args.out)
        if args.command == "perturb":
            doc.setdefault("experiment", "perturbation")
            return _cmd_experiment(doc, args.out)
        return _cmd_experiment(doc, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ReflectionError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ModelError as exc:
        # stability / transience failures discovered mid-run
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))
