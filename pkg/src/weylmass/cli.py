"""Command-line front end: verify identities, compute masses, sweep gauges.

Configuration is a single JSON file plus flag overrides; every report embeds
the resolved configuration so runs are reproducible byte for byte from the
report alone.  Reports are JSON-lines (one object per record) next to CSV
tables with a versioned schema comment.

Exit codes: 0 all checks pass, 1 an identity or audit failed, 2 invalid
configuration or a domain error (mass not defined, unknown family, ...).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .engine import DerivativeEngine
from .errors import ChartDomainError, ConfigError, MassNotDefinedError
from .families import (LEE_BUILDERS, METRIC_BUILDERS, SCALAR_BUILDERS, build_lee, build_metric,
                       build_scalar)
from .identities import run_suite
from .mass import conformal_change_prediction, invariance_audit, mass_matrix
from .model import ModelSpace
from .probes import adapted_metric_check, geometric_radii
from .quadrature import QuadratureSpec
from .weyl import WeylStructure

CSV_SCHEMA = "# schema=mass_table_v1 columns=radius,Q_flux,conf_correction,extrapolated"
OUT_ENV = "WEYLMASS_OUT"

DEFAULT_TOLERANCES = {
    "identity": 1e-6,
    "bochner": 1e-5,
    "integral": 1e-4,
    "mass": 1e-4,
    "convergence": 1e-6,
}

DEFAULT_TRIALS = {"identity": 100, "bochner": 20, "integral": 5}


@dataclass
class RunConfig:
    """Validated run configuration; invalid input raises ConfigError."""

    model: dict = dc_field(default_factory=lambda: {"m": 3, "R": 1.0, "L": 6.283185307179586,
                                                    "fibration": "trivial"})
    family: dict = dc_field(default_factory=lambda: {"name": "kaluza_perturbation",
                                                     "params": {"mu": 1.0}})
    lee: dict = dc_field(default_factory=lambda: {"name": "radial_lee",
                                                  "params": {"amplitude": 0.4}})
    sweep: dict = dc_field(default_factory=lambda: {"name": "radial_profile", "param": "beta",
                                                    "values": [0.1, 0.2, 0.3, 0.4, 0.5]})
    radii: dict = dc_field(default_factory=lambda: {"r0": 40.0, "rmax": 320.0, "count": 6})
    quadrature: dict = dc_field(default_factory=lambda: {"sphere": 26, "fiber": 16, "radial": 8})
    tolerances: dict = dc_field(default_factory=dict)
    trials: dict = dc_field(default_factory=dict)
    seed: int = 42
    mode: str = "dual"
    out: str | None = None
    corrupt_bochner_sign: bool = False  # negative-control test hook

    KNOWN_KEYS = ("model", "family", "lee", "sweep", "radii", "quadrature", "tolerances",
                  "trials", "seed", "mode", "out", "corrupt_bochner_sign")

    @classmethod
    def load(cls, path: str | None, overrides: argparse.Namespace) -> "RunConfig":
        data = {}
        if path is not None:
            try:
                with open(path) as fh:
                    data = json.load(fh)
            except FileNotFoundError as exc:
                raise ConfigError(f"config file not found: {path}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        unknown = set(data) - set(cls.KNOWN_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data)
        if overrides.seed is not None:
            cfg.seed = overrides.seed
        if overrides.out is not None:
            cfg.out = overrides.out
        if overrides.radii is not None:
            parts = overrides.radii.split(":")
            if len(parts) != 3:
                raise ConfigError("--radii expects r0:rmax:count")
            try:
                cfg.radii = {"r0": float(parts[0]), "rmax": float(parts[1]), "count": int(parts[2])}
            except ValueError as exc:
                raise ConfigError(f"bad --radii value: {overrides.radii!r}") from exc
        if overrides.tol is not None:
            cfg.tolerances = dict(cfg.tolerances)
            cfg.tolerances["identity"] = overrides.tol
            cfg.tolerances["mass"] = overrides.tol
        cfg.validate()
        return cfg

    def validate(self) -> None:
        m = self.model.get("m", 3)
        if not isinstance(m, int) or m < 3:
            raise ConfigError(f"model.m must be an integer >= 3, got {m!r}")
        fib = self.model.get("fibration", "trivial")
        if fib not in ("trivial", "hopf"):
            raise ConfigError(f"model.fibration must be 'trivial' or 'hopf', got {fib!r}")
        if fib == "hopf" and m != 3:
            raise ConfigError("hopf fibration requires m = 3")
        for key in ("R", "L"):
            v = self.model.get(key, 1.0)
            if not (isinstance(v, (int, float)) and v > 0):
                raise ConfigError(f"model.{key} must be positive, got {v!r}")
        if self.family.get("name") not in METRIC_BUILDERS:
            raise ConfigError(
                f"unknown metric family {self.family.get('name')!r}; known: {sorted(METRIC_BUILDERS)}"
            )
        if self.lee.get("name") not in LEE_BUILDERS:
            raise ConfigError(f"unknown lee form {self.lee.get('name')!r}; known: {sorted(LEE_BUILDERS)}")
        if self.sweep.get("name") not in SCALAR_BUILDERS:
            raise ConfigError(
                f"unknown scalar family {self.sweep.get('name')!r}; known: {sorted(SCALAR_BUILDERS)}"
            )
        r0, rmax, count = (self.radii.get(k) for k in ("r0", "rmax", "count"))
        if not (isinstance(count, int) and count >= 2):
            raise ConfigError(f"radii.count must be an integer >= 2, got {count!r}")
        if not (r0 and rmax and 0 < r0 < rmax):
            raise ConfigError(f"radii must satisfy 0 < r0 < rmax, got r0={r0!r} rmax={rmax!r}")
        if r0 <= self.model.get("R", 1.0):
            raise ConfigError(f"radii.r0={r0} must exceed the excised radius R={self.model.get('R')}")
        for key, v in self.quadrature.items():
            if key not in ("sphere", "fiber", "radial") or not (isinstance(v, int) and v > 0):
                raise ConfigError(f"quadrature.{key}={v!r} invalid")
        if self.mode not in ("dual", "fd"):
            raise ConfigError(f"mode must be 'dual' or 'fd', got {self.mode!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        for k in self.tolerances:
            if k not in DEFAULT_TOLERANCES:
                raise ConfigError(f"unknown tolerance key {k!r}")
        for k in self.trials:
            if k not in DEFAULT_TRIALS:
                raise ConfigError(f"unknown trials key {k!r}")

    # -- resolved pieces ----------------------------------------------------

    def model_space(self) -> ModelSpace:
        return ModelSpace(m=self.model.get("m", 3), R=self.model.get("R", 1.0),
                          L=self.model.get("L", 6.283185307179586),
                          fibration=self.model.get("fibration", "trivial"))

    def engine(self) -> DerivativeEngine:
        return DerivativeEngine(mode=self.mode)

    def radii_schedule(self) -> list:
        return [float(r) for r in geometric_radii(self.radii["r0"], self.radii["rmax"],
                                                  self.radii["count"])]

    def quad_spec(self) -> QuadratureSpec:
        return QuadratureSpec(sphere=self.quadrature.get("sphere", 26),
                              fiber=self.quadrature.get("fiber", 16),
                              radial=self.quadrature.get("radial", 8))

    def tol(self, key: str) -> float:
        return float(self.tolerances.get(key, DEFAULT_TOLERANCES[key]))

    def ntrials(self, key: str) -> int:
        return int(self.trials.get(key, DEFAULT_TRIALS[key]))

    def structure(self, model: ModelSpace) -> WeylStructure:
        fam = build_metric(self.family["name"], model, **self.family.get("params", {}))
        lee = build_lee(self.lee["name"], model, **self.lee.get("params", {}))
        return WeylStructure(model, fam, lee)

    def out_dir(self) -> Path:
        base = self.out or os.environ.get(OUT_ENV, "out")
        path = Path(base)
        path.mkdir(parents=True, exist_ok=True)
        return path

    def resolved(self) -> dict:
        data = asdict(self)
        data["tolerances"] = {**DEFAULT_TOLERANCES, **self.tolerances}
        data["trials"] = {**DEFAULT_TRIALS, **self.trials}
        # the output directory is where the report lives, not an input; keeping
        # it out of the embedded config makes reruns byte-identical
        data.pop("out", None)
        return data


def _dump(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True)


def _write_jsonl(path: Path, records: list) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(_dump(rec) + "\n")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_verify(cfg: RunConfig) -> int:
    model = cfg.model_space()
    engine = cfg.engine()
    tol = cfg.tol("identity") if cfg.mode == "dual" else max(cfg.tol("identity"), 1e-5)
    reports = run_suite(
        engine, model, seed=cfg.seed,
        trials=cfg.ntrials("identity"), bochner_trials=cfg.ntrials("bochner"),
        integral_trials=cfg.ntrials("integral"),
        tolerance=tol, bochner_tolerance=cfg.tol("bochner"),
        integral_tolerance=cfg.tol("integral"),
        corrupt_bochner_sign=cfg.corrupt_bochner_sign,
    )
    records = [{"config": cfg.resolved()}]
    ok = True
    for rep in reports:
        records.append(rep.as_dict())
        status = "PASS" if rep.passed else "FAIL"
        ok = ok and rep.passed
        print(f"[{status}] {rep.identity}: max residual {rep.max_residual:.3e} "
              f"(tol {rep.tolerance:g}, {rep.trials} trials)")
    out = cfg.out_dir() / "verify_report.jsonl"
    _write_jsonl(out, records)
    print(f"report: {out}")
    return 0 if ok else 1


def cmd_mass(cfg: RunConfig) -> int:
    model = cfg.model_space()
    engine = cfg.engine()
    ws = cfg.structure(model)
    radii = cfg.radii_schedule()
    quad = cfg.quad_spec()
    matrix, reports = mass_matrix(engine, ws, radii=radii, quad=quad, conformal=True,
                                  tol_conv=cfg.tol("convergence"))
    q_matrix, q_reports = mass_matrix(engine, ws, radii=radii, quad=quad, conformal=False,
                                      check_decay=False)
    print("polarized conformal-mass matrix over the horizontal basis:")
    for row in matrix:
        print("  [" + "  ".join(f"{v: .8e}" for v in row) + "]")
    eigs = np.linalg.eigvalsh(matrix)
    print("eigenvalues:", " ".join(f"{v:.8e}" for v in eigs))
    non_conv = [key for key, rep in reports.items() if not rep.converged]
    if non_conv:
        print(f"warning: flux sequence not converged for {non_conv}")

    out = cfg.out_dir()
    records = [{"config": cfg.resolved()},
               {"mass_matrix": matrix.tolist(), "eigenvalues": eigs.tolist(),
                "q_matrix": q_matrix.tolist()}]
    records += [rep.as_dict() for rep in reports.values()]
    _write_jsonl(out / "mass_report.jsonl", records)
    for b in range(model.m):
        key = f"1*X{b + 1}"
        rep = reports[key]
        csv_path = out / f"mass_table_X{b + 1}.csv"
        with open(csv_path, "w") as fh:
            fh.write(CSV_SCHEMA + "\n")
            fh.write("radius,Q_flux,conf_correction,extrapolated\n")
            for r, q, c, e in rep.csv_rows():
                fh.write(f"{r!r},{q!r},{c!r},{e!r}\n")
    print(f"report: {out / 'mass_report.jsonl'}")
    return 0


def cmd_sweep(cfg: RunConfig) -> int:
    model = cfg.model_space()
    engine = cfg.engine()
    ws = cfg.structure(model)
    radii = cfg.radii_schedule()
    quad = cfg.quad_spec()
    name = cfg.sweep["name"]
    param = cfg.sweep.get("param", "beta")
    values = cfg.sweep.get("values", [])
    if not values:
        raise ConfigError("sweep.values is empty")
    tol = cfg.tol("mass")
    records = [{"config": cfg.resolved()}]
    ok = True
    for value in values:
        f = build_scalar(name, model, **{param: value})
        probes = adapted_metric_check(engine, model, f)
        failed = [p for p in probes if not p.passed]
        if failed:
            for p in failed:
                print(f"error: factor {f.name}({param}={value}) rejected by probe {p.name}: "
                      f"slope {p.slope:.3f} > {p.declared:.3f}+0.2", file=sys.stderr)
            raise MassNotDefinedError(f"sweep value {value} is not an adapted factor")
        row = {"factor": f.name, param: value, "audits": [], "prediction": None}
        for b in range(model.m):
            audit = invariance_audit(engine, ws, f, b, radii=radii, quad=quad, tolerance=tol,
                                     check_decay=(b == 0 and value == values[0]))
            row["audits"].append(audit.as_dict())
            ok = ok and audit.passed
            status = "PASS" if audit.passed else "FAIL"
            print(f"[{status}] invariance {f.name}({param}={value}) Z=X{b + 1}: "
                  f"rel diff {audit.rel_difference:.3e} (tol {tol:g})")
        pred = conformal_change_prediction(engine, ws, f, 0, radii=radii, quad=quad)
        row["prediction"] = pred.as_dict()
        pred_ok = pred.rel_error < tol
        ok = ok and pred_ok
        print(f"[{'PASS' if pred_ok else 'FAIL'}] mass-shift prediction {f.name}({param}={value}): "
              f"rel error {pred.rel_error:.3e} (tol {tol:g})")
        records.append(row)
    out = cfg.out_dir() / "sweep_report.jsonl"
    _write_jsonl(out, records)
    print(f"report: {out}")
    return 0 if ok else 1


def cmd_report(cfg: RunConfig, paths: list[str]) -> int:
    """Summarize previously written JSONL reports; exit 1 if any record failed."""
    ok = True
    for path in paths:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"report file not found: {path}")
        print(f"== {path}")
        with open(p) as fh:
            for line in fh:
                rec = json.loads(line)
                if "config" in rec:
                    continue
                if "identity" in rec:
                    status = "PASS" if rec.get("passed") else "FAIL"
                    ok = ok and rec.get("passed", False)
                    print(f"  [{status}] {rec['identity']}: {rec['max_residual']:.3e}")
                elif "audits" in rec:
                    for audit in rec["audits"]:
                        status = "PASS" if audit.get("passed") else "FAIL"
                        ok = ok and audit.get("passed", False)
                        print(f"  [{status}] invariance {rec['factor']} Z={audit['Z']}: "
                              f"{audit['rel_difference']:.3e}")
                elif "mass_matrix" in rec:
                    print(f"  mass eigenvalues: {rec['eigenvalues']}")
                elif "Z" in rec:
                    conv = "converged" if rec.get("converged") else "NOT CONVERGED"
                    ok = ok and rec.get("converged", False)
                    print(f"  mass[{rec['Z']}] = {rec['mass']:.8e} ({conv})")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weylmass",
        description="Verify conformal-connection identities and compute fibered mass integrals.",
    )
    parser.add_argument("--config", help="path to a JSON run configuration")
    parser.add_argument("--seed", type=int, default=None, help="override the RNG seed")
    parser.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or ./out)")
    parser.add_argument("--radii", default=None, help="geometric radius schedule r0:rmax:count")
    parser.add_argument("--tol", type=float, default=None, help="override identity/mass tolerance")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", help="run the operator-identity suite")
    sub.add_parser("mass", help="compute the mass quadratic form of the configured family")
    sub.add_parser("sweep", help="audit gauge invariance over a conformal-factor sweep")
    rep = sub.add_parser("report", help="summarize existing JSONL reports")
    rep.add_argument("paths", nargs="+", help="report files to summarize")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args.config, args)
        if args.command == "verify":
            return cmd_verify(cfg)
        if args.command == "mass":
            return cmd_mass(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg)
        if args.command == "report":
            return cmd_report(cfg, args.paths)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, ChartDomainError, MassNotDefinedError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
