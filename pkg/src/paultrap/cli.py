"""Batch command line: ``paultrap {simulate,stability,measure,qnd,env-report}``.

Every run reads one JSON config, writes plot-ready CSV/JSON into ``--out``
and embeds the config hash and tolerance in each artifact.

Exit codes: 0 success, 2 validation error, 3 numerical failure. Failures
also write ``error.json`` (and print it to stderr).
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .errors import NumericalError, ParameterError
from .mathieu import DEFAULT_TOL, as_coefficient_function, fundamental_basis, stability_scan
from .model import SCALED, SI, EffectiveCoefficients, TrapInput, derive_coefficients, environment_report
from .output import config_hash, write_csv, write_json
from .qnd import canonical_ratio, qnd_residual
from .rpif import MeasurementRecord, record_sweep
from .trajectory import forced_solution_green, trajectory_table

log = logging.getLogger("paultrap")

MODES = ("simulate", "stability", "measure", "qnd", "env-report")
EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3

_COMMON_KEYS = {"tolerance", "units"}
_MODE_KEYS = {
    "simulate": {"trap", "coefficients", "initial", "t_start", "t_end", "samples"},
    "stability": {"a", "q", "omega"},
    "measure": {"trap", "coefficients", "record", "records", "endpoints"},
    "qnd": {"trap", "coefficients", "initial", "t_start", "t_end", "exclusion_radius"},
    "env-report": {"trap", "excursion", "neighbor_mass", "neighbor_distance"},
}


@dataclass(frozen=True)
class RunConfig:
    mode: str
    config_path: Path
    out_dir: Path
    doc: dict
    tolerance: float = DEFAULT_TOL
    units: str = "si"
    jobs: int = 1
    diagnostics: bool = False

    @property
    def consts(self):
        return SCALED if self.units == "scaled" else SI

    @property
    def hash(self):
        return config_hash({"mode": self.mode, "config": self.doc, "tolerance": self.tolerance, "units": self.units})

    @property
    def meta(self):
        return {
            "paultrap_version": __version__,
            "mode": self.mode,
            "config_sha256": self.hash,
            "tolerance": self.tolerance,
            "units": self.units,
        }


def _number(doc, key, positive=False, default=None):
    if key not in doc:
        if default is not None:
            return default
        raise ParameterError(key, "missing")
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ParameterError(key, f"must be a finite number, got {value!r}")
    if positive and value <= 0:
        raise ParameterError(key, f"must be > 0, got {value!r}")
    return float(value)


def _integer(doc, key, minimum, default):
    value = doc.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ParameterError(key, f"must be an integer >= {minimum}, got {value!r}")
    return value


def _object(doc, key):
    if key not in doc:
        raise ParameterError(key, "missing")
    if not isinstance(doc[key], dict):
        raise ParameterError(key, "must be a JSON object")
    return doc[key]


def _coefficients(doc, consts):
    if "trap" in doc and "coefficients" in doc:
        raise ParameterError("coefficients", "give either 'trap' or 'coefficients', not both")
    if "trap" in doc:
        return derive_coefficients(TrapInput.from_dict(doc["trap"]), consts)
    if "coefficients" in doc:
        return EffectiveCoefficients.from_dict(doc["coefficients"])
    raise ParameterError("coefficients", "missing ('trap' or 'coefficients' required)")


def _axis(doc, key):
    grid_doc = doc.get(key)
    if grid_doc is None:
        raise ParameterError(key, "missing")
    if isinstance(grid_doc, list):
        if not grid_doc:
            raise ParameterError(key, "must not be empty")
        return [_number({key: v}, key) for v in grid_doc]
    if isinstance(grid_doc, dict):
        for k in grid_doc:
            if k not in ("start", "stop", "num"):
                raise ParameterError(f"{key}.{k}", "unknown grid field")
        start = _number(grid_doc, "start") if "start" in grid_doc else None
        stop = _number(grid_doc, "stop") if "stop" in grid_doc else None
        if start is None:
            raise ParameterError(f"{key}.start", "missing")
        if stop is None:
            raise ParameterError(f"{key}.stop", "missing")
        num = _integer(grid_doc, "num", 1, None) if "num" in grid_doc else None
        if num is None:
            raise ParameterError(f"{key}.num", "missing")
        return [float(v) for v in np.linspace(start, stop, num)]
    raise ParameterError(key, "must be a list or {start, stop, num}")


def _initial(doc):
    init = _object(doc, "initial")
    for k in init:
        if k not in ("x0", "v0"):
            raise ParameterError(f"initial.{k}", "unknown field")
    try:
        return _number(init, "x0"), _number(init, "v0")
    except ParameterError as exc:
        raise ParameterError(f"initial.{exc.key}", str(exc).split(": ", 1)[1]) from None


def _window(doc):
    t0 = _number(doc, "t_start", default=0.0) if "t_start" in doc else 0.0
    t1 = _number(doc, "t_end")
    if not t1 > t0:
        raise ParameterError("t_end", f"must exceed t_start ({t0!r}), got {t1!r}")
    return t0, t1


def validate(cfg: RunConfig):
    """Check the config document before any computation."""
    doc = cfg.doc
    allowed = _MODE_KEYS[cfg.mode] | _COMMON_KEYS
    for key in doc:
        if key not in allowed:
            raise ParameterError(key, f"unknown key for mode '{cfg.mode}'")
    if cfg.mode == "simulate":
        _coefficients(doc, cfg.consts)
        _initial(doc)
        _window(doc)
        _integer(doc, "samples", 2, 1001)
    elif cfg.mode == "stability":
        _axis(doc, "a")
        _axis(doc, "q")
        if "omega" in doc:
            _number(doc, "omega", positive=True)
    elif cfg.mode == "measure":
        _coefficients(doc, cfg.consts)
        _records(doc)
        _endpoints(doc)
    elif cfg.mode == "qnd":
        _coefficients(doc, cfg.consts)
        _initial(doc)
        _window(doc)
        if "exclusion_radius" in doc:
            _number(doc, "exclusion_radius", positive=True)
    elif cfg.mode == "env-report":
        TrapInput.from_dict(_object(doc, "trap"))
        _number(doc, "excursion")
        _number(doc, "neighbor_mass")
        _number(doc, "neighbor_distance", positive=True)


def _records(doc):
    if "record" in doc and "records" in doc:
        raise ParameterError("records", "give either 'record' or 'records', not both")
    if "record" in doc:
        return [MeasurementRecord.from_dict(doc["record"])]
    if "records" in doc:
        if not isinstance(doc["records"], list) or not doc["records"]:
            raise ParameterError("records", "must be a non-empty list")
        return [MeasurementRecord.from_dict(r) for r in doc["records"]]
    raise ParameterError("record", "missing ('record' or 'records' required)")


def _endpoints(doc):
    ends = _object(doc, "endpoints")
    for k in ends:
        if k not in ("x_start", "x_end"):
            raise ParameterError(f"endpoints.{k}", "unknown field")
    try:
        return _number(ends, "x_start"), _number(ends, "x_end")
    except ParameterError as exc:
        raise ParameterError(f"endpoints.{exc.key}", str(exc).split(": ", 1)[1]) from None


def _gnuplot(path, meta, datafile, using, title, xlabel, ylabel):
    header = "".join(f"# {k}: {v}\n" for k, v in meta.items())
    path.write_text(
        header + "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        f"set title '{title}'\nset xlabel '{xlabel}'\nset ylabel '{ylabel}'\n"
        f"plot '{datafile}' using {using} with lines\n"
    )


def _run_simulate(cfg):
    doc = cfg.doc
    coeffs = _coefficients(doc, cfg.consts)
    x0, v0 = _initial(doc)
    t0, t1 = _window(doc)
    n = _integer(doc, "samples", 2, 1001)
    basis = fundamental_basis(as_coefficient_function(coeffs), t0, t1, cfg.tolerance)
    traj = forced_solution_green(basis, x0, v0, coeffs.g)
    times = np.linspace(t0, t1, n)
    table = trajectory_table(traj, times, coeffs if cfg.diagnostics else None)
    header = ["t", "x", "xdot"] + (["residual"] if cfg.diagnostics else [])
    write_csv(cfg.out_dir / "trajectory.csv", header, table, cfg.meta)
    _gnuplot(cfg.out_dir / "plot.gp", cfg.meta, "trajectory.csv", "1:2", "trajectory", "t", "x")
    summary = dict(cfg.meta, coefficients=coeffs.to_dict(), samples=n, outputs=["trajectory.csv", "plot.gp"])
    if cfg.diagnostics:
        summary["residual_max"] = float(np.max(table[:, 3]))
    write_json(cfg.out_dir / "run.json", summary)


def _run_stability(cfg):
    doc = cfg.doc
    a_values, q_values = _axis(doc, "a"), _axis(doc, "q")
    omega = _number(doc, "omega", positive=True) if "omega" in doc else 2.0
    rows = stability_scan(a_values, q_values, omega=omega, tol=cfg.tolerance, jobs=cfg.jobs)
    write_csv(cfg.out_dir / "stability.csv", ["a", "q", "|mu1|", "|mu2|", "classification"], rows, cfg.meta)
    _gnuplot(
        cfg.out_dir / "plot.gp", cfg.meta, "stability.csv", "1:2:(log($3))", "log max |multiplier|", "a", "q"
    )
    counts = {}
    for row in rows:
        counts[row[4]] = counts.get(row[4], 0) + 1
    write_json(
        cfg.out_dir / "run.json", dict(cfg.meta, rows=len(rows), counts=counts, outputs=["stability.csv", "plot.gp"])
    )


def _run_measure(cfg):
    doc = cfg.doc
    coeffs = _coefficients(doc, cfg.consts)
    records = _records(doc)
    xs, xe = _endpoints(doc)
    values = record_sweep(coeffs, records, xs, xe, cfg.consts, cfg.tolerance, jobs=cfg.jobs)
    results = []
    for i, (rec, val) in enumerate(zip(records, values)):
        entry = val.to_dict()
        entry["index"] = i
        entry["delta_a"] = "unmonitored" if not rec.monitored else rec.delta_a
        results.append(entry)
    outputs = ["measure.json"]
    if len(records) > 1:
        factor_names = list(values[0].factors)
        rows = [
            [i, v.mean_record, v.log_density, v.density] + [v.factors[k] for k in factor_names]
            for i, v in enumerate(values)
        ]
        header = ["index", "mean_record", "log_density", "density"] + [f"log_{k}" for k in factor_names]
        write_csv(cfg.out_dir / "sweep.csv", header, rows, cfg.meta)
        outputs.append("sweep.csv")
    write_json(
        cfg.out_dir / "measure.json",
        dict(cfg.meta, coefficients=coeffs.to_dict(), endpoints={"x_start": xs, "x_end": xe}, results=results,
             outputs=outputs),
    )


def _run_qnd(cfg):
    doc = cfg.doc
    coeffs = _coefficients(doc, cfg.consts)
    x0, v0 = _initial(doc)
    t0, t1 = _window(doc)
    coeff = as_coefficient_function(coeffs)
    radius = _number(doc, "exclusion_radius", positive=True) if "exclusion_radius" in doc else None
    X = fundamental_basis(coeff, t0, t1, cfg.tolerance).solution(x0, v0)
    ratio = canonical_ratio(X, coeffs.mass)
    rep = qnd_residual(ratio, coeffs, exclusion_radius=radius, report=True)
    radius = radius if radius is not None else 0.01 * coeff.period
    excluded = np.zeros(len(ratio.times), dtype=bool)
    for p in ratio.poles:
        excluded |= np.abs(ratio.times - p) <= radius
    rows = [
        [t, r if math.isfinite(r) else "nan", d if math.isfinite(d) else "nan", bool(e)]
        for t, r, d, e in zip(ratio.times, ratio.ratio, ratio.ratio_dot, excluded)
    ]
    write_csv(cfg.out_dir / "ratio.csv", ["t", "ratio", "ratio_dot", "excluded"], rows, cfg.meta)
    _gnuplot(cfg.out_dir / "plot.gp", cfg.meta, "ratio.csv", "1:2", "-m X'/X", "t", "ratio")
    write_json(
        cfg.out_dir / "qnd.json",
        dict(
            cfg.meta,
            residual_max=rep.residual_max,
            pole_times=rep.pole_times,
            ratio_csv_path="ratio.csv",
            exclusion_radius=radius,
            coefficients=coeffs.to_dict(),
        ),
    )


def _run_env_report(cfg):
    doc = cfg.doc
    inp = TrapInput.from_dict(_object(doc, "trap"))
    rep = environment_report(
        inp,
        _number(doc, "excursion"),
        _number(doc, "neighbor_mass"),
        _number(doc, "neighbor_distance", positive=True),
        cfg.consts,
    )
    write_json(cfg.out_dir / "env_report.json", dict(cfg.meta, report=rep.to_dict()))


_RUNNERS = {
    "simulate": _run_simulate,
    "stability": _run_stability,
    "measure": _run_measure,
    "qnd": _run_qnd,
    "env-report": _run_env_report,
}


def run(cfg: RunConfig) -> int:
    validate(cfg)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    _RUNNERS[cfg.mode](cfg)
    return EXIT_OK


def _load(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParameterError("config", f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParameterError("config", f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ParameterError("config", "top level must be a JSON object")
    return doc


def build_parser():
    parser = argparse.ArgumentParser(prog="paultrap", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        p = sub.add_parser(mode, aliases=["qnd-check"] if mode == "qnd" else [])
        p.add_argument("--config", required=True, type=Path, help="JSON parameter document")
        p.add_argument("--out", required=True, type=Path, help="output directory")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
        p.add_argument("--tol", type=float, default=None, help="integration tolerance")
        p.add_argument("--units", choices=("si", "scaled"), default=None)
        if mode == "simulate":
            p.add_argument("--diagnostics", action="store_true", help="add an equation residual column")
    return parser


def _fail(out_dir, code, payload):
    text = json.dumps(payload, sort_keys=True)
    print(text, file=sys.stderr)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "error.json").write_text(text + "\n")
    except OSError:
        pass
    return code


def main(argv=None) -> int:
    level = os.environ.get("PAULTRAP_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.mode == "qnd-check":
        args.mode = "qnd"
    try:
        doc = _load(args.config)
        units = args.units or doc.get("units", "si")
        if units not in ("si", "scaled"):
            raise ParameterError("units", f"must be 'si' or 'scaled', got {units!r}")
        tol = args.tol if args.tol is not None else doc.get("tolerance", DEFAULT_TOL)
        if isinstance(tol, bool) or not isinstance(tol, (int, float)) or not (0 < tol <= 1e-3):
            raise ParameterError("tolerance", f"must lie in (0, 1e-3], got {tol!r}")
        if args.jobs < 1:
            raise ParameterError("jobs", f"must be >= 1, got {args.jobs!r}")
        cfg = RunConfig(
            mode=args.mode,
            config_path=args.config,
            out_dir=args.out,
            doc=doc,
            tolerance=float(tol),
            units=units,
            jobs=args.jobs,
            diagnostics=getattr(args, "diagnostics", False),
        )
        return run(cfg)
    except ParameterError as exc:
        return _fail(args.out, EXIT_VALIDATION, {"error": "validation", "key": exc.key, "message": str(exc)})
    except NumericalError as exc:
        return _fail(
            args.out,
            EXIT_NUMERICAL,
            {"error": "numerical", "type": type(exc).__name__, "message": str(exc)},
        )


if __name__ == "__main__":
    sys.exit(main())
