"""Batch experiment runner.

Four subcommands drive the library from JSON configs and write CSV
tables, per-eps field dumps, and a PNG figure per run into --out:

  minimize-sweep   penalized-well minimizers down an eps schedule
  recovery         recovery construction against its limit energy
  kwc              alternating KWC minimization with fidelity
  unfold           arc-length unfolding of one field

Exit codes: 0 success, 2 config error, 3 numerical failure.  The config
is validated in full before anything is written, and runs are
deterministic: identical config and inputs give byte-identical CSVs.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, ConvergenceError, ResolutionError, VerificationError
from .fields import Domain1D, Field, Mesh, PointPenalty, energy_smm_b
from .limits import limit_pointwise_minimizer
from .minimize import SolveOptions, minimize_kwc_alternating, minimize_smm_b_quadratic
from .potential import Potential
from .recovery import plan_recovery, verify_limsup, write_limsup_csv
from .setvalued import ExceptionalPoint, SetValuedLimit, graph_distance
from .unfold import unfold
from . import plotting


def _fmt(x) -> str:
    return repr(float(x))


def _load_config(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc


def _domain_from(cfg) -> Domain1D:
    try:
        return Domain1D.from_json_dict(cfg)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad domain spec: {exc}") from exc


def _potential_from(cfg) -> Potential:
    if cfg is None:
        return Potential.quadratic()
    kind = cfg.get("kind", "quadratic")
    if kind == "quadratic":
        return Potential.quadratic()
    if kind == "tabulated":
        step = float(cfg.get("step", 1e-3))
        c0 = float(cfg.get("c0", 0.5))
        c1 = float(cfg.get("c1", 1.0))
        if "csv" in cfg:
            try:
                return Potential.from_csv(cfg["csv"], step=step, c0=c0, c1=c1)
            except (OSError, ValueError) as exc:
                raise ConfigError(f"bad potential table: {exc}") from exc
        try:
            return Potential.tabulated(cfg["v"], cfg["F"], step=step, c0=c0, c1=c1)
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad potential spec: {exc}") from exc
    raise ConfigError(f"unknown potential kind {kind!r}")


def _eps_schedule(cfg):
    eps = cfg.get("eps")
    if not isinstance(eps, list) or not eps:
        raise ConfigError("config needs a nonempty 'eps' list")
    eps = [float(e) for e in eps]
    if any(e <= 0 for e in eps):
        raise ConfigError("eps values must be positive")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ConfigError("eps schedule must be strictly decreasing")
    return eps


def _resolution(args, cfg, default=1e-3):
    if args.resolution is not None:
        r = args.resolution
    else:
        r = float(cfg.get("resolution", default))
    if r <= 0:
        raise ConfigError("resolution must be positive")
    return r


def _mesh_for(domain, eps, cells_per_eps):
    h = eps / cells_per_eps
    if domain.kind == "torus":
        n = max(2, int(math.ceil(1.0 / h)))
    else:
        n = max(2, int(math.ceil(domain.length / h)) + 1)
    return Mesh(domain, n)


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


# -- minimize-sweep ----------------------------------------------------------

def run_minimize_sweep(args) -> int:
    cfg = _load_config(args.config)
    domain = _domain_from(cfg.get("domain", {"kind": "interval", "a": -1.0, "b": 1.0}))
    eps_schedule = _eps_schedule(cfg)
    pot = _potential_from(cfg.get("potential"))
    if pot.kind != "quadratic":
        raise ConfigError("minimize-sweep drives the quadratic-well solver")
    pens_cfg = cfg.get("penalties", [])
    penalties = []
    for pc in pens_cfg:
        try:
            penalties.append(PointPenalty(float(pc["a"]), float(pc["b"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad penalty spec {pc!r}: {exc}") from exc
        if not domain.is_interior(penalties[-1].location):
            raise ConfigError(f"penalty location {penalties[-1].location} not interior")
    cells = int(cfg.get("cells_per_eps", 16))
    if cells < 1:
        raise ConfigError("cells_per_eps must be >= 1")
    resolution = _resolution(args, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    # predicted limit: a dip to the scalar minimizer at every penalty
    entries = []
    for pen in penalties:
        p0, _ = limit_pointwise_minimizer(pen.weight, pot)
        if p0 < 1.0:
            entries.append(ExceptionalPoint(pen.location, p0, 1.0))
    xi0 = SetValuedLimit(domain=domain, exceptional=tuple(entries))

    rows = []
    fields = []
    for eps in sorted(eps_schedule, reverse=True):
        mesh = _mesh_for(domain, eps, cells)
        fld = minimize_smm_b_quadratic(mesh, eps, penalties)
        rep = energy_smm_b(fld, eps, pot, penalties)
        dist = graph_distance(fld, xi0, resolution)
        row = [_fmt(eps)]
        row += [_fmt(fld.at(pen.location)) for pen in penalties]
        row += [_fmt(rep.gradient + rep.potential), _fmt(rep.penalty),
                _fmt(rep.total), _fmt(dist)]
        rows.append(row)
        fields.append((eps, fld))
        fld.to_csv(out / f"field_eps{eps:g}.csv")

    header = ["eps"] + [f"v_at_{pen.location:g}" for pen in penalties]
    header += ["energy_smm", "energy_penalty", "energy_total", "graph_distance"]
    _write_rows(out / "sweep.csv", header, rows)
    plotting.save_sweep_figure(fields, out / "minimize_sweep.png")
    return 0


# -- recovery ---------------------------------------------------------------

def run_recovery(args) -> int:
    cfg = _load_config(args.config)
    if "limit" not in cfg:
        raise ConfigError("config needs a 'limit' object")
    try:
        xi = SetValuedLimit.from_json(json.dumps(cfg["limit"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad limit spec: {exc}") from exc
    eps_schedule = _eps_schedule(cfg)
    pot = _potential_from(cfg.get("potential"))
    mu = float(cfg.get("mu", 0.05))
    if mu <= 0:
        raise ConfigError("mu must be positive")
    cells = int(cfg.get("cells_per_eps", 16))
    slack = float(cfg.get("slack", 0.02))
    resolution = _resolution(args, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    rows = verify_limsup(xi, pot, eps_schedule, mu, cells_per_eps=cells,
                         resolution=resolution, check=False)
    write_limsup_csv(rows, out / "limsup.csv")

    fields = []
    summary = []
    from .recovery import build_recovery
    last_dist = None
    for r in rows:
        mesh = _mesh_for(xi.domain, r.eps, cells)
        fld, _ = build_recovery(xi, r.eps, mu, pot, mesh)
        fields.append((r.eps, fld))
        fld.to_csv(out / f"recovery_eps{r.eps:g}.csv")
        ok = r.discrete_energy <= r.limit_energy + mu + slack
        if last_dist is not None:
            ok = ok and r.graph_distance <= last_dist + resolution
        last_dist = r.graph_distance
        summary.append([_fmt(r.eps), _fmt(r.discrete_energy), _fmt(r.limit_energy),
                        _fmt(r.mu), _fmt(r.graph_distance),
                        "pass" if ok else "fail"])
    _write_rows(out / "summary.csv",
                ["eps", "discrete_energy", "limit_energy", "mu",
                 "graph_distance", "pass"], summary)
    plotting.save_recovery_figure(rows, fields, out / "recovery.png")
    if any(row[-1] == "fail" for row in summary):
        raise VerificationError("recovery sweep failed its energy or distance check")
    return 0


# -- kwc ----------------------------------------------------------------------

def _data_field(cfg, mesh) -> Field:
    kind = cfg.get("kind")
    if kind == "step":
        loc = float(cfg.get("location", 0.0))
        left = float(cfg.get("left", 0.0))
        right = float(cfg.get("right", 1.0))
        vals = np.where(mesh.nodes >= loc, right, left)
        return Field(mesh, vals)
    if kind == "csv":
        try:
            return Field.from_csv(cfg["path"], mesh)
        except (KeyError, OSError, ValueError) as exc:
            raise ConfigError(f"bad field csv: {exc}") from exc
    if kind == "values":
        try:
            return Field(mesh, np.asarray(cfg["values"], dtype=float))
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad field values: {exc}") from exc
    raise ConfigError(f"unknown data kind {kind!r}")


def run_kwc(args) -> int:
    cfg = _load_config(args.config)
    domain = _domain_from(cfg.get("domain", {"kind": "interval", "a": -1.0, "b": 1.0}))
    try:
        n = int(cfg["n"])
        eps = float(cfg["eps"])
        sigma = float(cfg["sigma"])
        lam = float(cfg["lambda"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"kwc config needs n, eps, sigma, lambda: {exc}") from exc
    if eps <= 0 or sigma < 0 or lam <= 0:
        raise ConfigError("need eps > 0, sigma >= 0, lambda > 0")
    mesh = Mesh(domain, n)
    if "data" not in cfg:
        raise ConfigError("kwc config needs a 'data' object")
    g = _data_field(cfg["data"], mesh)
    pot = _potential_from(cfg.get("potential"))
    opts = SolveOptions(rounds=int(cfg.get("rounds", 30)),
                        tol=float(cfg.get("tol", 1e-10)))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    trace = []
    u, v, report = minimize_kwc_alternating(g, eps, sigma, pot, lam, opts, trace=trace)
    u.to_csv(out / "kwc_u.csv")
    v.to_csv(out / "kwc_v.csv")
    _write_rows(out / "kwc_energy.csv", ["half_step", "which", "energy"],
                [[str(i), which, _fmt(e)] for i, (which, e) in enumerate(trace)])
    _write_rows(out / "kwc_report.csv",
                ["tv", "gradient", "potential", "fidelity", "total"],
                [[_fmt(report.tv), _fmt(report.gradient), _fmt(report.potential),
                  _fmt(report.fidelity), _fmt(report.total)]])
    plotting.save_kwc_figure(g, u, v, out / "kwc.png")
    return 0


# -- unfold --------------------------------------------------------------------

def run_unfold(args) -> int:
    cfg = _load_config(args.config)
    domain = _domain_from(cfg.get("domain", {"kind": "interval", "a": 0.0, "b": 1.0}))
    try:
        n = int(cfg["n"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"unfold config needs n: {exc}") from exc
    mesh = Mesh(domain, n)
    if "field" not in cfg:
        raise ConfigError("unfold config needs a 'field' object")
    fcfg = cfg["field"]
    if fcfg.get("kind") == "linear":
        slope = float(fcfg.get("slope", 1.0))
        offset = float(fcfg.get("offset", 0.0))
        fld = Field(mesh, offset + slope * mesh.nodes)
    else:
        fld = _data_field(fcfg, mesh)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    curve = unfold(fld)
    curve.to_csv(out / "unfold.csv")
    _write_rows(out / "unfold_summary.csv",
                ["L", "tv_u", "tv_U", "max_dU_over_ds", "max_dx_over_ds"],
                [[_fmt(curve.L), _fmt(fld.tv()), _fmt(curve.tv()),
                  _fmt(float(np.max(np.abs(np.diff(curve.U)) / np.diff(curve.s)))),
                  _fmt(float(np.max(np.abs(np.diff(curve.xs)) / np.diff(curve.s))))]])
    plotting.save_unfold_figure(fld, curve, out / "unfold.png")
    return 0


# -- entry point -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="singlewell",
        description="single-well phase-field experiments: sweeps, recovery, KWC, unfolding")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("minimize-sweep", run_minimize_sweep),
                     ("recovery", run_recovery),
                     ("kwc", run_kwc),
                     ("unfold", run_unfold)):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON experiment config")
        sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument("--resolution", type=float, default=None,
                        help="graph sampling resolution")
        sp.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, ResolutionError, VerificationError,
            np.linalg.LinAlgError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
