"""Command-line campaigns with JSON/CSV report serialization.

Reports are byte-identical across runs for the same (config, seed): the
scientific fields are pure functions of the configuration, and the measured
wall time is emitted on stderr rather than into the file (the file keeps a
``wall_seconds`` key, serialized as null, so downstream parsers see a stable
schema).

Exit status: 0 when the campaign completes and passes its criterion, 1 when
a criterion fails or too many samples were excluded, 2 for usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

from . import estimators as est

__all__ = ["RunConfig", "parse_config", "run", "main"]

SCHEMA = "lemniscate-lab/1"

_COMMANDS = (
    "estimate-cns-plane",
    "estimate-sphere-global",
    "estimate-local",
    "estimate-length",
    "estimate-zeros",
    "check-sandwich",
    "small-components",
    "dist-checks",
    "dump-curves",
)

# flags each command accepts (beyond the universal seed/threads/out/format/config)
_ALLOWED = {
    "estimate-cns-plane": {"radius", "spacing", "samples"},
    "estimate-sphere-global": {"n", "spacing", "samples"},
    "estimate-local": {"n", "radius", "spacing", "samples"},
    "estimate-length": {"n", "radius", "spacing", "samples"},
    "estimate-zeros": {"n", "radius", "spacing", "samples"},
    "check-sandwich": {"n", "radius", "spacing", "samples", "centers"},
    "small-components": {"n", "radius", "spacing", "samples", "delta"},
    "dist-checks": {"samples"},
    "dump-curves": {"n", "radius", "spacing", "index"},
}


class UsageError(Exception):
    pass


@dataclass(eq=False)
class RunConfig:
    command: str
    params: dict
    seed: int = 0
    threads: int = 1
    out: str | None = None
    format: str = "json"
    overrides: list = field(default_factory=list)  # flag-over-file keys, for the echo


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lemniscate-lab",
        description="Monte Carlo campaigns for random lemniscate statistics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--samples", type=int, default=None)
        p.add_argument("--n", type=int, default=None)
        p.add_argument("--radius", type=float, default=None)
        p.add_argument("--spacing", type=float, default=None)
        p.add_argument("--delta", type=float, action="append", default=None)
        p.add_argument("--centers", type=int, default=None)
        p.add_argument("--index", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--format", type=str, choices=("json", "csv"), default=None)
        p.add_argument("--config", type=str, default=None)
    return parser


def parse_config(argv) -> RunConfig:
    """Parse flags plus an optional JSON config file; flags override the file."""
    ns = _build_parser().parse_args(argv)
    file_values: dict = {}
    if ns.config:
        try:
            with open(ns.config, "r", encoding="utf-8") as fh:
                file_values = json.load(fh)
        except OSError as exc:
            raise UsageError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(file_values, dict):
            raise UsageError("config file must hold a JSON object")

    allowed = _ALLOWED[ns.command] | {"seed", "threads", "out", "format"}
    unknown = set(file_values) - allowed
    if unknown:
        raise UsageError(f"unknown config key(s) for {ns.command}: {sorted(unknown)}")

    merged: dict = dict(file_values)
    overrides = []
    for key in ("seed", "samples", "n", "radius", "spacing", "delta", "centers",
                "index", "threads", "out", "format"):
        flag_value = getattr(ns, key)
        if flag_value is not None:
            if key in merged and merged[key] != flag_value:
                overrides.append(key)
            merged[key] = flag_value
        if key not in _ALLOWED[ns.command] and key not in ("seed", "threads", "out", "format"):
            if flag_value is not None:
                raise UsageError(f"--{key} is not accepted by {ns.command}")

    seed = int(merged.pop("seed", 0))
    threads = int(merged.pop("threads", 1))
    out = merged.pop("out", None)
    fmt = merged.pop("format", "json")
    if fmt not in ("json", "csv"):
        raise UsageError(f"format must be json or csv, got {fmt!r}")
    if seed < 0 or seed > 2**64 - 1:
        raise UsageError("seed must fit in an unsigned 64-bit integer")
    if threads < 1:
        raise UsageError("threads must be at least 1")
    if "spacing" in merged and merged["spacing"] is not None and merged["spacing"] <= 0:
        raise UsageError("spacing must be positive")
    if "samples" in merged and merged["samples"] is not None and merged["samples"] < 1:
        raise UsageError("samples must be at least 1")
    return RunConfig(
        command=ns.command, params=merged, seed=seed, threads=threads,
        out=out, format=fmt, overrides=overrides,
    )


def _report_dict(report) -> dict:
    if isinstance(report, est.EstimateReport):
        return {
            "schema": SCHEMA,
            "estimator": report.estimator,
            "estimate": report.estimate,
            "stderr": report.stderr,
            "ci95": list(report.ci95),
            "samples": report.samples,
            "excluded": report.excluded,
            "excluded_reasons": report.excluded_reasons,
            "config": report.config,
            "seed": report.seed,
            "wall_seconds": None,
            "pass": report.passed,
            "target": report.target,
            "extra": report.extra,
        }
    if isinstance(report, est.LocalCountPair):
        return {
            "schema": SCHEMA,
            "estimator": "estimate-local",
            "sphere": _report_dict(report.sphere),
            "plane": _report_dict(report.plane),
            "agree": report.agree,
            "pass": report.passed,
        }
    if isinstance(report, est.SandwichReport):
        return {
            "schema": SCHEMA,
            "estimator": report.estimator,
            "violation_fraction": report.violation_fraction,
            "samples": report.samples,
            "excluded": report.excluded,
            "excluded_reasons": report.excluded_reasons,
            "per_sample": report.per_sample,
            "config": report.config,
            "seed": report.seed,
            "wall_seconds": None,
            "pass": report.passed,
        }
    if isinstance(report, est.SmallComponentReport):
        return {
            "schema": SCHEMA,
            "estimator": report.estimator,
            "deltas": report.deltas,
            "means": report.means,
            "stderrs": report.stderrs,
            "slope": report.slope,
            "inconclusive": report.inconclusive,
            "samples": report.samples,
            "excluded": report.excluded,
            "excluded_reasons": report.excluded_reasons,
            "config": report.config,
            "seed": report.seed,
            "wall_seconds": None,
            "pass": report.passed,
        }
    if isinstance(report, est.DistributionChecksReport):
        return {
            "schema": SCHEMA,
            "estimator": report.estimator,
            "checks": [
                {
                    "name": c.name,
                    "statistic": c.statistic,
                    "threshold": c.threshold,
                    "pass": c.passed,
                    "details": c.details,
                }
                for c in report.checks
            ],
            "samples": report.samples,
            "config": report.config,
            "seed": report.seed,
            "wall_seconds": None,
            "pass": report.passed,
        }
    raise TypeError(f"cannot serialize report of type {type(report).__name__}")


def _to_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _to_csv(payload: dict) -> str:
    """Flat CSV rendering; per-estimator columns are documented in the README."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    estimator = payload.get("estimator", "")
    if estimator == "check-sandwich":
        writer.writerow(["estimator", "sample", "count", "lower", "upper",
                         "se_lower", "se_upper", "violated"])
        for i, s in enumerate(payload["per_sample"]):
            writer.writerow([estimator, i, s["count"], repr(s["lower"]), repr(s["upper"]),
                             repr(s["se_lower"]), repr(s["se_upper"]), s["violated"]])
    elif estimator == "small-components":
        writer.writerow(["estimator", "delta", "mean", "stderr", "slope", "pass"])
        for d, mu, se in zip(payload["deltas"], payload["means"], payload["stderrs"]):
            writer.writerow([estimator, repr(d), repr(mu), repr(se),
                             repr(payload["slope"]) if payload["slope"] is not None else "",
                             payload["pass"]])
    elif estimator == "dist-checks":
        writer.writerow(["estimator", "check", "statistic", "threshold", "pass"])
        for c in payload["checks"]:
            writer.writerow([estimator, c["name"], repr(c["statistic"]),
                             repr(c["threshold"]), c["pass"]])
    elif estimator == "estimate-local":
        writer.writerow(["estimator", "model", "estimate", "stderr", "ci95_low",
                         "ci95_high", "samples", "excluded", "seed", "pass"])
        for tag in ("sphere", "plane"):
            r = payload[tag]
            writer.writerow([estimator, tag, repr(r["estimate"]), repr(r["stderr"]),
                             repr(r["ci95"][0]), repr(r["ci95"][1]), r["samples"],
                             r["excluded"], r["seed"], payload["pass"]])
    else:
        writer.writerow(["estimator", "estimate", "stderr", "ci95_low", "ci95_high",
                         "samples", "excluded", "seed", "target", "pass", "config"])
        writer.writerow([
            estimator, repr(payload["estimate"]), repr(payload["stderr"]),
            repr(payload["ci95"][0]), repr(payload["ci95"][1]), payload["samples"],
            payload["excluded"], payload["seed"],
            repr(payload["target"]) if payload.get("target") is not None else "",
            payload["pass"], json.dumps(payload["config"], sort_keys=True),
        ])
    return buf.getvalue()


def _dump_curves(cfg: RunConfig) -> tuple[str, bool]:
    """Segment list of one sample, for external plotting."""
    import numpy as np

    from . import plane as pl
    from . import sphere as sph
    from . import topology as tp

    params = cfg.params
    index = int(params.get("index", 0))
    lines = ["# chart component x0 y0 x1 y1"]
    if params.get("n") is not None:
        n = int(params["n"])
        spacing = params.get("spacing") or est.default_sphere_spacing(n)
        sample = sph.sample_sphere_pair(cfg.seed, "dump-curves", index, n)
        rev = sph.antipodal_view(sample)
        h = spacing / 2.0
        grid = tp.build_chart_grid("sphere", 1.0 + 5.0 * h, h)
        for chart, smp in (("south", sample), ("north", rev)):
            curves = tp.extract_level_curves(grid, sph.eval_Hn(smp, grid.nodes))
            for ci, comp in enumerate(curves.components):
                for a, b in zip(comp.seg_a, comp.seg_b):
                    lines.append(
                        f"{chart} {ci} {a.real!r} {a.imag!r} {b.real!r} {b.imag!r}"
                    )
    elif params.get("radius") is not None:
        R = float(params["radius"])
        spacing = params.get("spacing") or est.DEFAULT_PLANE_SPACING
        grid = tp.build_chart_grid("plane", R + 5 * spacing, spacing)
        validity = math.sqrt(2.0) * grid.half_width * (1 + 1e-9)
        sample = pl.sample_plane_pair(cfg.seed, "dump-curves", index, R=validity)
        curves = tp.extract_level_curves(grid, pl.eval_H_plane(sample, grid.nodes))
        for ci, comp in enumerate(curves.components):
            for a, b in zip(comp.seg_a, comp.seg_b):
                lines.append(f"plane {ci} {a.real!r} {a.imag!r} {b.real!r} {b.imag!r}")
    else:
        raise UsageError("dump-curves requires --n (sphere) or --radius (plane)")
    return "\n".join(lines) + "\n", True


def _dispatch(cfg: RunConfig):
    params = cfg.params
    cmd = cfg.command

    def need(key):
        if params.get(key) is None:
            raise UsageError(f"{cmd} requires --{key}")
        return params[key]

    if cmd == "estimate-cns-plane":
        return est.estimate_cns_plane(
            R=float(need("radius")),
            spacing=float(params.get("spacing") or est.DEFAULT_PLANE_SPACING),
            m=int(params.get("samples") or 200),
            master_seed=cfg.seed,
            threads=cfg.threads,
        )
    if cmd == "estimate-sphere-global":
        return est.estimate_sphere_global(
            n=int(need("n")),
            spacing_target=params.get("spacing"),
            m=int(params.get("samples") or 100),
            master_seed=cfg.seed,
            threads=cfg.threads,
        )
    if cmd == "estimate-local":
        return est.estimate_local_count_sphere(
            n=int(need("n")),
            R=float(need("radius")),
            spacing_target=params.get("spacing"),
            m=int(params.get("samples") or 200),
            master_seed=cfg.seed,
            threads=cfg.threads,
        )
    if cmd == "estimate-length":
        n = int(need("n"))
        region = "global" if params.get("radius") is None else ("cap", float(params["radius"]))
        return est.estimate_length(
            n=n,
            region=region,
            spacing_target=params.get("spacing"),
            m=int(params.get("samples") or 200),
            master_seed=cfg.seed,
            threads=cfg.threads,
        )
    if cmd == "estimate-zeros":
        if params.get("radius") is not None:
            model = ("plane", float(params["radius"]))
        elif params.get("n") is not None:
            model = ("sphere", int(params["n"]))
        else:
            raise UsageError("estimate-zeros requires --radius (plane) or --n (sphere)")
        return est.estimate_zero_pole_intensity(
            model,
            m=int(params.get("samples") or 200),
            master_seed=cfg.seed,
            threads=cfg.threads,
            spacing=params.get("spacing"),
        )
    if cmd == "check-sandwich":
        return est.check_sandwich(
            n=int(need("n")),
            r=float(need("radius")),
            m_samples=int(params.get("samples") or 20),
            m_centers=int(params.get("centers") or 200),
            spacing_target=params.get("spacing"),
            master_seed=cfg.seed,
            threads=cfg.threads,
        )
    if cmd == "small-components":
        deltas = params.get("delta")
        if not deltas:
            raise UsageError("small-components requires at least three --delta values")
        if params.get("radius") is not None:
            model = ("plane", float(params["radius"]))
        elif params.get("n") is not None:
            model = ("sphere", int(params["n"]))
        else:
            raise UsageError("small-components requires --radius (plane) or --n (sphere)")
        return est.small_component_scaling(
            model,
            delta_list=deltas,
            m=int(params.get("samples") or 300),
            master_seed=cfg.seed,
            threads=cfg.threads,
            spacing=params.get("spacing"),
        )
    if cmd == "dist-checks":
        return est.distribution_checks(
            m=int(params.get("samples") or 100_000), master_seed=cfg.seed
        )
    raise UsageError(f"unknown command {cmd!r}")


def run(cfg: RunConfig) -> int:
    """Execute the campaign, write the report, and return the exit status."""
    try:
        if cfg.command == "dump-curves":
            text, passed = _dump_curves(cfg)
            wall = None
        else:
            report = _dispatch(cfg)
            payload = _report_dict(report)
            payload["config"] = dict(payload.get("config", {}))
            payload["config"]["command"] = cfg.command
            if cfg.overrides:
                payload["config"]["flag_overrides"] = sorted(cfg.overrides)
            text = _to_json(payload) if cfg.format == "json" else _to_csv(payload)
            passed = payload.get("pass")
            wall = getattr(report, "wall_seconds", None)
    except UsageError:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    if cfg.out:
        try:
            with open(cfg.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write {cfg.out}: {exc}", file=sys.stderr)
            return 2
    else:
        sys.stdout.write(text)
    if wall is not None:
        print(f"[timing] {cfg.command}: {wall:.1f}s", file=sys.stderr)
    return 0 if (passed is None or passed) else 1


def main(argv=None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
        return run(cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
