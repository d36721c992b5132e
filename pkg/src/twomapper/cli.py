"""Command-line driver: ``generate``, ``mapper``, ``multiscale`` and ``check``.

Settings come from flags or from a ``key = value`` file given with
``--config`` (``#`` starts a comment); flags win. Exit codes: 0 success,
1 pipeline error, 2 usage error, 3 a good-cover condition was falsified.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import export
from .clustering import DbscanParams, check_cluster_cover_good
from .cover import CubicalCoverSpec, bounding_box, build_cubical_cover, build_tower, check_good_tower, interval_length
from .errors import TwoMapperError
from .multiscale import build_multiscale, complexity_probe
from .nerve import betti, build_two_mapper, one_skeleton
from .clustering import cluster_cover
from .persistence import betti_curve, reduce
from .pointcloud import (
    Lens,
    apply_lens,
    diameter,
    generate_klein_bottle,
    generate_torus,
    knn_radius,
    load_csv,
    save_csv,
)

log = logging.getLogger("twomapper")

SHAPES = {"torus": generate_torus, "klein": generate_klein_bottle}


class UsageError(Exception):
    pass


@dataclass
class PipelineConfig:
    """Everything a run depends on. ``radius`` is a number or ``"knn"``."""

    input: str = ""
    has_header: bool = False
    n: int = 5000
    R: float = 2.0
    r: float = 1.0
    seed: int = 0
    lens: str = "0,1"
    k: int = 6
    g: float = 0.5
    mode: str = "g"
    schedule: str = ""
    radius: str = "knn"
    min_pts: int = 2
    include_noise: bool = False
    skeleton: int = 2
    pair_rule: str = "link"
    trials: int = 200
    threads: int = 1
    out: str = "."
    resolved: dict = field(default_factory=dict)

    def metadata(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("resolved")
        d.pop("threads")
        d.update(self.resolved)
        return d


FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(PipelineConfig) if f.name != "resolved"}


def _coerce(key: str, value):
    kind = FIELD_TYPES[key]
    if kind == "bool":
        if isinstance(value, bool):
            return value
        lowered = str(value).strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise UsageError(f"{key}: expected a boolean, got {value!r}")
    try:
        return {"int": int, "float": float, "str": str}[kind](value)
    except ValueError:
        raise UsageError(f"{key}: cannot read {value!r} as {kind}") from None


def read_config_file(path) -> dict:
    settings = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{number}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in FIELD_TYPES:
            raise UsageError(f"{path}:{number}: unknown setting {key!r}")
        settings[key] = value
    return settings


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    settings = read_config_file(args.config) if getattr(args, "config", None) else {}
    for key in FIELD_TYPES:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return PipelineConfig(**{k: _coerce(k, v) for k, v in settings.items()})


def parse_lens(spec: str) -> Lens:
    spec = spec.strip()
    if spec == "identity":
        return Lens.identity()
    try:
        return Lens(tuple(int(a) for a in spec.split(",")))
    except ValueError:
        raise UsageError(f"lens must be 'identity' or comma-separated axes, got {spec!r}") from None


def parse_schedule(spec: str) -> list[float]:
    """``"a,b,c"`` or an inclusive ``"start:stop:step"`` range."""
    spec = spec.strip()
    if not spec:
        return []
    try:
        if ":" in spec:
            start, stop, step = (float(x) for x in spec.split(":"))
            count = int(round((stop - start) / step)) + 1
            return [round(start + i * step, 12) for i in range(count)]
        return [float(x) for x in spec.split(",")]
    except ValueError:
        raise UsageError(f"cannot read schedule {spec!r}") from None


def load_input(cfg: PipelineConfig):
    if cfg.input in SHAPES:
        return SHAPES[cfg.input](cfg.n, R=cfg.R, r=cfg.r, seed=cfg.seed)
    if not cfg.input:
        raise UsageError("no input: give a CSV path or one of " + ", ".join(sorted(SHAPES)))
    path = Path(cfg.input)
    if not path.is_file():
        raise FileNotFoundError(f"input file not found: {path}")
    return load_csv(path, has_header=cfg.has_header)


def resolve_params(cfg: PipelineConfig, cloud) -> DbscanParams:
    if cfg.radius == "knn":
        radius = knn_radius(cloud)
        cfg.resolved["radius_source"] = "mean distance to 3rd nearest neighbour"
    else:
        try:
            radius = float(cfg.radius)
        except ValueError:
            raise UsageError(f"radius must be a number or 'knn', got {cfg.radius!r}") from None
    cfg.resolved["resolved_radius"] = radius
    return DbscanParams(radius, cfg.min_pts)


def _prepare(cfg: PipelineConfig):
    cloud = load_input(cfg)
    image = apply_lens(cloud, parse_lens(cfg.lens))
    params = resolve_params(cfg, cloud)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return cloud, image, params, out


def _write_run(out: Path, cfg: PipelineConfig, timings: dict, extra: dict | None = None) -> None:
    payload = {"timings": {k: round(v, 6) for k, v in timings.items()}, "threads": cfg.threads}
    if extra:
        payload.update(extra)
    export.write_json(out / "run.json", payload, cfg.metadata())


def cmd_generate(args) -> int:
    if args.shape not in SHAPES:
        raise UsageError(f"unknown shape {args.shape!r}; valid shapes: {', '.join(sorted(SHAPES))}")
    cloud = SHAPES[args.shape](args.n, R=args.R, r=args.r, seed=args.seed)
    save_csv(cloud, args.output)
    box = bounding_box(cloud.points)
    print(f"{len(cloud)} points in R^{cloud.dim}")
    print(f"bounding box mins {box.mins.tolist()} maxs {box.maxs.tolist()}")
    return 0


def cmd_mapper(cfg: PipelineConfig) -> int:
    if cfg.skeleton not in (1, 2):
        raise UsageError("skeleton must be 1 or 2")
    timings = {}
    t0 = time.perf_counter()
    cloud, image, params, out = _prepare(cfg)
    spec = CubicalCoverSpec(cfg.k, cfg.g, image.dim)
    level = build_tower(bounding_box(image), spec, [cfg.g])[0]
    timings["load"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    cc = cluster_cover(cloud, image, level, params, threads=cfg.threads)
    cx = build_two_mapper(cc, include_noise=cfg.include_noise)
    if cfg.skeleton == 1:
        cx = one_skeleton(cx)
    b = betti(cx)
    timings["pipeline"] = time.perf_counter() - t0
    meta = cfg.metadata()
    export.write_json(out / "complex.json", cx.to_dict(), meta)
    export.write_text(out / "betti.txt", export.betti_report(b), meta)
    _write_run(out, cfg, timings, {"clusters": len(cc.clusters()), "noise_nodes": len(cc.noise())})
    print(export.betti_report(b), end="")
    return 0


def cmd_multiscale(cfg: PipelineConfig) -> int:
    schedule = parse_schedule(cfg.schedule)
    if len(schedule) < 2:
        raise UsageError("multiscale needs a schedule of at least two scales")
    timings = {}
    t0 = time.perf_counter()
    cloud, image, params, out = _prepare(cfg)
    spec = CubicalCoverSpec(cfg.k, cfg.g, image.dim)
    tower = build_tower(bounding_box(image), spec, schedule, mode=cfg.mode)
    result = build_multiscale(cloud, image, tower, params, threads=cfg.threads, pair_rule=cfg.pair_rule)
    timings["multiscale"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    bars = reduce(result.filtered)
    curve = betti_curve(bars, 1, result.scales)
    timings["persistence"] = time.perf_counter() - t0
    meta = cfg.metadata()
    export.write_json(out / "filtration.json", result.to_dict(), meta)
    export.write_text(out / "barcode.csv", bars.to_csv(), meta)
    (out / "barcode.svg").write_text(export.barcode_svg(bars, result.scales, meta))
    export.write_text(out / "selection.txt", export.selection_report(curve), meta)
    probe = complexity_probe(result)
    _write_run(
        out,
        cfg,
        timings,
        {"node_counts": probe.node_counts, "pair_evaluations": probe.pair_evaluations, "bound": probe.bound},
    )
    print(export.selection_report(curve), end="")
    return 0


def default_check_schedule(image, k: int, g: float) -> list[float]:
    """Eight eps scales from the base resolution to four image diameters."""
    s = float(np.linalg.norm(interval_length(bounding_box(image), k, g)))
    top = 4 * float(diameter(image.values))
    return np.linspace(s, max(top, s * (1 + 1e-9)), 8).tolist()


def cmd_check(cfg: PipelineConfig) -> int:
    t0 = time.perf_counter()
    cloud, image, params, out = _prepare(cfg)
    spec = CubicalCoverSpec(cfg.k, cfg.g, image.dim)
    if spec.below_sqrt_n:
        warnings.warn(f"k={cfg.k} < sqrt(n) for n={image.dim}: conditions are tested anyway", stacklevel=1)
    schedule, mode = parse_schedule(cfg.schedule), cfg.mode
    if not schedule:
        schedule, mode = default_check_schedule(image, cfg.k, cfg.g), "eps"
        cfg.resolved["check_schedule"] = schedule
        cfg.resolved["check_mode"] = mode
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        tower = build_tower(bounding_box(image), spec, schedule, mode=mode)
    cover_report = check_good_tower(tower, image, c=3, trials=cfg.trials, seed=cfg.seed)
    cluster_report = check_cluster_cover_good(tower, cloud, image, params, c=4, trials=cfg.trials, seed=cfg.seed)
    meta = cfg.metadata()
    reports = {"cover": cover_report.to_dict(), "cluster_cover": cluster_report.to_dict()}
    export.write_json(out / "check.json", reports, meta)
    _write_run(out, cfg, {"check": time.perf_counter() - t0})
    for name, rep in (("cover (c=3)", cover_report), ("cluster cover (c=4)", cluster_report)):
        print(f"{name}: resolution {rep.resolution:.6g}, diameter {rep.diameter:.6g}")
        print(f"  (i)   {'pass' if rep.condition_i else 'FAIL'}")
        print(f"  (ii)  {'pass' if rep.condition_ii else 'FAIL'}")
        print(
            f"  (iii) {'pass' if rep.condition_iii else 'FAIL'}"
            f"  tested {rep.tested}, failures {rep.failures}, skipped {rep.skipped}, unsampled {rep.unsampled}"
        )
        if rep.witness is not None and not rep.condition_iii:
            print(f"  witness: {json.dumps(rep.witness)}")
    return 0 if cover_report.passed and cluster_report.passed else 3


def _pipeline_options(p: argparse.ArgumentParser) -> None:
    # defaults stay None so that a config file value is only overridden by an explicit flag
    p.add_argument("--config", help="key = value settings file")
    p.add_argument("-i", "--input", help="CSV path, or 'torus' / 'klein' to generate")
    p.add_argument("--has-header", dest="has_header", action="store_const", const=True)
    p.add_argument("--n", type=int, help="points to generate")
    p.add_argument("--R", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--lens", help="'identity' or comma-separated axes, e.g. 0,1")
    p.add_argument("--k", type=int, help="intervals per axis")
    p.add_argument("--g", type=float, help="overlap fraction")
    p.add_argument("--mode", choices=["g", "eps"])
    p.add_argument("--schedule", help="'a,b,c' or inclusive 'start:stop:step'")
    p.add_argument("--radius", help="DBSCAN radius, or 'knn' for the 3-NN heuristic")
    p.add_argument("--min-pts", dest="min_pts", type=int)
    p.add_argument("--include-noise", dest="include_noise", action="store_const", const=True)
    p.add_argument("--skeleton", type=int, choices=[1, 2])
    p.add_argument("--pair-rule", dest="pair_rule", choices=["link", "edge"])
    p.add_argument("--trials", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("-o", "--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twomapper", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    gen = sub.add_parser("generate", help="sample a torus or Klein bottle to CSV")
    gen.add_argument("shape")
    gen.add_argument("--n", type=int, default=5000)
    gen.add_argument("--R", type=float, default=2.0)
    gen.add_argument("--r", type=float, default=1.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("-o", "--output", required=True)
    for name, text in (
        ("mapper", "2-Mapper complex and Betti numbers at one overlap fraction"),
        ("multiscale", "multiscale 2-Mapper filtration, barcode and scale selection"),
        ("check", "empirical good-cover checks"),
    ):
        _pipeline_options(sub.add_parser(name, help=text))
    return parser


COMMANDS = {"mapper": cmd_mapper, "multiscale": cmd_multiscale, "check": cmd_check}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "generate":
            return cmd_generate(args)
        return COMMANDS[args.command](resolve_config(args))
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"twomapper: error: {exc}", file=sys.stderr)
        return 2
    except (TwoMapperError, OSError) as exc:
        print(f"twomapper: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
