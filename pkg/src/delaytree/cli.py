"""Command-line pipeline driver.

Subcommands: synth, ingest, train, render, report (pattern-freq,
hourly-dist, factors), pipeline. Exit codes: 0 success, 1 usage error,
2 data error. An INI config file (sections named after subcommands) can
supply any value; flags override it. DELAYTREE_LOG={error,info,debug}
controls verbosity.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import os
import re
import sys
from datetime import date
from pathlib import Path

from . import cart, report, synth
from .errors import DataError, UsageError
from .features import CATEGORICAL, FEATURE_SCHEMA, label_hours, parse_holidays
from .ingest import (
    Bridge,
    Direction,
    Vehicle,
    aggregate_hourly,
    join_weather,
    parse_wait_times,
    parse_weather,
)
from .patterns import (
    COMBOS,
    DelayPattern,
    assemble_rows,
    pattern_frequencies,
    read_observations,
    write_observations,
)

logger = logging.getLogger("delaytree")

_LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging() -> None:
    raw = os.environ.get("DELAYTREE_LOG", "")
    level = _LOG_LEVELS.get(raw.lower()) if raw else logging.WARNING
    if level is None:
        print(f"warning: ignoring DELAYTREE_LOG={raw!r} (want error, info or debug)", file=sys.stderr)
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class _Config:
    """INI config: `key = value` under a section per subcommand."""

    def __init__(self, path=None):
        self._cp = configparser.ConfigParser()
        if path is not None:
            text = Path(path).read_text(encoding="utf-8")
            try:
                self._cp.read_string(text)
            except configparser.Error as exc:
                raise UsageError(f"bad config file {path}: {exc}") from None

    def get(self, section: str, key: str):
        return self._cp.get(section, key, fallback=None)

    def has_section(self, section: str) -> bool:
        return self._cp.has_section(section)

    def section(self, name: str) -> dict:
        return dict(self._cp[name]) if self._cp.has_section(name) else {}


def _resolve(flag_value, cfg: _Config, section: str, key: str, default=None, convert=None):
    """Flag beats config beats default."""
    if flag_value is not None:
        return flag_value
    raw = cfg.get(section, key)
    if raw is None:
        return default
    if convert is None:
        return raw
    try:
        return convert(raw)
    except (ValueError, KeyError) as exc:
        raise UsageError(f"bad config value [{section}] {key} = {raw!r}: {exc}") from None


def _parse_date(raw: str) -> date:
    try:
        return date.fromisoformat(raw.strip())
    except ValueError:
        raise UsageError(f"bad date {raw!r}; want YYYY-MM-DD") from None


def _vehicle(raw: str) -> Vehicle:
    try:
        return Vehicle[raw.strip().upper()]
    except KeyError:
        raise UsageError(f"unknown vehicle {raw!r}; want passenger or commercial") from None


def _direction(raw: str) -> Direction:
    try:
        return Direction[raw.strip().upper()]
    except KeyError:
        raise UsageError(f"unknown direction {raw!r}; want to_us or to_can") from None


def _bridge(raw: str) -> Bridge:
    try:
        return Bridge[raw.strip().upper()]
    except KeyError:
        raise UsageError(f"unknown bridge {raw!r}; want PB, RB or LQ") from None


_RULE_SHIFT = re.compile(r"(PB|RB|LQ)\s*([+-]\d+(?:\.\d+)?)", re.IGNORECASE)


def parse_rule(text: str) -> synth.PlantedRule:
    """`cond & cond => PB+17,LQ+2 => target-pattern-label`; each cond is
    feature=value or feature=value|value (categorical features only)."""
    parts = [p.strip() for p in text.split("=>")]
    if len(parts) != 3:
        raise UsageError(f"bad rule {text!r}: want 'condition => shifts => target pattern'")
    condition = {}
    if parts[0]:
        for clause in parts[0].split("&"):
            name, sep, values = clause.partition("=")
            name = name.strip()
            if not sep or not name:
                raise UsageError(f"bad rule condition {clause.strip()!r}")
            try:
                spec = FEATURE_SCHEMA.spec(name)
            except KeyError:
                raise UsageError(f"unknown feature {name!r} in rule condition") from None
            if spec.kind != CATEGORICAL:
                raise UsageError(f"rule conditions must use categorical features, not {name!r}")
            level_type = type(spec.levels[0])
            try:
                allowed = tuple(level_type(v.strip()) for v in values.split("|"))
            except ValueError:
                raise UsageError(f"bad level list {values!r} for {name!r}") from None
            for level in allowed:
                if level not in spec.levels:
                    raise UsageError(f"{level!r} is not a level of {name!r}")
            condition[name] = allowed
    shifts = {}
    if parts[1]:
        for item in parts[1].split(","):
            m = _RULE_SHIFT.fullmatch(item.strip())
            if m is None:
                raise UsageError(f"bad wait shift {item.strip()!r}; want e.g. PB+17")
            shifts[Bridge[m.group(1).upper()]] = float(m.group(2))
    target = DelayPattern.from_label(parts[2])
    return synth.PlantedRule(condition, target, shifts)


def _parse_holiday_dates(raw: str) -> frozenset:
    return frozenset(_parse_date(tok) for tok in raw.replace(",", " ").split())


def build_parser() -> _Parser:
    parser = _Parser(prog="delaytree", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic input files")
    p.add_argument("--config")
    p.add_argument("--out-dir")
    p.add_argument("--start")
    p.add_argument("--end")
    p.add_argument("--seed", type=int)
    p.add_argument("--vehicle")
    p.add_argument("--direction")
    p.add_argument("--base-pb", type=float)
    p.add_argument("--base-rb", type=float)
    p.add_argument("--base-lq", type=float)
    p.add_argument("--jitter", type=float)
    p.add_argument("--label-flip", type=float)
    p.add_argument("--rule", action="append", dest="rules")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="raw feeds -> observations.csv")
    p.add_argument("--config")
    p.add_argument("--wait-times")
    p.add_argument("--weather")
    p.add_argument("--holidays")
    p.add_argument("--out")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="observations.csv -> tree json")
    p.add_argument("--config")
    p.add_argument("--data")
    p.add_argument("--vehicle")
    p.add_argument("--direction")
    p.add_argument("--min-samples", type=int)
    p.add_argument("--min-gain", type=float)
    p.add_argument("--max-depth", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("render", help="tree json -> dot/text")
    p.add_argument("--config")
    p.add_argument("--tree")
    p.add_argument("--format", choices=report.TREE_FORMATS)
    p.add_argument("--out")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("report", help="summary artifacts")
    rsub = p.add_subparsers(dest="report_kind", required=True)

    rp = rsub.add_parser("pattern-freq", help="pattern frequency histogram")
    rp.add_argument("--config")
    rp.add_argument("--data")
    rp.add_argument("--vehicle")
    rp.add_argument("--direction")
    rp.add_argument("--out")
    rp.set_defaults(func=cmd_report_pattern_freq)

    rp = rsub.add_parser("hourly-dist", help="hourly delay-type distribution")
    rp.add_argument("--config")
    rp.add_argument("--wait-times")
    rp.add_argument("--bridge")
    rp.add_argument("--vehicle")
    rp.add_argument("--direction")
    rp.add_argument("--out")
    rp.set_defaults(func=cmd_report_hourly_dist)

    rp = rsub.add_parser("factors", help="influential-factor summary across trees")
    rp.add_argument("--config")
    rp.add_argument("--trees", nargs="+")
    rp.add_argument("--out")
    rp.set_defaults(func=cmd_report_factors)

    p = sub.add_parser("pipeline", help="run synth/ingest/train/render/report from one config")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_pipeline)

    return parser


def _require(value, what: str):
    if value is None:
        raise UsageError(f"missing {what}")
    return value


def _parse_file(parser, path):
    """Parse a file's text, prefixing any data error with the path."""
    try:
        return parser(Path(path).read_text(encoding="utf-8"))
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


def _emit(text: str, out_path) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        path = Path(out_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")


def _synth_config(args, cfg: _Config) -> synth.SynthConfig:
    section = "synth"
    vehicle = _require(_resolve(args.vehicle and _vehicle(args.vehicle), cfg, section, "vehicle", convert=_vehicle), "--vehicle")
    base = {}
    for bridge, flag in ((Bridge.PB, args.base_pb), (Bridge.RB, args.base_rb), (Bridge.LQ, args.base_lq)):
        value = _resolve(flag, cfg, section, f"base-{bridge.name.lower()}", convert=float)
        if value is not None:
            base[bridge] = value
    rule_texts = list(args.rules or [])
    for key, value in sorted(cfg.section(section).items()):
        if key == "rule" or key.startswith("rule."):
            rule_texts.append(value)
    return synth.SynthConfig(
        start=_require(_resolve(args.start and _parse_date(args.start), cfg, section, "start", convert=_parse_date), "--start"),
        end=_require(_resolve(args.end and _parse_date(args.end), cfg, section, "end", convert=_parse_date), "--end"),
        seed=_require(_resolve(args.seed, cfg, section, "seed", convert=int), "--seed"),
        direction=_require(_resolve(args.direction and _direction(args.direction), cfg, section, "direction", convert=_direction), "--direction"),
        vehicle=vehicle,
        base_waits=base,
        rules=tuple(parse_rule(t) for t in rule_texts),
        label_flip=_resolve(args.label_flip, cfg, section, "label-flip", default=0.0, convert=float),
        jitter=_resolve(args.jitter, cfg, section, "jitter", default=0.0, convert=float),
        us_holidays=_resolve(None, cfg, section, "us-holidays", default=frozenset(), convert=_parse_holiday_dates),
        ca_holidays=_resolve(None, cfg, section, "ca-holidays", default=frozenset(), convert=_parse_holiday_dates),
    )


def cmd_synth(args) -> int:
    cfg = _Config(args.config)
    out_dir = _require(_resolve(args.out_dir, cfg, "synth", "out-dir"), "--out-dir")
    files = synth.generate(_synth_config(args, cfg), out_dir)
    logger.info("wrote %s, %s, %s, %s", files.wait_times, files.weather, files.holidays, files.emission_log)
    return 0


def _ingest_datasets(wait_times_path, weather_path, holidays_path):
    """Parse + aggregate + join + label + assemble all four combos."""
    waits = _parse_file(parse_wait_times, wait_times_path)
    weather = _parse_file(parse_weather, weather_path)
    us_cal, ca_cal = _parse_file(parse_holidays, holidays_path)
    hours = aggregate_hourly(waits)
    observations = label_hours(join_weather(hours, weather), us_cal, ca_cal)
    datasets = {}
    for vehicle, direction in COMBOS:
        ds = assemble_rows(observations, direction, vehicle)
        if ds.rows or ds.skipped_incomplete or ds.dropped_all_zero:
            logger.info(
                "%s %s: %d rows, %d incomplete hours skipped, %d all-zero hours dropped",
                vehicle.label, direction.label, len(ds.rows), ds.skipped_incomplete, ds.dropped_all_zero,
            )
        if ds.rows:
            datasets[(vehicle, direction)] = ds
    return datasets, hours


def cmd_ingest(args) -> int:
    cfg = _Config(args.config)
    wait_times = _require(_resolve(args.wait_times, cfg, "ingest", "wait-times"), "--wait-times")
    weather = _require(_resolve(args.weather, cfg, "ingest", "weather"), "--weather")
    holidays = _require(_resolve(args.holidays, cfg, "ingest", "holidays"), "--holidays")
    out = _require(_resolve(args.out, cfg, "ingest", "out"), "--out")
    datasets, _ = _ingest_datasets(wait_times, weather, holidays)
    _emit(write_observations(list(datasets.values())), out)
    return 0


def _train_config(args, cfg: _Config, vehicle: Vehicle, direction: Direction) -> cart.TrainConfig:
    override = f"train.{vehicle.label}.{direction.label}"

    def setting(flag, key, default, convert):
        value = _resolve(flag, cfg, override, key, convert=convert)
        if value is None:
            value = _resolve(None, cfg, "train", key, default=default, convert=convert)
        return value

    try:
        return cart.TrainConfig(
            min_samples=setting(args.min_samples, "min-samples", 100, int),
            min_gain=setting(args.min_gain, "min-gain", 0.005, float),
            max_depth=setting(args.max_depth, "max-depth", None, int),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load_dataset(data_path, vehicle: Vehicle, direction: Direction):
    datasets = _parse_file(read_observations, data_path)
    ds = datasets.get((vehicle, direction))
    if ds is None or not ds.rows:
        raise DataError(f"{data_path}: no rows for {vehicle.label} {direction.label}")
    return ds


def cmd_train(args) -> int:
    cfg = _Config(args.config)
    data = _require(_resolve(args.data, cfg, "train", "data"), "--data")
    vehicle = _require(_resolve(args.vehicle and _vehicle(args.vehicle), cfg, "train", "vehicle", convert=_vehicle), "--vehicle")
    direction = _require(_resolve(args.direction and _direction(args.direction), cfg, "train", "direction", convert=_direction), "--direction")
    out = _require(_resolve(args.out, cfg, "train", "out"), "--out")
    ds = _load_dataset(data, vehicle, direction)
    tree = cart.grow_tree(ds, _train_config(args, cfg, vehicle, direction))
    _emit(report.export_tree(tree, "json"), out)
    return 0


def cmd_render(args) -> int:
    cfg = _Config(args.config)
    tree_path = _require(_resolve(args.tree, cfg, "render", "tree"), "--tree")
    format = _require(_resolve(args.format, cfg, "render", "format"), "--format")
    if format not in report.TREE_FORMATS:
        raise UsageError(f"unknown tree format {format!r}; expected one of {report.TREE_FORMATS}")
    tree = _parse_file(report.import_tree, tree_path)
    _emit(report.export_tree(tree, format), _resolve(args.out, cfg, "render", "out"))
    return 0


def cmd_report_pattern_freq(args) -> int:
    cfg = _Config(args.config)
    section = "report"
    data = _require(_resolve(args.data, cfg, section, "data"), "--data")
    vehicle = _require(_resolve(args.vehicle and _vehicle(args.vehicle), cfg, section, "vehicle", convert=_vehicle), "--vehicle")
    direction = _require(_resolve(args.direction and _direction(args.direction), cfg, section, "direction", convert=_direction), "--direction")
    ds = _load_dataset(data, vehicle, direction)
    _emit(report.pattern_frequencies_csv(pattern_frequencies(ds)), _resolve(args.out, cfg, section, "out"))
    return 0


def cmd_report_hourly_dist(args) -> int:
    cfg = _Config(args.config)
    section = "report"
    wait_times = _require(_resolve(args.wait_times, cfg, section, "wait-times"), "--wait-times")
    bridge = _require(_resolve(args.bridge and _bridge(args.bridge), cfg, section, "bridge", convert=_bridge), "--bridge")
    vehicle = _require(_resolve(args.vehicle and _vehicle(args.vehicle), cfg, section, "vehicle", convert=_vehicle), "--vehicle")
    direction = _require(_resolve(args.direction and _direction(args.direction), cfg, section, "direction", convert=_direction), "--direction")
    hours = aggregate_hourly(_parse_file(parse_wait_times, wait_times))
    dist = report.hourly_distribution(hours, bridge, direction, vehicle)
    _emit(report.hourly_distribution_csv(dist), _resolve(args.out, cfg, section, "out"))
    return 0


def cmd_report_factors(args) -> int:
    cfg = _Config(args.config)
    paths = args.trees or (cfg.get("report", "trees") or "").split() or None
    _require(paths, "--trees")
    trees = {}
    for path in paths:
        tree = _parse_file(report.import_tree, path)
        if tree.vehicle is None or tree.direction is None:
            raise UsageError(f"{path}: tree json lacks vehicle/direction tags")
        trees[(tree.vehicle, tree.direction)] = tree
    _emit(report.factor_summary_csv(report.factor_summary(trees)), _resolve(args.out, cfg, "report", "out"))
    return 0


def cmd_pipeline(args) -> int:
    cfg = _Config(args.config)
    out_dir = Path(_resolve(args.out_dir, cfg, "pipeline", "out-dir", default="out"))
    out_dir.mkdir(parents=True, exist_ok=True)

    if cfg.has_section("synth"):
        synth_args = argparse.Namespace(
            out_dir=None, start=None, end=None, seed=None, vehicle=None, direction=None,
            base_pb=None, base_rb=None, base_lq=None, jitter=None, label_flip=None, rules=None,
        )
        files = synth.generate(_synth_config(synth_args, cfg), out_dir / "data")
        wait_times, weather, holidays = files.wait_times, files.weather, files.holidays
    else:
        wait_times = _require(cfg.get("ingest", "wait-times"), "[ingest] wait-times")
        weather = _require(cfg.get("ingest", "weather"), "[ingest] weather")
        holidays = _require(cfg.get("ingest", "holidays"), "[ingest] holidays")

    datasets, hours = _ingest_datasets(wait_times, weather, holidays)
    if not datasets:
        raise DataError("no observations survived ingestion; nothing to train on")
    _emit(write_observations(list(datasets.values())), out_dir / "observations.csv")

    flagless = argparse.Namespace(min_samples=None, min_gain=None, max_depth=None)
    trained = {}
    for (vehicle, direction), ds in datasets.items():
        tree = cart.grow_tree(ds, _train_config(flagless, cfg, vehicle, direction))
        trained[(vehicle, direction)] = tree
        stem = f"{vehicle.label}_{direction.label}"
        _emit(report.export_tree(tree, "json"), out_dir / "trees" / f"tree_{stem}.json")
        _emit(report.export_tree(tree, "dot"), out_dir / "trees" / f"tree_{stem}.dot")
        _emit(report.export_tree(tree, "text"), out_dir / "trees" / f"tree_{stem}.txt")
        _emit(
            report.pattern_frequencies_csv(pattern_frequencies(ds)),
            out_dir / "reports" / f"pattern_freq_{stem}.csv",
        )
        for bridge in ds.bridges:
            dist = report.hourly_distribution(hours, bridge, direction, vehicle)
            _emit(
                report.hourly_distribution_csv(dist),
                out_dir / "reports" / f"hourly_dist_{bridge.name}_{stem}.csv",
            )
    _emit(report.factor_summary_csv(report.factor_summary(trained)), out_dir / "reports" / "factors.csv")
    logger.info("pipeline artifacts under %s", out_dir)
    return 0


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 0


if __name__ == "__main__":
    sys.exit(main())
