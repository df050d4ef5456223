"""Seeded synthetic feeds with planted feature-to-pattern rules, plus the
exhaustive split-search oracle the test suite checks the learner against.

Generation is a pure function of the config: one random.Random(seed)
(Mersenne Twister, documented and stable across platforms) drives weather,
label flips and wait jitter in a fixed traversal order, so the emitted
files are byte-identical run to run.
"""

from __future__ import annotations

import csv
import io
import math
import random
from collections import Counter
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import cart
from .errors import UsageError
from .features import FeatureSchema, FeatureVector, HolidayCalendar, Country, build_feature_vector
from .ingest import Bridge, Condition, Direction, Vehicle, WeatherRecord, bridges_for
from .patterns import DelayPattern

BRUTE_FORCE_MAX_ROWS = 10_000


@dataclass(frozen=True)
class PlantedRule:
    """Conjunctive condition on categorical features -> wait-shift effect.

    When the condition holds, each bridge's wait is base + shift, and the
    hour's intended pattern is `target` (which must agree with the shifted
    waits' categorization).
    """

    condition: dict
    target: DelayPattern
    shifts: dict

    def matches(self, fv: FeatureVector) -> bool:
        return all(fv[name] in allowed for name, allowed in self.condition.items())


@dataclass(frozen=True)
class SynthConfig:
    start: date
    end: date
    seed: int
    direction: Direction
    vehicle: Vehicle
    base_waits: dict
    rules: tuple = ()
    label_flip: float = 0.0
    jitter: float = 0.0
    us_holidays: frozenset = frozenset()
    ca_holidays: frozenset = frozenset()

    def __post_init__(self):
        if not 0.0 <= self.label_flip < 1.0:
            raise UsageError("label_flip must be in [0, 1)")
        if self.jitter < 0:
            raise UsageError("jitter must be >= 0")
        bridges = bridges_for(self.vehicle)
        if set(self.base_waits) != set(bridges):
            raise UsageError(f"base_waits must cover exactly {[b.name for b in bridges]}")
        if any(w < 0 for w in self.base_waits.values()):
            raise UsageError("base waits must be >= 0")

    @property
    def bridges(self) -> tuple[Bridge, ...]:
        return bridges_for(self.vehicle)

    def base_pattern(self) -> DelayPattern:
        return DelayPattern.from_waits(
            [self.base_waits[b] for b in self.bridges], self.bridges
        )


@dataclass(frozen=True)
class SynthOutput:
    wait_times: Path
    weather: Path
    holidays: Path
    emission_log: Path


def _shifted_waits(cfg: SynthConfig, rule: Optional[PlantedRule]) -> dict:
    if rule is None:
        return dict(cfg.base_waits)
    return {b: cfg.base_waits[b] + rule.shifts.get(b, 0.0) for b in cfg.bridges}


def _validate_rules(cfg: SynthConfig) -> None:
    base = cfg.base_pattern()
    for rule in cfg.rules:
        waits = _shifted_waits(cfg, rule)
        implied = DelayPattern.from_waits([waits[b] for b in cfg.bridges], cfg.bridges)
        if implied != rule.target:
            raise UsageError(
                f"rule target {rule.target.label!r} disagrees with its shifted waits "
                f"({implied.label!r})"
            )
        if rule.target == base:
            raise UsageError(
                f"rule target {rule.target.label!r} equals the base pattern; "
                "flips would be invisible"
            )


def _temperature(day: date, hour: int, rng: random.Random) -> float:
    doy = day.timetuple().tm_yday
    seasonal = 45.0 - 25.0 * math.cos(2.0 * math.pi * (doy - 15) / 365.0)
    diurnal = 8.0 * math.sin(math.pi * (hour - 7) / 14.0)
    return round(seasonal + diurnal + rng.normalvariate(0.0, 3.0), 1)


def generate(cfg: SynthConfig, out_dir) -> SynthOutput:
    """Write wait_times.csv, weather.csv, holidays.csv and emission_log.csv.

    PB and LQ get 5-minute samples; RB (passenger only) one hourly value.
    Hours run 7..21. The log records each hour's pre-flip intended pattern
    and whether the noise draw replaced it with the alternative profile.
    """
    if cfg.end < cfg.start:
        raise UsageError("empty date range: end is before start")
    _validate_rules(cfg)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    rng = random.Random(cfg.seed)
    us_cal = HolidayCalendar(Country.US, frozenset(cfg.us_holidays))
    ca_cal = HolidayCalendar(Country.CA, frozenset(cfg.ca_holidays))
    base = cfg.base_pattern()

    wait_buf = io.StringIO()
    weather_buf = io.StringIO()
    log_buf = io.StringIO()
    wait_csv = csv.writer(wait_buf, lineterminator="\n")
    weather_csv = csv.writer(weather_buf, lineterminator="\n")
    log_csv = csv.writer(log_buf, lineterminator="\n")
    wait_csv.writerow(["timestamp", "bridge", "direction", "vehicle_type", "wait_minutes"])
    weather_csv.writerow(["timestamp", "temperature_f", "visibility", "precipitation_in", "condition"])
    log_csv.writerow(["hour_start", "intended_pattern", "flipped"])

    day = cfg.start
    while day <= cfg.end:
        for hour in range(7, 22):
            hour_start = datetime.combine(day, time(hour))
            temp = _temperature(day, hour, rng)
            wet = rng.random() < 0.15
            precip = round(rng.uniform(0.01, 0.30), 2) if wet else 0.0
            if precip > 0:
                condition = Condition.SNOW if temp <= 32.0 else Condition.RAIN
                visibility = rng.randint(4, 9)
            else:
                condition = Condition.CLEAR
                visibility = 10
            stamp = hour_start.isoformat(timespec="minutes")
            weather_csv.writerow([stamp, f"{temp:.1f}", visibility, f"{precip:.2f}", condition.label])

            weather_rec = WeatherRecord(hour_start, temp, visibility, precip, condition)
            fv = build_feature_vector(hour_start, weather_rec, us_cal, ca_cal)
            rule = next((r for r in cfg.rules if r.matches(fv)), None)
            intended = rule.target if rule else base
            flipped = rng.random() < cfg.label_flip and bool(cfg.rules)
            if flipped:
                waits = _shifted_waits(cfg, None) if rule else _shifted_waits(cfg, cfg.rules[0])
            else:
                waits = _shifted_waits(cfg, rule)
            log_csv.writerow([stamp, intended.label, int(flipped)])

            for bridge in cfg.bridges:
                level = waits[bridge]
                minutes = [0] if bridge is Bridge.RB else range(0, 60, 5)
                for minute in minutes:
                    value = level
                    if cfg.jitter > 0:
                        value = max(0.0, level + rng.normalvariate(0.0, cfg.jitter))
                    wait_csv.writerow(
                        [
                            hour_start.replace(minute=minute).isoformat(timespec="minutes"),
                            bridge.name,
                            cfg.direction.label,
                            cfg.vehicle.label,
                            f"{value:.2f}",
                        ]
                    )
        day += timedelta(days=1)

    holiday_rows = sorted(
        [(d.isoformat(), "US") for d in cfg.us_holidays]
        + [(d.isoformat(), "CA") for d in cfg.ca_holidays]
    )
    holiday_buf = io.StringIO()
    holiday_csv = csv.writer(holiday_buf, lineterminator="\n")
    holiday_csv.writerow(["date", "country"])
    holiday_csv.writerows(holiday_rows)

    out = SynthOutput(
        wait_times=out_dir / "wait_times.csv",
        weather=out_dir / "weather.csv",
        holidays=out_dir / "holidays.csv",
        emission_log=out_dir / "emission_log.csv",
    )
    out.wait_times.write_text(wait_buf.getvalue(), encoding="utf-8")
    out.weather.write_text(weather_buf.getvalue(), encoding="utf-8")
    out.holidays.write_text(holiday_buf.getvalue(), encoding="utf-8")
    out.emission_log.write_text(log_buf.getvalue(), encoding="utf-8")
    return out


def _gini_fraction(labels: Sequence[str]) -> Fraction:
    n = len(labels)
    return 1 - sum(Fraction(c, n) ** 2 for c in Counter(labels).values())


def brute_force_best_split(rows, schema: FeatureSchema) -> Optional[cart.SplitCandidate]:
    """Reference split search: score every candidate rule by materializing
    its partition and evaluating the impurity formulas in exact rational
    arithmetic, rounding to float only at the end.

    Same candidate space and tie-break order as the learner; serves as the
    independent oracle for cart.best_split.
    """
    if len(rows) > BRUTE_FORCE_MAX_ROWS:
        raise UsageError(f"brute force capped at {BRUTE_FORCE_MAX_ROWS} rows")
    all_labels = [str(row[1]) for row in rows]
    parent_gini = _gini_fraction(all_labels) if rows else None
    n = len(rows)
    best: Optional[cart.SplitCandidate] = None
    for spec in schema:
        for cand in cart.enumerate_splits(rows, spec.name, schema):
            rule = cand.rule
            left_labels = []
            right_labels = []
            for row in rows:
                if rule.goes_left(row[0][rule.feature]):
                    left_labels.append(str(row[1]))
                else:
                    right_labels.append(str(row[1]))
            gain_exact = (
                parent_gini
                - Fraction(len(left_labels), n) * _gini_fraction(left_labels)
                - Fraction(len(right_labels), n) * _gini_fraction(right_labels)
            )
            gain = float(gain_exact)
            if best is None or gain > best.gain:
                best = cart.SplitCandidate(
                    rule,
                    gain,
                    cart.ClassDistribution.from_labels(left_labels),
                    cart.ClassDistribution.from_labels(right_labels),
                )
    if best is None or not best.gain > 0.0:
        return None
    return best
