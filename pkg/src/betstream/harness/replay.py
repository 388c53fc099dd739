"""Replay of recorded observation streams through sequential region tests.

Records are line-delimited text, one observation per line, as
whitespace-separated key=value fields: `t` (strictly increasing
integer), `arm` (0-based integer), `x` (real in [0, 1]). Lines starting
with '#' are ignored. Observations must be pre-normalized to [0, 1];
the bound used for normalization is the caller's responsibility.
"""

from __future__ import annotations

from dataclasses import dataclass

from betstream.capital import StreamConfig
from betstream.harness.engine import RegionTestEngine
from betstream.joint import JointState, TestTracker, joint_observe, step_point_test
from betstream.regions import Point, Region, region_label

__all__ = ["ReplayParseError", "ReplayDecision", "parse_records", "replay_ingest"]


class ReplayParseError(ValueError):
    """A record line is malformed; carries the 1-based line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class ReplayDecision:
    """First rejection time for one tested region; None if never."""

    region: str
    decided_at: int | None


def parse_records(source) -> list[tuple[int, int, int, float]]:
    """Parse (lineno, t, arm, x) records; raises ReplayParseError."""
    records = []
    last_t = None
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = {}
        for token in line.split():
            key, sep, value = token.partition("=")
            if not sep:
                raise ReplayParseError(lineno, f"expected key=value, got {token!r}")
            if key in fields:
                raise ReplayParseError(lineno, f"duplicate field {key!r}")
            fields[key] = value
        missing = {"t", "arm", "x"} - fields.keys()
        if missing:
            raise ReplayParseError(lineno, f"missing fields {sorted(missing)}")
        extra = fields.keys() - {"t", "arm", "x"}
        if extra:
            raise ReplayParseError(lineno, f"unknown fields {sorted(extra)}")
        try:
            t = int(fields["t"])
            arm = int(fields["arm"])
            x = float(fields["x"])
        except ValueError as exc:
            raise ReplayParseError(lineno, str(exc)) from exc
        if last_t is not None and t <= last_t:
            raise ReplayParseError(lineno, f"time {t} not strictly increasing")
        if arm < 0:
            raise ReplayParseError(lineno, f"arm index {arm} is negative")
        if not 0.0 <= x <= 1.0:
            raise ReplayParseError(lineno, f"value {x} outside [0, 1]")
        last_t = t
        records.append((lineno, t, arm, x))
    return records


def replay_ingest(
    source,
    alpha: float,
    regions: Region | list[Region],
    c: float = 0.26,
    w: int | None = None,
) -> list[ReplayDecision]:
    """Feed records in order and report each region's first rejection time.

    Decision times are reported on the records' own `t` axis. When `w`
    is omitted it is inferred from the largest arm index seen (or the
    length of a point region); with an explicit `w`, an out-of-range arm
    index is a parse error naming the line.
    """
    region_list = regions if isinstance(regions, list) else [regions]
    if not region_list:
        raise ValueError("need at least one region to test")
    records = parse_records(source)
    if w is None:
        w = 0
        for region in region_list:
            if isinstance(region, Point):
                w = max(w, len(region.m))
        if records:
            w = max(w, max(arm for _, _, arm, _ in records) + 1)
        if w == 0:
            raise ValueError("cannot infer arm count from an empty stream")
    for lineno, _, arm, _ in records:
        if arm >= w:
            raise ReplayParseError(lineno, f"arm index {arm} out of range for w={w}")
    cfg = StreamConfig(c=c)
    point_regions = [r for r in region_list if isinstance(r, Point)]
    other_regions = [r for r in region_list if not isinstance(r, Point)]
    engine = RegionTestEngine(w, cfg, alpha, other_regions)
    point_trackers = [TestTracker(region=r, alpha=alpha) for r in point_regions]
    point_decisions: list[int | None] = [None] * len(point_regions)
    joint = JointState.fresh(w, cfg) if point_regions else None
    for _, t, arm, x in records:
        engine.observe(arm, x)
        engine.step()
        if point_regions:
            joint = joint_observe(joint, arm, x)
            for i, tracker in enumerate(point_trackers):
                if point_decisions[i] is None and step_point_test(tracker, joint):
                    point_decisions[i] = t
    # map engine decisions (observation count) back to record times
    obs_to_t = {i + 1: rec[1] for i, rec in enumerate(records)}
    out = []
    other_idx = 0
    point_idx = 0
    for region in region_list:
        if isinstance(region, Point):
            out.append(
                ReplayDecision(region_label(region), point_decisions[point_idx])
            )
            point_idx += 1
        else:
            decided = engine.decisions()[other_idx]
            out.append(
                ReplayDecision(
                    region_label(region),
                    None if decided is None else obs_to_t[decided],
                )
            )
            other_idx += 1
    return out
