"""Versioned checkpointing of joint state and in-flight tests.

The file is a self-describing JSON document holding the betting
configuration, every stream's observations with their stored prefix
means, and each tracker's hypothesis, level, running extreme, and
decision time. Floats round-trip exactly through the JSON encoder, so
loading reproduces all capital evaluations bit-for-bit.
"""

from __future__ import annotations

import json
import math

import numpy as np

from betstream.capital import StreamConfig, StreamState
from betstream.joint import JointState, TestTracker
from betstream.regions import (
    BestArm,
    Point,
    Polytope,
    Region,
    ThresholdAbove,
    ThresholdBelow,
)

__all__ = ["CheckpointError", "checkpoint_save", "checkpoint_load"]

FORMAT = "betstream-checkpoint"
VERSION = 1


class CheckpointError(ValueError):
    """Checkpoint file is missing, corrupt, or from an unknown version."""


def _region_to_doc(region) -> dict:
    if isinstance(region, Point):
        return {"kind": "point", "m": list(region.m)}
    if isinstance(region, ThresholdBelow):
        return {"kind": "thr_below", "arm": region.arm, "xi": region.xi}
    if isinstance(region, ThresholdAbove):
        return {"kind": "thr_above", "arm": region.arm, "xi": region.xi}
    if isinstance(region, BestArm):
        return {"kind": "best_arm", "arm": region.arm}
    if isinstance(region, Polytope):
        return {
            "kind": "polytope",
            "constraints": [[list(coeffs), bound] for coeffs, bound in region.constraints],
        }
    # raw point vector
    return {"kind": "point", "m": [float(v) for v in np.asarray(region).reshape(-1)]}


def _region_from_doc(doc: dict) -> Region:
    kind = doc.get("kind")
    if kind == "point":
        return Point(tuple(doc["m"]))
    if kind == "thr_below":
        return ThresholdBelow(doc["arm"], doc["xi"])
    if kind == "thr_above":
        return ThresholdAbove(doc["arm"], doc["xi"])
    if kind == "best_arm":
        return BestArm(doc["arm"])
    if kind == "polytope":
        return Polytope(
            tuple((tuple(coeffs), bound) for coeffs, bound in doc["constraints"])
        )
    raise CheckpointError(f"unknown region kind {kind!r}")


def _stream_to_doc(stream: StreamState) -> dict:
    mu_prev = [None if math.isnan(v) else float(v) for v in stream.mu_prev]
    return {"x": [float(v) for v in stream.x], "mu_prev": mu_prev, "sum_x": stream.sum_x}


def _stream_from_doc(doc: dict) -> StreamState:
    x = np.array(doc["x"], dtype=float)
    mu_prev = np.array(
        [math.nan if v is None else v for v in doc["mu_prev"]], dtype=float
    )
    if x.shape != mu_prev.shape:
        raise CheckpointError("stream arrays have mismatched lengths")
    return StreamState(n=x.size, sum_x=float(doc["sum_x"]), mu_prev=mu_prev, x=x)


def checkpoint_save(joint: JointState, trackers, path) -> None:
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "c": joint.cfg.c,
        "gamma_floor": joint.cfg.gamma_floor,
        "t": joint.t,
        "pulls": list(joint.pulls),
        "streams": [_stream_to_doc(s) for s in joint.streams],
        "trackers": [
            {
                "region": _region_to_doc(tr.region),
                "alpha": tr.alpha,
                "running_extreme": tr.running_extreme,
                "decided_at": tr.decided_at,
            }
            for tr in trackers
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def checkpoint_load(path) -> tuple[JointState, list[TestTracker]]:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CheckpointError(f"corrupt checkpoint file {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise CheckpointError(f"not a {FORMAT} file: {path}")
    if doc.get("version") != VERSION:
        raise CheckpointError(
            f"unsupported checkpoint version {doc.get('version')!r} (expected {VERSION})"
        )
    try:
        cfg = StreamConfig(c=doc["c"], gamma_floor=doc["gamma_floor"])
        streams = tuple(_stream_from_doc(s) for s in doc["streams"])
        joint = JointState(
            streams=streams, cfg=cfg, t=int(doc["t"]), pulls=tuple(doc["pulls"])
        )
        trackers = [
            TestTracker(
                region=_region_from_doc(tr["region"]),
                alpha=tr["alpha"],
                running_extreme=tr["running_extreme"],
                decided_at=tr["decided_at"],
            )
            for tr in doc["trackers"]
        ]
    except (KeyError, TypeError) as exc:
        raise CheckpointError(f"malformed checkpoint file {path}: {exc}") from exc
    return joint, trackers
