"""JSON and CSV serialization of solver runs.

Floats go through ``repr`` (shortest round-trip form) in JSON and ``%.17g``
in CSV, so nothing is lost on a write/read cycle.  Non-finite values become
``null`` in JSON and ``inf``/``nan`` in CSV.
"""

import csv
import json
import math

import numpy as np

SCHEMA_VERSION = 1

TRIPLET_COLUMNS = (
    "index",
    "sigma",
    "in_interval",
    "spurious",
    "valid",
    "tau",
    "residual_estimated",
    "residual_exact",
)


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    return obj


def write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(to_jsonable(payload), fh, indent=2, allow_nan=False)
        fh.write("\n")


def fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def write_csv(path, header, rows, comments=None):
    with open(path, "w", newline="") as fh:
        for key, value in (comments or {}).items():
            fh.write(f"# {key}={value}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([cell if isinstance(cell, str) else fmt(cell) for cell in row])


def triplet_rows(result):
    t = result.triplets
    res = result.residuals
    exact = res.exact if res.exact is not None else np.full(t.count, np.nan)
    for i in range(t.count):
        yield (
            i,
            t.sigma[i],
            t.in_interval[i],
            result.verdict.spurious[i],
            t.valid[i],
            result.verdict.tau[i],
            res.estimated[i],
            exact[i],
        )


def write_triplets_csv(path, result):
    write_csv(path, TRIPLET_COLUMNS, triplet_rows(result))


def result_payload(result, config=None, accuracy=None):
    """Structured report of a run: config echo, counts, timings, triplet table."""
    params = result.params
    res = result.residuals
    t = result.triplets
    exact = res.exact if res.exact is not None else np.full(t.count, np.nan)
    return {
        "schema_version": SCHEMA_VERSION,
        "config": config or {},
        "mode": result.mode,
        "params": {
            "L": params.L,
            "M": params.M,
            "N": params.N,
            "ell": params.ell,
            "delta": params.delta,
            "eps": params.eps,
            "seed": params.seed,
        },
        "seed": params.seed,
        "contour": result.rule.describe(),
        "transposed": result.transposed,
        "rank": result.rank,
        "candidates": t.count,
        "in_interval": int(np.count_nonzero(t.in_interval)),
        "selected": result.count,
        "filter_gain": result.filter_gain,
        "spurious_threshold": result.verdict.threshold,
        "calibration": {"index": res.calibration_index, "mu": res.mu},
        "timings": result.timings,
        "accuracy": accuracy,
        "notes": list(result.notes),
        "triplets": [
            {
                "sigma": t.sigma[i],
                "in_interval": t.in_interval[i],
                "spurious": result.verdict.spurious[i],
                "valid": t.valid[i],
                "tau": result.verdict.tau[i],
                "residual_estimated": res.estimated[i],
                "residual_exact": exact[i],
                "residual_raw": None if res.raw is None else res.raw[i],
            }
            for i in range(t.count)
        ],
    }
