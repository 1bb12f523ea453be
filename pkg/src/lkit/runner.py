"""Shared machinery for batch feature computation: building feature objects
from instance configs, per-row seeding, and CSV assembly. Used by the CLI
and the HTTP service."""
from __future__ import annotations

import csv
import io
import json
import os
from typing import Optional

import numpy as np

from lkit.core import FeatureObject, SampleSpec, create_feature_object, create_initial_sample
from lkit.problems import Problem, make_problem
from lkit.registry import calculate_features, feature_set_ids

META_COLUMNS = ("problem", "dim", "seed", "replication", "sample_seed")


def row_seed(master_seed: int, index: int) -> int:
    """Stable per-row seed derived from the master seed."""
    seq = np.random.SeedSequence([int(master_seed) & 0xFFFFFFFF, int(index)])
    return int(seq.generate_state(1)[0])


def parse_control_value(text: str):
    """Parse a control value from its CLI string form.

    Tries JSON first (numbers, booleans, null, arrays), then comma lists,
    then falls back to the raw string.
    """
    text = text.strip()
    try:
        return json.loads(text)
    except (json.JSONDecodeError, ValueError):
        pass
    if "," in text:
        return tuple(parse_control_value(part) for part in text.split(","))
    return text


def parse_control_args(pairs) -> dict:
    control = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ValueError(f"control argument '{pair}' is not of the form key=value")
        key, value = pair.split("=", 1)
        control[key.strip()] = parse_control_value(value)
    return control


def read_design_csv(text: str):
    """Initial-design CSV: header x1..xd,y; one observation per row."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("design CSV is empty")
    header = [h.strip() for h in header]
    if len(header) < 2 or header[-1] != "y":
        raise ValueError("design CSV must have columns x1,...,xd,y")
    for i, name in enumerate(header[:-1]):
        if name != f"x{i + 1}":
            raise ValueError(f"design CSV column {i + 1} must be named 'x{i + 1}', got '{name}'")
    rows = []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ValueError(f"design CSV row {line_no} has {len(row)} fields, "
                             f"expected {len(header)}")
        try:
            rows.append([float(c) for c in row])
        except ValueError:
            raise ValueError(f"design CSV row {line_no} contains a non-numeric field")
    if not rows:
        raise ValueError("design CSV has no data rows")
    data = np.array(rows)
    return data[:, :-1], data[:, -1]


def build_feature_object(problem: Optional[Problem] = None,
                         design: Optional[tuple] = None,
                         n: int = 0, sample_method: str = "uniform",
                         sample_seed: int = 0, blocks=None,
                         lower=None, upper=None) -> FeatureObject:
    """Feature object either from a problem (sampled) or a fixed design."""
    if design is not None:
        X, y = design
        return create_feature_object(X, y, lower=lower, upper=upper, blocks=blocks)
    if problem is None:
        raise ValueError("either a problem or a design is required")
    lo = problem.lower if lower is None else lower
    up = problem.upper if upper is None else upper
    spec = SampleSpec(n_obs=n, dim=problem.dim,
                      lower=lo, upper=up, method=sample_method, seed=sample_seed)
    X = create_initial_sample(spec)
    y = problem.batch(X)
    return create_feature_object(X, y, lower=lo, upper=up, blocks=blocks,
                                 function=problem)


def compute_instance_row(problem_name: str, dim: int, instance_seed: int,
                         replication: int, sample_seed: int, sets, control,
                         n: int, sample_method: str, blocks, lower, upper,
                         feature_seed: int, design: Optional[tuple] = None):
    """One output row: metadata, computed features, per-set errors."""
    problem = None
    if design is None:
        problem = make_problem(problem_name, dim, seed=instance_seed)
    fo = build_feature_object(problem=problem, design=design, n=n,
                              sample_method=sample_method, sample_seed=sample_seed,
                              blocks=blocks, lower=lower, upper=upper)
    features, errors = calculate_features(fo, sets=sets, control=control,
                                          seed=feature_seed, collect_errors=True)
    meta = {
        "problem": problem_name,
        "dim": dim,
        "seed": instance_seed,
        "replication": replication,
        "sample_seed": sample_seed,
    }
    return meta, features, errors


def canonical_columns(rows: list[dict]) -> list[str]:
    """Union of feature names in canonical registry order."""
    columns: list[str] = []
    seen = set()
    for set_id in feature_set_ids():
        prefix = f"{set_id}."
        for row in rows:
            for key in row:
                if key.startswith(prefix) and key not in seen:
                    seen.add(key)
                    columns.append(key)
    return columns


def format_value(value) -> str:
    if value is None:
        return "NA"
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(rows: list[tuple]) -> str:
    """Long-format CSV: metadata columns then features in canonical order."""
    feature_rows = [features for _, features, _ in rows]
    columns = canonical_columns(feature_rows)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(META_COLUMNS) + columns)
    for meta, features, _ in rows:
        writer.writerow([format_value(meta.get(c)) for c in META_COLUMNS] +
                        [format_value(features.get(c)) for c in columns])
    return buf.getvalue()


def rows_to_json(rows: list[tuple]) -> str:
    out = []
    for meta, features, errors in rows:
        entry = dict(meta)
        entry["features"] = features
        if errors:
            entry["errors"] = errors
        out.append(entry)
    return json.dumps(out, indent=2)


def max_workers() -> int:
    env = os.environ.get("LKIT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return min(8, os.cpu_count() or 1)
