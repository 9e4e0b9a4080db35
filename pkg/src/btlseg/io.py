"""File formats: observation CSV, segmentation JSON, scenario config.

Observation CSV is a three-column file ``t,winner,loser`` with times
strictly increasing from 1 and items as string labels; labels are mapped to
indices by first appearance unless an explicit item universe is supplied.
Segmentations travel as JSON with the time-axis length and the convention
marker.  Scenario configs are flat ``key = value`` text.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .dp import Segmentation
from .model import ComparisonGraph, ObservationSeries
from .simulate import ChangeSpec, Scenario

CONVENTION = "first-index-of-new-regime"


class MalformedInputError(ValueError):
    """Raised on any structural problem with an input file."""


def default_labels(n: int) -> list[str]:
    return [str(i + 1) for i in range(n)]


def write_observations_csv(path, series: ObservationSeries, labels=None) -> None:
    labels = labels or default_labels(series.n)
    lines = ["t,winner,loser"]
    for t, (w, l) in enumerate(zip(series.winners, series.losers), start=1):
        lines.append(f"{t},{labels[w]},{labels[l]}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_observations_csv(
    path, items: list[str] | None = None, graph: ComparisonGraph | None = None
) -> tuple[ObservationSeries, list[str]]:
    """Parse an observation CSV into a series plus its label mapping.

    ``items`` fixes the label universe (and its index order); otherwise
    labels are indexed by first appearance.  ``graph`` restricts which pairs
    are legal; otherwise the complete graph over the items is assumed.
    """
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != "t,winner,loser":
        raise MalformedInputError("expected header 't,winner,loser'")
    index: dict[str, int] = {}
    if items is not None:
        for label in items:
            if label in index:
                raise MalformedInputError(f"duplicate item label {label!r}")
            index[label] = len(index)
    fixed_universe = items is not None
    rows: list[tuple[str, str]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.strip().split(",")
        if len(parts) != 3:
            raise MalformedInputError(f"line {lineno}: expected 3 fields")
        t_str, w_label, l_label = (p.strip() for p in parts)
        try:
            t = int(t_str)
        except ValueError as exc:
            raise MalformedInputError(f"line {lineno}: bad time {t_str!r}") from exc
        if t != lineno - 1:
            raise MalformedInputError(
                f"line {lineno}: time {t} out of order (times must be exactly 1..T)"
            )
        if w_label == l_label:
            raise MalformedInputError(f"line {lineno}: winner equals loser")
        for label in (w_label, l_label):
            if label not in index:
                if fixed_universe:
                    raise MalformedInputError(f"line {lineno}: unknown item {label!r}")
                index[label] = len(index)
        rows.append((w_label, l_label))
    if not rows:
        raise MalformedInputError("no observations")
    labels = sorted(index, key=index.get)
    n = len(labels)
    if graph is None:
        graph = ComparisonGraph.complete(n)
    elif graph.n < n:
        raise MalformedInputError("comparison graph smaller than the observed item set")
    winners = np.array([index[w] for w, _ in rows], dtype=np.int64)
    losers = np.array([index[l] for _, l in rows], dtype=np.int64)
    try:
        series = ObservationSeries(graph, winners, losers)
    except ValueError as exc:
        raise MalformedInputError(str(exc)) from exc
    return series, labels


def write_segmentation_json(path, seg: Segmentation, extra: dict | None = None) -> None:
    payload = {
        "t_max": seg.t_max,
        "change_points": list(seg.change_points),
        "convention": CONVENTION,
    }
    if extra:
        payload.update(extra)
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_segmentation_json(path) -> Segmentation:
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MalformedInputError(f"invalid JSON: {exc}") from exc
    try:
        t_max = int(payload["t_max"])
        cps = [int(c) for c in payload["change_points"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInputError("segmentation JSON needs t_max and change_points") from exc
    convention = payload.get("convention", CONVENTION)
    if convention != CONVENTION:
        raise MalformedInputError(f"unsupported convention {convention!r}")
    try:
        return Segmentation(change_points=tuple(cps), t_max=t_max)
    except ValueError as exc:
        raise MalformedInputError(str(exc)) from exc


def read_edge_list(path) -> tuple[ComparisonGraph, list[str]]:
    """Graph file with one edge per line: two whitespace-separated labels."""
    index: dict[str, int] = {}
    edges = set()
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise MalformedInputError(f"edge list line {lineno}: expected two labels")
        a, b = parts
        if a == b:
            raise MalformedInputError(f"edge list line {lineno}: self-loop")
        for label in (a, b):
            if label not in index:
                index[label] = len(index)
        edges.add((min(index[a], index[b]), max(index[a], index[b])))
    if not edges:
        raise MalformedInputError("edge list is empty")
    labels = sorted(index, key=index.get)
    return ComparisonGraph(len(labels), frozenset(edges)), labels


_CHANGE_TOKENS = {
    "i": ChangeSpec("type1_reverse"),
    "type1": ChangeSpec("type1_reverse"),
    "reverse": ChangeSpec("type1_reverse"),
    "type1_reverse": ChangeSpec("type1_reverse"),
    "ii": ChangeSpec("type2_block_reverse"),
    "type2": ChangeSpec("type2_block_reverse"),
    "block_reverse": ChangeSpec("type2_block_reverse"),
    "type2_block_reverse": ChangeSpec("type2_block_reverse"),
    "iii": ChangeSpec("type3_block_exchange"),
    "type3": ChangeSpec("type3_block_exchange"),
    "block_exchange": ChangeSpec("type3_block_exchange"),
    "type3_block_exchange": ChangeSpec("type3_block_exchange"),
    "random": ChangeSpec("random_perm"),
    "random_perm": ChangeSpec("random_perm"),
}


def parse_change_token(token: str) -> ChangeSpec:
    token = token.strip()
    key = token.lower()
    if key in _CHANGE_TOKENS:
        return _CHANGE_TOKENS[key]
    if key.startswith(("partial:", "partial_random_perm:")):
        frac_str = token.split(":", 1)[1]
        try:
            frac = float(frac_str)
        except ValueError as exc:
            raise MalformedInputError(f"bad partial fraction {frac_str!r}") from exc
        try:
            return ChangeSpec("partial_random_perm", fraction=frac)
        except ValueError as exc:
            raise MalformedInputError(str(exc)) from exc
    raise MalformedInputError(f"unknown change kind token {token!r}")


def parse_config(text: str, base_dir: Path | None = None) -> tuple[Scenario, list[str]]:
    """Parse a scenario config; returns the scenario and its item labels."""
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise MalformedInputError(f"config line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        values[key.strip().lower()] = value.strip()
    try:
        n = int(values["n"])
        delta = int(values["delta"])
    except KeyError as exc:
        raise MalformedInputError(f"config is missing key {exc}") from exc
    except ValueError as exc:
        raise MalformedInputError(str(exc)) from exc
    changes_text = values.get("changes", "")
    changes = tuple(
        parse_change_token(tok) for tok in changes_text.split(",") if tok.strip()
    )
    try:
        p = float(values.get("p", "0.9"))
        seed = int(values.get("seed", "0"))
    except ValueError as exc:
        raise MalformedInputError(str(exc)) from exc
    graph_value = values.get("graph", "complete")
    if graph_value == "complete":
        graph = None
        labels = default_labels(n)
    else:
        graph_path = Path(graph_value)
        if base_dir is not None and not graph_path.is_absolute():
            graph_path = base_dir / graph_path
        graph, labels = read_edge_list(graph_path)
        if graph.n != n:
            raise MalformedInputError(
                f"edge list defines {graph.n} items but config says n = {n}"
            )
    try:
        scenario = Scenario(
            n=n,
            delta_spacing=delta,
            changes=changes,
            graph=graph,
            max_win_prob=p,
            rng_seed=seed,
        )
    except ValueError as exc:
        raise MalformedInputError(str(exc)) from exc
    return scenario, labels


def scenario_to_config(scenario: Scenario, graph_value: str = "complete") -> str:
    """Serialize a scenario back to the flat config format."""
    tokens = []
    for spec in scenario.changes:
        if spec.kind == "partial_random_perm":
            tokens.append(f"partial:{spec.fraction}")
        else:
            tokens.append(spec.kind)
    lines = [
        f"n = {scenario.n}",
        f"delta = {scenario.delta_spacing}",
        f"changes = {','.join(tokens)}",
        f"p = {scenario.max_win_prob}",
        f"seed = {scenario.rng_seed}",
        f"graph = {graph_value}",
    ]
    return "\n".join(lines) + "\n"
