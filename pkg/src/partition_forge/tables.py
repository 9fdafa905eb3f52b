"""CSV layouts shared by the pool directory, the tasks and the reports."""

from __future__ import annotations

import csv
from pathlib import Path

from .errors import ValidationError
from .metrics import PROPERTY_NAMES, PropertyVector

PROPERTY_HEADER = ("solution_id", "fitness_tag") + PROPERTY_NAMES
RESULT_HEADER = ("solution_id", "task", "centrality", "class", "precision", "recall",
                 "f1", "support", "accuracy", "auc", "error")


def fmt(x) -> str:
    """Stable text for a CSV cell; floats use their shortest round-trip form."""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])


def write_properties_csv(path, rows) -> None:
    """``rows`` are ``(solution_id, fitness_tag, PropertyVector)`` triples."""
    write_csv(path, PROPERTY_HEADER,
              ([sid, tag, *pv.to_array().tolist()] for sid, tag, pv in rows))


def read_properties_csv(path) -> list[tuple[int, str, PropertyVector]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(PROPERTY_HEADER) - set(reader.fieldnames or ())
        if missing:
            raise ValidationError(f"{path}: missing property columns {sorted(missing)}")
        return [
            (int(row["solution_id"]), row["fitness_tag"],
             PropertyVector.from_array(float(row[c]) for c in PROPERTY_NAMES))
            for row in reader
        ]


def result_rows(solution_id, task, result, centrality="", error=""):
    """Two CSV rows (class 0, class 1) for one TaskResult, or one error row."""
    if result is None:
        return [[solution_id, task, centrality, "", "", "", "", "", "", "", error]]
    return [
        [solution_id, task, centrality, cls, float(result.precision[cls]),
         float(result.recall[cls]), float(result.f1[cls]), int(result.support[cls]),
         float(result.accuracy), float(result.auc), ""]
        for cls in (0, 1)
    ]


def _row_key(row):
    return (str(row[1]), str(row[2]), int(row[0]), str(row[3]))


def merge_results_csv(path, rows) -> None:
    """Insert rows into ``results.csv``, replacing any with the same key.

    The key is ``(task, centrality, solution_id, class)``. Output is
    sorted by key so that re-running a task yields an identical file.
    """
    path = Path(path)
    table = {}
    if path.exists():
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is not None and tuple(header) != RESULT_HEADER:
                raise ValidationError(f"{path}: unexpected results header {header}")
            for row in reader:
                table[_row_key(row)] = row
    new = {}
    for row in rows:
        row = [fmt(x) for x in row]
        new[_row_key(row)] = row
    stale = {(k[0], k[1], k[2]) for k in new}
    table = {k: v for k, v in table.items() if (k[0], k[1], k[2]) not in stale}
    table.update(new)
    write_csv(path, RESULT_HEADER, (table[k] for k in sorted(table)))


def read_results_csv(path, task, metric="f1", cls=1, centrality="") -> dict[int, float]:
    """Map solution id -> metric value for one task (and centrality)."""
    out = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            if row["task"] != task or row["centrality"] != centrality or row["error"]:
                continue
            if metric in ("accuracy", "auc") or row["class"] == str(cls):
                out[int(row["solution_id"])] = float(row[metric])
    return out
