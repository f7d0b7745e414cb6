"""CSV and JSON formats used by the command-line tools.

Moment sequences travel as two-column CSV (n,value) with the n=0 row
mandatory; atomic measures as (location,weight); flow tables long-form as
(t,n,m_n); simulation moment tables as (rep,t,n,S_n); spectral samples
wide-form with one replica per row. Verification reports are JSON with a
schema_version field.
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .measures import AtomicMeasure, MomentSequence

REPORT_SCHEMA_VERSION = 1


def parse_time_grid(text: str) -> np.ndarray:
    """Parse 'start:step:stop' (stop inclusive up to rounding) or 't1,t2,...'."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ParameterError("time grid must be start:step:stop or a comma list")
        start, step, stop = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ParameterError("time grid needs step > 0 and stop >= start")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return start + step * np.arange(count)
    try:
        values = [float(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise ParameterError(f"bad time grid {text!r}") from exc
    if not values:
        raise ParameterError("empty time grid")
    return np.asarray(values)


def write_moments_csv(path: str | Path, moments) -> None:
    values = np.asarray(moments, dtype=float)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "value"])
        for n, value in enumerate(values):
            writer.writerow([n, repr(float(value))])


def read_moments_csv(path: str | Path) -> MomentSequence:
    rows: dict[int, float] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["n", "value"]:
            raise ParameterError(f"{path}: expected header 'n,value'")
        for row in reader:
            rows[int(row["n"])] = float(row["value"])
    if 0 not in rows:
        raise ParameterError(f"{path}: the n=0 row is mandatory")
    n_max = max(rows)
    if set(rows) != set(range(n_max + 1)):
        raise ParameterError(f"{path}: orders must be contiguous from 0")
    return MomentSequence(np.array([rows[n] for n in range(n_max + 1)]))


def write_measure_csv(path: str | Path, measure: AtomicMeasure) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["location", "weight"])
        for loc, w in zip(measure.locations, measure.weights):
            writer.writerow([repr(float(loc)), repr(float(w))])


def read_measure_csv(path: str | Path) -> AtomicMeasure:
    locs: list[float] = []
    weights: list[float] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        expected = ["location", "weight"]
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != expected:
            raise ParameterError(f"{path}: expected header 'location,weight'")
        for row in reader:
            locs.append(float(row["location"]))
            weights.append(float(row["weight"]))
    if not locs:
        raise ParameterError(f"{path}: empty measure")
    return AtomicMeasure.from_points(np.array(locs), np.array(weights))


def write_sample_csv(path: str | Path, eigenvalues: np.ndarray, weights: np.ndarray | None = None) -> None:
    """One replica per row: replica,lambda_1..lambda_N[,w_1..w_N]."""
    eigenvalues = np.atleast_2d(eigenvalues)
    n = eigenvalues.shape[1]
    header = ["replica"] + [f"lambda_{i}" for i in range(1, n + 1)]
    if weights is not None:
        weights = np.atleast_2d(weights)
        header += [f"w_{i}" for i in range(1, n + 1)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for r in range(eigenvalues.shape[0]):
            row = [r] + [repr(float(v)) for v in eigenvalues[r]]
            if weights is not None:
                row += [repr(float(v)) for v in weights[r]]
            writer.writerow(row)


def read_sample_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray | None]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        lam_cols = [i for i, name in enumerate(header) if name.startswith("lambda_")]
        w_cols = [i for i, name in enumerate(header) if name.startswith("w_")]
        if header[0] != "replica" or not lam_cols:
            raise ParameterError(f"{path}: expected replica,lambda_1,... header")
        eig_rows, w_rows = [], []
        for row in reader:
            eig_rows.append([float(row[i]) for i in lam_cols])
            if w_cols:
                w_rows.append([float(row[i]) for i in w_cols])
    eigs = np.asarray(eig_rows)
    return eigs, (np.asarray(w_rows) if w_cols else None)


def write_flow_csv(path: str | Path, times: np.ndarray, table: np.ndarray) -> None:
    """Long format t,n,m_n for a table of shape (len(times), n_max+1)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "n", "m_n"])
        for i, t in enumerate(times):
            for n in range(table.shape[1]):
                writer.writerow([repr(float(t)), n, repr(float(table[i, n]))])


def read_flow_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    cells: dict[tuple[float, int], float] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["t", "n", "m_n"]:
            raise ParameterError(f"{path}: expected header 't,n,m_n'")
        for row in reader:
            cells[(float(row["t"]), int(row["n"]))] = float(row["m_n"])
    times = sorted({t for t, _ in cells})
    n_max = max(n for _, n in cells)
    table = np.array([[cells[(t, n)] for n in range(n_max + 1)] for t in times])
    return np.asarray(times), table


def write_sim_moments_csv(path: str | Path, times: np.ndarray, table: np.ndarray, rep: int | str = "mean") -> None:
    """Long format rep,t,n,S_n."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rep", "t", "n", "S_n"])
        for i, t in enumerate(times):
            for n in range(table.shape[1]):
                writer.writerow([rep, repr(float(t)), n, repr(float(table[i, n]))])


def write_positions_csv(path: str | Path, times: np.ndarray, positions: np.ndarray, rep: int = 0) -> None:
    """Wide format rep,t,x_1..x_N."""
    n = positions.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rep", "t"] + [f"x_{i}" for i in range(1, n + 1)])
        for i, t in enumerate(times):
            writer.writerow([rep, repr(float(t))] + [repr(float(v)) for v in positions[i]])


@dataclass
class CheckResult:
    """One named numeric check inside a verification report."""

    name: str
    passed: bool
    value: float
    tolerance: float
    details: dict = field(default_factory=dict)


@dataclass
class VerificationReport:
    """Machine-readable verification outcome (JSON schema version 1)."""

    experiment: str
    parameters: dict
    seed: int
    checks: list[CheckResult]
    wall_time_s: float
    schema_version: int = REPORT_SCHEMA_VERSION

    @property
    def overall_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "experiment": self.experiment,
            "parameters": self.parameters,
            "seed": self.seed,
            "checks": [asdict(c) for c in self.checks],
            "overall_pass": self.overall_pass,
            "wall_time_s": self.wall_time_s,
        }

    def write_json(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, default=_json_default)
            fh.write("\n")

    def summary_lines(self) -> list[str]:
        lines = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            lines.append(f"[{status}] {c.name}: value={c.value:.6g} tol={c.tolerance:.3g}")
        lines.append(f"overall: {'PASS' if self.overall_pass else 'FAIL'}")
        return lines


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def read_report_json(path: str | Path) -> dict:
    with open(path) as fh:
        report = json.load(fh)
    if report.get("schema_version") != REPORT_SCHEMA_VERSION:
        raise ParameterError(f"{path}: unsupported schema_version")
    return report
