"""Experiment configs (JSON) and trace CSV serialization."""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .problems import Objective, paper_quadratic, psd_quadratic, shifted_quadratic
from .schedules import PolyScheduleParams, Schedule, generic_schedule, polynomial_schedule
from .solver import COLUMNS, VARIANTS, SolverConfig, Trace

CSV_HEADER = ",".join(COLUMNS)
AUTO_STEP_FACTOR = 0.9


class ConfigError(ValueError):
    pass


@dataclass
class Outputs:
    csv_path: str = "trace.csv"
    report_path: str = "report.txt"
    svg_path: Optional[str] = None


@dataclass
class ExperimentConfig:
    problem: dict
    schedule: dict
    s: Union[float, str] = "auto"
    variant: str = "full"
    x0: list = field(default_factory=lambda: [1.0, -1.0])
    x1: list = field(default_factory=lambda: [-1.0, 1.0])
    max_iter: int = 20
    record_every: Optional[int] = None
    outputs: Outputs = field(default_factory=Outputs)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {"problem", "schedule", "s", "variant", "x0", "x1", "max_iter", "record_every", "outputs"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("problem", "schedule"):
            if key not in data:
                raise ConfigError(f"config is missing {key!r}")
        kwargs = dict(data)
        out = kwargs.pop("outputs", None) or {}
        try:
            kwargs["outputs"] = Outputs(**out)
        except TypeError as exc:
            raise ConfigError(f"bad outputs block: {exc}") from None
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self):
        if not isinstance(self.problem, dict) or "type" not in self.problem:
            raise ConfigError("problem must be an object with a 'type'")
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}")
        if not (self.s == "auto" or (isinstance(self.s, (int, float)) and self.s > 0)):
            raise ConfigError(f"s must be a positive number or 'auto', got {self.s!r}")
        if not isinstance(self.max_iter, int) or self.max_iter < 1:
            raise ConfigError("max_iter must be a positive integer")
        for key in ("a", "q", "c", "p"):
            if key not in self.schedule and "eps_expr" not in self.schedule:
                raise ConfigError(f"schedule is missing {key!r}")

    def build_objective(self) -> Objective:
        spec = dict(self.problem)
        kind = spec.pop("type")
        try:
            if kind == "paper_quadratic":
                return paper_quadratic(spec["a"], spec["b"])
            if kind == "shifted_quadratic":
                return shifted_quadratic(spec["u"])
            if kind == "psd_quadratic":
                return psd_quadratic(spec["A"], spec["b"])
        except KeyError as exc:
            raise ConfigError(f"problem {kind!r} is missing {exc}") from None
        raise ConfigError(f"unknown problem type {kind!r}")

    def step_size(self, obj: Objective) -> float:
        if self.s == "auto":
            return AUTO_STEP_FACTOR / obj.lipschitz
        return float(self.s)

    def build_schedule(self, obj: Objective) -> Schedule:
        s = self.step_size(obj)
        sc = self.schedule
        if "eps_expr" in sc or "q_expr" in sc:
            eps = _expr(sc.get("eps_expr", f"{sc.get('c', 1.0)} * k ** -{sc.get('p', 1.5)}"))
            q = _expr(sc.get("q_expr", f"{sc.get('a', 1.0)} * k ** {sc.get('q', 0.8)}"))
            return generic_schedule(s, eps, q, obj.lipschitz)
        try:
            params = PolyScheduleParams(float(sc["a"]), float(sc["q"]), float(sc["c"]), float(sc["p"]))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return polynomial_schedule(params, s, obj.lipschitz)

    def build(self, max_iter: Optional[int] = None) -> SolverConfig:
        obj = self.build_objective()
        sched = self.build_schedule(obj)
        try:
            return SolverConfig(obj, sched, np.array(self.x0, dtype=float), np.array(self.x1, dtype=float),
                                max_iter or self.max_iter, self.variant, self.record_every)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


_EXPR_NAMES = {name: getattr(np, name) for name in ("sqrt", "log", "exp", "log1p", "power", "pi")}


def _expr(text: str):
    """Sequence rule from an arithmetic expression in k (numpy functions allowed)."""
    code = compile(text, "<schedule>", "eval")
    for name in code.co_names:
        if name != "k" and name not in _EXPR_NAMES:
            raise ConfigError(f"name {name!r} not allowed in schedule expression {text!r}")

    def rule(k):
        k = np.asarray(k, dtype=float)
        if np.any(k < 1):
            raise IndexError(f"schedule index must be >= 1, got {k}")
        return np.broadcast_to(eval(code, {"__builtins__": {}}, {**_EXPR_NAMES, "k": k}), k.shape) * 1.0

    return rule


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    try:
        return ExperimentConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def save_config(cfg: ExperimentConfig, path):
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")


def fmt(v) -> str:
    return format(float(v), ".17g")


def write_trace_csv(trace: Trace, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        cols = [trace.columns[name] for name in COLUMNS[1:]]
        for i, k in enumerate(trace.k):
            w.writerow([str(int(k))] + [fmt(c[i]) for c in cols])


def read_trace_csv(path) -> dict:
    """Columns of a trace CSV as numpy arrays (``k`` as int64)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or ",".join(rows[0]) != CSV_HEADER:
        raise ValueError(f"{path}: unexpected header")
    body = rows[1:]
    out = {"k": np.array([int(r[0]) for r in body], dtype=np.int64)}
    for j, name in enumerate(COLUMNS[1:], start=1):
        out[name] = np.array([float(r[j]) for r in body])
    return out


def write_table_csv(path, columns: dict):
    names = list(columns)
    n = len(next(iter(columns.values())))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for i in range(n):
            w.writerow([str(int(columns[c][i])) if c == "k" else fmt(columns[c][i]) for c in names])
