"""Binary ILP intermediate representation, evaluation and LP-format export."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp

from .errors import ModelError

LE, EQ, GE = "<=", "=", ">="
_SENSES = (LE, EQ, GE)
_UNSAFE_CHAR = re.compile(r"[^A-Za-z0-9_]")
_ASCII_UNSAFE = str.maketrans({chr(c): "_" for c in range(128) if not (chr(c).isalnum() or chr(c) == "_")})


@dataclass(frozen=True)
class Constraint:
    name: str
    index: np.ndarray
    coef: np.ndarray
    sense: str
    rhs: float

    def activity(self, x: np.ndarray) -> float:
        return float(self.coef @ x[self.index])


class IlpModel:
    """Minimisation over binary variables.

    Variables are addressed by integer position (declaration order) and carry
    unique names. ``fixed`` pins variables to 0 or 1 without adding rows; the
    solver treats them as constants and the LP export writes them as bounds.
    """

    def __init__(self, name: str = "model"):
        self.name = name
        self.variables: list[str] = []
        self.constraints: list[Constraint] = []
        self.fixed: dict[int, int] = {}
        self._index: dict[str, int] = {}
        self._obj: dict[int, float] = {}
        self._lp_names: list[str] | None = None

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ModelError(f"unknown variable {name!r}") from None

    def add_var(self, name: str) -> int:
        if name in self._index:
            raise ModelError(f"duplicate variable {name!r}")
        self._index[name] = len(self.variables)
        self.variables.append(name)
        self._lp_names = None
        return self._index[name]

    def add_constraint(self, name: str, terms, sense: str, rhs: float) -> Constraint:
        """Add ``sum(coef * x[i]) <sense> rhs``.

        ``terms`` is a mapping or an iterable of (index, coef); repeated
        indices are summed.
        """
        if sense not in _SENSES:
            raise ModelError(f"bad sense {sense!r}")
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[int, float] = {}
        for i, c in items:
            acc[i] = acc.get(i, 0.0) + c
        idx = np.fromiter(acc.keys(), dtype=np.int64, count=len(acc))
        coef = np.fromiter(acc.values(), dtype=float, count=len(acc))
        if idx.size and (idx.min() < 0 or idx.max() >= self.n_vars):
            raise ModelError(f"constraint {name!r} references an undeclared variable")
        if not (np.all(np.isfinite(coef)) and math.isfinite(rhs)):
            raise ModelError(f"constraint {name!r} has non-finite data")
        con = Constraint(name, idx, coef, sense, float(rhs))
        self.constraints.append(con)
        return con

    def add_row(self, name: str, index: np.ndarray, coef: np.ndarray, sense: str, rhs: float) -> Constraint:
        """Array form of :meth:`add_constraint`; ``index`` must be duplicate-free."""
        if sense not in _SENSES:
            raise ModelError(f"bad sense {sense!r}")
        index = np.asarray(index, dtype=np.int64)
        coef = np.asarray(coef, dtype=float)
        if index.shape != coef.shape:
            raise ModelError(f"constraint {name!r}: index/coef length mismatch")
        con = Constraint(name, index, coef, sense, float(rhs))
        self.constraints.append(con)
        return con

    def set_objective(self, terms) -> None:
        items = terms.items() if isinstance(terms, Mapping) else terms
        obj: dict[int, float] = {}
        for i, c in items:
            if not 0 <= i < self.n_vars:
                raise ModelError("objective references an undeclared variable")
            obj[i] = obj.get(i, 0.0) + float(c)
        if not all(math.isfinite(c) for c in obj.values()):
            raise ModelError("non-finite objective coefficient")
        self._obj = obj

    def fix(self, i: int, value: int) -> None:
        if value not in (0, 1):
            raise ModelError("binary variables can only be fixed to 0 or 1")
        self.fixed[i] = value

    def objective_vector(self) -> np.ndarray:
        c = np.zeros(self.n_vars)
        for i, v in self._obj.items():
            c[i] = v
        return c

    def objective_terms(self) -> dict[int, float]:
        return dict(self._obj)

    def matrix(self) -> sp.csr_matrix:
        """All constraint rows as one sparse matrix (row order = declaration order)."""
        m = len(self.constraints)
        if m == 0:
            return sp.csr_matrix((0, self.n_vars))
        lens = np.fromiter((c.index.size for c in self.constraints), dtype=np.int64, count=m)
        indptr = np.concatenate([[0], np.cumsum(lens)])
        indices = np.concatenate([c.index for c in self.constraints]) if indptr[-1] else np.zeros(0, np.int64)
        data = np.concatenate([c.coef for c in self.constraints]) if indptr[-1] else np.zeros(0)
        return sp.csr_matrix((data, indices, indptr), shape=(m, self.n_vars))

    def row_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.array([c.rhs if c.sense in (GE, EQ) else -np.inf for c in self.constraints])
        hi = np.array([c.rhs if c.sense in (LE, EQ) else np.inf for c in self.constraints])
        return lo, hi

    def lp_names(self) -> list[str]:
        """Variable names restricted to [A-Za-z0-9_], unique, stable."""
        if self._lp_names is None:
            self._lp_names = _sanitize_all(self.variables)
        return self._lp_names


def _sanitize_all(names: Iterable[str]) -> list[str]:
    out, seen = [], set()
    for name in names:
        s = name.translate(_ASCII_UNSAFE)
        if not s.isascii():
            s = _UNSAFE_CHAR.sub("_", s)
        if not s or s[0].isdigit() or s[0] in "eE":
            s = "v_" + s
        base, n = s, 1
        while s in seen:
            s = f"{base}_{n}"
            n += 1
        seen.add(s)
        out.append(s)
    return out


class Assignment:
    """Total 0/1 assignment over a model's variables plus its objective value."""

    def __init__(self, model: IlpModel, values):
        if isinstance(values, Mapping):
            x = np.zeros(model.n_vars, dtype=np.int8)
            for name, v in values.items():
                x[model.index(name)] = v
            missing = set(model.variables) - set(values)
            if missing:
                raise ModelError(f"assignment missing {len(missing)} variable(s), e.g. {sorted(missing)[0]!r}")
            values = x
        x = np.asarray(values)
        if x.shape != (model.n_vars,):
            raise ModelError("assignment length does not match the model")
        if np.any((x != 0) & (x != 1)):
            raise ModelError("assignment values must be 0 or 1")
        self.model = model
        self.x = x.astype(np.int8)
        self.objective_value = float(model.objective_vector() @ self.x)

    def __getitem__(self, name: str) -> int:
        return int(self.x[self.model.index(name)])

    def as_dict(self) -> dict[str, int]:
        return {n: int(v) for n, v in zip(self.model.variables, self.x)}

    def ones(self) -> list[str]:
        return [self.model.variables[i] for i in np.flatnonzero(self.x)]

    def replace(self, x) -> "Assignment":
        return Assignment(self.model, x)


@dataclass
class FeasibilityReport:
    feasible: bool
    violations: list[str]
    objective: float

    def __bool__(self):
        return self.feasible


def _fmt(v: float) -> str:
    return f"{v:g}"


def evaluate(model: IlpModel, assignment, tol: float = 1e-9) -> FeasibilityReport:
    """Check every row and every fixing; report violations with their values."""
    if not isinstance(assignment, Assignment):
        assignment = Assignment(model, assignment)
    x = assignment.x.astype(float)
    violations = []
    if model.constraints:
        act = model.matrix() @ x
        for con, a in zip(model.constraints, act):
            if con.sense == GE and a < con.rhs - tol:
                violations.append(f"{con.name}: {_fmt(a)} < {_fmt(con.rhs)}")
            elif con.sense == LE and a > con.rhs + tol:
                violations.append(f"{con.name}: {_fmt(a)} > {_fmt(con.rhs)}")
            elif con.sense == EQ and abs(a - con.rhs) > tol:
                violations.append(f"{con.name}: {_fmt(a)} != {_fmt(con.rhs)}")
    for i, v in model.fixed.items():
        if assignment.x[i] != v:
            violations.append(f"fixed[{model.variables[i]}]: {assignment.x[i]} != {v}")
    return FeasibilityReport(not violations, violations, assignment.objective_value)


def _row_text(names, pos, neg, idx, coef) -> str:
    if idx.size == 0:
        return "0 " + names[0] if names else "0"
    if np.all(coef == 1.0):
        return " ".join(pos[idx].tolist())
    if np.all(np.abs(coef) == 1.0):
        return " ".join(np.where(coef > 0, pos[idx], neg[idx]).tolist())
    parts = []
    for i, c in zip(idx.tolist(), coef.tolist()):
        if c == 1.0:
            parts.append(pos[i])
        elif c == -1.0:
            parts.append(neg[i])
        elif c >= 0:
            parts.append(f"+ {c:.17g} {names[i]}")
        else:
            parts.append(f"- {-c:.17g} {names[i]}")
    return " ".join(parts)


def export_lp_text(model: IlpModel) -> str:
    """Write the model in the CPLEX LP file format.

    Variable and row names are sanitised to [A-Za-z0-9_]. Fixed variables go
    to the Bounds section as ``name = value``.
    """
    names = model.lp_names()
    pos = np.array(["+ " + n for n in names], dtype=object)
    neg = np.array(["- " + n for n in names], dtype=object)
    row_names = _sanitize_all(c.name for c in model.constraints)
    out = [f"\\ {model.name}", "Minimize"]
    obj = model.objective_terms()
    if obj:
        idx = np.fromiter(obj.keys(), dtype=np.int64)
        coef = np.fromiter(obj.values(), dtype=float)
        out.append(" obj: " + _row_text(names, pos, neg, idx, coef))
    else:
        out.append(" obj: " + ("0 " + names[0] if names else ""))
    out.append("Subject To")
    for rn, con in zip(row_names, model.constraints):
        op = {LE: "<=", GE: ">=", EQ: "="}[con.sense]
        out.append(f" {rn}: {_row_text(names, pos, neg, con.index, con.coef)} {op} {con.rhs:.17g}")
    if model.fixed:
        out.append("Bounds")
        out.extend(f" {names[i]} = {v}" for i, v in sorted(model.fixed.items()))
    out.append("Binary")
    out.extend(" " + n for n in names)
    out.append("End")
    return "\n".join(out) + "\n"


def parse_solution_text(model: IlpModel, text: str) -> Assignment:
    """Read ``name value`` lines (LP-sanitised or original names).

    Variables absent from the file are taken as 0; values are rounded to the
    nearest integer.
    """
    lookup = {n: i for i, n in enumerate(model.lp_names())}
    lookup.update(model._index)
    x = np.zeros(model.n_vars, dtype=np.int8)
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 2:
            raise ModelError(f"bad solution line {line!r}")
        name, value = parts[0], float(parts[1])
        if name not in lookup:
            raise ModelError(f"unknown variable {name!r} in solution")
        x[lookup[name]] = int(round(value))
    return Assignment(model, x)
