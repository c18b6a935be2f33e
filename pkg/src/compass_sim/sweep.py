"""Parameter sweeps, best-code maps, pseudothresholds and logical bias."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from itertools import product

import numpy as np

from .codes import CODE_NAMES, canonical_name
from .experiment import BASES, ExperimentResult, ExperimentSpec, run_experiment
from .noise import NoiseParams, physical_comparator_rate

# axis name -> NoiseParams.from_rates keyword; "p2q" also sets p1q = p2q / 10
AXES = ("p2q", "p1q", "inv_t2", "rabi_ratio", "p2d", "eps_ms")
ALIASES = {"invT2": "inv_t2", "rabiRatio": "rabi_ratio", "epsMS": "eps_ms", "pMS": "p2q", "p_ms": "p2q"}


def axis_name(name: str) -> str:
    """Canonical axis name; camel-case aliases are accepted."""
    name = ALIASES.get(name, name)
    if name not in AXES:
        raise ValueError(f"unknown axis {name!r}; choose from {AXES}")
    return name


def bias_zz(result_x: ExperimentResult | float, result_z: ExperimentResult | float) -> float | None:
    """``r_ZZ / (r_XX + r_ZZ)`` from the X- and Z-basis violation rates; None if both are 0."""
    rx = getattr(result_x, "rate", result_x)
    rz = getattr(result_z, "rate", result_z)
    if rx + rz == 0:
        return None
    return rz / (rx + rz)


def bias_zz_error(result_x: ExperimentResult, result_z: ExperimentResult) -> float:
    """Standard error of :func:`bias_zz` by first-order propagation."""
    rx, rz = result_x.rate, result_z.rate
    if rx + rz == 0:
        return float("nan")
    d = (rx + rz) ** 2
    return math.hypot(rx / d * result_z.std_error, rz / d * result_x.std_error)


def noise_from(values: dict) -> NoiseParams:
    """Noise parameters from axis-style keys (see :data:`AXES`)."""
    v = {ALIASES.get(k, k): val for k, val in values.items()}
    for k in AXES:
        if k in v and not v[k] >= 0:
            raise ValueError(f"{k} must be non-negative, got {v[k]}")
    unknown = set(v) - set(AXES) - {"t1q", "t2q", "central_mode"}
    if unknown:
        raise ValueError(f"unknown noise parameters {sorted(unknown)}")
    extra = {k: v.pop(k) for k in ("t1q", "t2q", "central_mode") if k in v}
    p2d = v.pop("p2d", 0.0)
    if p2d:
        if any(v.get(k, 0) for k in ("p2q", "p1q", "inv_t2", "rabi_ratio", "eps_ms")):
            raise ValueError("p2d cannot be combined with ion-trap parameters")
        return NoiseParams.depolarizing(p2d, **extra)
    if "eps_ms" in v:
        if "p2q" in v:
            raise ValueError("give either p2q or eps_ms, not both")
        v["p2q"] = math.sin(v.pop("eps_ms")) ** 2
    p2q = v.get("p2q", 0.0)
    p1q = v.get("p1q", p2q / 10)
    return NoiseParams.from_rates(p1q=p1q, p2q=p2q, inv_t2=v.get("inv_t2", 0.0),
                                  rabi_ratio=v.get("rabi_ratio", 0.0), **extra)


@dataclass(frozen=True)
class Axis:
    name: str
    values: tuple[float, ...]

    @classmethod
    def parse(cls, text: str) -> "Axis":
        """``name:lo:hi:log|lin:n`` or ``name:v1,v2,...``."""
        parts = text.split(":")
        if len(parts) == 2:
            name, vals = parts
            values = tuple(float(x) for x in vals.split(",") if x)
        elif len(parts) == 5:
            name, lo, hi, scale, n = parts
            lo, hi, n = float(lo), float(hi), int(n)
            if n < 1:
                raise ValueError("an axis needs at least one point")
            if scale == "log":
                if lo <= 0 or hi <= 0:
                    raise ValueError("log axis bounds must be positive")
                values = tuple(float(x) for x in np.geomspace(lo, hi, n))
            elif scale == "lin":
                values = tuple(float(x) for x in np.linspace(lo, hi, n))
            else:
                raise ValueError(f"axis scale must be 'log' or 'lin', got {scale!r}")
        else:
            raise ValueError(f"cannot parse axis {text!r}")
        name = axis_name(name)
        if not values:
            raise ValueError(f"axis {name!r} has no values")
        return cls(name, values)


@dataclass
class Cell:
    params: dict
    p_phys: float
    results: dict = field(default_factory=dict)  # (code, basis) -> ExperimentResult

    def combined(self, code: str) -> float:
        return float(np.mean([self.results[(code, b)].rate for b in BASES]))

    def best_code(self, codes) -> str:
        # min() keeps the first code on ties
        return min(codes, key=self.combined)

    def below_threshold(self, code: str) -> bool:
        return self.combined(code) < self.p_phys or (self.combined(code) == 0 and self.p_phys == 0)


@dataclass
class SweepResult:
    axes: tuple[Axis, ...]
    codes: tuple[str, ...]
    fixed: dict
    cells: list[Cell]

    def grid_shape(self) -> tuple[int, ...]:
        return tuple(len(a.values) for a in self.axes)

    def cell(self, *index) -> Cell:
        return self.cells[int(np.ravel_multi_index(index, self.grid_shape()))]

    def best_map(self) -> np.ndarray:
        return np.array([c.best_code(self.codes) for c in self.cells], dtype=object).reshape(self.grid_shape())

    def pseudothresholds(self, code: str) -> dict[str, list]:
        """Per axis, ``[other-axis values..., crossing]`` points where rate meets ``p_phys``.

        Along each grid line the crossing is found between the first
        bracketing pair of points, interpolating ``log(rate / p_phys)``
        linearly in ``log(parameter)``.
        """
        shape = self.grid_shape()
        out: dict[str, list] = {}
        for k, axis in enumerate(self.axes):
            pts = []
            others = [range(s) if j != k else [None] for j, s in enumerate(shape)]
            for fixed_idx in product(*others):
                line = []
                for i in range(shape[k]):
                    idx = tuple(i if j == k else fixed_idx[j] for j in range(len(shape)))
                    c = self.cell(*idx)
                    line.append((axis.values[i], c.combined(code), c.p_phys))
                x = _crossing(line)
                if x is not None:
                    label = {self.axes[j].name: self.axes[j].values[fixed_idx[j]] for j in range(len(shape)) if j != k}
                    pts.append({**label, axis.name: x})
            out[axis.name] = pts
        return out

    def rows(self) -> list[dict]:
        rows = []
        for c in self.cells:
            for code in self.codes:
                for b in BASES:
                    r = c.results[(code, b)]
                    rows.append({**c.params, "code": code, "basis": b, "shots": r.shots,
                                 "violations": r.violations, "rate": r.rate, "ci_low": r.ci_low,
                                 "ci_high": r.ci_high, "p_phys": c.p_phys,
                                 "below_threshold": c.below_threshold(code)})
        return rows

    def to_csv(self) -> str:
        rows = self.rows()
        buf = io.StringIO()
        names = [a.name for a in self.axes]
        w = csv.DictWriter(buf, fieldnames=names + ["code", "basis", "shots", "violations", "rate", "ci_low",
                                                     "ci_high", "p_phys", "below_threshold"], lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "axes": {a.name: list(a.values) for a in self.axes},
            "fixed": self.fixed,
            "codes": list(self.codes),
            "best_code": [[c.params, c.best_code(self.codes)] for c in self.cells],
            "below_threshold": {code: [c.below_threshold(code) for c in self.cells] for code in self.codes},
            "pseudothresholds": {code: self.pseudothresholds(code) for code in self.codes},
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=1)


def _crossing(line) -> float | None:
    prev = None
    for x, rate, pp in line:
        f = math.log(rate / pp) if rate > 0 and pp > 0 else None
        if prev is not None and f is not None and x > 0 and prev[0] > 0:
            (x0, f0) = prev
            if f0 == 0:
                return x0
            if f0 * f <= 0:
                lx0, lx1 = math.log(x0), math.log(x)
                return math.exp(lx0 + (lx1 - lx0) * f0 / (f0 - f))
        prev = (x, f) if f is not None else None
    return None


def sweep_and_map(axes, codes=CODE_NAMES, fixed: dict | None = None, shots: int = 10_000, seed: int = 0,
                  method: str = "direct", kmax: int = 4, workers: int = 1, layouts: dict | None = None,
                  include_crosstalk: bool = True, progress=None) -> SweepResult:
    """Run every (cell, code, basis) of a grid and collect the results.

    ``layouts`` maps code names to block chains (default: published).
    Each run gets its own seed derived from ``seed`` and its grid
    coordinates, so results do not depend on ``workers``.  ``progress``
    is called with a short message after each run.
    """
    axes = tuple(a if isinstance(a, Axis) else Axis.parse(a) for a in axes)
    if not axes:
        raise ValueError("a sweep needs at least one axis")
    if len({a.name for a in axes}) != len(axes):
        raise ValueError("axis names must be distinct")
    codes = tuple(canonical_name(c) for c in codes)
    fixed = dict(fixed or {})
    layouts = {canonical_name(k): v for k, v in (layouts or {}).items()}
    cells = []
    for ci, values in enumerate(product(*(a.values for a in axes))):
        params = {**fixed, **{a.name: v for a, v in zip(axes, values)}}
        noise = noise_from(params)
        cell = Cell({a.name: v for a, v in zip(axes, values)}, physical_comparator_rate(noise))
        for code in codes:
            for bi, b in enumerate(BASES):
                run_seed = int(np.random.SeedSequence([seed, ci, CODE_NAMES.index(code), bi]).generate_state(1)[0])
                spec = ExperimentSpec(code, b, noise, shots=shots, seed=run_seed, layout=layouts.get(code),
                                      method=method, kmax=kmax, include_crosstalk=include_crosstalk,
                                      workers=workers)
                cell.results[(code, b)] = r = run_experiment(spec)
                if progress is not None:
                    progress(f"cell {ci + 1}: {code} {b} rate {r.rate:.3g} ({cell.params})")
        cells.append(cell)
    return SweepResult(axes, codes, fixed, cells)


def run_both_bases(spec: ExperimentSpec) -> tuple[ExperimentResult, ExperimentResult]:
    """(X-basis result, Z-basis result) with independent seeds."""
    rx = run_experiment(replace(spec, basis="X", seed=spec.seed * 2 + 1))
    rz = run_experiment(replace(spec, basis="Z", seed=spec.seed * 2))
    return rx, rz

