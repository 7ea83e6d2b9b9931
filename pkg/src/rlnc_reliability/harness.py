"""Parameter sweeps comparing analytical bounds with simulation."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Sequence

import yaml

from .bounds import (
    NONSYSTEMATIC,
    VARIANTS,
    CodeSpec,
    NetworkSpec,
    multicast_bound,
    mse,
    product_bound,
    two_user_exact,
)
from .sim import simulate_multicast

METHODS = (
    "product",
    "multicast",
    "multicast_naive",
    "multicast_order_free",
    "multicast_homogeneous",
    "two_user",
)
DEFAULT_METHODS = ("product", "multicast", "two_user")
DEFAULT_TRIALS = 100_000
DEFAULT_N_OFFSETS = (0, 10)
FORMATS = ("csv", "jsonl")
GROUP_KEYS = ("L", "K", "q", "variant", "eps_spec")


class ConfigError(ValueError):
    pass


def heterogeneous_epsilons(L: int, lo: float, hi: float) -> NetworkSpec:
    """``L`` equally spaced erasure rates from ``lo`` to ``hi`` inclusive."""
    if L < 1:
        raise ValueError("need at least one user")
    if lo > hi:
        raise ValueError(f"lo={lo} exceeds hi={hi}")
    if L == 1:
        if lo != hi:
            raise ValueError("a single user cannot span a range of erasure rates")
        return NetworkSpec((lo,))
    step = (hi - lo) / (L - 1)
    return NetworkSpec(tuple(round(lo + i * step, 12) for i in range(L)))


def parse_eps(spec: str | float, L: int) -> NetworkSpec:
    """Network from an erasure spec: ``0.1``, ``0.01,0.02,...`` or ``linspace:lo:hi``."""
    text = str(spec).strip()
    if text.startswith("linspace:"):
        try:
            _, lo, hi = text.split(":")
            return heterogeneous_epsilons(L, float(lo), float(hi))
        except ValueError as exc:
            raise ConfigError(f"bad erasure spec {text!r}: {exc}") from None
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"bad erasure spec {text!r}") from None
    if len(values) == 1:
        values = values * L
    if len(values) != L:
        raise ConfigError(f"erasure spec {text!r} lists {len(values)} rates for {L} users")
    try:
        return NetworkSpec(tuple(values))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


@dataclass(frozen=True)
class ExperimentConfig:
    """One rectangular grid: variant x q x K x L x eps x N."""

    K: tuple[int, ...] = (5,)
    L: tuple[int, ...] = (2,)
    q: tuple[int, ...] = (2,)
    variant: tuple[str, ...] = (NONSYSTEMATIC,)
    eps: tuple[str, ...] = ("0.01",)
    N_offsets: tuple[int, int] = DEFAULT_N_OFFSETS
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    methods: tuple[str, ...] = DEFAULT_METHODS
    name: str = ""

    def __post_init__(self):
        for key in ("K", "L", "q", "variant", "eps", "methods"):
            val = getattr(self, key)
            if isinstance(val, (str, int, float)):
                val = (val,)
            val = tuple(str(v) for v in val) if key in ("eps", "variant", "methods") else tuple(int(v) for v in val)
            if not val:
                raise ConfigError(f"{key} must not be empty")
            object.__setattr__(self, key, val)
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        lo, hi = (int(v) for v in self.N_offsets)
        if not 0 <= lo <= hi:
            raise ConfigError(f"N offsets must satisfy 0 <= lo <= hi; got {self.N_offsets}")
        object.__setattr__(self, "N_offsets", (lo, hi))
        for v in self.variant:
            if v not in VARIANTS:
                raise ConfigError(f"unknown variant {v!r}")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; expected one of {METHODS}")
        if min(self.K) < 1 or min(self.L) < 1 or min(self.q) < 2:
            raise ConfigError("K and L must be >= 1 and q >= 2")
        for L, e in itertools.product(self.L, self.eps):
            parse_eps(e, L)

    @classmethod
    def from_dict(cls, d: dict[str, Any], defaults: dict[str, Any] | None = None) -> "ExperimentConfig":
        merged = {**(defaults or {}), **d}
        if "N" in merged:
            merged["N_offsets"] = merged.pop("N")
        known = set(cls.__dataclass_fields__)
        unknown = set(merged) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**merged)

    def grid(self) -> list[tuple[str, int, int, int, str, int]]:
        lo, hi = self.N_offsets
        return [
            (variant, q, K, L, eps, K + d)
            for variant, q, K, L, eps in itertools.product(self.variant, self.q, self.K, self.L, self.eps)
            for d in range(lo, hi + 1)
        ]


def load_config(path: str | Path) -> list[ExperimentConfig]:
    """Read a YAML file holding one experiment or an ``experiments`` list.

    Top-level keys other than ``experiments`` act as defaults for each
    listed experiment.
    """
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    return _configs_from_data(data)


def _configs_from_data(data: dict[str, Any]) -> list[ExperimentConfig]:
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    if "experiments" not in data:
        return [ExperimentConfig.from_dict(data)]
    defaults = {k: v for k, v in data.items() if k != "experiments"}
    return [ExperimentConfig.from_dict(e, defaults) for e in data["experiments"]]


def preset(name: str) -> list[ExperimentConfig]:
    try:
        text = resources.files("rlnc_reliability.presets").joinpath(f"{name}.yaml").read_text()
    except FileNotFoundError:
        raise ConfigError(f"no preset named {name!r}") from None
    return _configs_from_data(yaml.safe_load(text))


@dataclass
class ResultRow:
    L: int
    K: int
    N: int
    q: int
    variant: str
    eps_spec: str
    trials: int
    seed: int
    bounds: dict[str, float | None] = field(default_factory=dict)
    sim_mean: float | None = None
    sim_halfwidth: float | None = None
    error: str = ""

    def gap(self, method: str) -> float | None:
        b = self.bounds.get(method)
        if b is None or self.sim_mean is None:
            return None
        return b - self.sim_mean


def bound_value(method: str, code: CodeSpec, net: NetworkSpec) -> float | None:
    """Bound for one method; None when the method does not apply to this point."""
    if method == "product":
        return product_bound(code, net)
    if method == "two_user":
        if net.L != 2 or code.variant != NONSYSTEMATIC:
            return None
        return two_user_exact(code, *net.epsilons)
    if code.variant != NONSYSTEMATIC:
        return None
    path = None if method == "multicast" else method.removeprefix("multicast_")
    return multicast_bound(code, net, path).value


def evaluate_point(
    variant: str, q: int, K: int, L: int, eps: str, N: int, trials: int, seed: int, methods: Sequence[str]
) -> ResultRow:
    code = CodeSpec(N, K, q, variant)
    net = parse_eps(eps, L)
    row = ResultRow(L, K, N, q, variant, eps, trials, seed)
    errors = []
    for m in methods:
        try:
            row.bounds[m] = bound_value(m, code, net)
        except ValueError as exc:
            row.bounds[m] = None
            errors.append(f"{m}: {exc}")
    est = simulate_multicast(code, net, trials, seed)
    row.sim_mean = est.mean
    row.sim_halfwidth = est.half_width
    row.error = "; ".join(errors)
    return row


def _evaluate_packed(args) -> ResultRow:
    return evaluate_point(*args)


def run_sweep(cfg: ExperimentConfig, workers: int = 1) -> list[ResultRow]:
    """Evaluate every grid point; rows come back in grid order.

    Points are computed grouped by (K, L, N) so cached pattern tables are
    reused across q and erasure settings.
    """
    jobs = [(*point, cfg.trials, cfg.seed, cfg.methods) for point in cfg.grid()]
    order = sorted(range(len(jobs)), key=lambda i: (jobs[i][2], jobs[i][3], jobs[i][5]))
    if workers <= 1:
        done = [_evaluate_packed(jobs[i]) for i in order]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            done = list(pool.map(_evaluate_packed, [jobs[i] for i in order]))
    rows: list[ResultRow] = [None] * len(jobs)  # type: ignore[list-item]
    for i, row in zip(order, done):
        rows[i] = row
    return rows


# --- output -----------------------------------------------------------------

_FIXED = ("L", "K", "N", "q", "variant", "eps_spec", "trials", "seed")


def _methods_of(rows: Iterable[ResultRow]) -> list[str]:
    seen: dict[str, None] = {}
    for r in rows:
        for m in r.bounds:
            seen.setdefault(m, None)
    return list(seen)


def _fmt(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def rows_to_csv(rows: Sequence[ResultRow]) -> str:
    methods = _methods_of(rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([*_FIXED, *methods, "sim_mean", "sim_halfwidth", *(f"gap_{m}" for m in methods), "error"])
    for r in rows:
        w.writerow(
            [getattr(r, k) for k in _FIXED]
            + [_fmt(r.bounds.get(m)) for m in methods]
            + [_fmt(r.sim_mean), _fmt(r.sim_halfwidth)]
            + [_fmt(r.gap(m)) for m in methods]
            + [r.error]
        )
    return buf.getvalue()


def rows_to_jsonl(rows: Sequence[ResultRow]) -> str:
    lines = []
    for r in rows:
        d = {k: getattr(r, k) for k in _FIXED}
        d["bounds"] = r.bounds
        d["sim_mean"] = r.sim_mean
        d["sim_halfwidth"] = r.sim_halfwidth
        d["gaps"] = {m: r.gap(m) for m in r.bounds}
        d["error"] = r.error
        lines.append(json.dumps(d))
    return "".join(line + "\n" for line in lines)


def write_rows(rows: Sequence[ResultRow], path: str | Path, fmt: str = "csv") -> None:
    if fmt not in FORMATS:
        raise ConfigError(f"unknown format {fmt!r}")
    text = rows_to_csv(rows) if fmt == "csv" else rows_to_jsonl(rows)
    Path(path).write_text(text)


def _opt_float(s: str) -> float | None:
    return None if s == "" else float(s)


def read_rows(path: str | Path) -> list[ResultRow]:
    """Load rows written by :func:`write_rows` (format from the content)."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        rows = []
        for line in text.splitlines():
            if not line.strip():
                continue
            d = json.loads(line)
            rows.append(
                ResultRow(
                    d["L"], d["K"], d["N"], d["q"], d["variant"], d["eps_spec"], d["trials"], d["seed"],
                    dict(d["bounds"]), d["sim_mean"], d["sim_halfwidth"], d.get("error", ""),
                )
            )
        return rows
    reader = csv.DictReader(io.StringIO(text))
    header = reader.fieldnames or []
    methods = header[len(_FIXED) : header.index("sim_mean")]
    rows = []
    for rec in reader:
        rows.append(
            ResultRow(
                int(rec["L"]), int(rec["K"]), int(rec["N"]), int(rec["q"]), rec["variant"], rec["eps_spec"],
                int(rec["trials"]), int(rec["seed"]),
                {m: _opt_float(rec[m]) for m in methods},
                _opt_float(rec["sim_mean"]), _opt_float(rec["sim_halfwidth"]), rec.get("error", ""),
            )
        )
    return rows


@dataclass(frozen=True)
class MSEEntry:
    group: tuple
    method: str
    mse: float
    points: int


def mse_report(rows: Sequence[ResultRow], group_keys: Sequence[str] = GROUP_KEYS) -> list[MSEEntry]:
    """MSE between each bound and the simulated curve, per group, over N.

    Every group must cover a contiguous N range with no repeats. Methods
    that are undefined for a whole group are skipped; partially defined
    ones are an error.
    """
    groups: dict[tuple, list[ResultRow]] = {}
    for r in rows:
        groups.setdefault(tuple(getattr(r, k) for k in group_keys), []).append(r)
    out = []
    for key, members in groups.items():
        members = sorted(members, key=lambda r: r.N)
        Ns = [r.N for r in members]
        if Ns != list(range(Ns[0], Ns[0] + len(Ns))):
            raise ValueError(f"group {key} does not cover a contiguous N sweep: {Ns}")
        if any(r.sim_mean is None for r in members):
            raise ValueError(f"group {key} lacks simulation results")
        sim = [r.sim_mean for r in members]
        for m in _methods_of(members):
            vals = [r.bounds.get(m) for r in members]
            if all(v is None for v in vals):
                continue
            if any(v is None for v in vals):
                raise ValueError(f"method {m} missing at some N in group {key}")
            out.append(MSEEntry(key, m, mse(vals, sim), len(members)))
    return out


def max_abs_gap(rows: Sequence[ResultRow], method: str) -> float:
    gaps = [abs(g) for g in (r.gap(method) for r in rows) if g is not None]
    return max(gaps) if gaps else math.nan
