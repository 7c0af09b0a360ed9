"""Yield panel ingestion, interpolation to the integer-lag grid, missing
data policies and run configuration.

Canonical on-disk form is a long CSV with header ``date,tau_days,yield``,
yields as annualized continuously-compounded decimals.  Percent-vs-decimal
guessing is refused: units must be declared either by the caller or by a
``# units=decimal`` comment line in the file.  All run artifacts carry a
provenance comment (config hash, seed).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np
import pandas as pd

from .numerics import natural_cubic_spline

__all__ = [
    "YieldPanel",
    "RunConfig",
    "load_panel",
    "save_panel",
    "handle_missing",
    "interpolate_to_grid",
    "load_config",
    "save_config",
    "config_hash",
    "provenance_header",
]


class PanelFormatError(ValueError):
    """Malformed or inconsistent panel file."""


@dataclass
class YieldPanel:
    """Dates x times-to-maturity table of yields (decimals).

    ``tau_days`` are integer times to maturity in grid steps; cells may be
    NaN until cleaned by :func:`handle_missing`.
    """

    dates: np.ndarray
    tau_days: np.ndarray
    yields: np.ndarray
    delta: float = 1.0 / 252.0
    source: str = ""

    def __post_init__(self):
        self.dates = np.asarray(self.dates)
        self.tau_days = np.asarray(self.tau_days, dtype=int)
        self.yields = np.asarray(self.yields, dtype=float)
        if self.yields.shape != (self.dates.size, self.tau_days.size):
            raise PanelFormatError("yields table shape inconsistent with axes")
        if np.any(np.diff(self.tau_days) <= 0):
            raise PanelFormatError("tau_days must be strictly increasing")
        finite = self.yields[np.isfinite(self.yields)]
        if np.any(np.abs(finite) >= 1.0):
            raise PanelFormatError("yields must be decimals with |y| < 1")

    @property
    def missing_cells(self):
        rows, cols = np.where(~np.isfinite(self.yields))
        return [(str(self.dates[r]), int(self.tau_days[c])) for r, c in zip(rows, cols)]


def load_panel(path, units: Optional[str] = None, delta: float = 1.0 / 252.0) -> YieldPanel:
    """Read a long-format CSV (``date,tau_days,yield``) into a panel.

    Units must be declared ('decimal'), either via the argument or a
    ``# units=decimal`` comment line; duplicate (date, tau) rows and empty
    files are errors.  Absent combinations become NaN cells.
    """
    declared = units
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            if "units=" in line:
                declared = line.split("units=")[1].strip()
    if declared is None:
        raise PanelFormatError(
            "yield units not declared; pass units='decimal' or add a '# units=decimal' line"
        )
    if declared != "decimal":
        raise PanelFormatError(f"unsupported units {declared!r}; convert upstream")

    try:
        frame = pd.read_csv(path, comment="#", dtype={"date": str})
    except Exception as exc:
        raise PanelFormatError(f"cannot parse {path}: {exc}") from exc
    required = {"date", "tau_days", "yield"}
    if frame.empty or not required.issubset(frame.columns):
        raise PanelFormatError(f"{path}: need non-empty columns {sorted(required)}")

    dup = frame.duplicated(subset=["date", "tau_days"])
    if dup.any():
        row = frame[dup].iloc[0]
        raise PanelFormatError(
            f"duplicate observation for (date={row['date']}, tau={int(row['tau_days'])})"
        )

    table = frame.pivot(index="date", columns="tau_days", values="yield").sort_index()
    table = table[sorted(table.columns)]
    return YieldPanel(
        dates=table.index.to_numpy(),
        tau_days=np.asarray(table.columns, dtype=int),
        yields=table.to_numpy(dtype=float),
        delta=delta,
        source=str(path),
    )


def save_panel(panel: YieldPanel, path, header_lines=()) -> None:
    """Write the canonical long CSV; loading it back reproduces the panel
    bit-exactly (floats written via repr)."""
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("# units=decimal\n")
        fh.write("date,tau_days,yield\n")
        for r, date in enumerate(panel.dates):
            for c, tau in enumerate(panel.tau_days):
                v = panel.yields[r, c]
                if np.isfinite(v):
                    fh.write(f"{date},{int(tau)},{float(v)!r}\n")


def handle_missing(panel: YieldPanel, policy: str) -> YieldPanel:
    """Apply a missing-cell policy: 'forward-fill', 'drop-date' or 'error'."""
    gaps = panel.missing_cells
    if policy == "error":
        if gaps:
            raise PanelFormatError(f"missing cells: {gaps}")
        return panel
    if policy == "forward-fill":
        filled = pd.DataFrame(panel.yields).ffill(axis=0).to_numpy()
        if not np.all(np.isfinite(filled)):
            raise PanelFormatError("forward-fill failed: leading gaps remain")
        return YieldPanel(panel.dates, panel.tau_days, filled, panel.delta, panel.source)
    if policy == "drop-date":
        keep = np.all(np.isfinite(panel.yields), axis=1)
        return YieldPanel(
            panel.dates[keep], panel.tau_days, panel.yields[keep], panel.delta, panel.source
        )
    raise ValueError(f"unknown policy {policy!r}")


def interpolate_to_grid(panel: YieldPanel, date, m: int) -> np.ndarray:
    """Natural-cubic-spline interpolation of one date's curve onto integer
    lags 1..m, flat beyond the first/last quoted tenor; exact at knots."""
    idx = np.where(panel.dates == date)[0]
    if idx.size == 0:
        raise KeyError(f"date {date!r} not in panel")
    row = panel.yields[idx[0]]
    mask = np.isfinite(row)
    if mask.sum() < 2:
        raise PanelFormatError(f"date {date!r} has fewer than 2 tenors")
    spline = natural_cubic_spline(panel.tau_days[mask], row[mask])
    return spline(np.arange(1, m + 1, dtype=float))


@dataclass
class RunConfig:
    """JSON-serializable run configuration with the pipeline defaults."""

    delta: float = 1.0 / 252.0
    window: int = 126
    factors: int = 3
    taus: tuple = (1, 2, 5, 10, 21, 63)
    noise_scale: float = 1e-5
    seed: int = 0
    max_lag: int = 360
    n_sims: int = 10_000
    holding: int = 21
    optimizer: dict = field(default_factory=dict)
    stochvol: bool = False
    stochvol_cross_corr: bool = True

    def to_dict(self) -> dict:
        d = asdict(self)
        d["taus"] = list(self.taus)
        return d


def load_config(path) -> RunConfig:
    with open(path) as fh:
        data = json.load(fh)
    known = {f for f in RunConfig.__dataclass_fields__}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if "taus" in data:
        data["taus"] = tuple(data["taus"])
    return RunConfig(**data)


def save_config(config: RunConfig, path) -> None:
    with open(path, "w") as fh:
        json.dump(config.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def config_hash(config: RunConfig) -> str:
    blob = json.dumps(config.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def provenance_header(config: RunConfig) -> str:
    return f"config_hash={config_hash(config)} seed={config.seed}"
