"""Config files, object-map ingestion and result files.

Config: flat ``key = value`` lines, ``#`` starts a comment.

Object maps:
  * CSV with header ``i,j,T,phi_T`` (extra trailing columns are ignored), one
    row per pixel, 0-based row-major indices.
  * a pair of ASCII PGM (P2) files ``<stem>.T.pgm`` and ``<stem>.phi.pgm`` with
    maxval 65535. T maps linearly onto [0, 65535]. phi_T maps (-pi, pi] onto
    [0, 65535], so phases are quantized to at most pi/65535.

All floats are written with 17 significant digits so they round-trip exactly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    FormatError,
    IncompleteGridError,
    OutOfRangeError,
    ParseError,
    UnknownKeyError,
    ValueOutOfRangeError,
)
from .imaging import Metrics, ObjectMap, PixelFlag, ReconstructedMap
from .optics import SetupParams, make_setup, wrap_phase

PGM_MAXVAL = 65535
EXACT = "exact"


def fmt(value: float) -> str:
    return f"{value:.17g}"


@dataclass(frozen=True)
class Config:
    r1: float
    r2: float
    alpha: float
    beta: float
    phi_p1: float = 0.0
    phi_p2: float = 0.0
    phi_alpha: float = 0.0
    phi_beta: float = 0.0
    samples: int | None = None  # None: exact expectations
    seed: int = 0
    protocol: str = "qsi"

    def setup(self) -> SetupParams:
        return make_setup(
            self.r1,
            self.r2,
            self.alpha,
            self.beta,
            phi_p1=self.phi_p1,
            phi_p2=self.phi_p2,
            phi_alpha=self.phi_alpha,
            phi_beta=self.phi_beta,
        )


_FLOAT_KEYS = ("r1", "r2", "alpha", "beta", "phi_p1", "phi_p2", "phi_alpha", "phi_beta")
_REQUIRED = ("r1", "r2", "alpha", "beta")
_NON_NEGATIVE = ("r1", "r2", "alpha", "beta")


def _parse_value(key: str, raw: str, lineno: int):
    if key in _FLOAT_KEYS:
        try:
            value = float(raw)
        except ValueError:
            raise ParseError(f"{key}: not a number: {raw!r}", lineno) from None
        if not math.isfinite(value):
            raise OutOfRangeError(f"line {lineno}: {key} must be finite")
        if key in _NON_NEGATIVE and value < 0:
            raise OutOfRangeError(f"line {lineno}: {key} must be >= 0, got {value}")
        return value
    if key == "samples":
        if raw.lower() == EXACT:
            return None
        try:
            value = int(raw)
        except ValueError:
            raise ParseError(f"samples: expected an integer or 'exact', got {raw!r}", lineno) from None
        if value < 2:
            raise OutOfRangeError(f"line {lineno}: samples must be >= 2, got {value}")
        return value
    if key == "seed":
        try:
            value = int(raw, 0)
        except ValueError:
            raise ParseError(f"seed: expected an integer, got {raw!r}", lineno) from None
        if not 0 <= value < 2**64:
            raise OutOfRangeError(f"line {lineno}: seed must fit in an unsigned 64-bit integer")
        return value
    if key == "protocol":
        if raw not in ("qsi", "qfi"):
            raise OutOfRangeError(f"line {lineno}: protocol must be 'qsi' or 'qfi', got {raw!r}")
        return raw
    raise UnknownKeyError(f"unknown key {key!r}", lineno)


def parse_config(text: str) -> Config:
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {line!r}", lineno)
        key, raw = (part.strip() for part in line.split("=", 1))
        if not key or not raw:
            raise ParseError(f"expected 'key = value', got {line!r}", lineno)
        value = _parse_value(key, raw, lineno)
        if key in values:
            raise ParseError(f"duplicate key {key!r}", lineno)
        values[key] = value
    missing = [k for k in _REQUIRED if k not in values]
    if missing:
        raise ParseError(f"missing required key(s): {', '.join(missing)}")
    return Config(**values)


def load_config(path: str | Path) -> Config:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def _load_csv(path: Path) -> ObjectMap:
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:4]] != ["i", "j", "T", "phi_T"]:
            raise FormatError(f"{path}: header must start with i,j,T,phi_T")
        cells: dict[tuple[int, int], tuple[float, float]] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 4:
                raise FormatError(f"{path}:{lineno}: expected at least 4 columns")
            try:
                i, j = int(row[0]), int(row[1])
                T, phi = float(row[2]), float(row[3])
            except ValueError:
                raise FormatError(f"{path}:{lineno}: malformed row {row!r}") from None
            if i < 0 or j < 0:
                raise FormatError(f"{path}:{lineno}: negative pixel index")
            if (i, j) in cells:
                raise FormatError(f"{path}:{lineno}: duplicate pixel ({i}, {j})")
            if not (math.isfinite(T) and 0.0 <= T <= 1.0):
                raise ValueOutOfRangeError(f"{path}:{lineno}: T={T} outside [0, 1]")
            if not math.isfinite(phi):
                raise ValueOutOfRangeError(f"{path}:{lineno}: phi_T must be finite")
            cells[(i, j)] = (T, wrap_phase(phi))
    if not cells:
        raise IncompleteGridError(f"{path}: no pixels")
    h = 1 + max(i for i, _ in cells)
    w = 1 + max(j for _, j in cells)
    if len(cells) != h * w:
        raise IncompleteGridError(f"{path}: {len(cells)} pixels listed for a {h}x{w} grid")
    T_arr = np.empty((h, w))
    phi_arr = np.empty((h, w))
    for (i, j), (T, phi) in cells.items():
        T_arr[i, j], phi_arr[i, j] = T, phi
    return ObjectMap(T_arr, phi_arr)


def read_pgm(path: Path) -> np.ndarray:
    tokens: list[str] = []
    for line in path.read_text(encoding="ascii").splitlines():
        tokens.extend(line.split("#", 1)[0].split())
    if not tokens or tokens[0] != "P2":
        raise FormatError(f"{path}: not an ASCII PGM (P2) file")
    try:
        w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
        data = np.array([int(t) for t in tokens[4:]], dtype=np.int64)
    except (IndexError, ValueError):
        raise FormatError(f"{path}: malformed PGM") from None
    if maxval != PGM_MAXVAL:
        raise FormatError(f"{path}: maxval must be {PGM_MAXVAL}, got {maxval}")
    if w <= 0 or h <= 0:
        raise FormatError(f"{path}: empty image")
    if data.size != w * h:
        raise IncompleteGridError(f"{path}: expected {w * h} values, got {data.size}")
    if data.min() < 0 or data.max() > maxval:
        raise ValueOutOfRangeError(f"{path}: sample outside [0, {maxval}]")
    return data.reshape(h, w)


def write_pgm(path: Path, values: np.ndarray) -> None:
    h, w = values.shape
    lines = ["P2", f"{w} {h}", str(PGM_MAXVAL)]
    lines += [" ".join(str(int(v)) for v in row) for row in values]
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def t_to_pgm(T: np.ndarray) -> np.ndarray:
    return np.rint(np.clip(T, 0.0, 1.0) * PGM_MAXVAL).astype(np.int64)


def phi_to_pgm(phi: np.ndarray) -> np.ndarray:
    return np.rint((phi + math.pi) / (2 * math.pi) * PGM_MAXVAL).astype(np.int64)


def pgm_to_phi(levels: np.ndarray) -> np.ndarray:
    raw = -math.pi + levels * (2 * math.pi / PGM_MAXVAL)
    return np.vectorize(wrap_phase, otypes=[float])(raw)


def _pgm_stem(path: Path) -> Path | None:
    name = str(path)
    for suffix in (".T.pgm", ".phi.pgm"):
        if name.endswith(suffix):
            return Path(name[: -len(suffix)])
    if Path(name + ".T.pgm").exists():
        return path
    return None


def load_object(path: str | Path) -> ObjectMap:
    path = Path(path)
    stem = _pgm_stem(path)
    if stem is not None:
        t_plane = read_pgm(Path(f"{stem}.T.pgm"))
        phi_plane = read_pgm(Path(f"{stem}.phi.pgm"))
        if t_plane.shape != phi_plane.shape:
            raise FormatError(f"{stem}: T and phi planes differ in size")
        return ObjectMap(t_plane / PGM_MAXVAL, pgm_to_phi(phi_plane))
    if not path.is_file():
        raise FormatError(f"{path}: no such object file (CSV or <stem>.T.pgm/<stem>.phi.pgm)")
    return _load_csv(path)


def write_object_csv(path: str | Path, obj: ObjectMap) -> None:
    rows = ["i,j,T,phi_T"]
    for i in range(obj.height):
        for j in range(obj.width):
            rows.append(f"{i},{j},{fmt(obj.T[i, j])},{fmt(obj.phi_T[i, j])}")
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def write_reconstruction(
    out_dir: str | Path, recon: ReconstructedMap, metrics: Metrics, pgm: bool = False
) -> list[Path]:
    """Write ``T_hat.csv`` (re-loadable as an object map), ``phi_hat.csv``,
    ``metrics.txt`` and, with ``pgm=True``, ``T_hat.T.pgm``/``T_hat.phi.pgm``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t_rows = ["i,j,T,phi_T,flag"]
    p_rows = ["i,j,phi_T,flag"]
    for i in range(recon.height):
        for j in range(recon.width):
            flag = PixelFlag(int(recon.flags[i, j])).label()
            t_rows.append(f"{i},{j},{fmt(recon.t_hat[i, j])},{fmt(recon.phi_hat[i, j])},{flag}")
            p_rows.append(f"{i},{j},{fmt(recon.phi_hat[i, j])},{flag}")
    written = [out / "T_hat.csv", out / "phi_hat.csv", out / "metrics.txt"]
    written[0].write_text("\n".join(t_rows) + "\n", encoding="utf-8")
    written[1].write_text("\n".join(p_rows) + "\n", encoding="utf-8")
    written[2].write_text(format_metrics(metrics), encoding="utf-8")
    if pgm:
        write_pgm(out / "T_hat.T.pgm", t_to_pgm(recon.t_hat))
        write_pgm(out / "T_hat.phi.pgm", phi_to_pgm(recon.phi_hat))
        written += [out / "T_hat.T.pgm", out / "T_hat.phi.pgm"]
    return written


def format_metrics(m: Metrics) -> str:
    samples = EXACT if m.samples_per_setting is None else str(m.samples_per_setting)
    return (
        f"rmse_T={fmt(m.rmse_T)}\n"
        f"rmse_phi={fmt(m.rmse_phi)}\n"
        f"max_abs_err_T={fmt(m.max_abs_err_T)}\n"
        f"n_pixels={m.n_pixels}\n"
        f"samples_per_setting={samples}\n"
    )
