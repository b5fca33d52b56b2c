"""Object reconstruction from homodyne data, pixel by pixel.

Two protocols are provided:

``qsi``  signal protocol. Eight homodyne means <S(delta, Delta)> with
         delta in {0, pi/2} and Delta in {0, pi/2, pi, 3pi/2}. Pairs of
         quadratures give |G(Delta)|^2, and opposite-Delta differences
         cancel the object-independent background.
``qfi``  noise protocol. Four homodyne variances at the same Delta values;
         needs no coherent seed at all.

In both cases, with ``psi = Delta - phi_T``, the Delta-dependent part of the
measured quantity is proportional to ``T cos(Delta - phi_T)``. So the
``(0, pi)`` and ``(pi/2, 3pi/2)`` differences are the two Cartesian components
of ``T e^{i phi_T}``.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .errors import OutOfRangeError, UpqiError, ZeroGainError, ZeroSeedError
from .moments import mean_signal, variance_signal
from .optics import HALF_PI, MeasurementSetting, ObjectPixel, SetupParams, bogoliubov_coeffs, make_object, phase_diff
from .sampler import derive_seed, estimate, sample_homodyne

Protocol = Literal["qsi", "qfi"]

DELTA_SCAN = (0.0, HALF_PI, math.pi, 3 * HALF_PI)
QSI_SETTINGS = tuple((delta, Delta) for Delta in DELTA_SCAN for delta in (0.0, HALF_PI))
QFI_SETTINGS = DELTA_SCAN
PHASE_UNDEFINED_REL = 1e-12
WORKERS_ENV = "UPQI_WORKERS"


class PixelFlag(enum.IntFlag):
    OK = 0
    CLAMPED = 1
    PHASE_UNDEFINED = 2
    ERROR = 4

    def label(self) -> str:
        if self == PixelFlag.OK:
            return "ok"
        return "|".join(f.name.lower() for f in PixelFlag if f and f in self)


@dataclass(frozen=True)
class Calibration:
    G1G2: float
    g1g2: float

    def __post_init__(self):
        if not (self.G1G2 >= 1.0 and self.g1g2 >= 0.0 and self.G1G2 > self.g1g2):
            raise OutOfRangeError(f"invalid calibration {self}")


def calibrate(setup: SetupParams) -> Calibration:
    s1, s2 = setup.squeezer1, setup.squeezer2
    return Calibration(G1G2=s1.G * s2.G, g1g2=s1.g * s2.g)


@dataclass(frozen=True)
class Reconstruction:
    T: float
    phi_T: float
    flag: PixelFlag
    T_raw: float


def _exact_moments(setup: SetupParams, pixel: ObjectPixel, delta: float, Delta: float) -> tuple[float, float]:
    tuned = setup.with_setting(delta=delta, Delta=Delta)
    coeffs = bogoliubov_coeffs(tuned, pixel)
    setting = MeasurementSetting.from_phases(delta, Delta)
    return mean_signal(coeffs, tuned.field, setting), variance_signal(coeffs, tuned.field)


def qsi_measure_pixel(
    setup: SetupParams,
    pixel: ObjectPixel,
    n: int | None,
    seed: int = 0,
    index: tuple[int, int] = (0, 0),
) -> np.ndarray:
    """Eight homodyne mean estimates, ordered
    S(0,0), S(pi/2,0), S(0,pi/2), S(pi/2,pi/2), S(0,pi), S(pi/2,pi), S(0,3pi/2), S(pi/2,3pi/2)
    as (delta, Delta). ``n=None`` returns the exact expectations."""
    if setup.field.alpha <= 0.0:
        raise ZeroSeedError("signal protocol needs alpha > 0")
    out = np.empty(len(QSI_SETTINGS))
    for k, (delta, Delta) in enumerate(QSI_SETTINGS):
        mean, var = _exact_moments(setup, pixel, delta, Delta)
        if n is None:
            out[k] = mean
        else:
            samples = sample_homodyne(mean, var, n, derive_seed(seed, index[0], index[1], k))
            out[k] = estimate(samples).mean_hat
    return out


def qfi_measure_pixel(
    setup: SetupParams,
    pixel: ObjectPixel,
    n: int | None,
    seed: int = 0,
    index: tuple[int, int] = (0, 0),
) -> np.ndarray:
    """Four homodyne variance estimates at Delta = 0, pi/2, pi, 3pi/2."""
    delta = setup.setting().delta
    out = np.empty(len(QFI_SETTINGS))
    for k, Delta in enumerate(QFI_SETTINGS):
        mean, var = _exact_moments(setup, pixel, delta, Delta)
        if n is None:
            out[k] = var
        else:
            samples = sample_homodyne(mean, var, n, derive_seed(seed, index[0], index[1], k))
            out[k] = estimate(samples).var_hat
    return out


def _from_quadratures(values: Sequence[float], denom: float) -> Reconstruction:
    """Shared tail of both protocols: ``values`` holds the measured quantity at
    Delta = 0, pi/2, pi, 3pi/2."""
    v0, v1, v2, v3 = (float(v) for v in values)
    d_cos = v0 - v2
    d_sin = v1 - v3
    t_raw = math.hypot(d_cos, d_sin) / denom
    flag = PixelFlag.OK
    scale = max(abs(v0), abs(v1), abs(v2), abs(v3))
    if abs(d_cos) <= PHASE_UNDEFINED_REL * scale and abs(d_sin) <= PHASE_UNDEFINED_REL * scale:
        flag |= PixelFlag.PHASE_UNDEFINED
        phi = 0.0
    else:
        phi = math.atan2(d_sin, d_cos)
    t = t_raw
    if t > 1.0:
        t = 1.0
        flag |= PixelFlag.CLAMPED
    return Reconstruction(T=t, phi_T=phi, flag=flag, T_raw=t_raw)


def _check_gain(cal: Calibration) -> None:
    if cal.g1g2 == 0.0:
        raise ZeroGainError("g1*g2 = 0: idler never couples back into the signal")


def qsi_mod_G_sq(signals: Sequence[float], alpha: float, beta: float) -> np.ndarray:
    """|G(Delta)|^2 at the four Delta values from the eight homodyne means."""
    s = np.asarray(signals, dtype=float).reshape(4, 2)
    return (s[:, 0] ** 2 + s[:, 1] ** 2) / (4.0 * alpha**2 * beta**2)


def qsi_reconstruct(signals: Sequence[float], cal: Calibration, alpha: float, beta: float) -> Reconstruction:
    """Recover ``(T, phi_T)`` from the eight means of :func:`qsi_measure_pixel`."""
    _check_gain(cal)
    if alpha <= 0.0:
        raise ZeroSeedError("signal protocol needs alpha > 0")
    if beta <= 0.0:
        raise OutOfRangeError("local oscillator amplitude must be > 0")
    g2 = qsi_mod_G_sq(signals, alpha, beta)
    return _from_quadratures(g2, 4.0 * cal.G1G2 * cal.g1g2)


def qfi_reconstruct(variances: Sequence[float], cal: Calibration, beta: float) -> Reconstruction:
    """Recover ``(T, phi_T)`` from the four variances of :func:`qfi_measure_pixel`.

    ``Var(Delta) = beta^2 [2 (G1 G2)^2 (1 + x^2 + 2 x cos(Delta - phi_T)) - 1]``, so
    ``Var(0) - Var(pi) = 8 beta^2 G1 G2 g1 g2 T cos(phi_T)``.
    """
    _check_gain(cal)
    if beta <= 0.0:
        raise OutOfRangeError("local oscillator amplitude must be > 0")
    return _from_quadratures(variances, 8.0 * beta**2 * cal.G1G2 * cal.g1g2)


def qfi_T_printed(variances: Sequence[float], cal: Calibration, beta: float) -> float:
    """Transmission with the published denominator ``4 beta^2 g1 g2 G1 G2``.
    Evaluates to 2T on exact data; kept for the errata report."""
    v0, v1, v2, v3 = variances
    return math.hypot(v0 - v2, v1 - v3) / (4.0 * beta**2 * cal.G1G2 * cal.g1g2)


def qsi_T_printed(signals: Sequence[float], cal: Calibration, alpha: float, beta: float) -> float:
    """Transmission with the published formula, no square root over the
    numerator. Evaluates to ``4 G1 G2 g1 g2 T^2`` on exact data; errata report only."""
    g0, g1, g2, g3 = qsi_mod_G_sq(signals, alpha, beta)
    return ((g1 - g3) ** 2 + (g0 - g2) ** 2) / (4.0 * cal.G1G2 * cal.g1g2)


def measure_and_reconstruct(
    setup: SetupParams,
    pixel: ObjectPixel,
    protocol: Protocol,
    n: int | None,
    seed: int = 0,
    index: tuple[int, int] = (0, 0),
    cal: Calibration | None = None,
) -> Reconstruction:
    cal = cal or calibrate(setup)
    f = setup.field
    if protocol == "qsi":
        return qsi_reconstruct(qsi_measure_pixel(setup, pixel, n, seed, index), cal, f.alpha, f.beta)
    if protocol == "qfi":
        return qfi_reconstruct(qfi_measure_pixel(setup, pixel, n, seed, index), cal, f.beta)
    raise ValueError(f"unknown protocol {protocol!r}")


@dataclass
class ObjectMap:
    """Grid of object pixels stored as arrays of shape ``(height, width)``.
    ``i`` indexes rows and ``j`` columns."""

    T: np.ndarray
    phi_T: np.ndarray
    phi_R: np.ndarray = field(default=None)

    def __post_init__(self):
        self.T = np.asarray(self.T, dtype=float)
        self.phi_T = np.asarray(self.phi_T, dtype=float)
        if self.phi_R is None:
            self.phi_R = np.zeros_like(self.T)
        self.phi_R = np.asarray(self.phi_R, dtype=float)
        if self.T.ndim != 2 or self.T.size == 0:
            raise OutOfRangeError("object map must be a non-empty 2-D grid")
        if self.phi_T.shape != self.T.shape or self.phi_R.shape != self.T.shape:
            raise OutOfRangeError("T and phase planes must share one shape")
        if not (np.all(np.isfinite(self.T)) and np.all((self.T >= 0) & (self.T <= 1))):
            raise OutOfRangeError("transmissions must lie in [0, 1]")
        if not (np.all(np.isfinite(self.phi_T)) and np.all(np.isfinite(self.phi_R))):
            raise OutOfRangeError("phases must be finite")

    @property
    def height(self) -> int:
        return self.T.shape[0]

    @property
    def width(self) -> int:
        return self.T.shape[1]

    def pixel(self, i: int, j: int) -> ObjectPixel:
        return make_object(self.T[i, j], self.phi_T[i, j], self.phi_R[i, j])


@dataclass
class ReconstructedMap:
    t_hat: np.ndarray
    phi_hat: np.ndarray
    flags: np.ndarray
    t_raw: np.ndarray

    @property
    def height(self) -> int:
        return self.t_hat.shape[0]

    @property
    def width(self) -> int:
        return self.t_hat.shape[1]

    def as_object_map(self) -> ObjectMap:
        return ObjectMap(self.t_hat, self.phi_hat)


@dataclass(frozen=True)
class Metrics:
    rmse_T: float
    rmse_phi: float
    max_abs_err_T: float
    n_pixels: int
    samples_per_setting: int | None


def compute_metrics(truth: ObjectMap, recon: ReconstructedMap, n: int | None) -> Metrics:
    flags = recon.flags
    valid = (flags & PixelFlag.ERROR) == 0
    err_T = (recon.t_hat - truth.T)[valid]
    has_phase = valid & ((flags & PixelFlag.PHASE_UNDEFINED) == 0)
    wrap = np.vectorize(phase_diff, otypes=[float])
    err_phi = wrap(recon.phi_hat[has_phase], truth.phi_T[has_phase]) if has_phase.any() else np.zeros(0)

    def rms(a: np.ndarray) -> float:
        return float(np.sqrt(np.mean(a * a))) if a.size else 0.0

    return Metrics(
        rmse_T=rms(err_T),
        rmse_phi=rms(err_phi),
        max_abs_err_T=float(np.max(np.abs(err_T))) if err_T.size else 0.0,
        n_pixels=int(valid.sum()),
        samples_per_setting=n,
    )


def _scan_rows(args) -> list[tuple[int, int, float, float, int, float]]:
    setup, obj, protocol, n, seed, rows = args
    cal = None
    try:
        cal = calibrate(setup)
    except UpqiError:
        pass
    out = []
    for i in rows:
        for j in range(obj.width):
            try:
                if cal is None:
                    raise OutOfRangeError("invalid calibration")
                rec = measure_and_reconstruct(setup, obj.pixel(i, j), protocol, n, seed, (i, j), cal)
                out.append((i, j, rec.T, rec.phi_T, int(rec.flag), rec.T_raw))
            except UpqiError:
                out.append((i, j, 0.0, 0.0, int(PixelFlag.ERROR), math.nan))
    return out


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise OutOfRangeError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise OutOfRangeError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    return value


def scan_object(
    setup: SetupParams,
    obj: ObjectMap,
    protocol: Protocol = "qsi",
    n: int | None = None,
    master_seed: int = 0,
    workers: int | None = None,
) -> tuple[ReconstructedMap, Metrics]:
    """Reconstruct every pixel of ``obj``. Pixel (i, j) draws its samples from
    seeds derived from ``(master_seed, i, j, setting_index)`` only, so the result
    does not depend on ``workers``. Failing pixels are flagged, never raised."""
    if protocol not in ("qsi", "qfi"):
        raise ValueError(f"unknown protocol {protocol!r}")
    workers = workers or default_workers()
    h, w = obj.T.shape
    t_hat = np.zeros((h, w))
    phi_hat = np.zeros((h, w))
    t_raw = np.zeros((h, w))
    flags = np.zeros((h, w), dtype=np.int64)

    if workers == 1 or h == 1:
        chunks = [_scan_rows((setup, obj, protocol, n, master_seed, range(h)))]
    else:
        row_groups = [list(range(k, h, workers)) for k in range(min(workers, h))]
        with ProcessPoolExecutor(max_workers=len(row_groups)) as pool:
            chunks = list(pool.map(_scan_rows, [(setup, obj, protocol, n, master_seed, g) for g in row_groups]))

    for chunk in chunks:
        for i, j, t, phi, flag, raw in chunk:
            t_hat[i, j], phi_hat[i, j], flags[i, j], t_raw[i, j] = t, phi, flag, raw

    recon = ReconstructedMap(t_hat=t_hat, phi_hat=phi_hat, flags=flags, t_raw=t_raw)
    return recon, compute_metrics(obj, recon, n)
