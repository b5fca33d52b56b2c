"""Closed-form homodyne statistics of the detected signal mode.

The homodyne observable is ``S = beta (a^dagger e^{-i phi_beta} + a e^{i phi_beta})``
(unit prefactor), for which

    <S>     = 2 alpha beta |G| cos(phi_G + delta)
    Var(S)  = beta^2 (2 |G|^2 - 1)
    SNR     = <S>^2 / Var(S) = 4 alpha^2 Gamma cos^2(phi_G + delta)
    Gamma   = |G|^2 / (2 |G|^2 - 1)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

from .errors import InvalidSettingError
from .optics import (
    HALF_PI,
    BogoliubovCoeffs,
    FieldParams,
    MeasurementSetting,
    ObjectPixel,
    SetupParams,
    bogoliubov_coeffs,
    wrap_phase,
)

Regime = Literal["x0", "x1"]


@dataclass(frozen=True)
class MomentResult:
    mean: float
    variance: float
    snr: float
    gamma: float


def mean_signal(coeffs: BogoliubovCoeffs, field: FieldParams, setting: MeasurementSetting) -> float:
    return 2.0 * field.alpha * field.beta * coeffs.mod_G * math.cos(coeffs.phi_G + setting.delta)


def variance_signal(coeffs: BogoliubovCoeffs, field: FieldParams) -> float:
    return field.beta**2 * (2.0 * coeffs.mod_G**2 - 1.0)


def gamma_factor(mod_G: float) -> float:
    m2 = mod_G * mod_G
    return m2 / (2.0 * m2 - 1.0)


def snr(coeffs: BogoliubovCoeffs, field: FieldParams, setting: MeasurementSetting) -> tuple[float, float]:
    """Return ``(snr, gamma)``. Exactly zero at a quadrature null, never NaN."""
    gamma = gamma_factor(coeffs.mod_G)
    c = math.cos(coeffs.phi_G + setting.delta)
    return 4.0 * field.alpha**2 * gamma * c * c, gamma


def moments(setup: SetupParams, pixel: ObjectPixel, setting: MeasurementSetting | None = None) -> MomentResult:
    """All four closed-form statistics for one pixel at the setup's own phases."""
    if setting is None:
        setting = setup.setting()
    coeffs = bogoliubov_coeffs(setup, pixel)
    s, gamma = snr(coeffs, setup.field, setting)
    return MomentResult(
        mean=mean_signal(coeffs, setup.field, setting),
        variance=variance_signal(coeffs, setup.field),
        snr=s,
        gamma=gamma,
    )


def sensitivity_exact(setup: SetupParams, pixel: ObjectPixel, setting: MeasurementSetting | None = None) -> float:
    """``|d<S>/d phi_T|`` from the full mean, through both |G| and phi_G.

    With ``psi = Delta - phi_T``:

        d|G|/dpsi   = -(G1 G2)^2 x sin(psi) / |G|
        dphi_G/dpsi = x (x + cos psi) / (1 + x^2 + 2 x cos psi)
    """
    if setting is None:
        setting = setup.setting()
    coeffs = bogoliubov_coeffs(setup, pixel)
    x = coeffs.x
    if x == 0.0:
        return 0.0
    psi = coeffs.phi1
    G1G2 = setup.squeezer1.G * setup.squeezer2.G
    mod_G = coeffs.mod_G
    d_mod = -(G1G2**2) * x * math.sin(psi) / mod_G
    d_phase = x * (x + math.cos(psi)) / (1.0 + x * x + 2.0 * x * math.cos(psi))
    theta = coeffs.phi_G + setting.delta
    amp = 2.0 * setup.field.alpha * setup.field.beta
    # d psi / d phi_T = -1 drops out under abs()
    return abs(amp * (d_mod * math.cos(theta) - mod_G * math.sin(theta) * d_phase))


def _require_k(setting: MeasurementSetting) -> int:
    if setting.k is None:
        raise InvalidSettingError(f"delta={setting.delta!r} is not an integer multiple of pi/2")
    return setting.k


def _setting_for_k(setup: SetupParams, k: int | None) -> MeasurementSetting:
    base = setup.setting()
    if k is None:
        return base
    return MeasurementSetting.from_phases(k * HALF_PI, base.Delta)


def sensitivity_asymptotic(
    setup: SetupParams, pixel: ObjectPixel, k: int | None = None, regime: Regime = "x0"
) -> float:
    """Printed small-signal phase sensitivity per unit phi_T change, for delta = k pi/2.

    ``x0`` (opaque object):
        odd k:  2 x alpha beta G1 G2 |cos(Delta - phi_T)|
        even k: x^2 alpha beta G1 G2 |sin 2(Delta - phi_T)|
    ``x1`` (transparent object, high gain):
        odd k:  2 alpha beta G1 G2 |cos(Delta - phi_T)|
        even k: 2 alpha beta G1 G2 |sin(Delta - phi_T)|

    If ``k`` is omitted it is read from the setup's own ``delta``.
    """
    setting = _setting_for_k(setup, k)
    k = _require_k(setting)
    ab = setup.field.alpha * setup.field.beta * setup.squeezer1.G * setup.squeezer2.G
    psi = wrap_phase(setting.Delta - pixel.phi_T)
    x = setup.x(pixel)
    odd = k % 2 == 1
    if regime == "x0":
        if odd:
            return 2.0 * x * ab * abs(math.cos(psi))
        return x * x * ab * abs(math.sin(2.0 * psi))
    if regime == "x1":
        return 2.0 * ab * abs(math.cos(psi) if odd else math.sin(psi))
    raise ValueError(f"unknown regime {regime!r}")


def snr_limit(setup: SetupParams, pixel: ObjectPixel, k: int | None = None, regime: Regime = "x0") -> float:
    """Printed limiting SNR for delta = k pi/2.

    ``x0``: 4 alpha^2 Gamma phi_G^2 (odd k) or 4 alpha^2 Gamma (even k), with Gamma
    and phi_G evaluated for the given pixel.
    ``x1``: 2 alpha^2 sin^2(psi/2) (odd k) or 2 alpha^2 cos^2(psi/2) (even k).
    """
    setting = _setting_for_k(setup, k)
    k = _require_k(setting)
    a2 = setup.field.alpha**2
    odd = k % 2 == 1
    if regime == "x0":
        coeffs = bogoliubov_coeffs(setup, pixel)
        gamma = gamma_factor(coeffs.mod_G)
        return 4.0 * a2 * gamma * (coeffs.phi_G**2 if odd else 1.0)
    if regime == "x1":
        half = 0.5 * wrap_phase(setting.Delta - pixel.phi_T)
        return 2.0 * a2 * (math.sin(half) ** 2 if odd else math.cos(half) ** 2)
    raise ValueError(f"unknown regime {regime!r}")
