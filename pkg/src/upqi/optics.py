"""Physical parameters of the two-crystal setup and the output-mode Bogoliubov map.

Mode layout used throughout the package:

* mode 0 -- signal, seeded by the coherent field ``alpha e^{i phi_alpha}``
* mode 1 -- idler, probes the object
* mode 2 -- the empty port of the object beam splitter

The detected field after the second crystal is

    a_S2 = G a_S0 + g a_I0^dagger + r a_IL^dagger

with ``|G|^2 - |g|^2 - |r|^2 = 1``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

from .errors import NegativeError, NonFiniteError, OutOfRangeError

TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi


def wrap_phase(theta: float) -> float:
    """Wrap an angle to the half-open interval (-pi, pi]."""
    if -math.pi < theta <= math.pi:
        # math.remainder raises on subnormal arguments
        return theta
    w = math.remainder(theta, TWO_PI)
    if w <= -math.pi:
        w += TWO_PI
    return w


def phase_diff(a: float, b: float) -> float:
    """Wrapped difference ``a - b``."""
    return wrap_phase(a - b)


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise NonFiniteError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class SqueezerParams:
    """Two-mode squeezer ``a' = G a + g e^{i phi} b^dagger`` with ``G = cosh r``."""

    r: float
    G: float
    g: float
    pump_phase: float


@dataclass(frozen=True)
class ObjectPixel:
    """One object point modelled as a lossless beam splitter."""

    T: float
    phi_T: float
    R: float
    phi_R: float


@dataclass(frozen=True)
class FieldParams:
    alpha: float
    phi_alpha: float
    beta: float
    phi_beta: float

    def __post_init__(self):
        for name in ("alpha", "phi_alpha", "beta", "phi_beta"):
            _finite(name, getattr(self, name))
        if self.alpha < 0 or self.beta < 0:
            raise NegativeError("coherent amplitudes must be non-negative")


@dataclass(frozen=True)
class MeasurementSetting:
    """Controllable phase offsets: ``delta = phi_alpha + phi_beta`` and
    ``Delta = phi_P2 - phi_P1``. ``k`` is set when ``delta`` is a multiple of pi/2."""

    delta: float
    Delta: float
    k: int | None = None

    @classmethod
    def from_phases(cls, delta: float, Delta: float) -> "MeasurementSetting":
        delta = wrap_phase(delta)
        k = round(delta / HALF_PI)
        k = k if abs(delta - k * HALF_PI) < 1e-12 else None
        return cls(delta=delta, Delta=wrap_phase(Delta), k=k)


@dataclass(frozen=True)
class SetupParams:
    squeezer1: SqueezerParams
    squeezer2: SqueezerParams
    field: FieldParams

    @property
    def gain_ratio(self) -> float:
        """``g1 g2 / (G1 G2)``; the interference parameter is this times T."""
        return (self.squeezer1.g * self.squeezer2.g) / (self.squeezer1.G * self.squeezer2.G)

    def x(self, pixel: ObjectPixel) -> float:
        return pixel.T * self.gain_ratio

    def setting(self) -> MeasurementSetting:
        return MeasurementSetting.from_phases(
            self.field.phi_alpha + self.field.phi_beta,
            self.squeezer2.pump_phase - self.squeezer1.pump_phase,
        )

    def with_setting(self, delta: float | None = None, Delta: float | None = None) -> "SetupParams":
        """Return a copy with the local-oscillator phase and/or the second pump
        phase retuned so that the requested offsets hold. The seed phase and the
        first pump phase are left untouched."""
        out = self
        if delta is not None:
            field = replace(out.field, phi_beta=wrap_phase(delta - out.field.phi_alpha))
            out = replace(out, field=field)
        if Delta is not None:
            sq2 = replace(out.squeezer2, pump_phase=wrap_phase(out.squeezer1.pump_phase + Delta))
            out = replace(out, squeezer2=sq2)
        return out


@dataclass(frozen=True)
class BogoliubovCoeffs:
    G: complex
    g: complex
    r: complex
    x: float
    phi_G: float
    mod_G: float
    phi1: float
    phi2: float
    phi3: float


def make_squeezer(r: float, pump_phase: float = 0.0) -> SqueezerParams:
    """Build a squeezer from its squeeze parameter ``r`` (``G = cosh r``, ``g = sinh r``).

    Raises
    ------
    NonFiniteError
        If ``r`` or the phase is NaN or infinite.
    NegativeError
        If ``r < 0``.
    """
    r = _finite("r", r)
    pump_phase = _finite("pump_phase", pump_phase)
    if r < 0:
        raise NegativeError(f"squeeze parameter must be >= 0, got {r}")
    return SqueezerParams(r=r, G=math.cosh(r), g=math.sinh(r), pump_phase=wrap_phase(pump_phase))


def make_object(T: float, phi_T: float = 0.0, phi_R: float = 0.0) -> ObjectPixel:
    T = _finite("T", T)
    if not 0.0 <= T <= 1.0:
        raise OutOfRangeError(f"transmission must lie in [0, 1], got {T}")
    R = math.sqrt((1.0 - T) * (1.0 + T))
    return ObjectPixel(
        T=T,
        phi_T=wrap_phase(_finite("phi_T", phi_T)),
        R=R,
        phi_R=wrap_phase(_finite("phi_R", phi_R)),
    )


def make_setup(
    r1: float,
    r2: float,
    alpha: float = 1.0,
    beta: float = 1.0,
    *,
    phi_p1: float = 0.0,
    phi_p2: float = 0.0,
    phi_alpha: float = 0.0,
    phi_beta: float = 0.0,
) -> SetupParams:
    """Convenience constructor from scalar parameters."""
    return SetupParams(
        squeezer1=make_squeezer(r1, phi_p1),
        squeezer2=make_squeezer(r2, phi_p2),
        field=FieldParams(
            alpha=alpha,
            phi_alpha=wrap_phase(_finite("phi_alpha", phi_alpha)),
            beta=beta,
            phi_beta=wrap_phase(_finite("phi_beta", phi_beta)),
        ),
    )


def phi_G_closed_form(x: float, psi: float) -> float:
    """Phase of G from the interference parameter and ``psi = Delta - phi_T``."""
    return math.atan2(x * math.sin(psi), 1.0 + x * math.cos(psi))


def mod_G_sq_closed_form(G1: float, G2: float, x: float, psi: float) -> float:
    return (G1 * G2) ** 2 * (x * x + 2.0 * x * math.cos(psi) + 1.0)


def bogoliubov_coeffs(setup: SetupParams, pixel: ObjectPixel) -> BogoliubovCoeffs:
    """Coefficients of the detected signal mode in terms of the three input modes."""
    s1, s2 = setup.squeezer1, setup.squeezer2
    phi1 = wrap_phase(s2.pump_phase - s1.pump_phase - pixel.phi_T)
    phi2 = wrap_phase(s2.pump_phase - pixel.phi_T)
    phi3 = wrap_phase(s2.pump_phase - pixel.phi_R)

    G = s1.G * s2.G + s1.g * s2.g * pixel.T * cmath.exp(1j * phi1)
    g = s1.g * s2.G * cmath.exp(1j * s1.pump_phase) + s1.G * s2.g * pixel.T * cmath.exp(1j * phi2)
    r = s2.g * pixel.R * cmath.exp(1j * phi3)

    x = setup.x(pixel)
    return BogoliubovCoeffs(
        G=G,
        g=g,
        r=r,
        x=x,
        # atan2 form: the denominator 1 + x cos(phi1) stays positive for x < 1
        phi_G=phi_G_closed_form(x, phi1),
        mod_G=abs(G),
        phi1=phi1,
        phi2=phi2,
        phi3=phi3,
    )
