"""Simulation and reconstruction for imaging with undetected squeezed photons."""

from .errors import UpqiError
from .imaging import Calibration, ObjectMap, calibrate, qfi_reconstruct, qsi_reconstruct, scan_object
from .moments import mean_signal, moments, snr, variance_signal
from .optics import (
    BogoliubovCoeffs,
    FieldParams,
    MeasurementSetting,
    ObjectPixel,
    SetupParams,
    SqueezerParams,
    bogoliubov_coeffs,
    make_object,
    make_setup,
    make_squeezer,
)
from .oracle import oracle_chain

__version__ = "0.1.0"
