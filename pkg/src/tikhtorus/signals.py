"""Test signals for the 1-d experiments: the piecewise-linear plateau ("hat")
target and loading of user-supplied coefficient files.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import ConfigError, DimensionError
from .spectral import FrequencyLattice, SpectralField

__all__ = ["hat_values", "hat_coefficients", "load_coefficient_file"]

# breakpoints of the plateau signal: zero outside (0.3, 0.7), ramps up on
# (0.3, 0.4), flat 1 on [0.4, 0.6], ramps down on (0.6, 0.7)
_RAMP_UP = (0.3, 0.4)
_RAMP_DOWN = (0.6, 0.7)


def hat_values(x: np.ndarray) -> np.ndarray:
    """Pointwise values of the plateau signal on [0, 1)."""
    x = np.asarray(x, dtype=np.float64)
    up = (x > _RAMP_UP[0]) & (x < _RAMP_UP[1])
    flat = (x >= _RAMP_UP[1]) & (x <= _RAMP_DOWN[0])
    down = (x > _RAMP_DOWN[0]) & (x < _RAMP_DOWN[1])
    out = np.zeros_like(x)
    out[up] = 10.0 * x[up] - 3.0
    out[flat] = 1.0
    out[down] = -10.0 * x[down] + 7.0
    return out


def hat_coefficients(lattice: FrequencyLattice) -> SpectralField:
    """Closed-form Fourier coefficients of the plateau signal.

    The signal is continuous and piecewise linear with derivative +-10 on the
    ramps, so integrating by parts once gives, for l != 0,

        c(l) = -10 (E(0.3) - E(0.4) - E(0.6) + E(0.7)) / (2 pi l)^2,
        E(a) = exp(-2 pi i l a),

    and c(0) = 0.3 (plateau 0.2 plus two ramp areas of 0.05). Computing the
    coefficients in closed form instead of sampling avoids aliasing from the
    kinks; negative modes are mirrored explicitly so Hermitian symmetry is
    exact.
    """
    if lattice.dimension != 1:
        raise DimensionError("the plateau signal is one-dimensional")
    M = lattice.bandlimit
    coeffs = np.zeros(lattice.mode_count, dtype=np.complex128)
    center = lattice.zero_index
    coeffs[center] = 0.3
    if M > 0:
        l = np.arange(1, M + 1, dtype=np.float64)

        def phase(a: float) -> np.ndarray:
            return np.exp(-2j * np.pi * l * a)

        jumps = phase(0.3) - phase(0.4) - phase(0.6) + phase(0.7)
        positive = -10.0 * jumps / (4.0 * np.pi**2 * l**2)
        coeffs[center + 1 :] = positive
        coeffs[:center] = positive[::-1].conj()
    return SpectralField(lattice, coeffs, hermitian=True)


def load_coefficient_file(path: str | Path, lattice: FrequencyLattice) -> SpectralField:
    """Read a custom real signal from a CSV of rows ``ell,re,im``.

    Only modes ell >= 0 may appear; negative modes are filled by conjugation.
    Unlisted modes are zero. The imaginary part at ell = 0 must be zero.
    """
    if lattice.dimension != 1:
        raise DimensionError("coefficient files are one-dimensional")
    coeffs = np.zeros(lattice.mode_count, dtype=np.complex128)
    center = lattice.zero_index
    path = Path(path)
    with path.open(newline="") as handle:
        for line_number, row in enumerate(csv.reader(handle), start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if len(row) != 3:
                raise ConfigError(f"{path}:{line_number}: expected 'ell,re,im', got {row!r}")
            try:
                ell = int(row[0])
                value = complex(float(row[1]), float(row[2]))
            except ValueError as exc:
                raise ConfigError(f"{path}:{line_number}: {exc}") from exc
            if ell < 0:
                raise ConfigError(
                    f"{path}:{line_number}: list modes ell >= 0 only; "
                    "negative modes are filled by conjugation"
                )
            if ell > lattice.bandlimit:
                raise ConfigError(
                    f"{path}:{line_number}: mode {ell} exceeds bandlimit {lattice.bandlimit}"
                )
            if ell == 0:
                if value.imag != 0.0:
                    raise ConfigError(f"{path}:{line_number}: mode 0 must be real")
                coeffs[center] = value.real
            else:
                coeffs[center + ell] = value
                coeffs[center - ell] = value.conjugate()
    return SpectralField(lattice, coeffs, hermitian=True)
