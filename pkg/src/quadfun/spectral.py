"""Fourier basis on the unit torus and empirical characteristic functions.

Convention: the sample space is [0, 1)^D with basis elements
psi_z(x) = exp(2*pi*i*<z, x>), which are orthonormal in L2 so Parseval is
exact. With this 2*pi scaling the spectral Sobolev product matches the
classical derivative form only up to a (2*pi)^(2s) factor; that constant is
a property of the normalization, not an approximation.

The spectral coefficient of a distribution at frequency z is
E[conj(psi_z(X))]; its plug-in estimate is the sample mean of the conjugated
basis values. Summation is a plain mean over samples in given order:
samples are off-grid, the retained frequency sets stay small, and exactness
beats FFT binning at this scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataFormatError, DimensionError, DomainError, EstimationError
from .frequency import Frequency, FrequencySet


@dataclass(frozen=True)
class SampleSet:
    """n points on the unit torus, one row per sample."""

    dimension: int
    points: np.ndarray
    label: str = ""

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or (pts.shape[0] > 0 and pts.shape[1] != self.dimension):
            raise DimensionError(
                f"points must have shape (n, {self.dimension}), got {pts.shape}"
            )
        if pts.size and (pts.min() < 0.0 or pts.max() >= 1.0):
            raise DomainError("sample coordinates must lie in [0, 1)")
        pts = np.ascontiguousarray(pts)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class SpectralProfile:
    """Map from frequency to complex spectral coefficient.

    provenance is ("empirical", n) for plug-in estimates or ("exact",) for
    closed-form reference spectra. Hermitian symmetry
    coefficients[-z] == conj(coefficients[z]) is checked when both keys are
    present, and the zero-frequency coefficient must be 1 (unit mass).
    """

    coefficients: dict[Frequency, complex]
    provenance: tuple = ("exact",)

    def __post_init__(self):
        coeffs = self.coefficients
        origin = tuple([0] * len(next(iter(coeffs)))) if coeffs else None
        if origin is not None and origin in coeffs:
            if abs(coeffs[origin] - 1.0) > 1e-12:
                raise ValueError("zero-frequency coefficient must equal 1")
        for z, value in coeffs.items():
            neg = tuple(-c for c in z)
            if neg in coeffs and abs(coeffs[neg] - value.conjugate()) > 1e-12:
                raise ValueError(f"hermitian symmetry violated at {z}")

    def __getitem__(self, z: Frequency) -> complex:
        return self.coefficients[tuple(z)]

    def __contains__(self, z) -> bool:
        return tuple(z) in self.coefficients


def basis_eval(z: Frequency, x) -> complex:
    """psi_z(x) = exp(2*pi*i*<z, x>); unit modulus. x must lie in [0, 1)^D."""
    z = tuple(z)
    if np.isscalar(x):
        x = (float(x),)
    x = tuple(float(c) for c in x)
    if len(x) != len(z):
        raise DimensionError(f"frequency has D={len(z)} but point has D={len(x)}")
    if any(c < 0.0 or c >= 1.0 for c in x):
        raise DomainError(f"point {x} outside [0, 1)^D; reduce mod 1 first")
    phase = 2.0 * np.pi * sum(zi * xi for zi, xi in zip(z, x))
    return complex(np.cos(phase), np.sin(phase))


def empirical_cf(samples: SampleSet, Z: FrequencySet) -> SpectralProfile:
    """Plug-in spectral coefficients (1/n) sum_i conj(psi_z(X_i)) for z in Z.

    Each coefficient has modulus <= 1; for negation-closed Z the output is
    exactly hermitian because conjugate frequencies reuse the same phases
    with flipped sign. Coefficients are assembled in the deterministic
    member order of Z.
    """
    n = len(samples)
    if n == 0:
        raise EstimationError("cannot estimate spectral coefficients from 0 samples")
    if samples.dimension != Z.dimension:
        raise DimensionError(
            f"samples have D={samples.dimension} but frequencies have D={Z.dimension}"
        )
    coords = Z.coords_array()
    if coords.shape[0] == 0:
        return SpectralProfile(coefficients={}, provenance=("empirical", n))
    phases = samples.points @ coords.T.astype(np.float64)  # (n, m)
    values = np.exp(-2j * np.pi * phases).mean(axis=0)
    coefficients = {z: complex(values[i]) for i, z in enumerate(Z.members)}
    return SpectralProfile(coefficients=coefficients, provenance=("empirical", n))


def load_samples_csv(path: str, label: str = "") -> SampleSet:
    """Read samples from CSV: one row per sample, D numeric columns in [0, 1).

    Any malformed row aborts with its 1-based line number.
    """
    rows: list[list[float]] = []
    dim: int | None = None
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            cells = [cell.strip() for cell in line.split(",")]
            try:
                values = [float(cell) for cell in cells]
            except ValueError:
                raise DataFormatError(f"non-numeric value in {cells}", line=lineno) from None
            if dim is None:
                dim = len(values)
            elif len(values) != dim:
                raise DataFormatError(
                    f"expected {dim} columns, got {len(values)}", line=lineno
                )
            for v in values:
                if not (0.0 <= v < 1.0) or v != v:
                    raise DataFormatError(
                        f"coordinate {v} outside [0, 1)", line=lineno
                    )
            rows.append(values)
    if dim is None:
        raise DataFormatError("sample file contains no rows", line=1)
    return SampleSet(dimension=dim, points=np.array(rows, dtype=np.float64), label=label)
