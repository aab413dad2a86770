"""Varied-line-spacing holographic grating design objective.

The design problem has eight variables (four recording angles in radians,
four source/mirror distances in mm). A recording model maps a design to
the four groove-density expansion values (j10, j20, j30, j40); those are
turned into residuals against the target groove-density coefficients and
combined into a scalar squared-error objective that is minimized.

The optical closed forms of j10..j40 depend on proprietary ray-tracing
derivations, so this module exposes them behind the ``RecordingModel``
callable interface and ships :class:`SyntheticRecordingModel`, a smooth
non-physical stand-in with a known zero-error design and a multimodal
landscape, which is what the benchmark harness runs against.

All lengths are stored in mm (the recording wavelength included), which
keeps the first residual in lines/mm.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from importlib import resources
from typing import Protocol

import numpy as np

from .problems import BoundedProblem

__all__ = [
    "GratingParams",
    "GratingDesign",
    "RecordingModel",
    "SyntheticRecordingModel",
    "DESIGN_VARIABLE_NAMES",
    "nm_to_mm",
    "default_params",
    "default_bounds",
    "default_anchor",
    "load_profile",
    "residuals",
    "integrated_square_error",
    "perfect_recording_values",
    "synthetic_recording_model",
    "grating_problem",
    "make_default_problem",
]

logger = logging.getLogger(__name__)

DESIGN_VARIABLE_NAMES = (
    "gamma", "eta_c", "delta", "eta_d", "p_c", "q_c", "p_d", "q_d",
)


def nm_to_mm(value_nm: float) -> float:
    """Convert nanometres to millimetres (1 nm = 1e-6 mm)."""
    return value_nm * 1e-6


@dataclass(frozen=True)
class GratingParams:
    """Recording constants: target groove-density coefficients and geometry.

    ``n0`` is the central groove density (lines/mm), ``b2``/``b3``/``b4``
    the higher-order density coefficients (1/mm, 1/mm^2, 1/mm^3), ``w0``
    the grating half-width (mm) and ``lambda0`` the recording wavelength
    (mm).
    """

    n0: float
    b2: float
    b3: float
    b4: float
    w0: float
    lambda0: float
    mirror_radii: tuple[float, float] = (1000.0, 1000.0)

    def __post_init__(self):
        if self.n0 <= 0 or self.w0 <= 0 or self.lambda0 <= 0:
            raise ValueError("n0, w0 and lambda0 must be positive")
        if any(r <= 0 for r in self.mirror_radii):
            raise ValueError("mirror radii must be positive")
        for name in ("b2", "b3", "b4"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class GratingDesign:
    """The eight recording design variables (angles in rad, distances in mm)."""

    gamma: float
    eta_c: float
    delta: float
    eta_d: float
    p_c: float
    q_c: float
    p_d: float
    q_d: float

    def __post_init__(self):
        if min(self.p_c, self.q_c, self.p_d, self.q_d) <= 0:
            raise ValueError("distances must be positive")

    def to_vector(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in DESIGN_VARIABLE_NAMES])

    @classmethod
    def from_vector(cls, vector: np.ndarray) -> "GratingDesign":
        vector = np.asarray(vector, dtype=float)
        if vector.shape != (len(DESIGN_VARIABLE_NAMES),):
            raise ValueError(f"design vector must have length {len(DESIGN_VARIABLE_NAMES)}")
        return cls(**dict(zip(DESIGN_VARIABLE_NAMES, map(float, vector))))


class RecordingModel(Protocol):
    """Pure mapping from a design vector and recording constants to
    (j10, j20, j30, j40)."""

    def __call__(self, design: np.ndarray, params: GratingParams) -> tuple[float, float, float, float]:
        ...


def default_params() -> GratingParams:
    """Default recording profile (groove density in lines/mm, lengths in mm)."""
    return GratingParams(
        n0=1400.0,
        b2=8.2453e-4,
        b3=3.0015e-7,
        b4=0.0,
        w0=90.0,
        lambda0=nm_to_mm(413.1),
        mirror_radii=(1000.0, 1000.0),
    )


def default_bounds() -> np.ndarray:
    """Design-variable box: angles in [-pi/2, pi/2], distances in [100, 2000] mm."""
    angle = [-math.pi / 2.0, math.pi / 2.0]
    distance = [100.0, 2000.0]
    return np.array([angle] * 4 + [distance] * 4)


def default_anchor() -> GratingDesign:
    """The zero-error design the synthetic model is anchored at."""
    return GratingDesign(
        gamma=0.35, eta_c=-0.20, delta=0.12, eta_d=-0.40,
        p_c=850.0, q_c=1150.0, p_d=700.0, q_d=1250.0,
    )


def load_profile(path=None) -> tuple[GratingParams, np.ndarray]:
    """Load a parameter profile (JSON) and its design-variable bounds.

    Without a path the packaged default profile is returned. Schema::

        {
          "n0": 1400.0, "b2": 8.2453e-4, "b3": 3.0015e-7, "b4": 0.0,
          "w0": 90.0, "lambda0": 4.131e-4,
          "mirror_radii": [1000.0, 1000.0],
          "bounds": {"angle": [lo, hi], "distance": [lo, hi]}
        }
    """
    if path is None:
        text = resources.files("nichebench").joinpath("data/grating_default.json").read_text()
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    raw = json.loads(text)
    try:
        params = GratingParams(
            n0=float(raw["n0"]),
            b2=float(raw["b2"]),
            b3=float(raw["b3"]),
            b4=float(raw["b4"]),
            w0=float(raw["w0"]),
            lambda0=float(raw["lambda0"]),
            mirror_radii=tuple(float(r) for r in raw.get("mirror_radii", (1000.0, 1000.0))),
        )
    except KeyError as exc:
        raise ValueError(f"grating profile is missing field {exc}") from None
    bounds_cfg = raw.get("bounds", {})
    angle = [float(v) for v in bounds_cfg.get("angle", (-math.pi / 2.0, math.pi / 2.0))]
    distance = [float(v) for v in bounds_cfg.get("distance", (100.0, 2000.0))]
    bounds = np.array([angle] * 4 + [distance] * 4)
    return params, bounds


def residuals(j: tuple[float, float, float, float], params: GratingParams) -> tuple[float, float, float, float]:
    """Groove-density residuals of a recorded design against the targets."""
    j10, j20, j30, j40 = j
    lam = params.lambda0
    r1 = j10 / lam - params.n0
    r2 = j20 / lam - params.n0 * params.b2
    r3 = 3.0 * j30 / (2.0 * lam) - params.n0 * params.b3
    r4 = j40 / (2.0 * lam) - params.n0 * params.b4
    return r1, r2, r3, r4


def integrated_square_error(r: tuple[float, float, float, float], half_width: float) -> float:
    """Scalar design error from the four residuals.

    Equals the integral of the squared groove-density error polynomial
    r1 + r2 w + r3 w^2 + r4 w^3 over w in [-w0, w0], up to the constant
    factor 2 w0, so it is nonnegative in exact arithmetic.
    """
    if half_width <= 0:
        raise ValueError("half_width must be positive")
    r1, r2, r3, r4 = r
    w2 = half_width * half_width
    w4 = w2 * w2
    w6 = w4 * w2
    return (
        r1 * r1
        + w2 * (2.0 * r1 * r3 + r2 * r2) / 3.0
        + w4 * (r3 * r3 + 2.0 * r2 * r4) / 5.0
        + w6 * r4 * r4 / 7.0
    )


def perfect_recording_values(params: GratingParams) -> tuple[float, float, float, float]:
    """The (j10, j20, j30, j40) tuple that zeroes every residual."""
    lam = params.lambda0
    return (
        params.n0 * lam,
        params.n0 * params.b2 * lam,
        2.0 * params.n0 * params.b3 * lam / 3.0,
        2.0 * params.n0 * params.b4 * lam,
    )


# Perturbation constants of the synthetic model. Rows belong to j10..j40,
# columns to the design variables in DESIGN_VARIABLE_NAMES order. Angle
# frequencies are per radian, distance frequencies per mm (periods of a few
# hundred mm across the [100, 2000] box).
SYNTHETIC_FREQUENCIES = np.array(
    [
        [2.0, 3.0, 2.5, 1.5, 0.0041, 0.0059, 0.0031, 0.0047],
        [3.0, 1.0, 4.0, 2.0, 0.0067, 0.0029, 0.0053, 0.0037],
        [1.5, 2.5, 3.5, 4.5, 0.0023, 0.0043, 0.0061, 0.0071],
        [4.0, 3.5, 1.0, 2.5, 0.0079, 0.0019, 0.0047, 0.0029],
    ]
)

# Relative perturbation amplitudes per recording value. The ratios make
# every residual contribute equally to the error once the half-width
# weights are applied; the overall scale puts the error surface roughly in
# [1e-6, 1e-1] across the box, matching the magnitudes the design metrics
# (peak threshold 1e-4) are defined around.
SYNTHETIC_AMPLITUDES = np.array([2.2e-5, 5.4e-4, 2.1e-2, 1.6e-2])


@dataclass(frozen=True)
class SyntheticRecordingModel:
    """Smooth multimodal stand-in for the optical recording computation.

    Each recording value is the zero-residual value scaled by
    ``1 + amplitude_i * sum_k sin(freq_ik * (x_k - anchor_k))``, so the
    anchor design reproduces the zero-residual values exactly while the
    sine sums create further zero-error designs across the box. This model
    is a test double and has no physical meaning.
    """

    anchor: np.ndarray
    amplitudes: np.ndarray
    frequencies: np.ndarray

    def __call__(self, design: np.ndarray, params: GratingParams) -> tuple[float, float, float, float]:
        x = np.asarray(design, dtype=float)
        if x.shape != self.anchor.shape:
            raise ValueError("design vector has wrong dimension")
        waves = self.frequencies * (x - self.anchor)
        factors = 1.0 + self.amplitudes * np.sin(waves).sum(axis=1)
        perfect = np.array(perfect_recording_values(params))
        j = perfect * factors
        return float(j[0]), float(j[1]), float(j[2]), float(j[3])


def synthetic_recording_model(anchor: GratingDesign | np.ndarray | None = None,
                              params: GratingParams | None = None) -> SyntheticRecordingModel:
    """Build the synthetic model, anchored at ``anchor`` (default anchor
    otherwise). ``params`` is accepted for interface symmetry and only
    used to validate that the anchor lies inside the default box."""
    if anchor is None:
        anchor = default_anchor()
    vector = anchor.to_vector() if isinstance(anchor, GratingDesign) else np.asarray(anchor, dtype=float)
    return SyntheticRecordingModel(
        anchor=vector,
        amplitudes=SYNTHETIC_AMPLITUDES.copy(),
        frequencies=SYNTHETIC_FREQUENCIES.copy(),
    )


class _GratingObjective:
    """Picklable objective: error of the recorded design. Logs one warning
    if floating-point cancellation ever produces a negative value."""

    def __init__(self, model: RecordingModel, params: GratingParams):
        self.model = model
        self.params = params
        self._warned = False

    def __call__(self, design: np.ndarray) -> float:
        j = self.model(design, self.params)
        value = integrated_square_error(residuals(j, self.params), self.params.w0)
        if value < 0.0 and not self._warned:
            self._warned = True
            logger.warning(
                "grating error came out negative (%.3e); the recording model "
                "is numerically inconsistent with the squared-error form", value
            )
        return value


def grating_problem(model: RecordingModel, params: GratingParams,
                    bounds: np.ndarray | None = None) -> BoundedProblem:
    """8-dimensional minimization problem over the design box.

    The landscape is unknown in general, so ``known_peaks`` is empty and
    populations are scored with best-fitness and distinct-peak counts.
    """
    if bounds is None:
        bounds = default_bounds()
    return BoundedProblem(
        name="grating",
        dimension=len(DESIGN_VARIABLE_NAMES),
        bounds=np.asarray(bounds, dtype=float),
        direction="min",
        objective=_GratingObjective(model, params),
        known_peaks=(),
    )


def make_default_problem(profile_path=None) -> BoundedProblem:
    """Grating problem with the default (or given) profile and the synthetic
    recording model anchored at the default design."""
    params, bounds = load_profile(profile_path)
    model = synthetic_recording_model()
    return grating_problem(model, params, bounds)
