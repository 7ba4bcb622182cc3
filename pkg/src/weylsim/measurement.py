"""Displacement-probe readout and marginal-density reconstruction.

The probe couples the qubit to one motional axis through the unitary
U(k) = exp(-i k u sigma_x / 2). Measuring the excited-state population
after preparing the qubit in the sigma_z (+1) or sigma_y (+1) eigenstate
yields

    <cos(k u)> = 2 P_z(k) - 1,        <sin(k u)> = 2 P_y(k) - 1,

the real and imaginary parts of the characteristic function <e^{i k u}> of
the marginal position density along the probed axis. Sampling k on a
uniform grid, extending by conjugate symmetry, and Fourier transforming
recovers the density itself; its first moment recovers the mean position.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (InvalidParameterError, ProtocolError, WindowingError)
from .ionfock import FockState
from .wavepacket import SpinorField, marginal

#: Consistency bound between the two internal probe computations.
PATH_AGREEMENT = 1e-10

#: Bandwidth rule of thumb: k_max below this multiple of 1/width degrades
#: the reconstruction resolution.
BANDWIDTH_FACTOR = 8.0


@dataclass(frozen=True)
class ProbeSchedule:
    """Probe-strength samples for one axis.

    ``k`` must start at zero and increase strictly; ``shots`` of None means
    exact expectation values (the default readout model).
    """

    axis: str
    k: np.ndarray
    shots: int | None = None

    def __post_init__(self):
        if self.axis not in ("x", "y"):
            raise InvalidParameterError(f"axis must be 'x' or 'y', got {self.axis!r}")
        k = np.asarray(self.k, dtype=float)
        if k.ndim != 1 or len(k) < 2:
            raise InvalidParameterError("k must be a 1-D array with at least two samples")
        if k[0] != 0.0 or np.any(np.diff(k) <= 0) or np.any(k < 0):
            raise InvalidParameterError("k must start at 0 and increase strictly")
        object.__setattr__(self, "k", k)
        if self.shots is not None and self.shots < 1:
            raise InvalidParameterError("shots must be >= 1 or None")

    @classmethod
    def uniform(cls, axis: str, k_max: float = 10.0, dk: float = 0.05,
                shots: int | None = None) -> "ProbeSchedule":
        count = int(round(k_max / dk))
        return cls(axis, np.linspace(0.0, count * dk, count + 1), shots)

    def covers_bandwidth(self, width: float = 1.0) -> bool:
        return self.k[-1] >= BANDWIDTH_FACTOR / width


@dataclass(frozen=True)
class MeasurementRecord:
    """Probe populations and the derived characteristic-function samples."""

    axis: str
    k: np.ndarray
    p_z: np.ndarray
    p_y: np.ndarray
    exact: bool = True
    width: float = 1.0

    def __post_init__(self):
        for name in ("k", "p_z", "p_y"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if not (len(self.k) == len(self.p_z) == len(self.p_y)):
            raise InvalidParameterError("k, p_z, p_y must have equal lengths")
        if np.any(self.p_z < -1e-12) or np.any(self.p_z > 1 + 1e-12) \
                or np.any(self.p_y < -1e-12) or np.any(self.p_y > 1 + 1e-12):
            raise InvalidParameterError("populations must lie in [0, 1]")

    @property
    def cos_k(self) -> np.ndarray:
        return 2.0 * self.p_z - 1.0

    @property
    def sin_k(self) -> np.ndarray:
        return 2.0 * self.p_y - 1.0

    @property
    def characteristic(self) -> np.ndarray:
        return self.cos_k + 1j * self.sin_k


@dataclass(frozen=True)
class ReconstructedDensity:
    """1-D density on the conjugate grid of a measurement record."""

    coords: np.ndarray
    density: np.ndarray
    resolution: float
    window: str
    degraded: bool = False

    @property
    def spacing(self) -> float:
        return float(self.coords[1] - self.coords[0])

    def mass(self) -> float:
        return float(self.density.sum() * self.spacing)

    def mean(self) -> float:
        return float((self.density * self.coords).sum() * self.spacing / self.mass())


# ---------------------------------------------------------------------------
# probe forward model
# ---------------------------------------------------------------------------

def _marginal_weights(state: SpinorField, axis: str) -> tuple[np.ndarray, np.ndarray]:
    coords, dens = marginal(state, axis)
    w = dens * state.grid.position_spacing
    return coords, w / w.sum()


def _fock_weights(state: FockState, axis: str) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposed marginal of the probed mode: position eigenvalues of
    a + a^dag and the reduced-state weights on them."""
    if axis not in state.cfg.mode_list:
        raise InvalidParameterError(f"state has no {axis!r} mode")
    psi = state.reshaped()
    axes = {"x": 1, "y": 2 if state.cfg.modes == "xy" else 1}
    mode_axis = axes[axis]
    moved = np.moveaxis(psi, mode_axis, 0).reshape(state.cfg.n_fock, -1)
    rho = moved @ moved.conj().T
    n = state.cfg.n_fock
    xmat = np.diag(np.sqrt(np.arange(1.0, n)), 1) + np.diag(np.sqrt(np.arange(1.0, n)), -1)
    evals, vecs = np.linalg.eigh(xmat)
    weights = np.real(np.einsum("ji,jk,ki->i", vecs.conj(), rho, vecs))
    weights = np.clip(weights, 0.0, None)
    return evals, weights / weights.sum()


def _positions_after_probe(coords: np.ndarray, weights: np.ndarray, k: float):
    """Excited-state populations for the two qubit preparations.

    Builds the 2x2 probe rotation at each position and projects on |1>;
    this is the population route, independent of the direct integral.
    """
    if k == 0.0:
        # identity probe on a normalized density: exact populations
        return 1.0, 0.5
    half = 0.5 * k * coords
    c, s = np.cos(half), np.sin(half)
    # U = [[c, -i s], [-i s, c]] in the (|0>, |1>) basis
    plus_z = np.array([0.0, 1.0])  # sigma_z=+1 eigenstate is |1>
    plus_y = np.array([1.0, -1.0j]) / math.sqrt(2.0)
    amp_z = -1j * s * plus_z[0] + c * plus_z[1]
    amp_y = -1j * s * plus_y[0] + c * plus_y[1]
    p_z = float(np.dot(weights, np.abs(amp_z) ** 2))
    p_y = float(np.dot(weights, np.abs(amp_y) ** 2))
    return p_z, p_y


def probe_expectations(state: SpinorField | FockState, k: float, axis: str):
    """(<cos k u>, <sin k u>) along ``axis`` for a wave-packet or ion state.

    Computed twice: directly against the marginal density, and through the
    excited-state populations after the probe unitary; disagreement beyond
    1e-10 raises, as it would indicate a broken forward model.
    """
    if k < 0:
        raise InvalidParameterError(f"probe strength k must be >= 0, got {k}")
    if isinstance(state, FockState):
        coords, weights = _fock_weights(state, axis)
    else:
        coords, weights = _marginal_weights(state, axis)
    direct_cos = float(np.dot(weights, np.cos(k * coords)))
    direct_sin = float(np.dot(weights, np.sin(k * coords)))
    p_z, p_y = _positions_after_probe(coords, weights, k)
    pop_cos = 2.0 * p_z - 1.0
    pop_sin = 2.0 * p_y - 1.0
    if abs(pop_cos - direct_cos) > PATH_AGREEMENT or abs(pop_sin - direct_sin) > PATH_AGREEMENT:
        raise InvalidParameterError(
            f"probe paths disagree at k={k}: "
            f"cos {pop_cos} vs {direct_cos}, sin {pop_sin} vs {direct_sin}")
    return pop_cos, pop_sin


def measure(state: SpinorField | FockState, schedule: ProbeSchedule,
            width: float = 1.0) -> MeasurementRecord:
    """Run the probe over a schedule, returning exact populations.

    Shot noise is applied separately by :func:`shot_noise` so that exact
    records stay available for tolerance-based checks.
    """
    if isinstance(state, FockState):
        coords, weights = _fock_weights(state, schedule.axis)
    else:
        coords, weights = _marginal_weights(state, schedule.axis)
    p_z = np.empty(len(schedule.k))
    p_y = np.empty(len(schedule.k))
    for i, k in enumerate(schedule.k):
        p_z[i], p_y[i] = _positions_after_probe(coords, weights, k)
    record = MeasurementRecord(schedule.axis, schedule.k, p_z, p_y, exact=True, width=width)
    if schedule.shots is not None:
        record = shot_noise(record, schedule.shots, seed=0)
    return record


def shot_noise(record: MeasurementRecord, shots: int, seed: int) -> MeasurementRecord:
    """Replace each population with a binomial sample mean (seeded)."""
    if shots < 1:
        raise InvalidParameterError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    p_z = rng.binomial(shots, np.clip(record.p_z, 0.0, 1.0)) / shots
    p_y = rng.binomial(shots, np.clip(record.p_y, 0.0, 1.0)) / shots
    return replace(record, p_z=p_z, p_y=p_y, exact=False)


# ---------------------------------------------------------------------------
# reconstruction
# ---------------------------------------------------------------------------

def reconstruct_density(record: MeasurementRecord, window: str = "rect",
                        oversample: int = 1) -> ReconstructedDensity:
    """Fourier-invert the characteristic samples into a 1-D density.

    The one-sided record is extended to negative k by conjugate symmetry,
    optionally tapered, and transformed onto the conjugate grid: resolution
    2 pi / k_max, extent 2 pi / dk. The rectangular window is exact for
    band-limited characteristic functions; the Hann taper trades resolution
    for noise suppression on sampled records.
    """
    if window not in ("rect", "hann"):
        raise InvalidParameterError(f"window must be rect|hann, got {window!r}")
    k = record.k
    dk = k[1] - k[0]
    if not np.allclose(np.diff(k), dk, rtol=0, atol=1e-12 * max(dk, 1.0)):
        raise ProtocolError("reconstruction requires uniformly spaced k samples")
    degraded = not record.k[-1] >= BANDWIDTH_FACTOR / record.width
    char = record.characteristic
    full_k = np.concatenate([-k[:0:-1], k])
    full_c = np.concatenate([np.conj(char[:0:-1]), char])
    if window == "hann":
        taper = 0.5 * (1.0 + np.cos(np.pi * full_k / k[-1]))
    else:
        taper = np.ones_like(full_k)
    count = len(full_k) * max(1, int(oversample))
    dy = 2.0 * math.pi / (len(full_k) * dk) / max(1, int(oversample))
    coords = (np.arange(count) - count // 2) * dy
    dens = (dk / (2.0 * math.pi)) * np.real(
        np.exp(-1j * np.outer(coords, full_k)) @ (taper * full_c))
    return ReconstructedDensity(coords, dens, 2.0 * math.pi / k[-1], window, degraded)


def reconstruct_mean(record: MeasurementRecord, window: str = "rect") -> float:
    """First moment of the reconstructed density.

    Raises when less than 90% of the density mass falls inside the
    reconstruction window, which would bias the moment silently.
    """
    dens = reconstruct_density(record, window=window)
    mass = dens.mass()
    if mass < 0.9:
        raise WindowingError(f"only {mass:.3f} of the density mass is inside the window")
    return dens.mean()
