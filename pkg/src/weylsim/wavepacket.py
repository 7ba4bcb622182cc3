"""Momentum-kicked Gaussian spinor packets and their exact spectral dynamics.

Everything here is dimensionless (hbar = c = 1, lengths in units of the trap
spread Delta). The planar massless Hamiltonian per momentum node is

    H(p) = -(sigma_x px + sigma_y py),    eigenvalues -+|p|,

so positive energy +|p| belongs to the eigenvector (-(px - i py)/|p|, 1)/sqrt(2)
and propagation is the closed-form 2x2 unitary applied node-wise. Fields are
sampled on half-cell-offset momentum grids so the helicity direction
(px + i py)/|p|, which has no limit at the origin, is never evaluated there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from . import _kernels
from .errors import InvalidParameterError, SingularPointError, TruncationError
from .grids import MomentumGrid

#: Largest Gaussian tail mass allowed outside the grid.
TAIL_TOLERANCE = 1e-6


@dataclass(frozen=True)
class WavePacketSpec:
    """Kick parameters (n, m) and packet width.

    The packet starts centered in position with mean momentum
    (-n, -m) in units of hbar/Delta; ``width`` rescales the position
    spread in units of Delta. Kicks may be any non-negative reals.
    """

    n: float = 0.0
    m: float = 0.0
    width: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.n) and self.n >= 0):
            raise InvalidParameterError(f"kick n must be finite and >= 0, got {self.n}")
        if not (math.isfinite(self.m) and self.m >= 0):
            raise InvalidParameterError(f"kick m must be finite and >= 0, got {self.m}")
        if not (math.isfinite(self.width) and self.width > 0):
            raise InvalidParameterError(f"width must be positive, got {self.width}")


class SpinorField:
    """Two-component complex field on a square grid.

    ``data`` has shape (2, N, N); axis 1 is x, axis 2 is y. The array is
    frozen after construction, so fields are safe to share across threads.
    """

    __slots__ = ("representation", "grid", "data")

    def __init__(self, representation: str, grid: MomentumGrid, data: np.ndarray):
        if representation not in ("momentum", "position"):
            raise InvalidParameterError(f"unknown representation {representation!r}")
        data = np.asarray(data, dtype=np.complex128)
        if data.shape != (2, grid.points, grid.points):
            raise InvalidParameterError(
                f"data shape {data.shape} does not match grid ({grid.points} points)")
        data = data.copy()
        data.flags.writeable = False
        self.representation = representation
        self.grid = grid
        self.data = data

    @property
    def cell(self) -> float:
        return self.grid.cell if self.representation == "momentum" else self.grid.position_cell

    @property
    def axis(self) -> np.ndarray:
        return self.grid.axis if self.representation == "momentum" else self.grid.position_axis

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.data) ** 2) * self.cell)

    def norm(self) -> float:
        return math.sqrt(self.norm_squared())

    def inner(self, other: "SpinorField") -> complex:
        if other.representation != self.representation:
            raise InvalidParameterError("inner product needs matching representations")
        return complex(np.sum(np.conj(self.data) * other.data) * self.cell)

    def with_data(self, data: np.ndarray) -> "SpinorField":
        return SpinorField(self.representation, self.grid, data)


@dataclass(frozen=True)
class EnergyDecomposition:
    """Positive/negative-energy parts of a momentum-space field.

    The parts sum node-wise to the parent field and are orthogonal under
    the discrete inner product.
    """

    psi_plus: SpinorField
    psi_minus: SpinorField

    def weights(self) -> tuple[float, float]:
        return self.psi_plus.norm_squared(), self.psi_minus.norm_squared()


def _tail_mass(center: float, width: float, half_extent: float) -> float:
    # 1-D density exp(-2 w^2 (u - center)^2): mass beyond [-P, P]
    s = math.sqrt(2.0) * width
    return 0.5 * (erfc(s * (half_extent - center)) + erfc(s * (half_extent + center)))


def make_initial(spec: WavePacketSpec, grid: MomentumGrid | None = None,
                 spinor: tuple[complex, complex] = (1.0, 1.0)) -> SpinorField:
    """Build the normalized kicked Gaussian in momentum representation.

    The amplitude is proportional to exp(-w^2 (px + n)^2) exp(-w^2 (py + m)^2)
    on both spinor components (internal state (1, 1)/sqrt(2) unless an
    explicit ``spinor`` override is given).
    """
    grid = grid or MomentumGrid()
    for center in (-spec.n, -spec.m):
        tail = _tail_mass(center, spec.width, grid.half_extent)
        if tail > TAIL_TOLERANCE:
            raise TruncationError(
                f"grid half_extent {grid.half_extent} leaves tail mass {tail:.2e} "
                f"outside for kick center {center}; enlarge the grid")
    px, py = grid.mesh
    envelope = np.exp(-spec.width**2 * ((px + spec.n) ** 2 + (py + spec.m) ** 2))
    data = np.stack([spinor[0] * envelope, spinor[1] * envelope]).astype(np.complex128)
    data /= math.sqrt(np.sum(np.abs(data) ** 2) * grid.cell)
    return SpinorField("momentum", grid, data)


def chi_amplitudes(spec: WavePacketSpec, px, py) -> tuple[np.ndarray, np.ndarray]:
    """Scalar weights of the positive/negative-energy plane-wave expansion.

    chi_-+ = C (1 -+ (px + i py)/|p|) exp(-w^2 (px+n)^2) exp(-w^2 (py+m)^2)
    with C = w / (4 pi^(3/2)). Undefined at p = (0, 0).
    """
    px = np.asarray(px, dtype=float)
    py = np.asarray(py, dtype=float)
    p = np.hypot(px, py)
    if np.any(p == 0.0):
        raise SingularPointError("helicity factor undefined at p = (0, 0); use an offset grid")
    helicity = (px + 1j * py) / p
    gauss = np.exp(-spec.width**2 * ((px + spec.n) ** 2 + (py + spec.m) ** 2))
    prefactor = spec.width / (4.0 * np.pi ** 1.5)
    return prefactor * (1.0 - helicity) * gauss, prefactor * (1.0 + helicity) * gauss


def decompose(field: SpinorField) -> EnergyDecomposition:
    """Project a momentum-space field onto the two energy eigenspaces.

    Uses the node-wise projectors P_-+ = (I -+ (sigma . p)/|p|) / 2 written
    out explicitly; the two parts reconstruct the input exactly.
    """
    if field.representation != "momentum":
        raise InvalidParameterError("decompose needs a momentum-representation field")
    px, py = field.grid.mesh
    p = np.hypot(px, py)
    if np.any(p == 0.0):
        raise SingularPointError("grid samples p = (0, 0); use an offset grid")
    h = (px + 1j * py) / p
    c0, c1 = field.data
    plus = np.stack([(c0 - np.conj(h) * c1) / 2.0, (-h * c0 + c1) / 2.0])
    minus = np.stack([(c0 + np.conj(h) * c1) / 2.0, (h * c0 + c1) / 2.0])
    return EnergyDecomposition(field.with_data(plus), field.with_data(minus))


def evolve(field: SpinorField, t: float) -> SpinorField:
    """Propagate for dimensionless time t with the exact per-node unitary."""
    if field.representation != "momentum":
        raise InvalidParameterError("evolve needs a momentum-representation field")
    px, py = field.grid.mesh
    n = field.grid.points
    d0, d1 = _kernels.weyl_propagate(field.data[0].ravel(), field.data[1].ravel(),
                                     px.ravel(), py.ravel(), t)
    return field.with_data(np.stack([d0.reshape(n, n), d1.reshape(n, n)]))


def _unitary_fft(component: np.ndarray, grid: MomentumGrid, inverse: bool) -> np.ndarray:
    """Unitary transform between the offset momentum grid and its position grid.

    Forward (momentum -> position) evaluates
        Psi(x_j) = dp/(2 pi)^(1/2) * sum_k psi(p_k) exp(i p_k x_j)
    per axis via an FFT with boundary phase factors; ``inverse`` undoes it.
    """
    n = grid.points
    dp = grid.spacing
    p0 = grid.axis[0]
    x = grid.position_axis
    k = np.arange(n)
    out = component
    if not inverse:
        pre = np.exp(1j * k * dp * x[0])
        post = np.exp(1j * p0 * x)
        scale = dp / math.sqrt(2.0 * math.pi)
        for axis in (0, 1):
            sh = (-1, 1) if axis == 0 else (1, -1)
            out = np.fft.ifft(out * pre.reshape(sh), axis=axis) * n * scale
            out = out * post.reshape(sh)
    else:
        pre = np.exp(-1j * p0 * x)
        post = np.exp(-1j * k * dp * x[0])
        scale = grid.position_spacing / math.sqrt(2.0 * math.pi) * n
        for axis in (0, 1):
            sh = (-1, 1) if axis == 0 else (1, -1)
            out = np.fft.fft(out * pre.reshape(sh), axis=axis) / n * scale
            out = out * post.reshape(sh)
    return out


def to_position(field: SpinorField) -> SpinorField:
    """Unitary DFT of both spinor components onto the conjugate position grid."""
    if field.representation != "momentum":
        raise InvalidParameterError("field is already in position representation")
    data = np.stack([_unitary_fft(field.data[i], field.grid, inverse=False) for i in (0, 1)])
    return SpinorField("position", field.grid, data)


def to_momentum(field: SpinorField) -> SpinorField:
    """Inverse of :func:`to_position`."""
    if field.representation != "position":
        raise InvalidParameterError("field is already in momentum representation")
    data = np.stack([_unitary_fft(field.data[i], field.grid, inverse=True) for i in (0, 1)])
    return SpinorField("momentum", field.grid, data)


def position_density(field: SpinorField) -> np.ndarray:
    """Total probability density |psi_0|^2 + |psi_1|^2 on the position grid."""
    if field.representation != "position":
        field = to_position(field)
    return np.abs(field.data[0]) ** 2 + np.abs(field.data[1]) ** 2


def marginal(field: SpinorField, axis: str) -> tuple[np.ndarray, np.ndarray]:
    """1-D position density along ``axis`` ("x" or "y"), other axis integrated out.

    Returns (coordinates, density); the density integrates to the field norm.
    """
    if axis not in ("x", "y"):
        raise InvalidParameterError(f"axis must be 'x' or 'y', got {axis!r}")
    if field.representation != "position":
        field = to_position(field)
    dens = np.abs(field.data[0]) ** 2 + np.abs(field.data[1]) ** 2
    reduce_axis = 1 if axis == "x" else 0
    values = dens.sum(axis=reduce_axis) * field.grid.position_spacing
    return field.grid.position_axis, values


def momentum_moments(field: SpinorField) -> tuple[float, float]:
    """First moments (<px>, <py>) of the momentum density."""
    if field.representation != "momentum":
        raise InvalidParameterError("momentum_moments needs a momentum-representation field")
    dens = (np.abs(field.data[0]) ** 2 + np.abs(field.data[1]) ** 2) * field.grid.cell
    px, py = field.grid.mesh
    total = dens.sum()
    return float((dens * px).sum() / total), float((dens * py).sum() / total)


def position_moments(field: SpinorField) -> tuple[float, float]:
    """First moments (<x>, <y>) of the position density."""
    if field.representation != "position":
        field = to_position(field)
    dens = (np.abs(field.data[0]) ** 2 + np.abs(field.data[1]) ** 2) * field.grid.position_cell
    x = field.grid.position_axis
    total = dens.sum()
    return float((dens * x[:, None]).sum() / total), float((dens * x[None, :]).sum() / total)
