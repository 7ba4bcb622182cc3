"""Truncated Fock-space model of the trapped ion.

Works in the same dimensionless system as the rest of the package
(hbar = 1, lengths in trap-spread units), so the per-mode operators are

    x = a + a^dag,     p = -i (a - a^dag) / 2,

the emergent light speed is c = 2 eta Omega, and a dimensionless time t~
corresponds to the physical pulse duration t~ / c.

Basis ordering is fixed and documented: qubit index slowest, then the x
mode, then the y mode; flat index (q * Nx + nx) * Ny + ny. The qubit basis
is (|0>, |1>) with the excited state |1> chosen as the sigma_z = +1
eigenstate, which makes sigma^+ = (sigma_x + i sigma_y)/2 = |1><0| the
raising operator appearing in the red-sideband coupling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.linalg import expm
from scipy.sparse.linalg import expm_multiply

from .errors import (ConfigurationError, InvalidParameterError,
                     TruncationExceededError)

#: Hamiltonians above this dimension are propagated by stepped sparse
#: exponentiation instead of a dense matrix exponential.
DENSE_DIM_LIMIT = 512

#: Tolerated population in the top two Fock levels of either mode.
LEAKAGE_TOLERANCE = 1e-6

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, 1.0j], [-1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[-1.0, 0.0], [0.0, 1.0]], dtype=complex)
SIGMA_PLUS = (SIGMA_X + 1j * SIGMA_Y) / 2.0   # |1><0|
SIGMA_MINUS = (SIGMA_X - 1j * SIGMA_Y) / 2.0  # |0><1|

#: Beam phases that synthesize the planar massless Hamiltonian.
WEYL_PHASES = {"red_x": math.pi / 2, "blue_x": -math.pi / 2,
               "red_y": 0.0, "blue_y": math.pi}


def wrap_phase(phi: float) -> float:
    """Reduce an angle to (-pi, pi]."""
    out = math.fmod(phi + math.pi, 2.0 * math.pi)
    if out <= 0.0:
        out += 2.0 * math.pi
    return out - math.pi


@dataclass(frozen=True)
class FockConfig:
    """Truncation and coupling parameters of the two-mode ion model.

    ``rabi_y`` defaults to ``rabi``; a deliberate mismatch is allowed here
    but rejected by the bichromatic builder, whose synthesis needs equal
    couplings.
    """

    n_fock: int = 16
    modes: str = "xy"
    eta: float = 0.05
    rabi: float = 1.0
    rabi_y: float | None = None

    def __post_init__(self):
        if self.n_fock < 8:
            raise InvalidParameterError(f"n_fock must be >= 8, got {self.n_fock}")
        if self.modes not in ("x", "y", "xy"):
            raise InvalidParameterError(f"modes must be x|y|xy, got {self.modes!r}")
        if not self.eta > 0 or not self.rabi > 0:
            raise InvalidParameterError("eta and rabi must be positive")
        if self.rabi_y is not None and not self.rabi_y > 0:
            raise InvalidParameterError("rabi_y must be positive")

    @property
    def mode_list(self) -> tuple[str, ...]:
        return ("x", "y") if self.modes == "xy" else (self.modes,)

    def rabi_for(self, mode: str) -> float:
        if mode == "y" and self.rabi_y is not None:
            return self.rabi_y
        return self.rabi

    @property
    def dim(self) -> int:
        return 2 * self.n_fock ** len(self.mode_list)

    @property
    def light_speed(self) -> float:
        return 2.0 * self.eta * self.rabi


@dataclass(frozen=True)
class FockOperator:
    """Operator on the truncated qubit (x) mode (x) mode space.

    Stored sparse (CSR); ``dense()`` materializes small operators for
    direct inspection. ``label`` is purely descriptive.
    """

    matrix: sparse.csr_matrix
    cfg: FockConfig
    label: str = ""

    def dense(self) -> np.ndarray:
        return np.asarray(self.matrix.todense())

    def hermiticity_defect(self) -> float:
        diff = self.matrix - self.matrix.conjugate().transpose()
        return 0.0 if diff.nnz == 0 else float(np.abs(diff.data).max())

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return self.hermiticity_defect() <= tol

    def __add__(self, other: "FockOperator") -> "FockOperator":
        return FockOperator(self.matrix + other.matrix, self.cfg,
                            f"({self.label})+({other.label})")

    def expect(self, state: "FockState") -> float:
        return float(np.real(np.vdot(state.vector, self.matrix @ state.vector)))


def _destroy(n: int) -> sparse.csr_matrix:
    return sparse.diags(np.sqrt(np.arange(1.0, n)), 1, format="csr").astype(complex)


def _embed(cfg: FockConfig, qubit: np.ndarray, mode_ops: dict[str, sparse.spmatrix]):
    """Kronecker-assemble qubit (x) per-mode blocks, identity where absent."""
    out = sparse.csr_matrix(qubit)
    eye = sparse.identity(cfg.n_fock, format="csr", dtype=complex)
    for mode in cfg.mode_list:
        out = sparse.kron(out, mode_ops.get(mode, eye), format="csr")
    return out


def build_sideband(kind: str, mode: str, phi: float, cfg: FockConfig) -> FockOperator:
    """Single sideband coupling on one mode.

    red:   eta Omega (a sigma+ e^{i phi} + a^dag sigma- e^{-i phi})
    blue:  eta Omega (a^dag sigma+ e^{i phi} + a sigma- e^{-i phi})
    """
    if kind not in ("red", "blue"):
        raise InvalidParameterError(f"kind must be red|blue, got {kind!r}")
    if mode not in cfg.mode_list:
        raise ConfigurationError(f"mode {mode!r} not enabled in config (modes={cfg.modes})")
    phi = wrap_phase(phi)
    a = _destroy(cfg.n_fock)
    adag = a.conjugate().transpose().tocsr()
    lower, raiser = (a, adag) if kind == "red" else (adag, a)
    coupling = cfg.eta * cfg.rabi_for(mode)
    mat = coupling * (np.exp(1j * phi) * _embed(cfg, SIGMA_PLUS, {mode: lower})
                      + np.exp(-1j * phi) * _embed(cfg, SIGMA_MINUS, {mode: raiser}))
    return FockOperator(mat.tocsr(), cfg, f"{kind}({mode}, phi={phi:.3f})")


def momentum_operator(cfg: FockConfig, mode: str) -> FockOperator:
    a = _destroy(cfg.n_fock)
    op = -0.5j * (a - a.conjugate().transpose())
    return FockOperator(_embed(cfg, np.eye(2, dtype=complex), {mode: op}), cfg, f"p_{mode}")


def position_operator(cfg: FockConfig, mode: str) -> FockOperator:
    a = _destroy(cfg.n_fock)
    op = a + a.conjugate().transpose()
    return FockOperator(_embed(cfg, np.eye(2, dtype=complex), {mode: op}), cfg, f"x_{mode}")


def build_bichromatic_weyl(cfg: FockConfig, phases: dict[str, float] | None = None) -> FockOperator:
    """Four-beam Hamiltonian that equals -c (sigma_x p_x + sigma_y p_y).

    Requires both modes and equal couplings; the identity is exact on the
    truncated space because both sides are linear in the same truncated
    ladder operators.
    """
    if cfg.modes != "xy":
        raise ConfigurationError("bichromatic synthesis needs both modes enabled")
    if cfg.rabi_y is not None and cfg.rabi_y != cfg.rabi:
        raise ConfigurationError(
            f"bichromatic synthesis needs equal couplings, got "
            f"rabi={cfg.rabi} rabi_y={cfg.rabi_y}")
    phases = {**WEYL_PHASES, **(phases or {})}
    total = None
    for mode in ("x", "y"):
        for kind in ("red", "blue"):
            term = build_sideband(kind, mode, phases[f"{kind}_{mode}"], cfg)
            total = term if total is None else total + term
    return FockOperator(total.matrix, cfg, "bichromatic")


def weyl_target(cfg: FockConfig) -> FockOperator:
    """Direct construction of -c (sigma_x p_x + sigma_y p_y) for identity checks."""
    a = _destroy(cfg.n_fock)
    p = -0.5j * (a - a.conjugate().transpose())
    mat = -cfg.light_speed * (_embed(cfg, SIGMA_X, {"x": p}) + _embed(cfg, SIGMA_Y, {"y": p}))
    return FockOperator(mat.tocsr(), cfg, "weyl-target")


def build_displacement(mode: str, cfg: FockConfig) -> FockOperator:
    """Both sidebands at phase zero: eta Omega (a + a^dag) sigma_x on ``mode``."""
    total = build_sideband("red", mode, 0.0, cfg) + build_sideband("blue", mode, 0.0, cfg)
    return FockOperator(total.matrix, cfg, f"displacement({mode})")


def displacement_target(mode: str, cfg: FockConfig) -> FockOperator:
    a = _destroy(cfg.n_fock)
    x = a + a.conjugate().transpose()
    mat = cfg.eta * cfg.rabi_for(mode) * _embed(cfg, SIGMA_X, {mode: x})
    return FockOperator(mat.tocsr(), cfg, f"displacement-target({mode})")


def interior_mask(cfg: FockConfig, margin: int = 1) -> np.ndarray:
    """Basis indices whose Fock levels stay ``margin`` below the truncation
    edge on every mode (where ladder-operator identities are exact)."""
    n = cfg.n_fock
    keep = np.arange(n) < n - margin
    mask = np.ones(2, dtype=bool)
    for _ in cfg.mode_list:
        mask = np.kron(mask, keep).astype(bool)
    return mask


def identity_deviation(built: FockOperator, target: FockOperator, margin: int = 1) -> float:
    """Max-abs element difference restricted to interior rows and columns."""
    mask = interior_mask(built.cfg, margin)
    diff = (built.matrix - target.matrix).tocoo()
    if diff.nnz == 0:
        return 0.0
    keep = mask[diff.row] & mask[diff.col]
    return float(np.abs(diff.data[keep]).max()) if keep.any() else 0.0


class FockState:
    """Normalized state vector over qubit (x) mode [(x) mode]."""

    __slots__ = ("vector", "cfg")

    def __init__(self, vector: np.ndarray, cfg: FockConfig):
        vector = np.asarray(vector, dtype=np.complex128)
        if vector.shape != (cfg.dim,):
            raise InvalidParameterError(f"state length {vector.shape} != dim {cfg.dim}")
        norm = np.linalg.norm(vector)
        if abs(norm - 1.0) > 1e-10:
            raise InvalidParameterError(f"state norm {norm} deviates from 1 beyond 1e-10")
        vector = vector.copy()
        vector.flags.writeable = False
        self.vector = vector
        self.cfg = cfg

    def reshaped(self) -> np.ndarray:
        shape = (2,) + (self.cfg.n_fock,) * len(self.cfg.mode_list)
        return self.vector.reshape(shape)

    def leakage(self) -> float:
        """Population in the top two Fock levels of any mode."""
        psi = self.reshaped()
        dens = np.abs(psi) ** 2
        total = 0.0
        for k in range(1, dens.ndim):
            sl = [slice(None)] * dens.ndim
            sl[k] = slice(self.cfg.n_fock - 2, None)
            total += float(dens[tuple(sl)].sum())
        return total

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))


def ground_plus_state(cfg: FockConfig) -> FockState:
    """Qubit (|0> + |1>)/sqrt(2), every mode in its ground level."""
    vec = np.zeros(cfg.dim, dtype=complex)
    block = cfg.n_fock ** len(cfg.mode_list)
    vec[0] = 1.0 / math.sqrt(2.0)
    vec[block] = 1.0 / math.sqrt(2.0)
    return FockState(vec, cfg)


def coherent_kick_state(n: float, m: float, cfg: FockConfig) -> FockState:
    """Analytic target of the kick pulses: qubit (|0>+|1>)/sqrt(2) with each
    mode in the coherent state of amplitude -i * kick."""
    def coherent(alpha: complex) -> np.ndarray:
        ks = np.arange(cfg.n_fock)
        log_fact = np.cumsum(np.concatenate([[0.0], np.log(np.arange(1.0, cfg.n_fock))]))
        amps = np.exp(-abs(alpha) ** 2 / 2.0) * alpha ** ks / np.exp(0.5 * log_fact)
        return amps.astype(complex)

    kicks = {"x": n, "y": m}
    qubit = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0)
    vec = qubit
    for mode in cfg.mode_list:
        vec = np.kron(vec, coherent(-1j * kicks[mode]))
    vec /= np.linalg.norm(vec)
    return FockState(vec, cfg)


def evolve_fock(state: FockState, op: FockOperator, duration: float) -> FockState:
    """Propagate with exp(-i H duration); norm and truncation guards enforced.

    Dense matrix exponential below ``DENSE_DIM_LIMIT``; stepped sparse
    exponentiation (scipy expm_multiply) above. Leakage beyond the guard
    raises, advising a larger truncation.
    """
    if not op.is_hermitian():
        raise InvalidParameterError(f"Hamiltonian {op.label!r} is not Hermitian")
    if op.cfg.dim != state.cfg.dim:
        raise InvalidParameterError("operator and state configurations differ")
    if state.cfg.dim <= DENSE_DIM_LIMIT:
        propagator = expm(-1j * duration * op.dense())
        out = propagator @ state.vector
    else:
        out = expm_multiply(-1j * duration * op.matrix, state.vector)
    norm = np.linalg.norm(out)
    if abs(norm - 1.0) > 1e-10:
        raise InvalidParameterError(f"propagation lost unitarity: norm {norm}")
    result = FockState(out / norm, state.cfg)
    leak = result.leakage()
    if leak > LEAKAGE_TOLERANCE:
        raise TruncationExceededError(
            f"population {leak:.3e} leaked into the top two Fock levels "
            f"(limit {LEAKAGE_TOLERANCE:g}); increase n_fock beyond {state.cfg.n_fock}")
    return result


def propagator(op: FockOperator, duration: float) -> FockOperator:
    """Dense unitary exp(-i H duration) for small configurations."""
    if op.cfg.dim > DENSE_DIM_LIMIT:
        raise InvalidParameterError(
            f"dense propagator limited to dim <= {DENSE_DIM_LIMIT}, got {op.cfg.dim}")
    mat = sparse.csr_matrix(expm(-1j * duration * op.dense()))
    return FockOperator(mat, op.cfg, f"U({op.label}, {duration:g})")


def prepare_kicked_state(n: float, m: float, cfg: FockConfig) -> FockState:
    """Run the two displacement pulses on the ground state.

    The x pulse lasts n/(eta Omega_x), the y pulse m/(eta Omega_y); on the
    sigma_x = +1 qubit subspace each acts as a pure momentum kick, leaving
    the mode in a coherent state with <p> = -kick.
    """
    if n < 0 or m < 0:
        raise InvalidParameterError("kicks must be non-negative")
    state = ground_plus_state(cfg)
    for mode, kick in (("x", n), ("y", m)):
        if kick == 0 or mode not in cfg.mode_list:
            if kick != 0:
                raise ConfigurationError(f"kick on disabled mode {mode!r}")
            continue
        duration = kick / (cfg.eta * cfg.rabi_for(mode))
        state = evolve_fock(state, build_displacement(mode, cfg), duration)
    return state


def mean_momentum(state: FockState) -> tuple[float, float]:
    cfg = state.cfg
    px = momentum_operator(cfg, "x").expect(state) if "x" in cfg.mode_list else 0.0
    py = momentum_operator(cfg, "y").expect(state) if "y" in cfg.mode_list else 0.0
    return px, py


def mean_position(state: FockState) -> tuple[float, float]:
    cfg = state.cfg
    x = position_operator(cfg, "x").expect(state) if "x" in cfg.mode_list else 0.0
    y = position_operator(cfg, "y").expect(state) if "y" in cfg.mode_list else 0.0
    return x, y


@dataclass(frozen=True)
class CrosscheckReport:
    """Ion-engine vs spectral-engine mean positions at one time."""

    n: float
    m: float
    t: float
    n_fock: int
    fock_x: float
    fock_y: float
    spectral_x: float
    spectral_y: float
    leakage: float

    @property
    def deviation(self) -> float:
        return max(abs(self.fock_x - self.spectral_x), abs(self.fock_y - self.spectral_y))


def fock_vs_spectral_crosscheck(spec, t: float, cfg: FockConfig, grid=None) -> CrosscheckReport:
    """Evolve the prepared kicked state under the bichromatic Hamiltonian for
    dimensionless time t and compare first moments against the spectral engine."""
    from . import observables  # local import to avoid a cycle

    if cfg.modes != "xy":
        raise ConfigurationError("crosscheck needs both modes enabled")
    state = prepare_kicked_state(spec.n, spec.m, cfg)
    hami = build_bichromatic_weyl(cfg)
    evolved = evolve_fock(state, hami, t / cfg.light_speed)
    fx, fy = mean_position(evolved)
    ref = observables.mean_position_spectral(spec, t, grid)
    return CrosscheckReport(spec.n, spec.m, t, cfg.n_fock, fx, fy, ref.x, ref.y,
                            evolved.leakage())
