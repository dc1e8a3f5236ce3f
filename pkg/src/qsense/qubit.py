"""Two-level probe: states, Hamiltonians, pulses, and time evolution.

Conventions used throughout the package:

* Basis: ``|0>`` is the upper Bloch pole, ``rz = +1``; populations are
  ``rho00 = (1 + rz)/2`` and ``rho11 = (1 - rz)/2``.
* Coherence: :attr:`QubitState.rho01` stores ``<1|rho|0> = (rx + i ry)/2``.
  Under a bare splitting ``omega0`` it rotates as ``exp(-i omega0 t)``.
* Generators: all evolution is generated by ``H = (h . sigma)/2`` with
  ``h = (gamma Vx, gamma Vy, -(omega0 + gamma Vz))``; the Bloch vector then
  obeys ``dr/dt = h x r`` and each constant-field step is the exact
  axis-angle rotation about ``h`` by ``|h| dt``.
* Pulses: ``ControlPulse(axis, angle)`` applies ``exp(-i angle sigma_axis/2)``,
  i.e. a right-handed Bloch rotation about ``+axis`` by ``angle``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from ._kernels import evolve_bloch

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

_AXES = {
    "x": np.array([1.0, 0.0, 0.0]),
    "y": np.array([0.0, 1.0, 0.0]),
    "z": np.array([0.0, 0.0, 1.0]),
}

_TOL = 1e-9


def rotate_bloch(r, axis, angle):
    """Rotate Bloch vector(s) ``r`` about ``axis`` by ``angle`` (radians).

    ``r`` may be a single vector (3,) or a batch (n, 3); rotation is
    right-handed about the (not necessarily unit) axis.  Returns a new
    array.
    """
    r = np.asarray(r, dtype=float)
    axis = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(axis)
    if norm == 0.0:
        raise ValueError("rotation axis must be nonzero")
    n = axis / norm
    c, s = math.cos(angle), math.sin(angle)
    dot = r @ n
    cross = np.cross(np.broadcast_to(n, r.shape), r)
    return r * c + cross * s + np.multiply.outer(dot, n) * (1.0 - c)


@dataclass(frozen=True)
class QubitState:
    """Density matrix of a single qubit.

    ``rho01`` is the lower-left entry ``<1|rho|0>`` of the matrix in the
    ``(|0>, |1>)`` basis; the full matrix is therefore
    ``[[rho00, conj(rho01)], [rho01, rho11]]``.
    """

    rho00: float
    rho11: float
    rho01: complex

    def __post_init__(self):
        if abs(self.rho00 + self.rho11 - 1.0) > _TOL:
            raise ValueError(f"trace must be 1, got {self.rho00 + self.rho11}")
        if self.rho00 < -_TOL or self.rho11 < -_TOL:
            raise ValueError("populations must be non-negative")
        det = self.rho00 * self.rho11 - abs(self.rho01) ** 2
        if det < -_TOL:
            raise ValueError(f"state is not positive semidefinite (det={det})")

    @classmethod
    def ground(cls) -> "QubitState":
        return cls(1.0, 0.0, 0.0 + 0.0j)

    @classmethod
    def excited(cls) -> "QubitState":
        return cls(0.0, 1.0, 0.0 + 0.0j)

    @classmethod
    def from_bloch(cls, r) -> "QubitState":
        rx, ry, rz = (float(v) for v in r)
        return cls((1.0 + rz) / 2.0, (1.0 - rz) / 2.0, (rx + 1j * ry) / 2.0)

    @classmethod
    def from_matrix(cls, m) -> "QubitState":
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("density matrix must be 2x2")
        if abs(m[0, 1] - np.conj(m[1, 0])) > _TOL:
            raise ValueError("density matrix must be Hermitian")
        if abs(m[0, 0].imag) > _TOL or abs(m[1, 1].imag) > _TOL:
            raise ValueError("populations must be real")
        return cls(m[0, 0].real, m[1, 1].real, complex(m[1, 0]))

    @property
    def bloch(self) -> np.ndarray:
        """Bloch vector (rx, ry, rz)."""
        return np.array(
            [2.0 * self.rho01.real, 2.0 * self.rho01.imag, self.rho00 - self.rho11]
        )

    @property
    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.rho00, np.conj(self.rho01)], [self.rho01, self.rho11]],
            dtype=complex,
        )

    @property
    def purity(self) -> float:
        """Tr(rho^2); 1 for pure states, 1/2 for the fully mixed state."""
        return float(self.rho00**2 + self.rho11**2 + 2.0 * abs(self.rho01) ** 2)

    def population(self, level: int = 1) -> float:
        """Occupation probability of ``|level>``."""
        if level == 0:
            return self.rho00
        if level == 1:
            return self.rho11
        raise ValueError("level must be 0 or 1")


@dataclass(frozen=True)
class InternalHamiltonian:
    """Static level splitting ``H0 = -(omega0/2) sigma_z`` (rad/s).

    The sign convention places ``|0>`` at +z and makes the stored coherence
    ``<1|rho|0>`` precess as ``exp(-i omega0 t)``.
    """

    omega0: float = 0.0


FieldLike = Union[float, Callable[[float], float]]


def _as_callable(v: FieldLike) -> Callable[[np.ndarray], np.ndarray]:
    if callable(v):
        return lambda t: np.asarray(v(t), dtype=float) + np.zeros_like(t)
    c = float(v)
    return lambda t: np.full_like(np.asarray(t, dtype=float), c)


@dataclass(frozen=True)
class SignalHamiltonian:
    """Coupling of the probe to a (possibly time-dependent) vector signal.

    ``H_V = (gamma/2)(Vx sigma_x + Vy sigma_y - Vz sigma_z)`` with the Vz
    sign folded together with the internal splitting, so a positive DC Vz
    adds to omega0.  Components may be constants or callables of time.
    """

    gamma: float
    v_par: FieldLike = 0.0
    v_perp_x: FieldLike = 0.0
    v_perp_y: FieldLike = 0.0

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")

    def sample(self, times: np.ndarray) -> np.ndarray:
        """(len(times), 3) array of gamma-scaled components (x, y, z)."""
        t = np.asarray(times, dtype=float)
        out = np.empty((t.size, 3))
        out[:, 0] = self.gamma * _as_callable(self.v_perp_x)(t)
        out[:, 1] = self.gamma * _as_callable(self.v_perp_y)(t)
        out[:, 2] = self.gamma * _as_callable(self.v_par)(t)
        return out


@dataclass(frozen=True)
class ControlPulse:
    """Instantaneous rotation ``exp(-i angle sigma_axis / 2)``."""

    axis: str
    angle: float

    def __post_init__(self):
        if self.axis not in _AXES:
            raise ValueError("axis must be one of 'x', 'y', 'z'")

    @property
    def axis_vector(self) -> np.ndarray:
        return _AXES[self.axis]


def apply_pulse(state: QubitState, pulse: ControlPulse) -> QubitState:
    """Apply an instantaneous control rotation to a state."""
    return QubitState.from_bloch(rotate_bloch(state.bloch, pulse.axis_vector, pulse.angle))


def _default_step(h0: InternalHamiltonian, hv: SignalHamiltonian | None,
                  duration: float) -> float:
    # Resolve both the bare precession and the strongest transverse drive;
    # the drive strength is probed on a coarse grid since components may be
    # arbitrary callables.
    candidates = []
    if h0.omega0 != 0.0:
        candidates.append(2.0 * math.pi / abs(h0.omega0))
    if hv is not None:
        probe = np.linspace(0.0, duration, 65)
        f = hv.sample(probe)
        w1 = float(np.hypot(f[:, 0], f[:, 1]).max())
        if w1 > 0.0:
            candidates.append(2.0 * math.pi / w1)
    shortest = min(candidates) if candidates else duration
    return min(shortest, duration) / 200.0


def evolve(state: QubitState, h0: InternalHamiltonian,
           hv: SignalHamiltonian | None, duration: float,
           step: float | None = None) -> QubitState:
    """Evolve a state under ``H0 + H_V`` for ``duration`` seconds.

    The interval is divided into uniform steps (default: 1/200 of the
    shortest precession period among omega0 and the peak transverse drive,
    probed on a 65-point grid; pass ``step`` explicitly for signals with
    structure finer than that).  Fields are sampled at step midpoints and
    held constant; each step is then an exact SU(2) rotation, so trace and
    purity are preserved to machine precision regardless of step size.
    """
    if duration < 0:
        raise ValueError("duration must be non-negative")
    if duration == 0.0:
        return state
    dt = step if step is not None else _default_step(h0, hv, duration)
    if dt <= 0:
        raise ValueError("step must be positive")
    nsteps = max(1, int(math.ceil(duration / dt - 1e-12)))
    dt = duration / nsteps
    tmid = (np.arange(nsteps) + 0.5) * dt

    fields = np.zeros((1, nsteps, 3))
    if hv is not None:
        g = hv.sample(tmid)
        fields[0, :, 0] = g[:, 0]
        fields[0, :, 1] = g[:, 1]
        fields[0, :, 2] = -(h0.omega0 + g[:, 2])
    else:
        fields[0, :, 2] = -h0.omega0

    bloch = state.bloch.reshape(1, 3).copy()
    evolve_bloch(bloch, fields, dt)
    return QubitState.from_bloch(bloch[0])
