"""Fisher information and Cramér-Rao bounds for binary-readout sensing.

Conventions: information is quoted in phase-referenced units, i.e. per
unit of the accumulated-phase signal ``gamma V``, so the free-evolution
optimum reads t^2 regardless of the coupling strength.  The uncertainty
bound on the raw signal then carries the coupling once,

    delta_V >= 1 / (gamma sqrt(N F)).

The derivative inside F is nevertheless taken with respect to V directly
(numerically, by Richardson-extrapolated central differences) and divided
by gamma^2, which is algebraically identical for any model of the form
p(gamma V).

For a fringe read out in the equator basis, p = (1 - e^-chi sin(gamma V
t))/2, the information has the closed form

    F = t^2 cos^2(gamma V t) e^-2chi / (1 - e^-2chi sin^2(gamma V t)),

zero at the fringe extrema (gamma V t = (k+1/2) pi) for any finite
contrast and maximal on the slopes (gamma V t = k pi) where F = t^2
e^-2chi.  Without decoherence the two effects cancel exactly and F = t^2
at every bias point.

The quantum information maximizes F over measurements via the symmetric
logarithmic derivative; for a pure state it reduces to the preparation
variance of the coupling operator, bounding delta_V >= 1/(2 gamma
sqrt(N) dH).
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "fisher_information",
    "ramsey_fisher_information",
    "cramer_rao_bound",
    "quantum_fisher_information",
    "pure_state_bound",
]

_H0 = float(np.finfo(float).eps) ** (1.0 / 3.0)


def _derivative(p_model, v: float) -> float:
    """Richardson-extrapolated central difference of p_model at v."""
    h = _H0 * max(1.0, abs(v))
    d1 = (p_model(v + h) - p_model(v - h)) / (2.0 * h)
    d2 = (p_model(v + h / 2) - p_model(v - h / 2)) / h
    return (4.0 * d2 - d1) / 3.0


def fisher_information(p_model, v: float, gamma: float = 1.0) -> float:
    """Phase-referenced information of a binary measurement at signal v.

    ``p_model(v)`` is the probability of the positive outcome.  For the
    two-outcome measurement F_V = (dp/dV)^2 / (p (1-p)), reported as
    F = F_V / gamma^2.

    Where the model touches p = 0 or 1 exactly the quotient is 0/0; the
    singularity is removable (both numerator and denominator vanish
    quadratically), so the value is taken a small step to either side.
    """
    p = float(p_model(v))
    if not 0.0 <= p <= 1.0:
        raise ValueError("p_model must return probabilities")
    var = p * (1.0 - p)
    if var < 1e-13:
        eps = 1e-5 * max(1.0, abs(v))
        lo = fisher_information(p_model, v - eps, gamma)
        hi = fisher_information(p_model, v + eps, gamma)
        return 0.5 * (lo + hi)
    dp = _derivative(p_model, v)
    return dp * dp / (var * gamma**2)


def ramsey_fisher_information(t: float, phase: float,
                              chi: float = 0.0) -> float:
    """Closed-form F for a decohering fringe at accumulated phase gamma V t."""
    if t < 0 or chi < 0:
        raise ValueError("t and chi must be non-negative")
    e2 = math.exp(-2.0 * chi)
    num = t**2 * math.cos(phase) ** 2 * e2
    den = 1.0 - e2 * math.sin(phase) ** 2
    if den < 1e-300:
        return t**2  # chi = 0 at an extremum: the removable limit
    return num / den


def cramer_rao_bound(information: float, n_measurements: int,
                     gamma: float = 1.0) -> float:
    """Lower bound on the signal uncertainty from N repeated measurements.

    delta_V = 1/(gamma sqrt(N F)) with F phase-referenced; on the fringe
    slope this evaluates to e^chi / (gamma t sqrt(N)).
    """
    if n_measurements < 1:
        raise ValueError("need at least one measurement")
    if information <= 0:
        raise ValueError("information must be positive for a finite bound")
    return 1.0 / (gamma * math.sqrt(n_measurements * information))


def quantum_fisher_information(rho: np.ndarray, drho: np.ndarray,
                               gamma: float = 1.0) -> float:
    """Measurement-optimal information of a state family rho(V).

    Diagonalizing rho = sum_j lambda_j |j><j|, the symmetric logarithmic
    derivative gives

        QFI = sum_{j,k: lambda_j + lambda_k > 0}
              2 |<j| drho |k>|^2 / (lambda_j + lambda_k),

    reported phase-referenced as QFI / gamma^2.  Terms with
    lambda_j + lambda_k = 0 are excluded by definition (drho has no
    support there for a valid family).
    """
    rho = np.asarray(rho, dtype=complex)
    drho = np.asarray(drho, dtype=complex)
    if rho.shape != drho.shape or rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("rho and drho must be square matrices of one shape")
    if not np.allclose(rho, rho.conj().T, atol=1e-10):
        raise ValueError("rho must be Hermitian")
    if not np.allclose(drho, drho.conj().T, atol=1e-10):
        raise ValueError("drho must be Hermitian")
    if abs(np.trace(drho)) > 1e-10:
        raise ValueError("drho must be traceless (trace of rho is fixed)")
    lam, vec = np.linalg.eigh(rho)
    a = vec.conj().T @ drho @ vec
    lam = np.clip(lam, 0.0, None)
    denom = lam[:, None] + lam[None, :]
    mask = denom > 1e-12
    total = np.sum(2.0 * np.abs(a[mask]) ** 2 / denom[mask])
    return float(total) / gamma**2


def pure_state_bound(delta_h: float, n_measurements: int,
                     gamma: float = 1.0) -> float:
    """Uncertainty bound for a pure probe, delta_V >= 1/(2 gamma sqrt(N) dH).

    ``delta_h`` is the standard deviation of the (dimensionless) coupling
    operator in the prepared state, times the accumulated evolution time
    if the generator is H*t.
    """
    if delta_h <= 0:
        raise ValueError("delta_h must be positive")
    if n_measurements < 1:
        raise ValueError("need at least one measurement")
    return 1.0 / (2.0 * gamma * math.sqrt(n_measurements) * delta_h)
