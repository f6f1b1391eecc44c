"""Residual norms (exact and estimated) and spurious-triplet detection."""

from dataclasses import dataclass

import numpy as np

from .errors import CalibrationError

SIGMA_FLOOR = 1e-30
DEFAULT_EPS = 1e-8


@dataclass(frozen=True, eq=False)
class ResidualReport:
    estimated: np.ndarray
    exact: np.ndarray = None
    raw: np.ndarray = None  # uncalibrated estimates (nonlinear case)
    calibration_index: int = None
    mu: float = None


@dataclass(frozen=True, eq=False)
class SpuriousVerdict:
    tau: np.ndarray
    eps: float
    threshold: float
    spurious: np.ndarray


def exact_residual(A, triplets):
    """``||A^T u_i - sigma_i v_i||_2`` for every triplet."""
    R = np.asarray(A.T @ triplets.U) - triplets.V * triplets.sigma
    return np.linalg.norm(R, axis=0)


def _projected_residual(blocks, basis, triplets, shifted_sigma2):
    # S_+ W_S1 Sigma_S1^{-1} stands in for G U_S1 (or g^{-1}(G) U_S1)
    T = blocks.stacked_plus @ (basis.W / basis.sigma)
    R = T @ triplets.Q - (basis.U @ triplets.Q) * shifted_sigma2
    sigma = triplets.sigma
    out = np.full(sigma.size, np.inf)
    ok = (sigma > SIGMA_FLOOR) & np.isfinite(shifted_sigma2)
    out[ok] = np.linalg.norm(R[:, ok], axis=0) / sigma[ok]
    return out


def estimate_residual_linear(blocks, basis, triplets):
    """Residual norms from the moment blocks alone (identity transform).

    Uses ``S_+ = G S``, so no product with ``A`` is needed.  Triplets with
    ``sigma <= 1e-30`` get ``inf``.
    """
    return _projected_residual(blocks, basis, triplets, triplets.sigma**2)


def estimate_residual_nonlinear(blocks, basis, triplets, A, transform, spurious, exact=None):
    """Calibrated residual estimates for a transformed run.

    The transformed residual ``r~_i`` uses ``g^{-1}(sigma_i^2)`` in place of
    ``sigma_i^2``; one exact residual at the calibration index fixes the scale
    ``mu``.  The calibration index is the non-spurious in-interval triplet
    with the largest ``tau``.
    """
    sigma = triplets.sigma
    with np.errstate(divide="ignore", invalid="ignore"):
        target = transform.inverse(sigma**2)
    raw = _projected_residual(blocks, basis, triplets, target)
    candidates = np.flatnonzero(
        triplets.in_interval & ~spurious.spurious & triplets.valid & np.isfinite(raw) & (raw > 0)
    )
    if candidates.size == 0:
        raise CalibrationError("no non-spurious in-interval triplet available for calibration")
    ip = int(candidates[np.argmax(spurious.tau[candidates])])
    if exact is None:
        exact_ip = exact_residual(A, triplets.take([ip]))[0]
    else:
        exact_ip = exact[ip]
    mu = exact_ip / raw[ip]
    estimated = mu * raw
    estimated[ip] = exact_ip
    return ResidualReport(estimated=estimated, exact=exact, raw=raw, calibration_index=ip, mu=float(mu))


def spurious_index(Q, basis_sigma):
    """``tau_i = q_i^T q_i / (q_i^T Sigma_S1^{-1} q_i)``."""
    num = np.sum(Q * Q, axis=0)
    den = np.sum(Q * Q / basis_sigma[:, None], axis=0)
    return num / den


def detect_spurious(triplets, basis_sigma, eps=DEFAULT_EPS):
    """Flag triplets whose ``tau`` falls below ``eps * max(Sigma_S1)``."""
    tau = spurious_index(triplets.Q, basis_sigma)
    threshold = eps * float(np.max(basis_sigma))
    return SpuriousVerdict(tau=tau, eps=eps, threshold=threshold, spurious=(tau < threshold) | ~triplets.valid)
