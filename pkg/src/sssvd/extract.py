"""Triplet extraction from the reduced basis.

The two-sided route orthonormalizes ``A U_S1 = U~ B`` and takes the SVD of the
small triangular factor, so ``A v_i = sigma_i u_i`` holds by construction.  The
naive route runs Rayleigh-Ritz on ``A^T A`` over the same basis and is kept as
an accuracy baseline.
"""

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .shifted_solver import form_gram


class RankDeficiencyWarning(RuntimeWarning):
    pass


@dataclass(frozen=True, eq=False)
class TripletSet:
    """Candidate triplets, sorted by ascending ``sigma``.

    ``Q`` holds the coefficient vectors ``q_i`` of ``v_i`` in the basis
    ``U_S1`` (one column per triplet); ``valid`` is false where the left
    vector is undefined (zero Ritz value on the naive route).
    """

    sigma: np.ndarray
    U: np.ndarray
    V: np.ndarray
    Q: np.ndarray
    in_interval: np.ndarray
    valid: np.ndarray
    P: np.ndarray = None

    @property
    def count(self):
        return self.sigma.size

    def take(self, idx):
        idx = np.asarray(idx, dtype=int)
        return replace(
            self,
            sigma=self.sigma[idx],
            U=self.U[:, idx],
            V=self.V[:, idx],
            Q=self.Q[:, idx],
            in_interval=self.in_interval[idx],
            valid=self.valid[idx],
            P=None if self.P is None else self.P[:, idx],
        )


def in_interval_mask(sigma, interval):
    a, b = interval
    return (sigma >= a) & (sigma <= b)


def project_qr(A, basis):
    """Economy QR of ``A @ U_S1``; warns when ``B`` has a negligible diagonal entry."""
    AU = np.asarray(A @ basis.U)
    Ut, B = np.linalg.qr(AU)
    diag = np.abs(np.diag(B))
    if diag.size and np.any(diag <= 1e-14 * diag[0]):
        warnings.warn(
            "A @ U_S1 is numerically rank deficient; part of the basis lies in the null space of A",
            RankDeficiencyWarning,
            stacklevel=2,
        )
    return Ut, B


def svd_small(B):
    """``B = P diag(phi) Q^T`` with the singular vectors ``q_i`` as columns of ``Q``."""
    P, phi, Qt = np.linalg.svd(B)
    return P, phi, Qt.T


def assemble_triplets(Ut, basis, P, phi, Q, interval):
    order = np.argsort(phi, kind="stable")
    sigma = phi[order]
    P = P[:, order]
    Q = Q[:, order]
    return TripletSet(
        sigma=sigma,
        U=Ut @ P,
        V=basis.U @ Q,
        Q=Q,
        in_interval=in_interval_mask(sigma, interval),
        valid=np.ones(sigma.size, dtype=bool),
        P=P,
    )


def naive_eigen_route(A, basis, interval, gram=None):
    """Rayleigh-Ritz on ``G = A^T A`` over ``U_S1``; ``sigma = sqrt(theta)``.

    Ritz values ``theta <= 0`` give ``valid = False`` and a zero left vector.
    """
    if gram is None:
        gram = form_gram(A)
    H = basis.U.T @ gram @ basis.U
    theta, Y = np.linalg.eigh((H + H.T) / 2)
    valid = theta > 0
    sigma = np.sqrt(np.where(valid, theta, 0.0))
    V = basis.U @ Y
    AV = np.asarray(A @ V)
    with np.errstate(divide="ignore", invalid="ignore"):
        U = np.where(valid, AV / np.where(valid, sigma, 1.0), 0.0)
    order = np.argsort(sigma, kind="stable")
    return TripletSet(
        sigma=sigma[order],
        U=U[:, order],
        V=V[:, order],
        Q=Y[:, order],
        in_interval=in_interval_mask(sigma[order], interval) & valid[order],
        valid=valid[order],
    )
