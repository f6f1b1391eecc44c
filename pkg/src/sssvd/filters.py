"""Rational filter functions induced by a contour rule.

``f(s) = sum_j w_j / (g(t_j) - s**2)`` is the gain a quadrature pass applies
to the right singular direction with singular value ``s``.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .contour import half_rule
from .errors import ConfigError, NumericalError


def eval_filter(rule, sigma):
    """Evaluate the filter at ``sigma`` (scalar or array) over the full rule."""
    sigma = np.asarray(sigma, dtype=float)
    lam = sigma[..., None] ** 2
    return np.sum(rule.weights / (rule.shifts - lam), axis=-1)


def eval_filter_half(rule, sigma):
    """Same filter through the half rule and conjugate doubling (real result)."""
    nodes, weights = half_rule(rule)
    shifts = rule.transform.forward(nodes)
    lam = np.asarray(sigma, dtype=float)[..., None] ** 2
    return 2 * np.sum(weights / (shifts - lam), axis=-1).real


@dataclass(frozen=True, eq=False)
class FilterProfile:
    grid: np.ndarray
    values: np.ndarray
    rule: object

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            for key, value in self.rule.describe().items():
                fh.write(f"# {key}={value!r}\n")
            writer = csv.writer(fh)
            writer.writerow(["sigma", "abs_f"])
            for s, v in zip(self.grid, self.values):
                writer.writerow([f"{s:.17g}", f"{v:.17g}"])


def filter_profile(rule, sigma_min, sigma_max, points, log_spacing=False):
    if points < 1:
        raise ConfigError("filter profile needs at least one grid point")
    if not 0 < sigma_min < sigma_max and not (points == 1 and 0 < sigma_min):
        raise ConfigError(f"need 0 < sigma_min < sigma_max, got {sigma_min}, {sigma_max}")
    if points == 1:
        grid = np.array([float(sigma_min)])
    elif log_spacing:
        grid = np.geomspace(sigma_min, sigma_max, points)
    else:
        grid = np.linspace(sigma_min, sigma_max, points)
    return FilterProfile(grid=grid, values=np.abs(eval_filter(rule, grid)), rule=rule)


def convergence_ratio(rule, sigma_target, sigma_reference, ell=1):
    """Contraction factor ``|f(sigma_reference) / f(sigma_target)|**ell``."""
    ft = abs(eval_filter(rule, sigma_target))
    if ft <= 1e-30:
        raise NumericalError(f"filter vanishes at sigma = {sigma_target}")
    return (abs(eval_filter(rule, sigma_reference)) / ft) ** ell
