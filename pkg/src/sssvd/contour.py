"""Quadrature rules on an elliptic contour around a squared singular-value interval.

Nodes sit on the ellipse ``gamma + rho * (cos(theta) + 1j * alpha * sin(theta))``
with ``theta_j = 2*pi/N * (j - 1/2)``.  Under the identity map the ellipse
encloses ``[a**2, b**2]``; under the exponential map it encloses
``[log(a**2), log(b**2)]`` and the solver samples the resolvent at
``exp(t_j)``.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError

DEFAULT_N = 32
DEFAULT_ALPHA = 0.1


class TransformKind(str, enum.Enum):
    IDENTITY = "identity"
    EXP = "exp"


@dataclass(frozen=True)
class Transform:
    """Monotone spectral map ``z = g(t)`` together with its inverse and derivative."""

    kind: TransformKind

    def forward(self, t):
        if self.kind is TransformKind.EXP:
            return np.exp(t)
        return t

    def inverse(self, z):
        if self.kind is TransformKind.EXP:
            return np.log(z)
        return z

    def derivative(self, t):
        if self.kind is TransformKind.EXP:
            return np.exp(t)
        return np.ones_like(t)

    @classmethod
    def from_name(cls, name):
        if isinstance(name, Transform):
            return name
        try:
            return cls(TransformKind(str(name).lower()))
        except ValueError:
            raise ConfigError(f"unknown transform {name!r}") from None


IDENTITY = Transform(TransformKind.IDENTITY)
EXP = Transform(TransformKind.EXP)


@dataclass(frozen=True, eq=False)
class ContourRule:
    """N-point trapezoidal rule on an ellipse, stored 0-based.

    ``weights`` are the identity-map weights for ``IDENTITY`` and the
    derivative-scaled weights ``exp(t_j) * w_j`` for ``EXP``.  Node ``j`` and
    node ``N - 1 - j`` (0-based) are exact complex conjugates.
    """

    center: float
    radius: float
    aspect: float
    count: int
    nodes: np.ndarray
    weights: np.ndarray
    transform: Transform
    interval: tuple

    @property
    def shifts(self):
        """Points ``g(t_j)`` at which the resolvent of the Gram matrix is sampled."""
        return self.transform.forward(self.nodes)

    @property
    def real_extent(self):
        return self.center - self.radius, self.center + self.radius

    def describe(self):
        a, b = self.interval
        return {
            "transform": self.transform.kind.value,
            "a": a,
            "b": b,
            "N": self.count,
            "alpha": self.aspect,
            "gamma": self.center,
            "rho": self.radius,
        }


def _check_args(a, b, N, alpha, transform):
    if not (np.isfinite(a) and np.isfinite(b)) or a < 0 or not a < b:
        raise ConfigError(f"interval must satisfy 0 <= a < b, got [{a}, {b}]")
    if int(N) != N or N < 4 or N % 2:
        raise ConfigError(f"N must be an even integer >= 4, got {N}")
    if not 0 < alpha <= 1:
        raise ConfigError(f"aspect ratio alpha must lie in (0, 1], got {alpha}")
    if transform.kind is TransformKind.EXP and a == 0:
        raise DomainError("the exp transform needs a > 0 (log(0) is unbounded)")


def build_contour(a, b, N=DEFAULT_N, alpha=DEFAULT_ALPHA, transform=IDENTITY):
    """Build the quadrature rule for the singular-value interval ``[a, b]``.

    Parameters
    ----------
    a, b : float
        Interval endpoints, ``0 <= a < b``.
    N : int
        Number of nodes (even, at least 4).
    alpha : float
        Aspect ratio of the ellipse, in ``(0, 1]``.
    transform : Transform or str
        ``"identity"`` or ``"exp"``.
    """
    transform = Transform.from_name(transform)
    a, b = float(a), float(b)
    _check_args(a, b, N, alpha, transform)
    N = int(N)
    if transform.kind is TransformKind.EXP:
        center = np.log(a) + np.log(b)
        radius = np.log(b) - np.log(a)
    else:
        center = (a * a + b * b) / 2
        radius = (b * b - a * a) / 2

    half = N // 2
    theta = 2 * np.pi / N * (np.arange(1, half + 1) - 0.5)
    cos, sin = np.cos(theta), np.sin(theta)
    upper_nodes = center + radius * (cos + 1j * alpha * sin)
    upper_weights = radius / N * (alpha * cos + 1j * sin)
    if transform.kind is TransformKind.EXP:
        upper_weights = np.exp(upper_nodes) * upper_weights

    # lower half mirrors the upper half so conjugate symmetry is bit-exact
    nodes = np.concatenate([upper_nodes, np.conj(upper_nodes[::-1])])
    weights = np.concatenate([upper_weights, np.conj(upper_weights[::-1])])
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return ContourRule(
        center=float(center),
        radius=float(radius),
        aspect=float(alpha),
        count=N,
        nodes=nodes,
        weights=weights,
        transform=transform,
        interval=(a, b),
    )


def half_rule(rule):
    """Return the nodes and weights with positive imaginary part.

    Sums over the full rule applied to real data equal ``2 * Re`` of the sum
    over this half.
    """
    half = rule.count // 2
    return rule.nodes[:half], rule.weights[:half]


def moment_condition_check(rule, kmax=None):
    """Return ``|sum_j w_j t_j**k|`` for ``k = 0..kmax`` (default ``N - 2``)."""
    if kmax is None:
        kmax = rule.count - 2
    powers = rule.nodes[None, :] ** np.arange(kmax + 1)[:, None]
    return np.abs(powers @ rule.weights)


def cauchy_sum(rule):
    """``sum_j w_j / (t_j - gamma)``, the discrete Cauchy integral of the center."""
    return np.sum(rule.weights / (rule.nodes - rule.center))
