"""Special functions and quadrature rules.

Scalar special functions are thin, domain-checked wrappers over
``scipy.special``; the Gauss-Laguerre rule is built here because large
orders need log-domain weights that the stock routines do not provide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import linalg, special

MAX_LAGUERRE_ORDER = 1024
DEFAULT_2F1_DELTA = 1e-6


class NumericsDomainError(ValueError):
    """Argument outside the domain a routine supports."""


@dataclass(frozen=True)
class QuadRule:
    """Nodes and weights of a one-dimensional quadrature rule.

    For ``kind == "laguerre"`` the rule integrates against ``exp(-x)`` on
    ``(0, inf)``. ``log_weights`` is always finite; ``weights`` is its
    exponential and underflows to zero for the far tail of large rules.

    For ``kind == "chebyshev1"`` only the nodes are stored; every weight is
    ``pi / order``.
    """

    kind: str
    order: int
    nodes: np.ndarray
    weights: np.ndarray
    log_weights: np.ndarray

    def __post_init__(self) -> None:
        for arr in (self.nodes, self.weights, self.log_weights):
            arr.setflags(write=False)

    def __hash__(self) -> int:
        return hash((self.kind, self.order))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QuadRule):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.order == other.order
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.weights, other.weights)
        )

    def trimmed(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights with exactly-zero (underflowed) weights dropped."""
        keep = self.weights > 0.0
        return self.nodes[keep], self.weights[keep]


def gamma_fn(x: float) -> float:
    if not x > 0:
        raise NumericsDomainError(f"gamma_fn requires x > 0, got {x}")
    try:
        return math.gamma(x)
    except OverflowError as exc:
        raise OverflowError(f"gamma_fn({x}) exceeds double range") from exc


def log_gamma(x: float) -> float:
    if not x > 0:
        raise NumericsDomainError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def log_factorial(n: int) -> float:
    """log(n!) without overflow; exact enough for (2M)! with M in the hundreds."""
    if n < 0:
        raise NumericsDomainError(f"factorial of negative integer {n}")
    return math.lgamma(n + 1.0)


def regularized_lower_gamma(a, x):
    """P(a, x) = gamma(a, x) / Gamma(a), vectorized over ``x``."""
    a_arr = np.asarray(a, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    if np.any(a_arr <= 0):
        raise NumericsDomainError("regularized_lower_gamma requires a > 0")
    if np.any(x_arr < 0):
        raise NumericsDomainError("regularized_lower_gamma requires x >= 0")
    return special.gammainc(a_arr, x_arr)


def lower_incomplete_gamma(a: float, x: float) -> float:
    """gamma(a, x) = integral_0^x p^(a-1) e^(-p) dp."""
    if not a > 0:
        raise NumericsDomainError(f"lower_incomplete_gamma requires a > 0, got {a}")
    if x < 0:
        raise NumericsDomainError(f"lower_incomplete_gamma requires x >= 0, got {x}")
    if x == 0:
        return 0.0
    return float(special.gammainc(a, x)) * gamma_fn(a)


def kummer_1f1(a: float, b: float, z: float) -> float:
    """Confluent hypergeometric function 1F1(a; b; z)."""
    if b <= 0 and float(b).is_integer():
        raise NumericsDomainError(f"kummer_1f1 undefined for b = {b}")
    if z == 0:
        return 1.0
    return float(special.hyp1f1(a, b, z))


def gauss_2f1(a: float, b: float, c: float, z: float) -> float:
    """Gauss hypergeometric function 2F1(a, b; c; z) for z <= 1.

    At ``z == 1`` the Gauss summation formula is used and requires
    ``c - a - b > 0``. Callers needing the divergent ``c - a - b == 0`` case
    should evaluate at ``z = 1 - delta`` via :func:`gauss_2f1_near_one`.
    """
    if z > 1:
        raise NumericsDomainError(f"gauss_2f1 requires z <= 1, got {z}")
    if c <= 0 and float(c).is_integer():
        raise NumericsDomainError(f"gauss_2f1 undefined for c = {c}")
    if z == 0:
        return 1.0
    if z == 1:
        s = c - a - b
        if s <= 0:
            raise NumericsDomainError(
                f"2F1 diverges at z = 1 when c - a - b = {s} <= 0"
            )
        log_val = (
            special.gammaln(c) + special.gammaln(s)
            - special.gammaln(c - a) - special.gammaln(c - b)
        )
        sign = (
            special.gammasgn(c) * special.gammasgn(s)
            * special.gammasgn(c - a) * special.gammasgn(c - b)
        )
        return float(sign * math.exp(log_val))
    return float(special.hyp2f1(a, b, c, z))


def gauss_2f1_near_one(a: float, b: float, c: float, delta: float = DEFAULT_2F1_DELTA) -> float:
    """2F1(a, b; c; 1 - delta), the regularized stand-in for a divergent z = 1 value."""
    if not 0 < delta < 1:
        raise NumericsDomainError(f"delta must lie in (0, 1), got {delta}")
    return gauss_2f1(a, b, c, 1.0 - delta)


def hurwitz_zeta_half(s: float) -> float:
    """Hurwitz zeta(s, 1/2) = (2^s - 1) zeta(s) for real s != 1.

    Negative ``s`` goes through the reflection formula, which is what the
    endpoint correction of singular midpoint sums needs.
    """
    if s == 1:
        raise NumericsDomainError("zeta has a pole at s = 1")
    if s > 1:
        return float(special.zeta(s, 0.5))
    if s == 0:
        return 0.0
    riemann = (
        2.0 ** s * math.pi ** (s - 1.0) * math.sin(0.5 * math.pi * s)
        * math.gamma(1.0 - s) * float(special.zeta(1.0 - s))
    )
    return (2.0 ** s - 1.0) * riemann


def bessel_i(order: int, x: float) -> float:
    """Modified Bessel function of the first kind, orders 0 and 1."""
    if order not in (0, 1):
        raise NumericsDomainError(f"bessel_i supports orders 0 and 1, got {order}")
    if x < 0:
        raise NumericsDomainError(f"bessel_i requires x >= 0, got {x}")
    return float(special.i0(x) if order == 0 else special.i1(x))


def _log_abs_laguerre(n: int, x: np.ndarray) -> np.ndarray:
    """log|L_n(x)| for each x, by the three-term recurrence with rescaling."""
    p_prev = np.ones_like(x)
    p_cur = 1.0 - x
    log_scale = np.zeros_like(x)
    if n == 0:
        return np.zeros_like(x)
    for k in range(1, n):
        p_next = ((2 * k + 1 - x) * p_cur - k * p_prev) / (k + 1)
        p_prev, p_cur = p_cur, p_next
        big = np.maximum(np.abs(p_cur), np.abs(p_prev))
        rescale = big > 1e100
        if np.any(rescale):
            s = np.where(rescale, big, 1.0)
            p_cur = p_cur / s
            p_prev = p_prev / s
            log_scale = log_scale + np.log(s)
    return np.log(np.abs(p_cur)) + log_scale


def _laguerre_newton_step(n: int, x: np.ndarray) -> np.ndarray:
    """Newton correction L_n(x) / L_n'(x); the pair (L_n, L_{n-1}) is rescaled jointly."""
    p_prev = np.ones_like(x)
    p_cur = 1.0 - x
    for k in range(1, n):
        p_prev, p_cur = p_cur, ((2 * k + 1 - x) * p_cur - k * p_prev) / (k + 1)
        big = np.maximum(np.abs(p_cur), np.abs(p_prev))
        s = np.where(big > 1e100, big, 1.0)
        p_cur = p_cur / s
        p_prev = p_prev / s
    # x L_n' = n (L_n - L_{n-1})
    return x * p_cur / (n * (p_cur - p_prev))


@lru_cache(maxsize=None)
def laguerre_rule(order: int) -> QuadRule:
    """Gauss-Laguerre rule of the given order (Golub-Welsch nodes, log-domain weights).

    Nodes are eigenvalues of the symmetric Jacobi matrix of the Laguerre
    recurrence. Weights use ``w = x / ((n + 1) L_{n+1}(x))^2`` evaluated as
    logarithms so that orders in the hundreds keep finite log-weights.
    """
    if not isinstance(order, (int, np.integer)) or not 1 <= order <= MAX_LAGUERRE_ORDER:
        raise NumericsDomainError(
            f"Laguerre order must be an integer in [1, {MAX_LAGUERRE_ORDER}], got {order}"
        )
    n = int(order)
    if n == 1:
        nodes = np.array([1.0])
    else:
        diag = 2.0 * np.arange(n) + 1.0
        off = np.arange(1, n, dtype=float)
        nodes = linalg.eigh_tridiagonal(diag, off, eigvals_only=True)
        nodes = np.sort(nodes)
        for _ in range(2):
            step = _laguerre_newton_step(n, nodes)
            ok = np.isfinite(step) & (np.abs(step) < 1e-6 * np.maximum(nodes, 1.0))
            nodes = np.where(ok, nodes - step, nodes)
    log_w = np.log(nodes) - 2.0 * math.log(n + 1) - 2.0 * _log_abs_laguerre(n + 1, nodes)
    weights = np.exp(log_w)
    return QuadRule("laguerre", n, nodes, weights, log_w)


@lru_cache(maxsize=None)
def chebyshev_nodes(order: int) -> QuadRule:
    """Gauss-Chebyshev (first kind) nodes cos((2w - 1) pi / (2W)), w = 1..W."""
    if not isinstance(order, (int, np.integer)) or order < 1:
        raise NumericsDomainError(f"Chebyshev order must be a positive integer, got {order}")
    w = np.arange(1, order + 1, dtype=float)
    nodes = np.cos((2.0 * w - 1.0) * np.pi / (2.0 * order))
    if order % 2 == 1:
        nodes[order // 2] = 0.0
    weights = np.full(order, np.pi / order)
    return QuadRule("chebyshev1", int(order), nodes, weights, np.log(weights))


def chebyshev_integrate(func, lo: float, hi: float, order: int) -> float:
    """Integrate ``func`` over [lo, hi] with the Gauss-Chebyshev rule.

    ``func`` is vectorized; the Chebyshev weight is cancelled by the
    ``sqrt(1 - z^2)`` factor.
    """
    rule = chebyshev_nodes(order)
    z = rule.nodes
    x = 0.5 * (z + 1.0) * (hi - lo) + lo
    return float(0.5 * (hi - lo) * np.pi / order * np.sum(np.sqrt(1.0 - z * z) * func(x)))
