"""Small fixed-size linear algebra and random-stream helpers.

Vectors and matrices are plain ``numpy`` arrays. Random streams use the
PCG64 bit generator seeded through ``numpy.random.SeedSequence`` so that a
(seed, trial, stream) tuple always yields the same bits on every platform.
"""

from __future__ import annotations

import math

import numpy as np

SYM_TOL = 1e-12
PSD_TOL = 1e-10


class ContractError(ValueError):
    """Raised when an input violates a documented precondition."""


class DecompositionError(ArithmeticError):
    """Raised when a Cholesky factorization meets a negative pivot."""

    def __init__(self, pivot: int, value: float):
        super().__init__(f"matrix is not positive semi-definite: pivot {pivot} = {value:.6g}")
        self.pivot = pivot
        self.value = value


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Return a PCG64 generator for ``(seed, *stream)``.

    Distinct stream tuples give statistically independent generators; the
    same tuple always gives a bit-identical sequence.
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF, *(int(s) for s in stream)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def wrap_angle(angle):
    """Wrap to (-pi, pi]."""
    wrapped = np.mod(np.asarray(angle, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    wrapped = np.where(wrapped == -np.pi, np.pi, wrapped)
    return float(wrapped) if np.ndim(wrapped) == 0 else wrapped


def rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def eig2x2_sym(m) -> tuple[float, float, float]:
    """Closed-form eigen-decomposition of a symmetric 2x2 matrix.

    Returns ``(lam_max, lam_min, angle)`` where ``angle`` is the direction of
    the ``lam_max`` eigenvector measured from +x, wrapped to (-pi/2, pi/2].
    A repeated eigenvalue yields ``angle = 0``.
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (2, 2):
        raise ContractError(f"expected a 2x2 matrix, got shape {m.shape}")
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    scale = max(abs(a), abs(b), abs(c), abs(d), 1.0)
    if abs(b - c) > SYM_TOL * scale:
        raise ContractError(f"matrix is not symmetric: off-diagonal {b!r} vs {c!r}")
    b = 0.5 * (b + c)
    # normalize so products like b*b neither underflow nor overflow
    norm = max(abs(a), abs(b), abs(d))
    if norm == 0.0:
        return 0.0, 0.0, 0.0
    a, b, d = a / norm, b / norm, d / norm
    lam_max, lam_min, angle = _eig2x2_unit(a, b, d)
    return lam_max * norm, lam_min * norm, angle


def _eig2x2_unit(a: float, b: float, d: float) -> tuple[float, float, float]:
    half_trace = 0.5 * (a + d)
    half_diff = 0.5 * (a - d)
    radius = math.hypot(half_diff, b)
    # the root of smaller magnitude comes from the determinant to avoid cancellation
    det = a * d - b * b
    if half_trace > 0:
        lam_max = half_trace + radius
        lam_min = det / lam_max
    elif half_trace < 0:
        lam_min = half_trace - radius
        lam_max = det / lam_min
    else:
        lam_max, lam_min = radius, -radius
    if radius == 0.0:
        return lam_max, lam_min, 0.0
    angle = 0.5 * math.atan2(b, half_diff)
    if angle <= -math.pi / 2:
        angle += math.pi
    return lam_max, lam_min, angle


def cholesky4(m, tol: float = PSD_TOL) -> np.ndarray:
    """Lower-triangular factor ``L`` with ``L @ L.T == m`` for a PSD matrix.

    Zero pivots (within ``tol`` of the largest diagonal entry) are accepted
    and produce a zero column, so semi-definite inputs such as a zero
    covariance factor cleanly.
    """
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    if m.shape != (n, n):
        raise ContractError(f"expected a square matrix, got shape {m.shape}")
    scale = max(float(np.max(np.abs(np.diag(m)))) if n else 0.0, 0.0)
    if np.max(np.abs(m - m.T), initial=0.0) > 1e-9 * max(scale, 1e-300):
        raise ContractError("matrix is not symmetric")
    L = np.zeros_like(m)
    for j in range(n):
        pivot = m[j, j] - L[j, :j] @ L[j, :j]
        if pivot < -tol * max(scale, 1.0):
            raise DecompositionError(j, pivot)
        if pivot <= tol * scale:
            continue
        L[j, j] = math.sqrt(pivot)
        for i in range(j + 1, n):
            L[i, j] = (m[i, j] - L[i, :j] @ L[j, :j]) / L[j, j]
    return L


def sample_gaussian(mean, chol, rng: np.random.Generator) -> np.ndarray:
    mean = np.asarray(mean, dtype=float)
    chol = np.asarray(chol, dtype=float)
    if chol.shape != (mean.size, mean.size):
        raise ContractError(f"mean has length {mean.size} but factor has shape {chol.shape}")
    return mean + chol @ rng.standard_normal(mean.size)
