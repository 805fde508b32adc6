"""Heisenberg-picture simulation of multimode squeezing on vacuum.

Quadratures are ordered ``x = (q_1..q_n, p_1..p_n)`` with ``q = a + a^dag``
and ``p = -i(a - a^dag)``, so the vacuum covariance is the identity and all
variances are in vacuum-noise units.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InvalidParam
from .graphs import BipartitePartition, ClusterGraph, as_symmetric
from .spectral import spectral_norm

LEAK_TOL = 1e-10
FIT_FLOOR = 1e-14


def symplectic_form(n: int) -> np.ndarray:
    """``J = [[0, I], [-I, 0]]`` in the (q..., p...) ordering."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


@dataclass(frozen=True, eq=False)
class SymplecticTransform:
    n: int
    S: np.ndarray
    alpha: float | None = None

    def symplectic_residual(self) -> float:
        """``||S J S^T - J|| / ||S||^2``."""
        J = symplectic_form(self.n)
        return spectral_norm(self.S @ J @ self.S.T - J) / spectral_norm(self.S) ** 2

    def __matmul__(self, other: SymplecticTransform) -> SymplecticTransform:
        if self.n != other.n:
            raise DimensionMismatch(f"cannot compose {self.n}-mode and {other.n}-mode transforms")
        return SymplecticTransform(self.n, self.S @ other.S)


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha < 0:
        raise InvalidParam(f"alpha must be finite and >= 0, got {alpha}")
    return alpha


def heisenberg_transform(G, alpha: float) -> SymplecticTransform:
    """``U = diag(exp(alpha G), exp(-alpha G))`` for the squeezing Hamiltonian."""
    g = as_symmetric(G, "G")
    alpha = _check_alpha(alpha)
    n = g.shape[0]
    w, v = np.linalg.eigh(g)
    grow = (v * np.exp(alpha * w)) @ v.T
    shrink = (v * np.exp(-alpha * w)) @ v.T
    S = np.zeros((2 * n, 2 * n))
    S[:n, :n] = (grow + grow.T) / 2
    S[n:, n:] = (shrink + shrink.T) / 2
    return SymplecticTransform(n, S, alpha)


def phase_shift_matrix(partition: BipartitePartition) -> SymplecticTransform:
    """Rotate every "-" mode by -pi/2 (q -> -p, p -> q); "+" modes are untouched.

    The sets are read in whatever labeling ``partition`` was built for.
    """
    n = partition.n
    plus = np.diag(partition.plus_mask().astype(float))
    minus = np.eye(n) - plus
    T = np.block([[plus, -minus], [minus, plus]])
    return SymplecticTransform(n, T)


def output_covariance(transform: SymplecticTransform) -> np.ndarray:
    """Covariance ``S S^T`` of the vacuum after ``transform``."""
    S = transform.S
    cov = S @ S.T
    return (cov + cov.T) / 2


def symplectic_eigenvalues(cov) -> np.ndarray:
    """Williamson symplectic eigenvalues of a ``2n x 2n`` covariance, ascending.

    Uses the Hermitian form ``sqrt(cov) (iJ) sqrt(cov)`` whose spectrum is
    ``+-nu``.
    """
    cov = np.asarray(cov, dtype=float)
    n = cov.shape[0] // 2
    w, v = np.linalg.eigh((cov + cov.T) / 2)
    root = (v * np.sqrt(np.clip(w, 0, None))) @ v.T
    herm = root @ (1j * symplectic_form(n)) @ root
    nu = np.linalg.eigvalsh((herm + herm.conj().T) / 2)
    return np.sort(nu[n:])


def _nullifier_rows(A: np.ndarray, plus: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(-A, I) T`` split into its q part ``X`` and p part ``Y``."""
    ip = np.diag(plus.astype(float))
    im = np.eye(len(plus)) - ip
    return -A @ ip + im, A @ im + ip


def _prepare(A, partition, G):
    a = A.adjacency if isinstance(A, ClusterGraph) else np.asarray(A, dtype=float)
    g = as_symmetric(G, "G")
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"A must be square, got shape {a.shape}")
    if g.shape != a.shape:
        raise DimensionMismatch(f"A is {a.shape[0]}x{a.shape[0]} but G is {g.shape[0]}x{g.shape[0]}")
    if partition.n != a.shape[0]:
        raise DimensionMismatch(f"partition has {partition.n} modes, A has {a.shape[0]}")
    return a, partition, g


def nullifier_matrix(A, partition: BipartitePartition, G, alpha: float) -> np.ndarray:
    """The literal ``n x 2n`` product ``(-A, I) T U_alpha``.

    Dense and direct: at large ``alpha`` it inherits the round-off of
    ``exp(alpha G)`` and should only be used where that is acceptable.
    """
    a, partition, g = _prepare(A, partition, G)
    n = a.shape[0]
    U = heisenberg_transform(g, alpha)
    T = phase_shift_matrix(partition)
    return np.hstack([-a, np.eye(n)]) @ T.S @ U.S


@dataclass(frozen=True, eq=False)
class NullifierReport:
    """Statistics of the nullifier vector ``p - A q`` on the output state.

    ``leakage`` is the largest growing-mode coefficient (relative to its row
    norm) that was treated as round-off and dropped; it is 0 when nothing
    was dropped.
    """

    alpha: float
    variances: np.ndarray
    covariance: np.ndarray = field(repr=False)
    leakage: float = 0.0

    @property
    def max_variance(self) -> float:
        return float(np.max(self.variances)) if self.variances.size else 0.0

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "variances": self.variances.tolist(),
            "max_variance": self.max_variance,
            "covariance": self.covariance.tolist(),
            "leakage": self.leakage,
        }


def _weighted_rows(coeffs: np.ndarray, rates: np.ndarray, leak_tol: float) -> tuple[np.ndarray, float]:
    # coeffs[i, k]: component of nullifier row i on eigenvector k, which is
    # scaled by exp(rates[k]). Components on growing eigenvectors that sit
    # at round-off level are exactly zero for a matching (A, G) pair.
    row_norm = np.linalg.norm(coeffs, axis=1, keepdims=True)
    growing = np.broadcast_to(rates > 0, coeffs.shape)
    rel = np.abs(coeffs) / np.where(row_norm > 0, row_norm, 1.0)
    drop = growing & (rel <= leak_tol) & (coeffs != 0)
    leakage = float(np.max(rel[drop], initial=0.0))
    kept = np.where(drop, 0.0, coeffs)
    with np.errstate(over="ignore", invalid="ignore"):
        scaled = np.where(kept != 0, kept * np.exp(rates), 0.0)
    return scaled, leakage


def nullifier_report(
    A,
    partition: BipartitePartition,
    G,
    alpha: float,
    leak_tol: float = LEAK_TOL,
) -> NullifierReport:
    """Covariance of the nullifiers ``(-A, I) T U_alpha x_0`` on vacuum input.

    ``A``, ``G`` and ``partition`` must share one node labeling; the
    partition picks which modes receive the phase shift.

    The product is evaluated in the eigenbasis of ``G``: with
    ``X, Y`` the q and p parts of ``(-A, I) T``, the covariance is
    ``X exp(2aG) X^T + Y exp(-2aG) Y^T``. Components of a nullifier on an
    amplified eigenvector that are below ``leak_tol`` times the row norm are
    dropped, since float ``G`` cannot resolve them; pass ``leak_tol=0`` for
    the unfiltered value.
    """
    a, partition, g = _prepare(A, partition, G)
    alpha = _check_alpha(alpha)
    X, Y = _nullifier_rows(a, partition.plus_mask())
    w, v = np.linalg.eigh(g)
    kx, leak_x = _weighted_rows(X @ v, alpha * w, leak_tol)
    ky, leak_y = _weighted_rows(Y @ v, -alpha * w, leak_tol)
    cov = kx @ kx.T + ky @ ky.T
    cov = (cov + cov.T) / 2
    return NullifierReport(alpha, np.diag(cov).copy(), cov, max(leak_x, leak_y))


@dataclass(frozen=True)
class Sweep:
    reports: list[NullifierReport]
    decay_rate: float | None

    @property
    def alphas(self) -> list[float]:
        return [r.alpha for r in self.reports]

    def max_variances(self) -> np.ndarray:
        return np.array([r.max_variance for r in self.reports])

    def to_dict(self) -> dict:
        return {"decay_rate": self.decay_rate, "reports": [r.to_dict() for r in self.reports]}

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["alpha", "mode", "variance"])
        for r in self.reports:
            for mode, var in enumerate(r.variances, start=1):
                writer.writerow([repr(r.alpha), mode, repr(float(var))])
        return buf.getvalue()


def fit_decay_rate(alphas, values, floor: float = FIT_FLOOR) -> float | None:
    """Least-squares slope of ``log(values)`` against ``alphas``.

    Points below ``floor`` or non-finite are skipped; ``None`` when fewer
    than two distinct alphas remain.
    """
    alphas = np.asarray(alphas, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = np.isfinite(values) & (values >= floor)
    if np.unique(alphas[keep]).size < 2:
        return None
    slope, _ = np.polyfit(alphas[keep], np.log(values[keep]), 1)
    return float(slope)


def sweep_alpha(A, partition, G, alphas, leak_tol: float = LEAK_TOL) -> Sweep:
    alphas = [float(x) for x in alphas]
    if not alphas:
        raise InvalidParam("alpha list is empty")
    if any(b < a for a, b in zip(alphas, alphas[1:])):
        raise InvalidParam("alpha list must be ascending")
    reports = [nullifier_report(A, partition, G, x, leak_tol) for x in alphas]
    rate = fit_decay_rate(alphas, [r.max_variance for r in reports])
    return Sweep(reports, rate)
