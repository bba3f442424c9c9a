"""Dense complex linear algebra for underdetermined (M <= L) plant matrices.

Matrices are plain ``numpy`` complex arrays. The Hermitian eigensolver is a
cyclic Jacobi iteration; everything spectral (SVD, spectral norms) is routed
through it so that the small M x M Gram carries all the work.
"""

from dataclasses import dataclass

import numpy as np

SINGULAR_TOL = 1e-12
RANK_TOL = 1e-12
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 30


class DimensionError(ValueError):
    pass


class ZeroVectorError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class SingularGramError(np.linalg.LinAlgError):
    """Raised when the Gram is numerically singular.

    ``ratio`` is gramian / Hadamard bound; a value near zero means the
    focusing crosstalk is maximised at some control point.
    """

    def __init__(self, ratio, tol):
        super().__init__(
            f"Gram is singular: gramian/hadamard_bound = {ratio:.3e} <= {tol:.1e}"
        )
        self.ratio = ratio
        self.tol = tol


@dataclass(frozen=True)
class HermitianEig:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0


@dataclass(frozen=True)
class SingularSystem:
    singular_values: np.ndarray
    U: np.ndarray
    V: np.ndarray
    rank: int
    condition_number: float
    pinv_spectral_norm: float

    def pinv(self):
        """Pseudoinverse rebuilt from the retained modes, V_r S_r^-1 U_r^H."""
        r = self.rank
        s = self.singular_values[:r]
        return (self.V[:, :r] / s) @ self.U[:, :r].conj().T


def as_matrix(a):
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def as_vector(v):
    v = np.asarray(v, dtype=complex).ravel()
    if v.size == 0:
        raise DimensionError("vector must have at least one entry")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def _check_underdetermined(G):
    M, L = G.shape
    if M > L:
        raise DimensionError(f"need M <= L, got {M} x {L}")


def gram(G):
    """Gram matrix G G^H of an M x L plant (M <= L).

    Entry (i, j) is g_j^H g_i, the pressure at point i when focusing on j.
    """
    G = as_matrix(G)
    _check_underdetermined(G)
    Gam = G @ G.conj().T
    # exact Hermitian structure and real diagonal
    Gam = 0.5 * (Gam + Gam.conj().T)
    Gam[np.diag_indices_from(Gam)] = np.sum(np.abs(G) ** 2, axis=1)
    return Gam


def gramian(Gam):
    """Determinant of a Hermitian PSD Gram, returned as a non-negative real."""
    Gam = as_matrix(Gam)
    det = np.linalg.det(Gam)
    scale = max(abs(det), hadamard_bound(Gam))
    if abs(det.imag) > 1e-10 * scale:
        raise ValueError(f"determinant has imaginary part {det.imag:.3e}; input not Hermitian")
    return max(float(det.real), 0.0)


def hadamard_bound(Gam):
    """Product of the diagonal entries; upper bound on the gramian."""
    Gam = as_matrix(Gam)
    return float(np.prod(np.diag(Gam).real))


def hermitian_angle(u, v):
    """Hermitian angle arccos(|v^H u| / (|u| |v|)) in [0, pi/2]."""
    u = as_vector(u)
    v = as_vector(v)
    if u.shape != v.shape:
        raise DimensionError(f"length mismatch {u.size} vs {v.size}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ZeroVectorError("Hermitian angle undefined for a zero vector")
    c = abs(np.vdot(v, u)) / (nu * nv)
    return float(np.arccos(min(c, 1.0)))


def eig_hermitian(Gam, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi.

    Eigenvalues come back clamped at zero and sorted descending; the
    eigenvector columns are orthonormal.
    """
    A = as_matrix(Gam).copy()
    n, m = A.shape
    if n != m:
        raise DimensionError(f"matrix must be square, got {A.shape}")
    A = 0.5 * (A + A.conj().T)
    V = np.eye(n, dtype=complex)
    norm = np.linalg.norm(A)
    if norm == 0:
        return HermitianEig(np.zeros(n), V, 0)

    def off(A):
        return np.linalg.norm(A[~np.eye(n, dtype=bool)])

    sweeps = 0
    while off(A) >= tol * norm:
        if sweeps == max_sweeps:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps", off(A) / norm)
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                r = abs(apq)
                app = A[p, p].real
                aqq = A[q, q].real
                # negligible pivot: the rotation angle would overflow to zero anyway
                if r == 0.0 or r <= 1e-300 * abs(aqq - app):
                    continue
                # phase rotation makes the pivot real, then a real Jacobi rotation
                phase = apq / r
                theta = (aqq - app) / (2.0 * r)
                t = np.copysign(1.0, theta) / (abs(theta) + np.hypot(1.0, theta))
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                J = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ J
                A[idx, :] = J.conj().T @ A[idx, :]
                V[:, idx] = V[:, idx] @ J
                A[p, q] = A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real

    w = np.clip(np.diag(A).real, 0.0, None)
    order = np.argsort(-w, kind="stable")
    return HermitianEig(w[order], V[:, order], sweeps)


def _fix_phase(v):
    k = int(np.argmax(np.abs(v)))
    if v[k] == 0:
        return 1.0
    return abs(v[k]) / v[k]


def svd_underdetermined(G, rank_tol=RANK_TOL):
    """SVD of an M x L plant (M <= L) through the eigensystem of its Gram.

    Returns the M field-pressure modes ``U`` and the ``rank`` source-strength
    modes ``V`` (L x rank). A mode counts toward the rank when its Gram
    eigenvalue exceeds ``rank_tol`` times the largest. Each retained pair is phase-fixed so that the
    largest-magnitude entry of v_m is real and positive.
    """
    G = as_matrix(G)
    _check_underdetermined(G)
    eig = eig_hermitian(gram(G))
    lam = np.maximum(eig.eigenvalues, 0.0)
    sigma = np.sqrt(lam)
    U = eig.eigenvectors.copy()
    smax = sigma[0] if sigma.size else 0.0
    # the Gram squares the spread, so the rank test is on eigenvalues
    rank = int(np.sum(lam > rank_tol * lam[0])) if smax > 0 else 0
    V = np.zeros((G.shape[1], rank), dtype=complex)
    for m in range(rank):
        v = G.conj().T @ U[:, m] / sigma[m]
        ph = _fix_phase(v)
        V[:, m] = v * ph
        U[:, m] = U[:, m] * ph
    if rank == 0:
        kappa = np.inf
        pinv_norm = np.inf
    else:
        # a row-rank-deficient plant cannot be inverted at every control point
        kappa = float(smax / sigma[rank - 1]) if rank == G.shape[0] else np.inf
        pinv_norm = float(1.0 / sigma[rank - 1])
    return SingularSystem(sigma, U, V, rank, kappa, pinv_norm)


def spectral_norm(A):
    """Largest singular value of any dense matrix."""
    A = as_matrix(A)
    if A.shape[0] > A.shape[1]:
        A = A.conj().T
    return float(np.sqrt(eig_hermitian(gram(A)).eigenvalues[0]))


def pseudoinverse(G, singularity_tol=SINGULAR_TOL):
    """Two-stage pseudoinverse F = G^H (G G^H)^-1 for M <= L.

    The focusing stage is G^H; the inversion stage is the inverse Gram,
    applied by an LU solve. Raises :class:`SingularGramError` when
    gramian / hadamard_bound <= ``singularity_tol``.
    """
    G = as_matrix(G)
    _check_underdetermined(G)
    Gam = gram(G)
    bound = hadamard_bound(Gam)
    ratio = gramian(Gam) / bound if bound > 0 else 0.0
    if ratio <= singularity_tol:
        raise SingularGramError(ratio, singularity_tol)
    inv_gram = np.linalg.solve(Gam, np.eye(Gam.shape[0]))
    return G.conj().T @ inv_gram


def forward_and_residual(G, q, d):
    """Reproduced pressures p = G q, residual r = d - p and its l2 norm."""
    G = as_matrix(G)
    q = as_vector(q)
    d = as_vector(d)
    M, L = G.shape
    if q.size != L or d.size != M:
        raise DimensionError(f"G is {M} x {L}, q has {q.size}, d has {d.size}")
    p = G @ q
    r = d - p
    return p, r, float(np.linalg.norm(r))
