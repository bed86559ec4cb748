"""
Dense real-matrix helpers used by every index computation.

Conventions: phase vectors are z = (q, p) with q, p in R^n, and the standard
symplectic form is

    omega(z, z') = <q, p'> - <p, q'> = z^T J z',    J = [[0, I], [-I, 0]].

On the doubled space V x V the form is Omega = (-omega) x omega.
"""

import numpy as np
from scipy import linalg

from .errors import NonSquare, NonFinite, DegenerateForm, OddDimension, NotSymplectic

MAX_CONDITION = 1e12


class Inertia:
    def __init__(self, n_pos, n_neg, n_zero):
        self.n_pos = int(n_pos)
        self.n_neg = int(n_neg)
        self.n_zero = int(n_zero)

    def __eq__(self, other):
        if not isinstance(other, Inertia):
            return NotImplemented
        return self.as_tuple() == other.as_tuple()

    def __hash__(self):
        return hash(self.as_tuple())

    def __repr__(self):
        return f"Inertia(n_pos={self.n_pos}, n_neg={self.n_neg}, n_zero={self.n_zero})"

    @property
    def dimension(self):
        return self.n_pos + self.n_neg + self.n_zero

    @property
    def signature(self):
        return self.n_pos - self.n_neg

    def as_tuple(self):
        return (self.n_pos, self.n_neg, self.n_zero)

    def to_json(self):
        return {"n_pos": self.n_pos, "n_neg": self.n_neg, "n_zero": self.n_zero}


def norm_inf(M):
    return float(np.linalg.norm(np.atleast_2d(M), np.inf))


def max_abs(M):
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(M)))


def default_tol(M):
    return 1e-8 * max(norm_inf(M), np.finfo(float).tiny)


def _check_square(M):
    M = np.atleast_2d(np.asarray(M, dtype=float))

    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {M.shape}")

    if not np.all(np.isfinite(M)):
        raise NonFinite("matrix has non-finite entries")

    return M


def inertia(M, tol=None):
    M = _check_square(M)
    if tol is None:
        tol = default_tol(M)

    eigenvalues = linalg.eigvalsh(0.5 * (M + M.T))

    n_pos = np.count_nonzero(eigenvalues > tol)
    n_neg = np.count_nonzero(eigenvalues < -tol)

    return Inertia(n_pos, n_neg, len(eigenvalues) - n_pos - n_neg)


def signature(M, tol=None):
    counts = inertia(M, tol)

    if counts.n_zero > 0:
        raise DegenerateForm(
            f"form has {counts.n_zero} eigenvalue(s) within the zero threshold")

    return counts.signature


def structure_matrix(n):
    identity = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, identity], [-identity, zero]])


def product_form(n):
    J = structure_matrix(n)
    return linalg.block_diag(-J, J)


def reflection(n):
    return np.diag(np.concatenate([np.ones(n), -np.ones(n)]))


def half_dimension(Phi):
    Phi = _check_square(Phi)
    if Phi.shape[0] % 2:
        raise OddDimension(f"dimension {Phi.shape[0]} is odd")
    return Phi, Phi.shape[0] // 2


def assemble(A, B, C, D):
    return np.block([[A, B], [C, D]])


def split(Phi):
    Phi, n = half_dimension(Phi)
    return Phi[:n, :n].copy(), Phi[:n, n:].copy(), Phi[n:, :n].copy(), Phi[n:, n:].copy()


def symplectic_residual(Phi):
    Phi, n = half_dimension(Phi)
    J = structure_matrix(n)
    return max_abs(Phi.T @ J @ Phi - J)


def is_symplectic(Phi, tol=1e-9):
    return symplectic_residual(Phi) <= tol


def symplectic_inverse(A, B, C, D, tol=None):
    A, B, C, D = (np.atleast_2d(np.asarray(X, dtype=float)) for X in (A, B, C, D))
    Phi = assemble(A, B, C, D)

    # the residual of a product grows with the square of the norm
    if tol is None:
        tol = 1e-9 * max(1.0, norm_inf(Phi)) ** 2

    residual = symplectic_residual(Phi)
    if residual > tol:
        raise NotSymplectic(f"symplectic residual {residual:.3e} exceeds {tol:.3e}")

    return D.T.copy(), -B.T, -C.T, A.T.copy()


def smallest_singular_value(M):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    return float(linalg.svdvals(M)[-1])


def guarded_solve(M, rhs, error, what="matrix", max_condition=MAX_CONDITION):
    """
    Solve M X = rhs by partial-pivot LU.

    :param error: exception class raised when M is singular or its condition
        number exceeds max_condition
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))

    condition = np.linalg.cond(M)
    if not np.isfinite(condition) or condition > max_condition:
        raise error(f"{what} is ill-conditioned (condition number {condition:.3e})")

    return linalg.lu_solve(linalg.lu_factor(M), rhs)
