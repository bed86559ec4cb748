"""
Hörmander index of a symmetric orbit and its iterates.

Two independent evaluations live here:

* the closed formula ``s = 1/2 sign((I - T_k(A)) U_{k-1}(A)^-1 C^-1)`` on the
  blocks of the reduced return map, and
* the quadratic-form construction on the doubled space, which only needs
  the symplectic matrix Phi and never looks at its blocks.

Both return an :class:`IndexResult` whose value is an exact half-integer.
"""

from enum import Enum
from fractions import Fraction

import numpy as np

from .chebyshev import ChebKind, cheb_matrix
from .darwin import ReturnMapBlocks
from .errors import (
    AsymmetryTooLarge,
    CSingular,
    DegenerateForm,
    IterateDegenerate,
    NotTransverse,
    QNotSymmetric,
    degeneracy_errors
)
from .linalg_core import (
    guarded_solve,
    half_dimension,
    inertia,
    norm_inf,
    product_form,
    smallest_singular_value
)
from .logger import Logger

logger = Logger("hormander")

SYMMETRY_TOL = 1e-7
SINGULAR_TOL = 1e-10


class HalfInteger:
    def __init__(self, doubled):
        if isinstance(doubled, bool) or not isinstance(doubled, (int, np.integer)):
            raise TypeError(f"doubled value must be an integer, got {doubled!r}")
        self.doubled = int(doubled)

    def __eq__(self, other):
        if not isinstance(other, HalfInteger):
            return NotImplemented
        return self.doubled == other.doubled

    def __hash__(self):
        return hash(("half", self.doubled))

    def __add__(self, other):
        return HalfInteger(self.doubled + other.doubled)

    def __sub__(self, other):
        return HalfInteger(self.doubled - other.doubled)

    def __neg__(self):
        return HalfInteger(-self.doubled)

    def __repr__(self):
        return f"HalfInteger({self.doubled}/2)"

    def __str__(self):
        value = self.as_fraction()
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/2"

    def as_fraction(self):
        return Fraction(self.doubled, 2)

    def to_json(self):
        return {"doubled": self.doubled}


class Method(Enum):
    FORMULA = "formula"
    QUADRATIC_FORM = "qform"
    PATH_DIFFERENCE = "paths"


class IndexResult:
    def __init__(self, k, s, inertia, method):
        self.k = k
        self.s = s
        self.inertia = inertia
        self.method = method

    def __repr__(self):
        return f"IndexResult(k={self.k}, s={self.s}, method={self.method.value})"

    def to_json(self):
        return {
            "k": self.k,
            "method": self.method.value,
            "s": self.s.to_json(),
            "inertia": self.inertia.to_json() if self.inertia is not None else None
        }


def _scale(Phi):
    return max(1.0, norm_inf(Phi))


def hormander_sign_matrix(blocks, k):
    """
    Symmetrized (I - T_k(A)) U_{k-1}(A)^-1 C^-1.

    :raises CSingular: C is numerically singular
    :raises IterateDegenerate: U_{k-1}(A) is numerically singular
    :raises AsymmetryTooLarge: the product is far from symmetric, which only
        happens for blocks without Darwin structure
    """
    if k < 1:
        raise ValueError(f"iterate must be at least 1, got {k}")

    n = blocks.n
    scale = _scale(blocks.matrix)

    sigma_c = smallest_singular_value(blocks.C)
    if sigma_c <= SINGULAR_TOL * scale:
        raise CSingular(f"smallest singular value of C is {sigma_c:.3e}")

    T = cheb_matrix(ChebKind.FIRST, k, blocks.A)
    U = cheb_matrix(ChebKind.SECOND, k - 1, blocks.A)

    sigma_u = smallest_singular_value(U)
    if sigma_u <= SINGULAR_TOL * scale ** (k - 1):
        raise IterateDegenerate(
            f"U_{k - 1}(A) has smallest singular value {sigma_u:.3e} at k = {k}")

    # X = (I - T) U^-1, M = X C^-1, both as transposed solves
    X = guarded_solve(U.T, (np.eye(n) - T).T, IterateDegenerate, f"U_{k - 1}(A)").T
    M = guarded_solve(blocks.C.T, X.T, CSingular, "C").T

    asymmetry = norm_inf(M - M.T)
    if asymmetry > SYMMETRY_TOL * norm_inf(M):
        raise AsymmetryTooLarge(
            f"sign matrix asymmetry {asymmetry:.3e} exceeds {SYMMETRY_TOL:.0e} * |M|")

    return 0.5 * (M + M.T)


def _zero_threshold(M, tol):
    return tol * max(norm_inf(M), np.finfo(float).tiny)


def hormander_index_formula(blocks, k, tol=1e-8):
    M = hormander_sign_matrix(blocks, k)
    counts = inertia(M, _zero_threshold(M, tol))

    if counts.n_zero:
        raise DegenerateForm(f"sign matrix at k = {k} has {counts.n_zero} zero eigenvalue(s)")

    return IndexResult(k, HalfInteger(counts.signature), counts, Method.FORMULA)


def doubled_form(Phi):
    """
    Assemble the form Q(z, z') = Omega(z, Gamma z') on the diagonal.

    For each basis vector u of R^2n the linear system

        P2 v = -u2,    P2 Phi v = -u2

    puts (u + v, u + Phi v) into L x L with L = R^n x {0}; Gamma maps (u, u) to
    (v, Phi v). Returns Q (2n x 2n, not symmetrized) and the solutions V, one
    column per basis vector.
    """
    Phi, n = half_dimension(Phi)
    identity = np.eye(2 * n)
    scale = _scale(Phi)

    sigma = smallest_singular_value(Phi - identity)
    if sigma <= SINGULAR_TOL * scale:
        raise NotTransverse(f"Phi - I has smallest singular value {sigma:.3e}")

    system = np.vstack([identity[n:, :], Phi[n:, :]])
    rhs = -np.vstack([identity[n:, :], identity[n:, :]])

    sigma_system = smallest_singular_value(system)
    if sigma_system <= SINGULAR_TOL * scale:
        raise CSingular(f"L-membership system is singular ({sigma_system:.3e})")

    V = guarded_solve(system, rhs, CSingular, "L-membership system")

    Z = np.vstack([identity, identity])
    Gamma = np.vstack([V, Phi @ V])
    Q = Z.T @ product_form(n) @ Gamma

    return Q, V


def hormander_index_quadratic_form(Phi, tol=1e-8, k=1):
    Q, _ = doubled_form(Phi)
    n = Q.shape[0] // 2

    asymmetry = norm_inf(Q - Q.T)
    if asymmetry > SYMMETRY_TOL * max(norm_inf(Q), np.finfo(float).tiny):
        raise QNotSymmetric(f"form asymmetry {asymmetry:.3e}; is Phi symplectic?")

    Q = 0.5 * (Q + Q.T)
    counts = inertia(Q, _zero_threshold(Q, tol))

    # the u1 directions are always in the kernel
    if counts.n_zero > n:
        raise DegenerateForm(f"form has rank {2 * n - counts.n_zero}, expected {n}")

    return IndexResult(k, HalfInteger(-counts.signature), counts, Method.QUADRATIC_FORM)


def closed_form_v(blocks, u2):
    """
    v(u) = ((A - I) C^-1 u2, -u2) and Phi v = ((I - A) C^-1 u2, -u2).

    Returns the pair (v, Phi v), the latter computed by multiplication.
    """
    u2 = np.asarray(u2, dtype=float)
    scale = _scale(blocks.matrix)

    sigma_c = smallest_singular_value(blocks.C)
    if sigma_c <= SINGULAR_TOL * scale:
        raise CSingular(f"smallest singular value of C is {sigma_c:.3e}")

    y = guarded_solve(blocks.C, u2, CSingular, "C")
    v = np.concatenate([(blocks.A - np.eye(blocks.n)) @ y, -u2])

    return v, blocks.matrix @ v


def iterate_matrix(blocks, k):
    return np.linalg.matrix_power(blocks.matrix, k)


def evaluate_index(blocks, k, method, tol, seed, maslov_config):
    if method is Method.FORMULA:
        return hormander_index_formula(blocks, k, tol)

    if method is Method.QUADRATIC_FORM:
        return hormander_index_quadratic_form(iterate_matrix(blocks, k), tol, k=k)

    from .maslov_oracle import hormander_via_paths
    return hormander_via_paths(iterate_matrix(blocks, k), seed, k=k, config=maslov_config)


def index_sequence(blocks, k_max, tol=1e-8, methods=(Method.FORMULA,), seed=0, maslov_config=None):
    """
    Evaluate every requested method at k = 1..k_max.

    Degenerate iterates do not abort the sequence; they yield an entry with
    the error name instead of a value.
    """
    if not isinstance(blocks, ReturnMapBlocks):
        blocks = ReturnMapBlocks.from_matrix(blocks)

    entries = []
    for k in range(1, k_max + 1):
        for method in methods:
            method = Method(method)
            try:
                entries.append(evaluate_index(blocks, k, method, tol, seed, maslov_config).to_json())
            except degeneracy_errors as e:
                logger.info(f"k = {k} ({method.value}): {type(e).__name__}: {e}")
                entries.append({
                    "k": k,
                    "method": method.value,
                    "error": type(e).__name__,
                    "detail": str(e)
                })

    return entries
