import numpy as np
from scipy import linalg

from .errors import DimensionMismatch, InvalidBlocks, MalformedInput, NonFinite
from .linalg_core import (
    assemble,
    max_abs,
    norm_inf,
    reflection,
    split,
    structure_matrix,
    symplectic_residual
)
from .logger import Logger
from .utils import require_field

logger = Logger("darwin")


class ReturnMapBlocks:
    def __init__(self, A, B, C, D):
        A, B, C, D = (np.atleast_2d(np.asarray(X, dtype=float)) for X in (A, B, C, D))

        n = A.shape[0]
        for name, block in zip("ABCD", (A, B, C, D)):
            if block.ndim != 2 or block.shape != (n, n):
                raise DimensionMismatch(
                    f"block {name} has shape {block.shape}, expected {(n, n)}")
            if not np.all(np.isfinite(block)):
                raise NonFinite(f"block {name} has non-finite entries")

        self.n = n
        self.A = A
        self.B = B
        self.C = C
        self.D = D

    def __repr__(self):
        return f"ReturnMapBlocks(n={self.n})"

    @classmethod
    def from_matrix(cls, Phi):
        return cls(*split(Phi))

    @classmethod
    def identity(cls, n):
        zero = np.zeros((n, n))
        return cls(np.eye(n), zero, zero, np.eye(n))

    @classmethod
    def rotation(cls, theta):
        # the n=1 elliptic family (a, b, c, a) with a^2 - bc = 1
        c, s = np.cos(theta), np.sin(theta)
        return cls([[c]], [[-s]], [[s]], [[c]])

    @property
    def matrix(self):
        return assemble(self.A, self.B, self.C, self.D)

    def to_json(self):
        return {
            "n": self.n,
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "C": self.C.tolist(),
            "D": self.D.tolist()
        }

    @classmethod
    def from_json(cls, document):
        n = require_field(document, "n", int)
        if n < 1:
            raise MalformedInput("n must be positive", field="n")

        if "Phi" in document:
            Phi = _read_matrix(document, "Phi", 2 * n)
            return cls.from_matrix(Phi)

        blocks = [_read_matrix(document, name, n) for name in "ABCD"]
        return cls(*blocks)


def _read_matrix(document, field, size):
    rows = require_field(document, field, list)

    try:
        M = np.array(rows, dtype=float)
    except (TypeError, ValueError):
        raise MalformedInput("entries must be numbers", field=field)

    if M.shape != (size, size):
        raise MalformedInput(f"expected a {size}x{size} matrix, got shape {M.shape}", field=field)

    if not np.all(np.isfinite(M)):
        raise MalformedInput("entries must be finite", field=field)

    return M


class DarwinReport:
    def __init__(self, residuals, tol):
        self.residuals = residuals
        self.tol = tol

    @property
    def failures(self):
        return [name for name, value in self.residuals.items() if value > self.tol]

    @property
    def passed(self):
        return not self.failures

    @property
    def worst(self):
        return max(self.residuals.values())

    def to_json(self):
        return {
            "tol": self.tol,
            "passed": self.passed,
            "residuals": dict(self.residuals)
        }


def validate_darwin(blocks, tol=1e-8, verbose=False):
    A, B, C, D = blocks.A, blocks.B, blocks.C, blocks.D
    identity = np.eye(blocks.n)
    Phi = blocks.matrix
    R = reflection(blocks.n)
    J = structure_matrix(blocks.n)

    residuals = {
        "D = A^T": max_abs(D - A.T),
        "B = B^T": max_abs(B - B.T),
        "C = C^T": max_abs(C - C.T),
        "AB = BA^T": max_abs(A @ B - B @ A.T),
        "CA = A^T C": max_abs(C @ A - A.T @ C),
        "A^2 - BC = I": max_abs(A @ A - B @ C - identity),
        "symplectic": symplectic_residual(Phi),
        # the symplectic block identities the proof starts from
        "A^T C = C^T A": max_abs(A.T @ C - C.T @ A),
        "B^T D = D^T B": max_abs(B.T @ D - D.T @ B),
        "A^T D - C^T B = I": max_abs(A.T @ D - C.T @ B - identity),
        # Phi = R Phi^{-1} R, with the inverse -J Phi^T J of a symplectic matrix
        "reversible": max_abs(Phi - R @ (-J @ Phi.T @ J) @ R),
    }

    report = DarwinReport(residuals, tol)

    if verbose and not report.passed:
        for name in report.failures:
            logger.error(f"Identity {name} violated: residual {residuals[name]:.3e} > {tol:.1e}")

    return report


def require_darwin(blocks, tol):
    report = validate_darwin(blocks, tol)
    if not report.passed:
        failed = ", ".join(report.failures)
        raise InvalidBlocks(f"blocks violate {failed} (worst residual {report.worst:.3e})")

    return report


def _random_symmetric(n, rng, scale):
    S = rng.uniform(-scale, scale, size=(n, n))
    return 0.5 * (S + S.T)


def random_symplectic(n, rng, scale=0.5, shears=2):
    """Product of random symplectic shears and one block-diagonal factor diag(G, G^-T)."""
    identity = np.eye(n)
    zero = np.zeros((n, n))
    W = np.eye(2 * n)

    for _ in range(shears):
        upper = np.block([[identity, _random_symmetric(n, rng, scale)], [zero, identity]])
        lower = np.block([[identity, zero], [_random_symmetric(n, rng, scale), identity]])
        W = W @ upper @ lower

    G = linalg.expm(rng.uniform(-scale, scale, size=(n, n)))
    W = W @ linalg.block_diag(G, np.linalg.inv(G).T)

    return W


def darwin_from_symplectic(W):
    """Phi = (R W^-1 R) W satisfies Phi = R Phi^-1 R for every symplectic W."""
    W = np.asarray(W, dtype=float)
    n = W.shape[0] // 2
    J = structure_matrix(n)
    R = reflection(n)

    W_inverse = -J @ W.T @ J

    return ReturnMapBlocks.from_matrix(R @ W_inverse @ R @ W)


def random_return_map(n, rng_seed, scale=0.5):
    if n < 1:
        raise ValueError("n must be at least 1")

    rng = np.random.default_rng(rng_seed)
    return darwin_from_symplectic(random_symplectic(n, rng, scale))


class NondegeneracyReport:
    def __init__(self, k_max, det_values, thresholds, c_determinant, c_invertible, inconsistent):
        self.k_max = k_max
        self.det_values = det_values
        self.thresholds = thresholds
        self.c_determinant = c_determinant
        self.c_invertible = c_invertible
        self.inconsistent = inconsistent

    @property
    def degenerate_iterates(self):
        return [k for k, (value, threshold) in enumerate(zip(self.det_values, self.thresholds), 1)
                if abs(value) <= threshold]

    @property
    def ok(self):
        return not self.degenerate_iterates

    def is_nondegenerate(self, k):
        return k not in self.degenerate_iterates

    def to_json(self):
        return {
            "k_max": self.k_max,
            "det_values": [float(value) for value in self.det_values],
            "degenerate_iterates": self.degenerate_iterates,
            "ok": self.ok,
            "c_invertible": self.c_invertible,
            "inconsistent": self.inconsistent
        }


def nondegeneracy_check(blocks, k_max, threshold=None):
    Phi = blocks.matrix
    identity = np.eye(2 * blocks.n)
    scale = max(1.0, norm_inf(Phi))

    def threshold_for(k):
        if threshold is not None:
            return threshold
        return 1e-10 * scale ** k

    # k = 1, 2 are always evaluated for the invertibility argument
    determinants = []
    thresholds = []
    for k in range(1, max(k_max, 2) + 1):
        power = np.linalg.matrix_power(Phi, k)
        determinants.append(float(np.linalg.det(power - identity)))
        thresholds.append(threshold_for(k))

    c_determinant = float(np.linalg.det(blocks.C))
    c_invertible = abs(c_determinant) > threshold_for(1)

    first_two_ok = all(abs(d) > t for d, t in zip(determinants[:2], thresholds[:2]))
    inconsistent = first_two_ok and not c_invertible
    if inconsistent:
        logger.error(
            f"det(Phi - I) and det(Phi^2 - I) are nonzero but |det C| = {abs(c_determinant):.3e}")

    return NondegeneracyReport(
        k_max,
        determinants[:k_max],
        thresholds[:k_max],
        c_determinant,
        c_invertible,
        inconsistent
    )


def kernel_witnesses(blocks, v):
    """
    For v in ker C, return the vectors w = (Av + v, 0) and z = (v, 0).

    When Cv = 0, w lies in ker(Phi - I); if moreover Av = -v then z lies in
    ker(Phi^2 - I). Nondegeneracy at k = 1, 2 therefore forces v = 0.
    """
    v = np.asarray(v, dtype=float)
    zero = np.zeros(blocks.n)

    w = np.concatenate([blocks.A @ v + v, zero])
    z = np.concatenate([v, zero])

    return w, z
