"""
Maslov index of pairs of Lagrangian paths by crossing forms, and the
path-based evaluation of the Hörmander index as mu_CZ - mu_L.

A Lagrangian subspace is carried as an orthonormal frame (columns spanning
it) together with the matrix of the ambient symplectic form. Frames are
Gram-Schmidt orthonormalized with a positive diagonal, which keeps them
continuous along a path, so the sign of det([Q1 | Q2]) is a valid crossing
detector. Touching crossings, where that determinant does not change sign,
are found by minimizing the smallest singular value instead.
"""

import numpy as np
from scipy import linalg, optimize

from .errors import (
    DegenerateEndpoint,
    NotLagrangian,
    NotSymplectic,
    NotTransverse,
    PathDependence,
    UnresolvedCrossing
)
from .hormander import HalfInteger, IndexResult, Method
from .linalg_core import (
    inertia,
    max_abs,
    norm_inf,
    product_form,
    smallest_singular_value,
    structure_matrix,
    symplectic_residual
)
from .logger import Logger
from .utils import DEFAULT_CONFIG

logger = Logger("maslov")

EDGE = 1e-6
MERGE_DISTANCE = 1e-6
MIN_SEPARATION = 1e-8
RICHARDSON_TOL = 1e-4
FORM_ZERO_TOL = 1e-6
MINIMUM_CANDIDATE = 0.5


def _settings(config):
    settings = dict(DEFAULT_CONFIG["maslov"])
    if config:
        settings.update(config)
    return settings


def orthonormalize(frame):
    Q, R = np.linalg.qr(frame)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


class LagrangianFrame:
    def __init__(self, frame, form=None, tol=1e-8):
        frame = np.atleast_2d(np.asarray(frame, dtype=float))
        dim, columns = frame.shape

        if dim % 2 or columns != dim // 2:
            raise NotLagrangian(f"a Lagrangian frame in dimension {dim} needs {dim // 2} columns, got {columns}")

        if form is None:
            form = structure_matrix(dim // 2)

        scale = max(1.0, norm_inf(frame))
        if smallest_singular_value(frame) <= 1e-12 * scale:
            raise NotLagrangian("frame does not have full column rank")

        isotropy = max_abs(frame.T @ form @ frame)
        if isotropy > tol * scale ** 2:
            raise NotLagrangian(f"frame is not isotropic (residual {isotropy:.3e})")

        self.dim = dim
        self.form = form
        self.frame = orthonormalize(frame)

    def __repr__(self):
        return f"LagrangianFrame(dim={self.dim})"

    @classmethod
    def horizontal(cls, n):
        """L = R^n x {0}."""
        return cls(np.vstack([np.eye(n), np.zeros((n, n))]))

    @classmethod
    def diagonal(cls, n):
        identity = np.eye(2 * n)
        return cls(np.vstack([identity, identity]), product_form(n))

    @classmethod
    def product(cls, first, second):
        """first x second inside (V x V, (-omega) x omega)."""
        n = first.dim // 2
        return cls(linalg.block_diag(first.frame, second.frame), product_form(n))


class LagrangianPath:
    def __init__(self, evaluator, form):
        self.evaluator = evaluator
        self.form = form

    def __call__(self, t):
        return orthonormalize(self.evaluator(t))

    @classmethod
    def constant(cls, frame):
        fixed = frame.frame
        return cls(lambda t: fixed, frame.form)

    def reversed(self):
        return LagrangianPath(lambda t: self.evaluator(1.0 - t), self.form)


class SymplecticPath:
    """
    t in [0, 1] -> Psi(t) in Sp(2n).

    :param anchored: whether Psi(0) = I is required; restrictions of a path
        to a later subinterval are not anchored
    """

    def __init__(self, evaluator, sample_count=256, anchored=True):
        self.evaluator = evaluator
        self.sample_count = sample_count
        self.anchored = anchored
        self._cache = {}

    def __call__(self, t):
        t = float(t)
        if t not in self._cache:
            self._cache[t] = np.asarray(self.evaluator(t), dtype=float)
        return self._cache[t]

    @property
    def n(self):
        return self(0.0).shape[0] // 2

    def restricted(self, t0, t1):
        return SymplecticPath(
            lambda s: self(t0 + s * (t1 - t0)), self.sample_count, anchored=(t0 == 0.0))

    def check(self, tol=1e-8):
        start = self(0.0)
        if self.anchored and max_abs(start - np.eye(start.shape[0])) > tol:
            raise NotSymplectic("path does not start at the identity")

        for t in np.linspace(0.0, 1.0, self.sample_count):
            Psi = self(t)
            residual = symplectic_residual(Psi)
            if residual > tol * max(1.0, norm_inf(Psi)) ** 2:
                raise NotSymplectic(f"Psi({t:.4f}) has symplectic residual {residual:.3e}")

        return True


class CrossingRecord:
    def __init__(self, t, intersection_dim, form_inertia, contribution):
        self.t = t
        self.intersection_dim = intersection_dim
        self.form_inertia = form_inertia
        self.contribution = contribution

    def __repr__(self):
        return f"CrossingRecord(t={self.t:.6f}, dim={self.intersection_dim}, contribution={self.contribution})"

    @property
    def at_endpoint(self):
        return self.t in (0.0, 1.0)

    def to_json(self):
        return {
            "t": self.t,
            "intersection_dim": self.intersection_dim,
            "form_inertia": self.form_inertia.to_json(),
            "contribution": self.contribution.to_json()
        }


def graph_frame(Psi, tol=1e-9):
    Psi = np.atleast_2d(np.asarray(Psi, dtype=float))
    residual = symplectic_residual(Psi)
    if residual > tol * max(1.0, norm_inf(Psi)) ** 2:
        raise NotSymplectic(f"symplectic residual {residual:.3e}")

    n = Psi.shape[0] // 2
    return LagrangianFrame(np.vstack([np.eye(2 * n), Psi]), product_form(n))


def graph_path(path):
    n = path.n
    identity = np.eye(2 * n)
    return LagrangianPath(lambda t: np.vstack([identity, path(t)]), product_form(n))


class _PairMonitor:
    """Pairing matrix [Q1 | Q2] of two Lagrangian paths and the tests built on it."""

    def __init__(self, path1, path2):
        self.path1 = path1
        self.path2 = path2

    def pairing(self, t):
        return np.hstack([self.path1(t), self.path2(t)])

    def determinant(self, t):
        return float(np.linalg.det(self.pairing(t)))

    def sigma(self, t):
        return smallest_singular_value(self.pairing(t))

    def nullity(self, t, rank_tol):
        return int(np.count_nonzero(linalg.svdvals(self.pairing(t)) <= rank_tol))


def _derivative(path, t, h):
    if t - h < 0.0:
        return (-3.0 * path(t) + 4.0 * path(t + h) - path(t + 2 * h)) / (2 * h)
    if t + h > 1.0:
        return (3.0 * path(t) - 4.0 * path(t - h) + path(t - 2 * h)) / (2 * h)
    return (path(t + h) - path(t - h)) / (2 * h)


def _crossing_form(path1, path2, t, a, b, h):
    Omega = path1.form
    Q1, Q2 = path1(t), path2(t)
    G = a.T @ (Q1.T @ Omega @ _derivative(path1, t, h)) @ a \
        - b.T @ (Q2.T @ Omega @ _derivative(path2, t, h)) @ b
    return 0.5 * (G + G.T)


def _crossing(monitor, t, settings):
    rank_tol = settings["rank_tol"]
    h = settings["fd_step"]
    m = monitor.path1(t).shape[1]

    pairing = np.hstack([monitor.path1(t), -monitor.path2(t)])
    _, sigmas, Vh = linalg.svd(pairing)
    # located crossings have at least a one-dimensional kernel
    dim = max(1, int(np.count_nonzero(sigmas <= rank_tol)))

    kernel = Vh[-dim:].T
    a, b = kernel[:m], kernel[m:]

    G = _crossing_form(monitor.path1, monitor.path2, t, a, b, h)
    G_half = _crossing_form(monitor.path1, monitor.path2, t, a, b, h / 2)

    magnitude = max(norm_inf(G), np.finfo(float).tiny)
    if norm_inf(G - G_half) > RICHARDSON_TOL * magnitude:
        raise UnresolvedCrossing(f"crossing form at t = {t:.10f} does not settle under step refinement")

    counts = inertia(G, FORM_ZERO_TOL * magnitude)
    if counts.n_zero:
        raise UnresolvedCrossing(f"degenerate crossing form at t = {t:.10f} ({counts})")

    weight = 1 if t in (0.0, 1.0) else 2
    return CrossingRecord(t, dim, counts, HalfInteger(weight * counts.signature))


def _locate_crossings(monitor, settings):
    """Sorted crossing parameters, or None when the intersection never changes dimension."""
    samples = settings["samples"]
    rank_tol = settings["rank_tol"]

    ts = np.linspace(0.0, 1.0, samples)
    sigmas = np.array([monitor.sigma(t) for t in ts])
    touching = sigmas <= rank_tol

    if touching.all():
        nullities = {monitor.nullity(t, rank_tol) for t in ts}
        if len(nullities) == 1:
            return None
        raise UnresolvedCrossing("the paths intersect along the whole interval with varying dimension")

    if np.any(touching[:-1] & touching[1:]):
        where = ts[np.argmax(touching[:-1] & touching[1:])]
        raise UnresolvedCrossing(f"intersection persists over an interval near t = {where:.4f}")

    last = samples - 1
    endpoints = [t for t, hit in ((0.0, touching[0]), (1.0, touching[last])) if hit]

    determinants = [monitor.determinant(t) for t in ts]
    if touching[0]:
        determinants[0] = monitor.determinant(EDGE)
    if touching[last]:
        determinants[last] = monitor.determinant(1.0 - EDGE)

    # interior samples that already sit on a crossing
    roots = [float(ts[i]) for i in range(1, last) if touching[i]]

    for i in range(last):
        if (touching[i] and i > 0) or (touching[i + 1] and i + 1 < last):
            continue
        if determinants[i] * determinants[i + 1] < 0:
            lo = EDGE if i == 0 and touching[0] else ts[i]
            hi = 1.0 - EDGE if i + 1 == last and touching[last] else ts[i + 1]
            roots.append(float(optimize.brentq(monitor.determinant, lo, hi, xtol=settings["bisection_tol"])))

    # even-dimensional crossings leave the determinant sign unchanged
    for i in range(samples):
        left = sigmas[i - 1] if i > 0 else np.inf
        right = sigmas[i + 1] if i < last else np.inf
        if touching[i] or sigmas[i] > MINIMUM_CANDIDATE or sigmas[i] > left or sigmas[i] > right:
            continue

        result = optimize.minimize_scalar(
            monitor.sigma,
            bounds=(ts[max(i - 1, 0)], ts[min(i + 1, last)]),
            method="bounded",
            options={"xatol": 1e-11}
        )
        t = float(result.x)
        if result.fun <= rank_tol and all(abs(t - other) > MERGE_DISTANCE for other in endpoints + roots):
            roots.append(t)

    located = sorted(endpoints + roots)
    for first, second in zip(located, located[1:]):
        if second - first < MIN_SEPARATION:
            raise UnresolvedCrossing(f"crossings at {first:.10f} and {second:.10f} are not separated")

    return located


def maslov_index(path1, path2, config=None):
    """
    Maslov index of the pair (path1, path2) on [0, 1].

    The crossing form at t is Omega(Q1 a, Q1' a) - Omega(Q2 b, Q2' b) on the
    intersection Q1 a = Q2 b. Interior crossings count with their signature,
    endpoint crossings with half of it.

    :returns: (HalfInteger, list of CrossingRecord)
    """
    settings = _settings(config)
    monitor = _PairMonitor(path1, path2)

    located = _locate_crossings(monitor, settings)
    if located is None:
        return HalfInteger(0), []

    crossings = [_crossing(monitor, t, settings) for t in located]

    total = HalfInteger(sum(record.contribution.doubled for record in crossings))
    return total, crossings


def conley_zehnder(path, config=None):
    end = path(1.0)
    n = end.shape[0] // 2

    sigma = smallest_singular_value(end - np.eye(2 * n))
    if sigma <= 1e-10 * max(1.0, norm_inf(end)):
        raise DegenerateEndpoint(f"Psi(1) - I has smallest singular value {sigma:.3e}")

    value, _ = maslov_index(
        graph_path(path), LagrangianPath.constant(LagrangianFrame.diagonal(n)), config)
    return value


def lagrangian_maslov(path, L, config=None):
    value, _ = maslov_index(
        graph_path(path), LagrangianPath.constant(LagrangianFrame.product(L, L)), config)
    return value


def _unitary_embedding(H):
    return np.block([[H.real, H.imag], [-H.imag, H.real]])


def generate_path(Phi, seed, perturbation=0.35, sample_count=256):
    """
    A generic symplectic path from I to Phi.

    Phi = O P (polar decomposition) with O orthogonal symplectic and P
    positive symplectic; both factors are followed along their logarithms
    and the product is bent by a loop exp(eps sin(pi t) J S) with a random
    symmetric S, which is the identity at both ends.
    """
    Phi = np.asarray(Phi, dtype=float)
    n = Phi.shape[0] // 2
    J = structure_matrix(n)

    residual = symplectic_residual(Phi)
    if residual > 1e-8 * max(1.0, norm_inf(Phi)) ** 2:
        raise NotSymplectic(f"cannot join I to a non-symplectic matrix (residual {residual:.3e})")

    rng = np.random.default_rng(seed)

    O, P = linalg.polar(Phi)

    # O = [[X, Y], [-Y, X]] is the real form of the unitary X + iY
    unitary = O[:n, :n] + 1j * O[:n, n:]
    T, W = linalg.schur(unitary, output="complex")
    phases = np.angle(np.diag(T))

    stretches, axes = linalg.eigh(P)
    log_stretches = np.log(stretches)

    S = rng.standard_normal((2 * n, 2 * n))
    S = 0.5 * (S + S.T)
    S /= max(norm_inf(S), np.finfo(float).tiny)
    loop = J @ S

    def evaluate(t):
        rotation = _unitary_embedding((W * np.exp(1j * t * phases)) @ W.conj().T)
        stretch = (axes * np.exp(t * log_stretches)) @ axes.T
        bend = linalg.expm(perturbation * np.sin(np.pi * t) * loop)
        return bend @ rotation @ stretch

    return SymplecticPath(evaluate, sample_count)


def path_difference(Phi, seed, config=None):
    """mu_CZ - mu_L along one generated path, regenerating on unresolved crossings."""
    settings = _settings(config)
    n = np.asarray(Phi).shape[0] // 2
    L = LagrangianFrame.horizontal(n)

    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(int(seed))

    attempts = seed.spawn(settings["path_attempts"])
    for attempt, child in enumerate(attempts, 1):
        path = generate_path(Phi, child, settings["perturbation"], settings["samples"])
        try:
            return conley_zehnder(path, settings) - lagrangian_maslov(path, L, settings)
        except UnresolvedCrossing as e:
            logger.info(f"Regenerating path (attempt {attempt}): {e}")

    raise UnresolvedCrossing(f"no generic path found in {settings['path_attempts']} attempts")


def hormander_via_paths(Phi, seed, k=1, config=None):
    Phi = np.asarray(Phi, dtype=float)
    n = Phi.shape[0] // 2

    sigma = smallest_singular_value(Phi - np.eye(2 * n))
    if sigma <= 1e-10 * max(1.0, norm_inf(Phi)):
        raise NotTransverse(f"Phi - I has smallest singular value {sigma:.3e}")

    first, second = (path_difference(Phi, child, config)
                     for child in np.random.SeedSequence(int(seed)).spawn(2))

    if first != second:
        raise PathDependence(f"two generated paths give {first} and {second}")

    return IndexResult(k, first, None, Method.PATH_DIFFERENCE)
