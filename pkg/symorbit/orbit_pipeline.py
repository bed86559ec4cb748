"""
Reduced return maps of symmetric periodic orbits.

A HamiltonianSystem carries a linear antisymplectic involution rho. Orbits are
found by shooting from Fix(rho) until the flow returns to Fix(rho) at half the
period; the monodromy comes from the variational equation integrated alongside
the flow, and is reduced to a 2n x 2n map on a rho-invariant symplectic
complement V of span{v, X_H(x)}.
"""

import numpy as np
from scipy import linalg
from scipy.integrate import solve_ivp

from .darwin import ReturnMapBlocks, validate_darwin
from .errors import (
    CriticalPoint,
    DegenerateTransversal,
    EnergyDriftExceeded,
    InvalidInvolution,
    NoConvergence,
    NotOnFixedSet,
    ProjectionIllConditioned,
    SectionInvariantViolated,
    StepFailure,
    UnequalEigenspaces
)
from .linalg_core import max_abs, norm_inf, structure_matrix, symplectic_residual
from .logger import Logger

logger = Logger("orbit")


class HamiltonianSystem:
    def __init__(self, name, dim, hamiltonian, gradient, hessian, involution):
        involution = np.asarray(involution, dtype=float)

        if dim % 2 or involution.shape != (dim, dim):
            raise InvalidInvolution(f"involution of shape {involution.shape} in dimension {dim}")

        J = structure_matrix(dim // 2)
        if max_abs(involution @ involution - np.eye(dim)) > 1e-12:
            raise InvalidInvolution("rho^2 != I")
        if max_abs(involution.T @ J @ involution + J) > 1e-12:
            raise InvalidInvolution("rho does not reverse the symplectic form")

        self.name = name
        self.dim = dim
        self.hamiltonian = hamiltonian
        self.gradient = gradient
        self.hessian = hessian
        self.involution = involution
        self.J = J

    def __repr__(self):
        return f"HamiltonianSystem({self.name}, dim={self.dim})"

    @property
    def n(self):
        """Half the dimension of the transverse section."""
        return self.dim // 2 - 1

    def vector_field(self, x):
        return self.J @ self.gradient(x)

    def check_symmetry(self, samples=16, seed=0, tol=1e-10, radius=0.3):
        """H o rho = H and rho X_H(rho x) = -X_H(x) on random points."""
        rng = np.random.default_rng(seed)
        rho = self.involution
        worst_energy, worst_field = 0.0, 0.0

        for _ in range(samples):
            x = radius * rng.standard_normal(self.dim)
            scale = max(1.0, abs(self.hamiltonian(x)))
            worst_energy = max(worst_energy, abs(self.hamiltonian(rho @ x) - self.hamiltonian(x)) / scale)

            field = self.vector_field(x)
            worst_field = max(worst_field, max_abs(rho @ self.vector_field(rho @ x) + field)
                              / max(1.0, max_abs(field)))

        if worst_energy > tol or worst_field > tol:
            raise InvalidInvolution(
                f"system is not rho-symmetric (energy {worst_energy:.3e}, field {worst_field:.3e})")

        return worst_energy, worst_field


def anisotropic_oscillator(omega1=1.0, omega2=np.sqrt(2.0)):
    """H = (p1^2 + p2^2)/2 + (omega1^2 q1^2 + omega2^2 q2^2)/2 on (q1, q2, p1, p2)."""
    stiffness = np.array([omega1 ** 2, omega2 ** 2])

    def hamiltonian(x):
        q, p = x[:2], x[2:]
        return 0.5 * float(p @ p) + 0.5 * float(stiffness @ (q * q))

    def gradient(x):
        return np.concatenate([stiffness * x[:2], x[2:]])

    hess = linalg.block_diag(np.diag(stiffness), np.eye(2))

    def hessian(x):
        return hess

    return HamiltonianSystem(
        f"oscillator:{omega1}:{omega2}", 4, hamiltonian, gradient, hessian,
        np.diag([1.0, -1.0, -1.0, 1.0]))


def henon_heiles():
    """H = (px^2 + py^2)/2 + (x^2 + y^2)/2 + x^2 y - y^3/3 on (x, y, px, py)."""

    def hamiltonian(z):
        x, y, px, py = z
        return 0.5 * (px * px + py * py) + 0.5 * (x * x + y * y) + x * x * y - y ** 3 / 3.0

    def gradient(z):
        x, y, px, py = z
        return np.array([x + 2 * x * y, y + x * x - y * y, px, py])

    def hessian(z):
        x, y, _, _ = z
        return np.array([
            [1 + 2 * y, 2 * x, 0, 0],
            [2 * x, 1 - 2 * y, 0, 0],
            [0, 0, 1, 0],
            [0, 0, 0, 1]
        ], dtype=float)

    return HamiltonianSystem(
        "henon-heiles", 4, hamiltonian, gradient, hessian,
        np.diag([-1.0, 1.0, 1.0, -1.0]))


def henon_heiles_seed(energy):
    """Turning point (0, y, 0, 0) on the positive y-axis at the given energy."""
    if not 0 < energy < 1.0 / 6.0:
        raise ValueError(f"energy must lie in (0, 1/6), got {energy}")

    # y^2/2 - y^3/3 = E
    roots = np.roots([2.0, -3.0, 0.0, 6.0 * energy])
    y = min(r.real for r in roots if abs(r.imag) < 1e-12 and r.real > 0)
    return np.array([0.0, y, 0.0, 0.0])


def system_from_spec(spec):
    """
    Parse ``oscillator:OMEGA1:OMEGA2`` or ``henon-heiles:ENERGY``.

    :returns: (system, seed point, half-period guess)
    """
    name, *params = spec.split(":")

    try:
        values = [float(p) for p in params]
    except ValueError:
        raise ValueError(f"non-numeric parameter in '{spec}'")

    if name == "oscillator":
        if len(values) != 2 or min(values) <= 0:
            raise ValueError("oscillator needs two positive frequencies")
        omega1, omega2 = values
        return anisotropic_oscillator(omega1, omega2), np.array([1.0, 0.0, 0.0, 0.0]), np.pi / omega1

    if name == "henon-heiles":
        if len(values) != 1:
            raise ValueError("henon-heiles needs one energy")
        return henon_heiles(), henon_heiles_seed(values[0]), np.pi

    raise ValueError(f"unknown system '{name}'")


class Trajectory:
    def __init__(self, times, states, dense=None):
        self.times = times
        self.states = states
        self.dense = dense

    def __call__(self, t):
        if self.dense is None:
            return self.states[:, 0].copy()
        return self.dense(t)

    @property
    def end(self):
        return self.states[:, -1].copy()


def integrate_with_variations(system, x0, T, tol=1e-10, rtol=1e-12, atol=1e-12, method="DOP853"):
    """
    Flow x0 for time T together with the fundamental matrix M' = J Hess(x) M.

    :param tol: accuracy asked of the result; energy drift above 10 tol raises
    :returns: (Trajectory, fundamental matrix)
    """
    x0 = np.asarray(x0, dtype=float)
    dim = system.dim

    if T == 0:
        return Trajectory(np.array([0.0]), x0[:, None].copy()), np.eye(dim)

    J = system.J

    def rhs(t, y):
        x = y[:dim]
        M = y[dim:].reshape(dim, dim)
        return np.concatenate([J @ system.gradient(x), (J @ system.hessian(x) @ M).ravel()])

    y0 = np.concatenate([x0, np.eye(dim).ravel()])
    solution = solve_ivp(rhs, (0.0, T), y0, method=method, rtol=min(rtol, tol), atol=min(atol, tol),
                         dense_output=True)

    if not solution.success:
        raise StepFailure(solution.message)

    states = solution.y[:dim]
    fundamental = solution.y[dim:, -1].reshape(dim, dim)

    energy0 = system.hamiltonian(x0)
    drift = max(abs(system.hamiltonian(states[:, i]) - energy0) for i in range(states.shape[1]))
    if drift > 10 * tol * max(1.0, abs(energy0)):
        raise EnergyDriftExceeded(f"energy drift {drift:.3e} over time {T}")

    residual = symplectic_residual(fundamental)
    if residual > 100 * tol * max(1.0, norm_inf(fundamental)) ** 2:
        logger.warning(f"Fundamental matrix drifted from Sp: residual {residual:.3e}")

    dense = solution.sol
    trajectory = Trajectory(solution.t, states, lambda t: dense(t)[:dim])

    return trajectory, fundamental


class SymmetricOrbit:
    def __init__(self, x, eta, energy, residual, monodromy, iterations):
        self.x = x
        self.eta = eta
        self.energy = energy
        self.residual = residual
        self.monodromy = monodromy
        self.iterations = iterations

    def __repr__(self):
        return f"SymmetricOrbit(eta={self.eta:.6f}, energy={self.energy:.6f}, residual={self.residual:.2e})"

    def reversibility_residual(self, rho):
        """|M - rho M^-1 rho| for the full-period monodromy M."""
        J = structure_matrix(self.monodromy.shape[0] // 2)
        inverse = -J @ self.monodromy.T @ J
        return max_abs(self.monodromy - rho @ inverse @ rho)

    def to_json(self):
        return {
            "x": [float(value) for value in self.x],
            "eta": float(self.eta),
            "energy": float(self.energy),
            "residual": float(self.residual)
        }


def find_symmetric_orbit(system, seed_point, half_period_guess, tol=1e-10, max_iter=25, integrator=None):
    """
    Shoot from Fix(rho) to Fix(rho) at fixed energy.

    Unknowns are the coordinates c of x = seed + E c along Fix(rho) and the
    half-period tau; the residual stacks the component of phi^tau(x) off
    Fix(rho) with H(x) - H(seed). Newton steps use least squares.
    """
    integrator = integrator or {}
    rtol = integrator.get("rtol", 1e-12)
    atol = integrator.get("atol", 1e-12)
    method = integrator.get("method", "DOP853")

    rho = system.involution
    seed_point = np.asarray(seed_point, dtype=float)
    identity = np.eye(system.dim)

    if max_abs(rho @ seed_point - seed_point) > 1e-12 * max(1.0, max_abs(seed_point)):
        raise NotOnFixedSet("seed point is not fixed by the involution")

    if max_abs(system.gradient(seed_point)) <= 1e-12:
        raise CriticalPoint("seed point is a critical point of H")

    E_plus = linalg.null_space(rho - identity)
    off_fixed = linalg.orth(identity - rho).T @ (identity - rho)
    energy = system.hamiltonian(seed_point)

    c = np.zeros(E_plus.shape[1])
    tau = float(half_period_guess)

    for iteration in range(1, max_iter + 1):
        x = seed_point + E_plus @ c
        trajectory, M = integrate_with_variations(system, x, tau, tol, rtol, atol, method)
        y = trajectory.end

        F = np.concatenate([off_fixed @ y, [system.hamiltonian(x) - energy]])
        error = float(np.linalg.norm(F))
        logger.info(f"Newton step {iteration}: |F| = {error:.3e}, tau = {tau:.12f}")

        if error <= tol:
            break

        jacobian = np.block([
            [off_fixed @ M @ E_plus, (off_fixed @ system.vector_field(y))[:, None]],
            [(system.gradient(x) @ E_plus)[None, :], np.zeros((1, 1))]
        ])
        step = np.linalg.lstsq(jacobian, -F, rcond=None)[0]
        c += step[:-1]
        tau += step[-1]

        if tau <= 0:
            raise NoConvergence(f"half-period became non-positive ({tau:.3e})")
    else:
        raise NoConvergence(f"no convergence after {max_iter} Newton steps (|F| = {error:.3e})")

    eta = 2.0 * tau
    trajectory, monodromy = integrate_with_variations(system, x, eta, tol, rtol, atol, method)
    closure = float(np.linalg.norm(trajectory.end - x))

    if closure > 100 * tol:
        raise NoConvergence(f"orbit does not close up: |phi^eta(x) - x| = {closure:.3e}")

    if max_abs(system.gradient(x)) <= 1e-12:
        raise CriticalPoint("converged to a critical point of H")

    return SymmetricOrbit(x, eta, system.hamiltonian(x), closure, monodromy, iteration)


class TransverseSection:
    def __init__(self, x, basis_plus, basis_minus, v_aux, field):
        self.x = x
        self.basis_plus = basis_plus
        self.basis_minus = basis_minus
        self.v_aux = v_aux
        self.field = field

    @property
    def n(self):
        return self.basis_plus.shape[1]

    @property
    def symplectic_basis_matrix(self):
        return np.hstack([self.basis_plus, self.basis_minus])

    def residuals(self, rho):
        E, F = self.basis_plus, self.basis_minus
        J = structure_matrix(E.shape[0] // 2)
        transversal = np.column_stack([self.v_aux, self.field])

        return {
            "omega(e, f) = I": max_abs(E.T @ J @ F - np.eye(self.n)),
            "omega(e, e) = 0": max_abs(E.T @ J @ E),
            "omega(f, f) = 0": max_abs(F.T @ J @ F),
            "rho e = e": max_abs(rho @ E - E),
            "rho f = -f": max_abs(rho @ F + F),
            "omega(V, {v, X}) = 0": max_abs(self.symplectic_basis_matrix.T @ J @ transversal)
        }


def build_transverse_section(system, orbit, seed=0, transversal=None, max_attempts=16, invariant_tol=1e-9):
    """
    :param transversal: the free vector w in v = w + rho w; sampled from
        ``seed`` when omitted
    :param invariant_tol: bound on the section residuals, relative to the
        squared size of the basis
    """
    x = orbit.x
    rho = system.involution
    J = system.J
    n = system.n

    grad = system.gradient(x)
    grad_norm = float(np.linalg.norm(grad))
    if grad_norm <= 1e-12:
        raise CriticalPoint("orbit point is a critical point of H")

    field = system.vector_field(x)
    rng = np.random.default_rng(seed)

    for attempt in range(1, max_attempts + 1):
        w = np.asarray(transversal, dtype=float) if transversal is not None else rng.standard_normal(system.dim)
        v = w + rho @ w
        length = float(np.linalg.norm(v))
        if length > 0:
            v = v / length
            if abs(grad @ v) > 1e-6 * grad_norm:
                break

        if transversal is not None:
            raise DegenerateTransversal("given w yields dH(x) v = 0")
        logger.info(f"Transversal vector rejected (attempt {attempt}), resampling")
    else:
        raise DegenerateTransversal(f"no transversal vector after {max_attempts} attempts")

    V = linalg.null_space(np.vstack([v @ J, field @ J]))
    R = V.T @ rho @ V

    plus = linalg.null_space(R - np.eye(2 * n), rcond=1e-8)
    minus = linalg.null_space(R + np.eye(2 * n), rcond=1e-8)
    if plus.shape[1] != n or minus.shape[1] != n:
        raise UnequalEigenspaces(f"eigenspaces of rho on V have dimensions {plus.shape[1]} and {minus.shape[1]}")

    E = V @ plus
    F_raw = V @ minus

    # F = F_raw G^-1 makes omega(e_i, f_j) = delta_ij
    G = E.T @ J @ F_raw
    if np.linalg.cond(G) > 1e12:
        raise UnequalEigenspaces("the eigenspaces of rho on V are not in duality")
    F = F_raw @ np.linalg.inv(G)

    section = TransverseSection(x, E, F, v, field)

    # residuals scale with the size of the normalized basis
    limit = invariant_tol * max(1.0, max_abs(section.symplectic_basis_matrix)) ** 2
    residuals = section.residuals(rho)
    failed = [name for name, value in residuals.items() if value > limit]
    if failed:
        worst = max(residuals.values())
        raise SectionInvariantViolated(f"section violates {', '.join(failed)} (worst residual {worst:.3e})")

    return section


def reduced_monodromy(system, orbit, section, tol=1e-6):
    """
    Matrix of the monodromy on V in the basis (e_1..e_n, f_1..f_n), projecting
    along span{v, X_H(x)}: for y = M z the coordinates are
    alpha = -F^T J y and beta = E^T J y.
    """
    J = system.J
    v, field = section.v_aux, section.field

    pairing = abs(v @ J @ field)
    if pairing <= 1e-10 * np.linalg.norm(v) * np.linalg.norm(field):
        raise ProjectionIllConditioned(f"omega(v, X_H) = {pairing:.3e}")

    E, F = section.basis_plus, section.basis_minus
    images = orbit.monodromy @ section.symplectic_basis_matrix

    Phi = np.vstack([-F.T @ J @ images, E.T @ J @ images])
    blocks = ReturnMapBlocks.from_matrix(Phi)

    report = validate_darwin(blocks, tol=tol, verbose=True)
    if not report.passed:
        raise ProjectionIllConditioned(
            f"reduced blocks violate {', '.join(report.failures)} (worst residual {report.worst:.3e})")

    return blocks
