"""Decomposition u = sum_k Q_{omega_k}(x - x_k) e^{i gamma_k} + eps.

The parameters are fixed by 3K orthogonality conditions per wave k,

    Re (eps, R_k) = 0,   Re (eps, dR_k/dx) = 0,   Im (R_k, eps) = 0,

solved as a damped Newton iteration on the residual vector.  All wave
profiles and their omega/space derivatives come from a
:class:`~.ground_state.GroundStateFamily`, so no elliptic solves happen
inside the Newton loop.  Residuals and the Jacobian use the analytic
derivative formulas: with phi = e^{i gamma},

    d eps / d omega_k = -S_k phi,  d eps / d x_k = Q_k' phi,
    d eps / d gamma_k = -i R_k,

where S_k is the omega-derivative profile, plus the matching derivatives
of the test functions themselves (those terms are O(eps) but keep the
Newton model exact away from the solution).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import Field
from .ground_state import GroundStateFamily
from .evolution import Trajectory
from .spectral import l2_norm, sobolev_norm

__all__ = [
    "DecompositionError",
    "WaveParams",
    "Decomposition",
    "ParameterSeries",
    "ModulationRates",
    "build_superposition",
    "initial_guess",
    "decompose",
    "track",
    "modulation_rates",
]


class DecompositionError(RuntimeError):
    """No valid parameter set found (bad guess, collision, or escape)."""


@dataclass
class WaveParams:
    """Per-wave (omega, position, phase) triples, positions ascending."""

    omega: np.ndarray
    position: np.ndarray
    phase: np.ndarray
    min_separation: float = 0.0

    def __post_init__(self):
        self.omega = np.atleast_1d(np.asarray(self.omega, dtype=float))
        self.position = np.atleast_1d(np.asarray(self.position, dtype=float))
        self.phase = np.atleast_1d(np.asarray(self.phase, dtype=float))
        if not len(self.omega) == len(self.position) == len(self.phase):
            raise ValueError("omega, position and phase must have equal length")
        if np.any(self.omega <= 0):
            raise ValueError(f"wave frequencies must be positive, got {self.omega}")
        if self.count > 1:
            gap = np.min(np.diff(np.sort(self.position)))
            if gap < self.min_separation:
                raise ValueError(
                    f"wave separation {gap:.3g} below configured minimum "
                    f"{self.min_separation:.3g}"
                )

    @property
    def count(self) -> int:
        return len(self.omega)

    def copy(self) -> "WaveParams":
        return WaveParams(
            self.omega.copy(), self.position.copy(), self.phase.copy(), self.min_separation
        )


@dataclass
class Decomposition:
    params: WaveParams
    eps: Field = field(repr=False)
    eps_l2: float
    eps_hhalf: float
    orthogonality_residual: float
    iterations: int


def build_superposition(family: GroundStateFamily, params: WaveParams, grid) -> Field:
    """Sample sum_k Q_{omega_k}(x - x_k) e^{i gamma_k} on the grid."""
    total = np.zeros(grid.n, dtype=complex)
    for k in range(params.count):
        y = grid.x - params.position[k]
        total += family.profile(params.omega[k], y) * np.exp(1j * params.phase[k])
    return Field(grid, total)


def initial_guess(
    u: Field,
    count: int,
    family: GroundStateFamily,
    exclusion: float = 10.0,
) -> WaveParams:
    """Seed parameters from the highest well-separated peaks of |u|.

    Frequencies invert the peak amplitude through the scaling law
    omega = (|u|_peak / Q_1(0))^(p-1); phases are read off arg u at the
    peaks.  Raises when fewer than ``count`` peaks separated by
    ``exclusion`` exist.
    """
    if count not in (1, 2):
        raise ValueError(f"count must be 1 or 2, got {count}")
    grid = u.grid
    mag = np.abs(u.values)
    peak_scale = family.peak(1.0)
    indices = [int(np.argmax(mag))]
    if mag[indices[0]] <= 0:
        raise DecompositionError("field has no peak to seed from")
    if count == 2:
        masked = mag.copy()
        masked[np.abs(grid.x - grid.x[indices[0]]) < exclusion] = -np.inf
        second = int(np.argmax(masked))
        if not np.isfinite(masked[second]) or masked[second] < 0.05 * mag[indices[0]]:
            raise DecompositionError(
                f"found no second peak at least {exclusion:g} away from the first"
            )
        indices.append(second)
    indices.sort(key=lambda i: grid.x[i])
    omega = np.array([(mag[i] / peak_scale) ** (family.p - 1.0) for i in indices])
    return WaveParams(
        omega=omega,
        position=grid.x[indices],
        phase=np.angle(u.values[indices]),
    )


def _residual_state(u_values, grid, family, omega, position, phase):
    """Residual vector plus everything the Jacobian assembly reuses."""
    k_count = len(omega)
    tests = []
    waves = np.zeros_like(u_values, dtype=complex)
    for k in range(k_count):
        y = grid.x - position[k]
        rot = np.exp(1j * phase[k])
        q = family.profile(omega[k], y)
        qp = family.profile_deriv(omega[k], y)
        r = q * rot
        waves += r
        tests.append({"y": y, "rot": rot, "q": q, "qp": qp, "r": r, "t2": qp * rot})
    eps = u_values - waves
    dx = grid.dx
    eta = np.empty(3 * k_count)
    for k, w in enumerate(tests):
        pair1 = dx * np.sum(w["r"] * eps.conj())
        pair2 = dx * np.sum(w["t2"] * eps.conj())
        eta[3 * k] = pair1.real
        eta[3 * k + 1] = pair2.real
        eta[3 * k + 2] = pair1.imag
    return eta, eps, tests


def _jacobian(grid, family, omega, position, eps, tests):
    k_count = len(omega)
    dx = grid.dx
    # Parameter directions of eps (independent of which residual row).
    deps = []
    extras = []
    for k, w in enumerate(tests):
        s = family.omega_derivative(omega[k], w["y"]) * w["rot"]
        sp = family.omega_derivative_deriv(omega[k], w["y"]) * w["rot"]
        qpp = family.profile_deriv2(omega[k], w["y"]) * w["rot"]
        deps.append((-s, w["qp"] * w["rot"], -1j * w["r"]))
        extras.append({"s": s, "sp": sp, "qpp": qpp})
    jac = np.empty((3 * k_count, 3 * k_count))
    for k, w in enumerate(tests):
        dt1 = (extras[k]["s"], -w["qp"] * w["rot"], 1j * w["r"])
        dt2 = (extras[k]["sp"], -extras[k]["qpp"], 1j * w["t2"])
        for j in range(k_count):
            for m in range(3):
                col = 3 * j + m
                p1 = dx * np.sum(w["r"] * deps[j][m].conj())
                p2 = dx * np.sum(w["t2"] * deps[j][m].conj())
                if j == k:
                    p1 += dx * np.sum(dt1[m] * eps.conj())
                    p2 += dx * np.sum(dt2[m] * eps.conj())
                jac[3 * k, col] = p1.real
                jac[3 * k + 1, col] = p2.real
                jac[3 * k + 2, col] = p1.imag
    return jac


def _check_block_dominance(jac: np.ndarray, position: np.ndarray) -> None:
    """Raise when inter-wave coupling rivals a per-wave Jacobian block.

    The decomposition is only trustworthy while the Jacobian stays block
    diagonally dominant: each wave's own 3x3 block is order one, while
    the coupling to the other waves decays like the squared inverse gap.
    Once the coupling reaches half the weakest singular value of a self
    block, the implicit-function argument behind the decomposition has
    broken down (waves colliding), so tracking must stop.
    """
    k_count = len(position)
    if k_count < 2:
        return
    for k in range(k_count):
        rows = slice(3 * k, 3 * k + 3)
        keep = np.ones(3 * k_count, dtype=bool)
        keep[rows] = False
        coupling = np.linalg.norm(jac[rows][:, keep], 2)
        smallest = np.linalg.svd(jac[rows, rows], compute_uv=False)[-1]
        if coupling >= 0.5 * smallest:
            gap = float(np.min(np.diff(np.sort(position))))
            raise DecompositionError(
                f"Jacobian lost block dominance (coupling {coupling:.3e} vs "
                f"weakest self-block value {smallest:.3e}, min gap {gap:.2f}); "
                "waves too close to separate"
            )


def decompose(
    u: Field,
    guess: WaveParams,
    family: GroundStateFamily,
    tol: float = 1e-10,
    max_iter: int = 60,
) -> Decomposition:
    """Damped Newton for the orthogonality conditions, seeded at ``guess``.

    Convergence demands every residual below ``tol * ||u||_L2``.  A
    Newton step that cannot reduce the worst residual after 8 halvings,
    a near-singular Jacobian, or loss of inter-wave block dominance
    (waves colliding) raises :class:`DecompositionError`.
    """
    grid = u.grid
    u_values = u.values.astype(complex)
    unorm = l2_norm(u)
    if unorm == 0:
        raise DecompositionError("cannot decompose the zero field")
    threshold = tol * unorm
    omega = guess.omega.copy()
    position = guess.position.copy()
    phase = guess.phase.copy()

    eta, eps, tests = _residual_state(u_values, grid, family, omega, position, phase)
    for iteration in range(max_iter):
        worst = float(np.max(np.abs(eta)))
        if worst <= threshold:
            break
        jac = _jacobian(grid, family, omega, position, eps, tests)
        cond = np.linalg.cond(jac)
        if not np.isfinite(cond) or cond > 1e12:
            raise DecompositionError(
                f"Jacobian near-singular (condition {cond:.3e}); waves too close "
                "or parameters degenerate"
            )
        _check_block_dominance(jac, position)
        delta = np.linalg.solve(jac, -eta)
        scale = 1.0
        for _ in range(9):
            om_try = omega + scale * delta[0::3]
            if np.all(om_try > 0):
                pos_try = position + scale * delta[1::3]
                ph_try = phase + scale * delta[2::3]
                eta_try, eps_try, tests_try = _residual_state(
                    u_values, grid, family, om_try, pos_try, ph_try
                )
                if float(np.max(np.abs(eta_try))) < worst:
                    omega, position, phase = om_try, pos_try, ph_try
                    eta, eps, tests = eta_try, eps_try, tests_try
                    break
            scale *= 0.5
        else:
            raise DecompositionError(
                "damped Newton stalled; the field appears to lie outside the "
                "decomposition tube"
            )
    else:
        raise DecompositionError(
            f"no convergence in {max_iter} iterations "
            f"(residual {float(np.max(np.abs(eta))):.3e}, threshold {threshold:.3e})"
        )

    order = np.argsort(position)
    eps_field = Field(grid, eps)
    return Decomposition(
        params=WaveParams(omega[order], position[order], phase[order]),
        eps=eps_field,
        eps_l2=l2_norm(eps_field),
        eps_hhalf=sobolev_norm(eps_field, 0.5),
        orthogonality_residual=float(np.max(np.abs(eta))) / unorm,
        iterations=iteration,
    )


@dataclass
class ParameterSeries:
    """Tracked modulation parameters along a trajectory.

    Arrays are indexed (stride, wave).  ``weighted_mass`` holds the
    locally weighted perturbation mass int (1+(x-x_k)^2)^(-1) |eps|^2 dx
    used by the rate report.  ``complete`` is False when tracking was
    truncated; ``exit_time``/``exit_reason`` then say when and why.
    """

    times: np.ndarray
    omega: np.ndarray
    position: np.ndarray
    phase: np.ndarray
    eps_l2: np.ndarray
    eps_hhalf: np.ndarray
    ortho_resid: np.ndarray
    weighted_mass: np.ndarray
    complete: bool = True
    exit_time: float | None = None
    exit_reason: str | None = None

    @property
    def count(self) -> int:
        return self.omega.shape[1]


def track(
    traj: Trajectory,
    family: GroundStateFamily,
    count: int,
    tol: float = 1e-10,
    guess: WaveParams | None = None,
) -> ParameterSeries:
    """Decompose every stored stride, warm-starting from the previous one.

    The first stride starts from ``guess`` when given (experiments know
    their construction parameters) and from peak detection otherwise.
    The phase prediction gamma + omega * dt keeps Newton on the right
    branch; afterwards each phase is snapped to the 2-pi branch nearest
    the prediction so the series is continuously differentiable.  A
    failure at the first stride raises; a later failure truncates the
    series and records the exit.
    """
    n_samples = len(traj.times)
    grid = traj.snapshots[0].grid
    omega = np.zeros((n_samples, count))
    position = np.zeros((n_samples, count))
    phase = np.zeros((n_samples, count))
    eps_l2 = np.zeros(n_samples)
    eps_hhalf = np.zeros(n_samples)
    ortho = np.zeros(n_samples)
    weighted = np.zeros((n_samples, count))
    complete = True
    exit_time = None
    exit_reason = None

    if guess is not None and guess.count != count:
        raise ValueError(f"guess carries {guess.count} waves, expected {count}")
    params = guess if guess is not None else initial_guess(traj.snapshots[0], count, family)
    filled = 0
    for i in range(n_samples):
        if i > 0:
            dt_stride = traj.times[i] - traj.times[i - 1]
            params = WaveParams(
                omega[i - 1],
                position[i - 1],
                phase[i - 1] + omega[i - 1] * dt_stride,
            )
        predicted_phase = params.phase.copy()
        try:
            dec = decompose(traj.snapshots[i], params, family, tol=tol)
        except DecompositionError as err:
            if i == 0:
                raise
            complete = False
            exit_time = float(traj.times[i])
            exit_reason = str(err)
            break
        branch = 2.0 * np.pi * np.round((predicted_phase - dec.params.phase) / (2.0 * np.pi))
        omega[i] = dec.params.omega
        position[i] = dec.params.position
        phase[i] = dec.params.phase + branch
        eps_l2[i] = dec.eps_l2
        eps_hhalf[i] = dec.eps_hhalf
        ortho[i] = dec.orthogonality_residual
        abs_eps2 = np.abs(dec.eps.values) ** 2
        for k in range(count):
            w = 1.0 / (1.0 + (grid.x - position[i, k]) ** 2)
            weighted[i, k] = grid.dx * float(np.sum(w * abs_eps2))
        filled = i + 1

    return ParameterSeries(
        times=traj.times[:filled].copy(),
        omega=omega[:filled],
        position=position[:filled],
        phase=phase[:filled],
        eps_l2=eps_l2[:filled],
        eps_hhalf=eps_hhalf[:filled],
        ortho_resid=ortho[:filled],
        weighted_mass=weighted[:filled],
        complete=complete,
        exit_time=exit_time,
        exit_reason=exit_reason,
    )


@dataclass(frozen=True)
class ModulationRates:
    """Finite-difference modulation rates against their expected budget.

    ``ratios[i, k]`` compares |omega'| + |x'|^2 + |gamma' - omega|^2 at
    interior stride i, wave k, to the local budget (weighted perturbation
    mass + <sigma>^-2); the empirical constant is the max ratio.
    """

    times: np.ndarray
    ratios: np.ndarray
    max_ratio: float
    max_omega_rate: float
    max_position_rate: float
    max_gauge_rate: float


def modulation_rates(series: ParameterSeries, sigma: float) -> ModulationRates:
    if len(series.times) < 3:
        raise ValueError("need at least three strides for centered rates")
    t = series.times
    span = (t[2:] - t[:-2])[:, None]
    om_rate = (series.omega[2:] - series.omega[:-2]) / span
    x_rate = (series.position[2:] - series.position[:-2]) / span
    g_rate = (series.phase[2:] - series.phase[:-2]) / span
    gauge = g_rate - series.omega[1:-1]
    lhs = np.abs(om_rate) + x_rate**2 + gauge**2
    budget = series.weighted_mass[1:-1] + 1.0 / (1.0 + sigma**2)
    ratios = lhs / budget
    return ModulationRates(
        times=t[1:-1].copy(),
        ratios=ratios,
        max_ratio=float(np.max(ratios)),
        max_omega_rate=float(np.max(np.abs(om_rate))),
        max_position_rate=float(np.max(np.abs(x_rate))),
        max_gauge_rate=float(np.max(np.abs(gauge))),
    )
