"""Linearization around a ground state: the operators L± and their forms.

With Q = Q_omega the operators are

    ``L+ v = Dv + omega v - p Q^(p-1) v``   (kernel: Q')
    ``L- v = Dv + omega v -   Q^(p-1) v``   (kernel: Q)

Both are realized two ways that must agree: spectrally (fast application)
and as dense symmetric matrices (circulant D plus a diagonal potential),
the latter feeding constrained eigenvalue computations.  Quadratic-form
minima restricted to the orthogonal complement of a constraint set are
generalized eigenvalues of the projected pencil (form matrix, Gram
matrix), where the Gram realizes either the L2 or the H^(1/2) inner
product.

The two-well form ``quadratic_form_HK`` extends the single-wave form to a
pair of waves with per-wave frequency weights and cutoffs; to expose it
to the same eigenvalue machinery, complex fields are flattened to real
vectors of length 2n (real part stacked on imaginary part).  The mixed
real/imaginary coupling enters only through the rank-one-in-spirit term
``|R|^(p-3) (Re(conj(R) eps))^2``, which is evaluated as
``|R|^(p-1) (Re(conj(R) eps) / max(|R|, floor))^2`` so that the
negative-power factor never overflows where R vanishes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import circulant, eigh, null_space

from .grid import Field, Grid
from .ground_state import GroundState
from .spectral import fractional_derivative, real_inner

__all__ = [
    "MODULUS_FLOOR",
    "LinearizedOperator",
    "linearized_operator",
    "apply_linearized",
    "gram_matrix",
    "constrained_min_eigenvalue",
    "constrained_form_minimum",
    "quadratic_form_H0",
    "quadratic_form_HK",
    "hk_form_matrix",
    "hk_gram_matrix",
    "hk_constraint_rows",
    "localized_weight",
]

MODULUS_FLOOR = 1e-14

_POTENTIAL_FACTOR = {"plus": lambda p: p, "minus": lambda p: 1.0}


def _check_which(which: str) -> None:
    if which not in _POTENTIAL_FACTOR:
        raise ValueError(f"selector must be 'plus' or 'minus', got {which!r}")


def _multiplier_matrix(grid: Grid, symbol: np.ndarray) -> np.ndarray:
    """Dense circulant realizing ``v -> ifft(symbol * fft(v))``."""
    kernel = np.fft.ifft(symbol).real
    return circulant(kernel)


def _derivative_symbol(grid: Grid) -> np.ndarray:
    # Full |xi|, Nyquist included, matching the H^(1/2) Gram weight.
    # Dropping the Nyquist entry here while the Gram keeps it would
    # manufacture a spurious soft mode at the grid scale.
    return np.abs(grid.xi)


@dataclass
class LinearizedOperator:
    """Dense symmetric realization of L+ or L- on the grid."""

    which: str
    ground_state: GroundState = field(repr=False)
    matrix: np.ndarray = field(repr=False)

    @property
    def grid(self) -> Grid:
        return self.ground_state.grid


def linearized_operator(which: str, q: GroundState) -> LinearizedOperator:
    _check_which(which)
    grid = q.grid
    c = _POTENTIAL_FACTOR[which](q.p)
    mat = _multiplier_matrix(grid, _derivative_symbol(grid))
    mat[np.diag_indices_from(mat)] += q.omega - c * q.profile.values ** (q.p - 1.0)
    mat = 0.5 * (mat + mat.T)
    return LinearizedOperator(which=which, ground_state=q, matrix=mat)


def apply_linearized(which: str, q: GroundState, v: Field) -> Field:
    """Spectral application of L± to a real field."""
    _check_which(which)
    if np.iscomplexobj(v.values):
        raise ValueError("L± acts on real fields here; split into components first")
    c = _POTENTIAL_FACTOR[which](q.p)
    dv = fractional_derivative(v, 1.0).values
    out = dv + q.omega * v.values - c * q.profile.values ** (q.p - 1.0) * v.values
    return Field(v.grid, out)


def gram_matrix(grid: Grid, norm: str = "H_half") -> np.ndarray:
    """Dense Gram matrix of the L2 or H^(1/2) inner product (dx included)."""
    if norm == "L2":
        return grid.dx * np.eye(grid.n)
    if norm == "H_half":
        weight = 1.0 + np.abs(grid.xi)
        mat = grid.dx * _multiplier_matrix(grid, weight)
        return 0.5 * (mat + mat.T)
    raise ValueError(f"norm must be 'L2' or 'H_half', got {norm!r}")


def constrained_form_minimum(
    form: np.ndarray,
    gram: np.ndarray,
    constraint_rows: np.ndarray | None,
) -> float:
    """Minimal eigenvalue of the pencil projected off the constraint rows.

    ``form`` and ``gram`` must be symmetric with ``gram`` positive
    definite; each row of ``constraint_rows`` is a linear functional
    (coefficient vector) that admissible vectors must annihilate.
    """
    if constraint_rows is not None and len(constraint_rows):
        rows = np.atleast_2d(np.asarray(constraint_rows, dtype=float))
        gram_c = rows @ rows.T
        cond = np.linalg.cond(gram_c)
        if not np.isfinite(cond) or cond > 1e12:
            raise np.linalg.LinAlgError(
                f"constraint set nearly dependent (condition number {cond:.3e})"
            )
        basis = null_space(rows)
    else:
        basis = np.eye(form.shape[0])
    projected = basis.T @ form @ basis
    projected = 0.5 * (projected + projected.T)
    gram_p = basis.T @ gram @ basis
    gram_p = 0.5 * (gram_p + gram_p.T)
    vals = eigh(projected, gram_p, eigvals_only=True, subset_by_index=[0, 0])
    return float(vals[0])


def constrained_min_eigenvalue(
    which: str,
    q: GroundState,
    constraints: list[Field],
    norm: str = "H_half",
) -> float:
    """Minimum of <L± v, v> over {v : (v, c)_L2 = 0} against the chosen norm."""
    op = linearized_operator(which, q)
    grid = q.grid
    rows = np.array([c.values.real for c in constraints]) if constraints else None
    return constrained_form_minimum(grid.dx * op.matrix, gram_matrix(grid, norm), rows)


def _squeezed_projection(r_values: np.ndarray, eps_values: np.ndarray) -> np.ndarray:
    """|R|^(p-3)(Re(conj(R) eps))^2 rewritten with the modulus floored.

    Returns Re(conj(R) eps) / max(|R|, floor); the caller multiplies the
    square by |R|^(p-1).
    """
    modulus = np.abs(r_values)
    return (r_values.conj() * eps_values).real / np.maximum(modulus, MODULUS_FLOOR)


def quadratic_form_H0(eps: Field, r0: Field, omega_ref: float, p: float) -> float:
    """Single-wave energy quadratic form (half-convention).

    For real r0 = Q and real eps this is (1/2)<L+ eps, eps>; for purely
    imaginary eps it is (1/2)<L- Im eps, Im eps>.
    """
    grid = eps.grid
    e = eps.values.astype(complex)
    r = r0.values.astype(complex)
    ehat = np.fft.fft(e)
    kinetic = 0.5 * grid.spectral_weight * float(
        np.sum(_derivative_symbol(grid) * np.abs(ehat) ** 2)
    )
    mass = 0.5 * omega_ref * grid.dx * float(np.sum(np.abs(e) ** 2))
    modulus = np.abs(r)
    proj = _squeezed_projection(r, e)
    potential = grid.dx * float(
        np.sum(modulus ** (p - 1.0) * (0.5 * np.abs(e) ** 2 + 0.5 * (p - 1.0) * proj**2))
    )
    return kinetic + mass - potential


def quadratic_form_HK(
    eps: Field,
    waves: list[tuple[Field, float]],
    cutoffs: list[Field],
    p: float,
) -> float:
    """Two-well quadratic form: cutoff-weighted mass, per-wave potentials.

    ``waves`` pairs each wave profile R_k with its initial frequency
    omega_k(0); ``cutoffs`` holds the matching weights (the first is
    identically one in the intended usage).  With a single wave and unit
    cutoff this reduces to :func:`quadratic_form_H0`.
    """
    if len(waves) != len(cutoffs):
        raise ValueError(f"{len(waves)} waves but {len(cutoffs)} cutoffs")
    grid = eps.grid
    e = eps.values.astype(complex)
    ehat = np.fft.fft(e)
    total = 0.5 * grid.spectral_weight * float(
        np.sum(_derivative_symbol(grid) * np.abs(ehat) ** 2)
    )
    abs_e2 = np.abs(e) ** 2
    for (r_field, omega0), cut in zip(waves, cutoffs):
        r = r_field.values.astype(complex)
        total += 0.5 * omega0 * grid.dx * float(np.sum(abs_e2 * cut.values.real))
        modulus = np.abs(r)
        proj = _squeezed_projection(r, e)
        total -= grid.dx * float(
            np.sum(modulus ** (p - 1.0) * (0.5 * abs_e2 + 0.5 * (p - 1.0) * proj**2))
        )
    return total


def hk_form_matrix(
    waves: list[tuple[Field, float]],
    cutoffs: list[Field],
    p: float,
    grid: Grid,
) -> np.ndarray:
    """Dense 2n x 2n matrix S with H_K(eps) = z^T S z, z = [Re eps; Im eps]."""
    if len(waves) != len(cutoffs):
        raise ValueError(f"{len(waves)} waves but {len(cutoffs)} cutoffs")
    n = grid.n
    kinetic = 0.5 * grid.dx * _multiplier_matrix(grid, _derivative_symbol(grid))
    diag_common = np.zeros(n)
    diag_11 = np.zeros(n)
    diag_22 = np.zeros(n)
    diag_12 = np.zeros(n)
    for (r_field, omega0), cut in zip(waves, cutoffs):
        r = r_field.values.astype(complex)
        modulus = np.abs(r)
        power = modulus ** (p - 1.0)
        floored = np.maximum(modulus, MODULUS_FLOOR)
        a_hat = r.real / floored
        b_hat = r.imag / floored
        diag_common += 0.5 * omega0 * cut.values.real - 0.5 * power
        diag_11 -= 0.5 * (p - 1.0) * power * a_hat**2
        diag_22 -= 0.5 * (p - 1.0) * power * b_hat**2
        diag_12 -= 0.5 * (p - 1.0) * power * a_hat * b_hat
    s = np.zeros((2 * n, 2 * n))
    s[:n, :n] = kinetic + grid.dx * np.diag(diag_common + diag_11)
    s[n:, n:] = kinetic + grid.dx * np.diag(diag_common + diag_22)
    s[:n, n:] = grid.dx * np.diag(diag_12)
    s[n:, :n] = grid.dx * np.diag(diag_12)
    return 0.5 * (s + s.T)


def hk_gram_matrix(grid: Grid, norm: str = "H_half") -> np.ndarray:
    """Block-diagonal Gram on [Re; Im]; the H^(1/2) cross terms cancel."""
    g = gram_matrix(grid, norm)
    n = grid.n
    out = np.zeros((2 * n, 2 * n))
    out[:n, :n] = g
    out[n:, n:] = g
    return out


def hk_constraint_rows(waves: list[tuple[Field, Field]]) -> np.ndarray:
    """Orthogonality functionals as rows on [Re eps; Im eps].

    Per wave (R, dR) the three rows are the representers of
    Re(eps, R), Im(R, eps-bar) and Re(eps, dR) under the real-flattened
    L2 pairing, matching the decomposition constraints.
    """
    rows = []
    for r_field, dr_field in waves:
        r = r_field.values.astype(complex)
        dr = dr_field.values.astype(complex)
        rows.append(np.concatenate([r.real, r.imag]))
        rows.append(np.concatenate([r.imag, -r.real]))
        rows.append(np.concatenate([dr.real, dr.imag]))
    return np.array(rows)


def localized_weight(grid: Grid, radius: float, a: float, center: float = 0.0) -> Field:
    """Even C2 weight: 1 inside |x-c| <= R, (|x-c|/R)^(-a) beyond 2R.

    The shell R < |x-c| < 2R carries a quintic Hermite blend matching
    value, first and second derivative at both ends, which keeps the
    weight nonincreasing in |x-c|.
    """
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    if not 0.0 < a < 1.0:
        raise ValueError(f"tail exponent must lie in (0, 1), got {a}")
    if 2.0 * radius >= grid.length / 2.0:
        raise ValueError(
            f"transition shell [R, 2R] with R = {radius} exits the half-domain "
            f"{grid.length / 2.0}"
        )
    s = np.abs(grid.x - center) / radius
    out = np.ones(grid.n)
    tail = s >= 2.0
    out[tail] = s[tail] ** (-a)
    shell = (s > 1.0) & (s < 2.0)
    # Hermite data at s=2 for s^(-a), pulled back to t = s-1 on [0, 1].
    value = 2.0**-a
    d1 = -a * 2.0 ** (-a - 1.0)
    d2 = a * (a + 1.0) * 2.0 ** (-a - 2.0)
    coeff = np.linalg.solve(
        np.array([[1.0, 1.0, 1.0], [3.0, 4.0, 5.0], [6.0, 12.0, 20.0]]),
        np.array([value - 1.0, d1, d2]),
    )
    t = s[shell] - 1.0
    out[shell] = 1.0 + t**3 * (coeff[0] + t * (coeff[1] + t * coeff[2]))
    return Field(grid, out)
