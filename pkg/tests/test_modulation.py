"""Wave decomposition, parameter tracking, and modulation rates."""

import numpy as np
import pytest

from halfwave.evolution import Trajectory, evolve
from halfwave.experiments import get_family
from halfwave.grid import Field, make_grid
from halfwave.modulation import (
    DecompositionError,
    ModulationRates,
    ParameterSeries,
    WaveParams,
    build_superposition,
    decompose,
    initial_guess,
    modulation_rates,
    track,
)
from halfwave.spectral import Conserved, conserved_quantities, l2_norm, real_inner


TWO_WAVE = dict(omega=[0.9, 1.1], position=[-40.0, 40.0], phase=[0.3, -0.7])


def _orthogonal_noise(grid, q_field, seed):
    """Smooth complex noise annihilating the three per-wave functionals."""
    rng = np.random.default_rng(seed)
    coeff = rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n)
    coeff *= np.exp(-0.5 * np.abs(grid.xi))
    w = np.fft.ifft(coeff)
    q = q_field.values.real
    qp = np.fft.ifft(1j * grid.xi * np.fft.fft(q)).real
    re, im = w.real.copy(), w.imag.copy()
    for direction in (q, qp):
        re -= (re @ direction) / (direction @ direction) * direction
    im -= (im @ q) / (q @ q) * q
    return Field(grid, re + 1j * im)


# ------------------------------------------------------------ construction


def test_wave_params_validation():
    with pytest.raises(ValueError):
        WaveParams(omega=[1.0, -0.5], position=[0.0, 10.0], phase=[0.0, 0.0])
    with pytest.raises(ValueError):
        WaveParams(omega=[1.0], position=[0.0, 10.0], phase=[0.0, 0.0])
    with pytest.raises(ValueError):
        WaveParams(omega=[1.0, 1.0], position=[0.0, 2.0], phase=[0.0, 0.0],
                   min_separation=5.0)


def test_superposition_is_sum_of_single_waves(family2, grid400):
    params = WaveParams(**TWO_WAVE)
    total = build_superposition(family2, params, grid400)
    parts = [
        build_superposition(
            family2,
            WaveParams([params.omega[k]], [params.position[k]], [params.phase[k]]),
            grid400,
        )
        for k in range(2)
    ]
    assert np.array_equal(total.values, parts[0].values + parts[1].values)


# ------------------------------------------------------------- initial guess


def test_initial_guess_recovers_construction(family2, grid400):
    params = WaveParams(**TWO_WAVE)
    u = build_superposition(family2, params, grid400)
    guess = initial_guess(u, 2, family2)
    assert np.max(np.abs(guess.position - params.position)) <= grid400.dx
    assert np.max(np.abs(guess.omega - params.omega)) < 0.02
    assert np.max(np.abs(guess.phase - params.phase)) < 0.05


def test_initial_guess_count_validation(family2, grid400):
    u = build_superposition(family2, WaveParams([1.0], [0.0], [0.0]), grid400)
    with pytest.raises(ValueError):
        initial_guess(u, 3, family2)


def test_initial_guess_rejects_zero_field(family2, grid400):
    u = Field(grid400, np.zeros(grid400.n, dtype=complex))
    with pytest.raises(DecompositionError):
        initial_guess(u, 1, family2)


def test_initial_guess_needs_two_peaks(family2, grid400):
    u = build_superposition(family2, WaveParams([1.0], [0.0], [0.0]), grid400)
    with pytest.raises(DecompositionError):
        initial_guess(u, 2, family2)


# --------------------------------------------------------------- decompose


def test_decompose_recovers_exact_superposition(family2, grid400):
    params = WaveParams(**TWO_WAVE)
    u = build_superposition(family2, params, grid400)
    offset = WaveParams(
        params.omega + 2e-3, params.position - 5e-2, params.phase + 1e-2
    )
    dec = decompose(u, offset, family2)
    assert np.max(np.abs(dec.params.omega - params.omega)) < 1e-8
    assert np.max(np.abs(dec.params.position - params.position)) < 1e-8
    assert np.max(np.abs(dec.params.phase - params.phase)) < 1e-8
    assert dec.eps_hhalf < 1e-8
    assert dec.orthogonality_residual < 1e-10


def test_decompose_reconstruction_identity(family2, grid400):
    params = WaveParams(**TWO_WAVE)
    u = build_superposition(family2, params, grid400)
    dec = decompose(u, params, family2)
    rebuilt = build_superposition(family2, dec.params, grid400)
    gap = np.max(np.abs(u.values - rebuilt.values - dec.eps.values))
    assert gap < 1e-14 * np.max(np.abs(u.values))


def test_decompose_rejects_zero_field(family2, grid400):
    u = Field(grid400, np.zeros(grid400.n, dtype=complex))
    with pytest.raises(DecompositionError, match="zero field"):
        decompose(u, WaveParams([1.0], [0.0], [0.0]), family2)


def test_decompose_gauge_equivariance(family2, grid400):
    params = WaveParams(**TWO_WAVE)
    u = build_superposition(family2, params, grid400)
    theta = 1.1
    rotated = Field(grid400, np.exp(1j * theta) * u.values)
    shifted_guess = WaveParams(params.omega, params.position, params.phase + theta)
    dec = decompose(rotated, shifted_guess, family2)
    assert np.max(np.abs(dec.params.omega - params.omega)) < 1e-10
    assert np.max(np.abs(dec.params.position - params.position)) < 1e-10
    assert np.max(np.abs(dec.params.phase - params.phase - theta)) < 1e-10


def test_decompose_translation_equivariance(family2, grid400):
    base = WaveParams(**TWO_WAVE)
    shift = 4.0 * grid400.dx
    moved = WaveParams(base.omega, base.position + shift, base.phase)
    dec_a = decompose(build_superposition(family2, base, grid400), base, family2)
    dec_b = decompose(build_superposition(family2, moved, grid400), moved, family2)
    assert np.max(np.abs(dec_b.params.position - dec_a.params.position - shift)) < 1e-9
    assert np.max(np.abs(dec_b.params.omega - dec_a.params.omega)) < 1e-9


def test_decompose_absorbs_amplitude_into_frequency(family2, grid400):
    # Scaling (1 + delta) Q violates the orthogonality set; the fitted
    # frequency must absorb it.  To first order d omega = 2 delta for
    # p = 2, since (Q, Q) = M and (S, Q) = M'/2 = M/2.
    delta = 1e-3
    q = build_superposition(family2, WaveParams([1.0], [0.0], [0.0]), grid400)
    u = Field(grid400, (1.0 + delta) * q.values)
    dec = decompose(u, WaveParams([1.0], [0.0], [0.0]), family2)
    assert dec.params.omega[0] - 1.0 == pytest.approx(2.0 * delta, rel=0.2)
    assert abs(dec.params.position[0]) < 1e-8
    assert abs(dec.params.phase[0]) < 1e-8


def test_decompose_leaves_orthogonal_noise_in_eps(family2, grid400):
    delta = 1e-3
    q = build_superposition(family2, WaveParams([1.0], [0.0], [0.0]), grid400)
    w = _orthogonal_noise(grid400, q, 31)
    u = Field(grid400, q.values + delta * w.values)
    dec = decompose(u, WaveParams([1.0], [0.0], [0.0]), family2)
    assert abs(dec.params.omega[0] - 1.0) < 1e-10
    assert abs(dec.params.position[0]) < 1e-10
    assert abs(dec.params.phase[0]) < 1e-10
    assert dec.eps_l2 == pytest.approx(delta * l2_norm(w), rel=1e-10)
    # and Newton must return to the same point from a worse guess
    rough = WaveParams([1.002], [-0.05], [0.01])
    again = decompose(u, rough, family2)
    assert abs(again.params.omega[0] - 1.0) < 1e-8


def test_decompose_detects_collision(family2, grid400):
    params = WaveParams(omega=[1.0, 1.0], position=[-0.5, 0.5], phase=[0.0, 0.0])
    u = build_superposition(family2, params, grid400)
    with pytest.raises(DecompositionError):
        decompose(u, params, family2)


# -------------------------------------------------------------------- track


def test_track_standing_wave(grid400):
    family = get_family(2.0, 4096, 400.0)
    u0 = build_superposition(family, WaveParams([1.0], [0.0], [0.0]), grid400)
    traj = evolve(u0, T=20.0, dt=2e-3, p=2.0, stride=0.5)
    series = track(traj, family, 1)
    assert series.complete and series.exit_time is None
    assert np.max(np.abs(series.omega - 1.0)) < 1e-6
    assert np.max(np.abs(series.position)) < 1e-6
    # unwrapped phase follows omega t without branch jumps
    assert np.max(np.abs(series.phase[:, 0] - series.times)) < 1e-3
    assert np.max(series.eps_hhalf) < 1e-4
    assert np.max(series.ortho_resid) < 1e-9

    rates = modulation_rates(series, 40.0)
    assert rates.max_omega_rate < 1e-6
    assert rates.max_position_rate < 1e-6
    assert rates.max_gauge_rate < 1e-4
    assert rates.max_ratio < 1e-2


def test_track_guess_count_mismatch(family2, grid400):
    u = build_superposition(family2, WaveParams([1.0], [0.0], [0.0]), grid400)
    traj = Trajectory(
        times=np.array([0.0]),
        snapshots=[u],
        conserved=[conserved_quantities(u, 2.0)],
        dt=0.1,
        p=2.0,
    )
    with pytest.raises(ValueError):
        track(traj, family2, 2, guess=WaveParams([1.0], [0.0], [0.0]))


def test_track_raises_on_first_stride_failure(family2, grid400):
    zero = Field(grid400, np.zeros(grid400.n, dtype=complex))
    traj = Trajectory(
        times=np.array([0.0]),
        snapshots=[zero],
        conserved=[Conserved(0.0, 0.0, 0.0)],
        dt=0.1,
        p=2.0,
    )
    with pytest.raises(DecompositionError):
        track(traj, family2, 1)


def test_track_truncates_on_later_failure(family2, grid400):
    params = WaveParams(**TWO_WAVE)
    good = build_superposition(family2, params, grid400)
    collided = build_superposition(
        family2,
        WaveParams(omega=[0.9, 1.1], position=[-0.5, 0.5], phase=[0.0, 0.0]),
        grid400,
    )
    c = conserved_quantities(good, 2.0)
    traj = Trajectory(
        times=np.array([0.0, 0.5, 1.0]),
        snapshots=[good, good, collided],
        conserved=[c, c, conserved_quantities(collided, 2.0)],
        dt=0.1,
        p=2.0,
    )
    series = track(traj, family2, 2, guess=params)
    assert not series.complete
    assert series.exit_time == 1.0
    assert series.exit_reason
    assert len(series.times) == 2
    assert np.max(np.abs(series.omega - np.array(TWO_WAVE["omega"]))) < 1e-8


# --------------------------------------------------------------------- rates


def test_rates_need_three_strides():
    series = ParameterSeries(
        times=np.array([0.0, 0.5]),
        omega=np.ones((2, 1)),
        position=np.zeros((2, 1)),
        phase=np.zeros((2, 1)),
        eps_l2=np.zeros(2),
        eps_hhalf=np.zeros(2),
        ortho_resid=np.zeros(2),
        weighted_mass=np.zeros((2, 1)),
    )
    with pytest.raises(ValueError):
        modulation_rates(series, 40.0)


def test_rates_on_synthetic_series():
    # gamma(t) = (1 + s) t on a constant-omega series isolates the gauge
    # rate: centered differences of a linear phase are exact.
    s = 0.05
    sigma = 3.0
    times = np.array([0.0, 0.5, 1.0, 1.5, 2.0])
    series = ParameterSeries(
        times=times,
        omega=np.ones((5, 1)),
        position=np.zeros((5, 1)),
        phase=(1.0 + s) * times[:, None],
        eps_l2=np.zeros(5),
        eps_hhalf=np.zeros(5),
        ortho_resid=np.zeros(5),
        weighted_mass=np.zeros((5, 1)),
    )
    rates = modulation_rates(series, sigma)
    assert isinstance(rates, ModulationRates)
    assert rates.max_omega_rate == pytest.approx(0.0, abs=1e-15)
    assert rates.max_position_rate == pytest.approx(0.0, abs=1e-15)
    assert rates.max_gauge_rate == pytest.approx(s, rel=1e-12)
    assert rates.max_ratio == pytest.approx(s**2 * (1.0 + sigma**2), rel=1e-12)
