import numpy as np
import pytest

from conftest import CONE_ANGLE, loglog_slope
from fiberwave.analytic_solution import analytic_state, analytic_states
from fiberwave.errors import ValidationError
from fiberwave.evolution import propagate
from fiberwave.guide_geometry import ArchimedeanSpiral, CircularArc, Helix, Straight, sample_track
from fiberwave.spin_algebra import make_spin_rep, su2_to_so3
from fiberwave.verification import (
    adjoint_defect,
    conjugation_matrix,
    eigen_defect,
    helicity,
    helicity_populations,
    lvn_residual,
    momentum_defect,
    momentum_eigenvalues,
)

GRID = [(t, p) for t in np.linspace(0, np.pi, 10) for p in np.linspace(-np.pi, np.pi, 10)]


@pytest.mark.parametrize("theta, phi", GRID)
def test_conjugation_matrix_is_rodrigues_rotation(theta, phi):
    axis = np.array([-np.sin(phi), np.cos(phi), 0.0])
    m = conjugation_matrix(theta, phi).M
    assert np.max(np.abs(m - su2_to_so3(axis, theta))) < 1e-14
    assert np.max(np.abs(m @ m.T - np.eye(3))) < 1e-14


def test_conjugation_matrix_at_zero_is_identity():
    for phi in (0.0, 1.0, -2.5):
        assert np.array_equal(conjugation_matrix(0.0, phi).M, np.eye(3))


@pytest.mark.parametrize("j", ["1/2", 1, "3/2"])
def test_adjoint_action_on_j(j):
    rep = make_spin_rep(j)
    assert max(adjoint_defect(t, p, rep) for t, p in GRID[::7]) < 1e-12


def test_momentum_eigenvalue_examples():
    k = 2.0
    assert np.allclose(momentum_eigenvalues(0.0, 0.3, k), [0, 0, k], atol=1e-15)
    assert np.allclose(momentum_eigenvalues(np.pi / 2, 0.0, k), [k, 0, 0], atol=1e-15)
    assert np.allclose(momentum_eigenvalues(np.pi / 2, np.pi / 2, k), [0, k, 0], atol=1e-15)
    assert np.allclose(momentum_eigenvalues(np.pi, 1.1, k), [0, 0, -k], atol=1e-15)
    t, p = 0.9, -2.2
    expected = k * np.array([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)])
    assert np.max(np.abs(momentum_eigenvalues(t, p, k) - expected)) < 1e-15


@pytest.mark.parametrize("frame", ["path", "working"])
def test_momentum_defect_along_tracks(frame):
    for path in (Helix.from_cone_angle(CONE_ANGLE, turns=1.0), Helix(radius=1.0, pitch=2.5, turns=0.6)):
        tr = sample_track(path, k_mag=3.0, steps=2000, frame=frame)
        assert momentum_defect(tr) < 1e-9


def test_momentum_defect_on_planar_spiral():
    tr = sample_track(ArchimedeanSpiral.from_arc_length(25.0, 2.25, inner_radius=1.0), steps=5000, frame="path")
    assert momentum_defect(tr) < 1e-9


@pytest.mark.parametrize("j", ["1/2", 1, "3/2", 2])
def test_helicity_spectrum(j):
    rep = make_spin_rep(j)
    k_hat = np.array([0.48, -0.6, 0.64])
    evals = np.linalg.eigvalsh(helicity(rep, k_hat))
    assert np.allclose(np.sort(evals), np.sort(rep.m_values), atol=1e-12)


def test_helicity_rejects_non_unit_direction():
    with pytest.raises(ValidationError, match="unit"):
        helicity(make_spin_rep(1), [0.0, 0.0, 2.0])


def test_lvn_zero_on_straight_path():
    tr = sample_track(Straight(direction=(1.0, 1.0, 0.0)), t_end=1.0, steps=100)
    res = lvn_residual(tr, make_spin_rep(1))
    assert np.isnan(res[0]) and np.isnan(res[-1])
    assert np.max(res[1:-1]) < 1e-15


def test_lvn_constant_omega():
    # unit-radius circle at unit speed: omega = (0, 0, 1) throughout
    tr = sample_track(CircularArc(radius=1.0, speed=1.0, turns=1.0), t_end=0.5, steps=10_000, frame="path")
    assert np.nanmax(lvn_residual(tr, make_spin_rep("1/2"))) < 1e-10


@pytest.mark.parametrize("j", ["1/2", 2])
def test_lvn_second_order_on_cone(j):
    rep = make_spin_rep(j)
    steps = np.array([1000, 2000, 4000])
    maxima = [np.nanmax(lvn_residual(sample_track(Helix.from_cone_angle(CONE_ANGLE, turns=1.0), steps=int(n),
                                                  frame="path"), rep)) for n in steps]
    assert -2.2 <= loglog_slope(steps, maxima) <= -1.8


def test_populations_and_eigen_defect():
    rep = make_spin_rep("3/2")
    tr = sample_track(Helix.from_cone_angle(CONE_ANGLE, turns=1.0), steps=10_000, frame="path")
    exact = analytic_states(tr, rep, "1/2")
    pops = helicity_populations(tr, rep, exact)
    assert np.allclose(pops, np.tile([0, 1, 0, 0], (tr.times.size, 1)), atol=1e-14)
    assert eigen_defect(tr, rep, exact, 0.5) < 1e-12
    numeric = propagate(tr, rep, analytic_state(tr, rep, "1/2", 0)).states
    pops = helicity_populations(tr, rep, numeric)
    assert np.max(np.abs(pops[:, 1] - 1.0)) < 1e-8
    assert np.allclose(pops.sum(axis=1), 1.0, atol=1e-12)
