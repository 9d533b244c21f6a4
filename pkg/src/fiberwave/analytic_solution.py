"""Closed-form transported states |m, k(t)> = exp(-i phase_m(t)) V(t) |m>.

V(t) = exp(beta J+ - beta* J-) with beta = -(theta/2) exp(-i phi) rotates z_hat
onto k_hat(t) about the axis (-sin phi, cos phi, 0). The phase is

    phase_m(t) = m * integral_0^t phi'(s) (1 - cos theta(s)) ds,

the signed solid angle swept by k_hat about z, times m.
"""

from dataclasses import dataclass, field
from numbers import Number

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import ValidationError
from .spin_algebra import expm_hermitian, expm_skew, parse_magnetic


@dataclass(frozen=True, eq=False)
class PhaseSeries:
    times: np.ndarray
    values: np.ndarray = field(repr=False)
    m: float = 1.0


def solid_angle_series(track):
    """Unit-m phase integral at every node (trapezoid on the doubled grid)."""
    h = track.fine_times[1] - track.fine_times[0]
    phi_rate = np.gradient(track.fine_phi, h, edge_order=2)
    # 1 - cos(theta) without cancellation near the pole
    integrand = phi_rate * 2.0 * np.sin(0.5 * track.fine_theta) ** 2
    return cumulative_trapezoid(integrand, dx=h, initial=0.0)[::2]


def phase_series(track, m):
    return PhaseSeries(track.times, float(m) * solid_angle_series(track), float(m))


def geometric_phase(track, m, node=-1, start=0):
    """phase_m accumulated from node ``start`` to node ``node`` (radians)."""
    series = solid_angle_series(track)
    return float(m) * float(series[node] - series[start])


def _ladder_generator(theta, phi, rep):
    beta = -0.5 * np.asarray(theta, dtype=float) * np.exp(-1j * np.asarray(phi, dtype=float))
    beta = beta[..., None, None]
    return beta * rep.Jplus - np.conj(beta) * rep.Jminus


def rotation_operator(theta, phi, rep):
    """V = exp(beta J+ - beta* J-), vectorized over matching arrays of angles."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < -1e-12) or np.any(theta > np.pi + 1e-12):
        raise ValidationError("polar angle must lie in [0, pi]", field="theta")
    return expm_skew(_ladder_generator(theta, phi, rep))


def rotation_operator_axis(theta, phi, rep):
    """Same operator written as exp(-i theta n.J) with n = (-sin phi, cos phi, 0)."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    n = np.stack([-np.sin(phi), np.cos(phi), np.zeros_like(phi)], axis=-1)
    return expm_hermitian(rep.dot(n), theta)


def initial_coefficients(rep, m):
    """Amplitude vector over |m> for a single m or a mapping {m: amplitude}."""
    if isinstance(m, Number) or isinstance(m, str):
        return rep.basis_state(m)
    coeffs = np.zeros(rep.dim, dtype=complex)
    for key, amp in dict(m).items():
        coeffs[rep.index(parse_magnetic(key, rep.j))] += complex(amp)
    norm = np.linalg.norm(coeffs)
    if norm == 0.0:
        raise ValidationError("superposition has zero norm", field="m")
    return coeffs / norm


def analytic_states(track, rep, m):
    """exp(-i phase_m(t_n)) V(t_n) |m> at every node, shape (nodes, dim).

    ``m`` may be a single magnetic number or a superposition {m: amplitude};
    each component then carries its own phase.
    """
    coeffs = initial_coefficients(rep, m)
    solid = solid_angle_series(track)
    phases = np.exp(-1j * np.multiply.outer(solid, rep.m_values))
    v = rotation_operator(track.theta, track.phi, rep)
    return np.einsum("nij,nj->ni", v, phases * coeffs)


def analytic_state(track, rep, m, node):
    """The closed-form state at a single node."""
    coeffs = initial_coefficients(rep, m)
    solid = solid_angle_series(track)[node]
    v = rotation_operator(track.theta[node], track.phi[node], rep)
    return v @ (np.exp(-1j * solid * rep.m_values) * coeffs)


def helicity_basis(track, rep):
    """Columns V(t_n)|m'>: the instantaneous helicity eigenbasis, shape (nodes, dim, dim)."""
    return rotation_operator(track.theta, track.phi, rep)
