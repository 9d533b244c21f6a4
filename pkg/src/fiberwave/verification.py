"""Consistency checks on the transported states.

* the conjugation of a vector operator by V(theta, phi), assembled from its
  closed-form coefficients and compared against the adjoint action on J;
* the momentum eigenvalue vector of the transported state;
* the helicity operator k_hat . J, its conservation, and the
  Liouville-von Neumann equation dI/dt - i[I, H] = 0.
"""

from dataclasses import dataclass, field

import numpy as np

from .analytic_solution import helicity_basis, rotation_operator
from .errors import ValidationError
from .evolution import hamiltonian_at
from .guide_geometry import working_frame


@dataclass(frozen=True, eq=False)
class ConjugationMatrix:
    theta: float
    phi: float
    M: np.ndarray = field(repr=False)


def conjugation_matrix(theta, phi):
    """Coefficients of V^dagger p_i V over (p1, p2, p3).

    Built term by term: with p+- = p1 +- i p2 and beta = -(theta/2) e^{-i phi},
    beta p+ + beta* p- = -theta (cos(phi) p1 + sin(phi) p2), so the
    (1/theta)-scaled corrections are regular at theta = 0.
    """
    st, ct = np.sin(theta), np.cos(theta)
    cp, sp = np.cos(phi), np.sin(phi)
    # (beta p+ + beta* p-) / theta, as coefficients of (p1, p2, p3)
    mix = -np.array([cp, sp, 0.0])
    e3 = np.array([0.0, 0.0, 1.0])
    rows = np.empty((3, 3))
    rows[0] = np.array([1.0, 0.0, 0.0]) + st * cp * e3 + (1.0 - ct) * cp * mix
    rows[1] = np.array([0.0, 1.0, 0.0]) + st * sp * e3 + (1.0 - ct) * sp * mix
    rows[2] = e3 + (ct - 1.0) * e3 + st * mix
    return ConjugationMatrix(float(theta), float(phi), rows)


def momentum_eigenvalues(theta, phi, k_mag, k_initial=None):
    """Eigenvalue of p_i on the transported state, component by component.

    k sin(theta)(delta_1i cos(phi) + delta_2i sin(phi)) - k (1 - cos(theta)) delta_3i + k_i(0),
    with k(0) = (0, 0, k) in the working frame. Vectorized over angle arrays.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    k0 = np.array([0.0, 0.0, k_mag]) if k_initial is None else np.asarray(k_initial, dtype=float)
    out = np.empty(theta.shape + (3,))
    out[..., 0] = k_mag * np.sin(theta) * np.cos(phi) + k0[0]
    out[..., 1] = k_mag * np.sin(theta) * np.sin(phi) + k0[1]
    out[..., 2] = -k_mag * 2.0 * np.sin(0.5 * theta) ** 2 + k0[2]
    return out


def working_frame_view(track):
    """Wave vectors and pointwise angles re-expressed in the working frame.

    Tracks sampled in the path frame are rotated so that k_hat(0) = z_hat.
    Angles are computed sample by sample (no azimuth continuation is needed
    because the eigenvalue vector is single-valued at the poles).
    """
    if track.pole_start:
        k = track.k
    else:
        k = track.k @ working_frame(track.k[0]).T
    u = k / track.k_mag
    theta = np.arctan2(np.hypot(u[:, 0], u[:, 1]), u[:, 2])
    phi = np.arctan2(u[:, 1], u[:, 0])
    return k, theta, phi


def momentum_defect(track):
    """Max over nodes of |eigenvalue vector - k(t)| / k."""
    k, theta, phi = working_frame_view(track)
    eig = momentum_eigenvalues(theta, phi, track.k_mag)
    return float(np.max(np.linalg.norm(eig - k, axis=-1)) / track.k_mag)


def helicity(rep, k_hat, tol=1e-10):
    """I = k_hat . J; ``k_hat`` may be stacked with shape (..., 3)."""
    k_hat = np.asarray(k_hat, dtype=float)
    if np.any(np.abs(np.linalg.norm(k_hat, axis=-1) - 1.0) > tol):
        raise ValidationError("direction must be a unit vector", field="k_hat")
    return rep.dot(k_hat)


def lvn_residual(track, rep):
    """|dI/dt - i[I, H]|_max at interior nodes, NaN at the two end nodes.

    dI/dt is a central difference over the neighbouring doubled-grid samples
    t_n +- dt/2.
    """
    fine_i = rep.dot(track.fine_k / track.k_mag)
    h_f = track.fine_times[1] - track.fine_times[0]
    d_i = (fine_i[3:-1:2] - fine_i[1:-3:2]) / (2.0 * h_f)
    i_n = fine_i[2:-2:2]
    h_n = hamiltonian_at(track.fine_omega[2:-2:2], rep)
    comm = i_n @ h_n - h_n @ i_n
    out = np.full(track.times.size, np.nan)
    out[1:-1] = np.max(np.abs(d_i - 1j * comm), axis=(-2, -1))
    return out


def helicity_populations(track, rep, states):
    """|<m'| V(t)^dagger |psi(t)>|^2: populations in the instantaneous helicity eigenbasis."""
    basis = helicity_basis(track, rep)
    amps = np.einsum("nji,nj->ni", basis.conj(), states)
    return np.abs(amps) ** 2


def eigen_defect(track, rep, states, m):
    """Max over nodes of |I(t) psi - m psi| for states that should be helicity-m eigenstates."""
    ops = rep.dot(track.k_hat)
    resid = np.einsum("nij,nj->ni", ops, states) - float(m) * states
    return float(np.max(np.linalg.norm(resid, axis=-1)))


def adjoint_defect(theta, phi, rep):
    """max |V^dagger J_i V - sum_j M_ij J_j| for the closed-form conjugation matrix."""
    v = rotation_operator(theta, phi, rep)
    lhs = np.einsum("ji,ajk,kl->ail", v.conj(), rep.J, v)
    rhs = np.einsum("ab,bij->aij", conjugation_matrix(theta, phi).M, rep.J)
    return float(np.max(np.abs(lhs - rhs)))
