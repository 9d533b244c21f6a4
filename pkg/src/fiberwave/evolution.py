"""Numerical propagation of i d(psi)/dt = (omega(t) . J) psi along a track.

Each step applies the rotation exp(-i dt omega(t_mid) . J), with omega taken
at the exact step midpoint from the track's doubled grid. The composition is
the exponential midpoint rule: unitary by construction, second order.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .spin_algebra import expm_hermitian

NORM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Unit-norm amplitudes over the J3 basis (m = j, ..., -j)."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"state must have unit norm, got {norm!r}", field="amplitudes")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self):
        return self.amplitudes.size

    @classmethod
    def normalized(cls, amplitudes):
        amps = np.asarray(amplitudes, dtype=complex)
        return cls(amps / np.linalg.norm(amps))


@dataclass(frozen=True, eq=False)
class EvolutionReport:
    """Per-node time series of one propagation.

    ``fidelities`` is filled in when a reference solution was supplied;
    residual arrays hold NaN at the two end nodes.
    """

    times: np.ndarray
    states: np.ndarray = field(repr=False)
    norms: np.ndarray = field(repr=False)
    helicity: np.ndarray = field(repr=False)
    energy: np.ndarray = field(repr=False)
    schrodinger_residuals: np.ndarray = field(repr=False)
    fidelities: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        n = self.times.size
        for name in ("states", "norms", "helicity", "energy", "schrodinger_residuals", "fidelities"):
            arr = getattr(self, name)
            if arr is not None and arr.shape[0] != n:
                raise ValueError(f"{name} has {arr.shape[0]} rows, expected {n}")

    def with_fidelities(self, reference_states):
        return EvolutionReport(
            self.times, self.states, self.norms, self.helicity, self.energy,
            self.schrodinger_residuals, fidelity(reference_states, self.states),
        )


def hamiltonian_at(omega, rep):
    """H = omega_1 J1 + omega_2 J2 + omega_3 J3 (stacked over leading axes of omega)."""
    return rep.dot(omega)


def expectation(states, operators):
    """<psi_n| O_n |psi_n> for stacked states (n, d) and operators (n, d, d) or (d, d)."""
    ops = np.broadcast_to(operators, (states.shape[0],) + operators.shape[-2:])
    return np.einsum("ni,nij,nj->n", states.conj(), ops, states)


def fidelity(a, b):
    """|<a|b>| / (|a| |b|), row-wise."""
    overlap = np.abs(np.einsum("ni,ni->n", np.conj(a), b))
    return overlap / (np.linalg.norm(a, axis=-1) * np.linalg.norm(b, axis=-1))


def step_unitaries(track, rep):
    """exp(-i dt omega_mid . J) for every step of the track, shape (steps, d, d)."""
    return expm_hermitian(hamiltonian_at(track.omega_mid, rep), track.dt)


def _as_amplitudes(psi0, rep):
    amps = psi0.amplitudes if isinstance(psi0, QuantumState) else QuantumState(psi0).amplitudes
    if amps.size != rep.dim:
        raise ValidationError(f"state has dimension {amps.size}, representation has {rep.dim}", field="psi0")
    return amps


def propagate(track, rep, psi0):
    """Integrate the Schrodinger equation along ``track`` starting from ``psi0``.

    Returns an EvolutionReport with the state at every node plus norm,
    helicity <k_hat . J>, energy <H> and the discrete Schrodinger residual.
    """
    if track.times.size < 2:
        raise ValidationError("track needs at least two nodes", field="track")
    amps = _as_amplitudes(psi0, rep)
    unitaries = step_unitaries(track, rep)
    states = np.empty((track.times.size, rep.dim), dtype=complex)
    states[0] = amps
    for n, u in enumerate(unitaries):
        states[n + 1] = u @ states[n]
    return _report(track, rep, states)


def _report(track, rep, states):
    norms = np.linalg.norm(states, axis=-1)
    helicity = expectation(states, rep.dot(track.k_hat)).real
    energy = expectation(states, hamiltonian_at(track.omega, rep)).real
    return EvolutionReport(
        times=track.times,
        states=states,
        norms=norms,
        helicity=helicity,
        energy=energy,
        schrodinger_residuals=schrodinger_residual(states, track, rep),
    )


def schrodinger_residual(states, track, rep):
    """|i (psi_{n+1} - psi_{n-1}) / (2 dt) - H(t_n) psi_n| at interior nodes, NaN at the ends.

    ``states`` may be an EvolutionReport or an (n, d) array of node states.
    """
    if isinstance(states, EvolutionReport):
        states = states.states
    states = np.asarray(states)
    if states.shape[0] < 3:
        raise ValidationError("need at least three nodes", field="states")
    out = np.full(states.shape[0], np.nan)
    h = hamiltonian_at(track.omega[1:-1], rep)
    lhs = 1j * (states[2:] - states[:-2]) / (2.0 * track.dt)
    rhs = np.einsum("nij,nj->ni", h, states[1:-1])
    out[1:-1] = np.linalg.norm(lhs - rhs, axis=-1)
    return out


def propagate_rk4(track, rep, psi0, renormalize=True):
    """Reference integrator: classical RK4 on the same node grid.

    H at the stage times t_n, t_n + dt/2 and t_n + dt comes straight from the
    doubled grid. Used only to cross-check ``propagate``.
    """
    amps = _as_amplitudes(psi0, rep)
    h = hamiltonian_at(track.fine_omega, rep)
    dt = track.dt
    states = np.empty((track.times.size, rep.dim), dtype=complex)
    states[0] = psi = amps
    for n in range(track.steps):
        h0, hm, h1 = h[2 * n], h[2 * n + 1], h[2 * n + 2]
        k1 = -1j * (h0 @ psi)
        k2 = -1j * (hm @ (psi + 0.5 * dt * k1))
        k3 = -1j * (hm @ (psi + 0.5 * dt * k2))
        k4 = -1j * (h1 @ (psi + dt * k3))
        psi = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if renormalize:
            psi = psi / np.linalg.norm(psi)
        states[n + 1] = psi
    return _report(track, rep, states)
