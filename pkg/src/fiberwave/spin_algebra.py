"""Spin-j angular momentum matrices, unitary exponentials and the SU(2) -> SO(3) map.

Conventions
-----------
* hbar = 1.
* The basis is ordered by descending magnetic number, m = j, j-1, ..., -j, so
  |m> is the unit coordinate vector at index ``j - m``.
* ``J[0], J[1], J[2]`` are J1, J2, J3 and obey [J_a, J_b] = i eps_abc J_c.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ValidationError

SKEW_TOL = 1e-12
AXIS_TOL = 1e-12

# eps[a, b, c]
LEVI_CIVITA = np.zeros((3, 3, 3))
LEVI_CIVITA[0, 1, 2] = LEVI_CIVITA[1, 2, 0] = LEVI_CIVITA[2, 0, 1] = 1.0
LEVI_CIVITA[0, 2, 1] = LEVI_CIVITA[2, 1, 0] = LEVI_CIVITA[1, 0, 2] = -1.0


def parse_spin(j):
    """Return ``j`` as a Fraction with 2j a positive integer.

    Accepts ints, floats, Fractions and strings such as ``"3/2"`` or ``"1.5"``.
    """
    try:
        if isinstance(j, str):
            value = Fraction(j.strip())
        elif isinstance(j, bool):
            raise TypeError
        else:
            value = Fraction(j).limit_denominator(1000)
    except (TypeError, ValueError, ZeroDivisionError):
        raise ValidationError(f"not a number: {j!r}", field="j") from None
    if isinstance(j, float) and abs(float(value) - j) > 1e-12:
        raise ValidationError(f"must be a positive half-integer, got {j!r}", field="j")
    if value <= 0 or (2 * value).denominator != 1:
        raise ValidationError(f"must be a positive half-integer, got {j}", field="j")
    return value


def parse_magnetic(m, j):
    """Return ``m`` as a Fraction, checking |m| <= j and that j - m is an integer."""
    try:
        value = Fraction(m.strip()) if isinstance(m, str) else Fraction(m).limit_denominator(1000)
    except (TypeError, ValueError, ZeroDivisionError):
        raise ValidationError(f"not a number: {m!r}", field="m") from None
    if abs(value) > j or (j - value).denominator != 1:
        raise ValidationError(f"must be one of j, j-1, ..., -j for j={j}, got {m}", field="m")
    return value


@dataclass(frozen=True, eq=False)
class SpinRepresentation:
    """The (2j+1)-dimensional irreducible representation of su(2)."""

    j: Fraction
    J: np.ndarray = field(repr=False)  # (3, dim, dim): J1, J2, J3
    Jplus: np.ndarray = field(repr=False)
    Jminus: np.ndarray = field(repr=False)

    @property
    def dim(self):
        return int(2 * self.j) + 1

    @property
    def J1(self):
        return self.J[0]

    @property
    def J2(self):
        return self.J[1]

    @property
    def J3(self):
        return self.J[2]

    @property
    def m_values(self):
        """Magnetic numbers in basis order, j down to -j."""
        return float(self.j) - np.arange(self.dim)

    def index(self, m):
        """Basis index of |m>."""
        m = parse_magnetic(m, self.j)
        return int(self.j - m)

    def basis_state(self, m):
        vec = np.zeros(self.dim, dtype=complex)
        vec[self.index(m)] = 1.0
        return vec

    def dot(self, vec):
        """Return sum_a vec[a] J_a; ``vec`` may be stacked with shape (..., 3)."""
        return np.einsum("...a,aij->...ij", np.asarray(vec, dtype=float), self.J)

    def identity(self):
        return np.eye(self.dim, dtype=complex)


def make_spin_rep(j):
    """Build J1, J2, J3 and J+- for spin ``j``.

    The raising operator has <m+1|J+|m> = sqrt(j(j+1) - m(m+1)) on the first
    superdiagonal (descending-m ordering).
    """
    j = parse_spin(j)
    jf = float(j)
    m = jf - np.arange(int(2 * j) + 1)
    lower = m[1:]
    jplus = np.diag(np.sqrt(jf * (jf + 1.0) - lower * (lower + 1.0)), k=1).astype(complex)
    jminus = jplus.conj().T.copy()
    J = np.empty((3,) + jplus.shape, dtype=complex)
    J[0] = 0.5 * (jplus + jminus)
    J[1] = -0.5j * (jplus - jminus)
    J[2] = np.diag(m).astype(complex)
    for arr in (J, jplus, jminus):
        arr.flags.writeable = False
    return SpinRepresentation(j=j, J=J, Jplus=jplus, Jminus=jminus)


def commutator(a, b):
    return a @ b - b @ a


def _check_square(a):
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValidationError(f"expected square matrices, got shape {a.shape}")


def expm_hermitian(h, dt=1.0):
    """exp(-i dt h) for Hermitian ``h`` (stacked along leading axes).

    Spectral route: U = W diag(exp(-i dt lambda)) W^dagger with h = W diag(lambda) W^dagger.
    """
    h = np.asarray(h, dtype=complex)
    _check_square(h)
    w, v = np.linalg.eigh(h)
    phases = np.exp(-1j * np.asarray(dt, dtype=float)[..., None] * w)
    return (v * phases[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))


def expm_skew(a, tol=SKEW_TOL):
    """Exponential of a skew-Hermitian matrix (or a stack of them).

    Parameters
    ----------
    a : array_like, shape (..., n, n)
        Must satisfy ``a^dagger = -a`` to within ``tol`` (max-abs entry).

    Returns
    -------
    ndarray
        The unitary ``exp(a)``.
    """
    a = np.asarray(a, dtype=complex)
    _check_square(a)
    defect = np.max(np.abs(a + np.conj(np.swapaxes(a, -1, -2))), initial=0.0)
    if defect > tol:
        raise ValidationError(f"matrix is not skew-Hermitian (max |A + A^dagger| = {defect:.3e})")
    # a = -i h with h = i a Hermitian; symmetrize to drop the rounding part
    h = 1j * a
    h = 0.5 * (h + np.conj(np.swapaxes(h, -1, -2)))
    return expm_hermitian(h)


def skew3(v):
    """Cross-product matrix [v]x with [v]x @ w = v x w."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def su2_to_so3(axis, angle, tol=AXIS_TOL):
    """Rodrigues rotation matrix I + sin(a)[n]x + (1 - cos(a))[n]x^2.

    ``axis`` must be a unit vector. This is the image of exp(-i angle n.J)
    under the adjoint action: U^dagger J_a U = sum_b R[a, b] J_b.
    """
    axis = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(axis)
    if norm == 0.0:
        raise ValidationError("rotation axis is the zero vector", field="axis")
    if abs(norm - 1.0) > tol:
        raise ValidationError(f"rotation axis must be a unit vector, |axis| = {norm!r}", field="axis")
    k = skew3(axis)
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


def rotation_unitary(rep, axis, angle):
    """exp(-i angle axis.J) in the representation ``rep``."""
    return expm_hermitian(rep.dot(axis), angle)
