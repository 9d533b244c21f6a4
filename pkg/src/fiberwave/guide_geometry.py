"""Guide paths and the wave-vector track they induce.

A guide path is traversed at constant speed and the wave vector is always
``k_mag`` times the unit tangent. Everything downstream depends only on the
direction k_hat(t); the speed merely sets the time scale.

Tracks are sampled on a doubled grid (``2 * steps + 1`` points) so that the
propagator can use midpoint values without interpolating. Node quantities
are the even samples, midpoints the odd ones.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .errors import DegenerateTangentError, DomainError, PolePassageError, ValidationError
from .spin_algebra import su2_to_so3

EPS_POLE = 1e-8
DEGENERATE_SPEED = 1e-12
_PARALLEL_TOL = 1e-14
_ZHAT = np.array([0.0, 0.0, 1.0])


def _times(t):
    return np.atleast_1d(np.asarray(t, dtype=float))


def _positive(value, name):
    value = float(value)
    if not np.isfinite(value) or value <= 0.0:
        raise ValidationError(f"must be a positive number, got {value!r}", field=name)
    return value


class GuidePath:
    """Constant-speed parametrized curve r(t), t in [0, duration].

    Subclasses implement ``position`` and ``velocity``; ``tangent_rate``
    (dT/dt of the unit tangent) is optional and returns None when the kind has
    no closed form, in which case tracks fall back to central differences.
    """

    kind = "abstract"
    speed = 1.0

    @property
    def duration(self):
        return np.inf

    def position(self, t):
        raise NotImplementedError

    def velocity(self, t):
        raise NotImplementedError

    def tangent(self, t):
        t = _times(t)
        vel = self.velocity(t)
        norm = np.linalg.norm(vel, axis=-1)
        bad = np.flatnonzero(norm < DEGENERATE_SPEED)
        if bad.size:
            raise DegenerateTangentError(t[bad[0]], norm[bad[0]])
        return vel / norm[:, None]

    def tangent_rate(self, t):
        return None

    def arc_length(self, t_end=None):
        """Arc length by adaptive quadrature of |dr/dt|."""
        t_end = self.duration if t_end is None else t_end
        value, _ = integrate.quad(
            lambda s: float(np.linalg.norm(self.velocity(s)[0])), 0.0, t_end, limit=500
        )
        return value

    def _check_domain(self, t):
        t = _times(t)
        if np.any(t < -1e-12 * max(1.0, self.duration if np.isfinite(self.duration) else 1.0)):
            raise DomainError(f"{self.kind}: negative time {t.min()!r}")
        if np.any(t > self.duration * (1.0 + 1e-12)):
            raise DomainError(f"{self.kind}: t={t.max()!r} exceeds path duration {self.duration!r}")
        return t


@dataclass(frozen=True)
class Straight(GuidePath):
    direction: tuple = (0.0, 0.0, 1.0)
    speed: float = 1.0
    length: float = None
    kind = "straight"

    def __post_init__(self):
        _positive(self.speed, "speed")
        if self.length is not None:
            _positive(self.length, "length")
        d = np.asarray(self.direction, dtype=float)
        if d.shape != (3,) or np.linalg.norm(d) == 0.0:
            raise ValidationError("must be a nonzero 3-vector", field="direction")
        object.__setattr__(self, "direction", tuple(d / np.linalg.norm(d)))

    @property
    def duration(self):
        return np.inf if self.length is None else self.length / self.speed

    def position(self, t):
        t = self._check_domain(t)
        return self.speed * t[:, None] * np.asarray(self.direction)

    def velocity(self, t):
        t = self._check_domain(t)
        return np.tile(self.speed * np.asarray(self.direction), (t.size, 1))

    def tangent_rate(self, t):
        return np.zeros((_times(t).size, 3))


@dataclass(frozen=True)
class CircularArc(GuidePath):
    """Circle of ``radius`` in the xy-plane, counterclockwise from (radius, 0, 0)."""

    radius: float = 1.0
    speed: float = 1.0
    turns: float = None
    kind = "circular_arc"

    def __post_init__(self):
        _positive(self.radius, "radius")
        _positive(self.speed, "speed")
        if self.turns is not None:
            _positive(self.turns, "turns")

    @property
    def rate(self):
        return self.speed / self.radius

    @property
    def duration(self):
        if self.turns is None:
            return np.inf
        return 2.0 * np.pi * self.turns / self.rate

    def position(self, t):
        a = self.rate * self._check_domain(t)
        return self.radius * np.stack([np.cos(a), np.sin(a), np.zeros_like(a)], axis=-1)

    def velocity(self, t):
        a = self.rate * self._check_domain(t)
        return self.speed * np.stack([-np.sin(a), np.cos(a), np.zeros_like(a)], axis=-1)

    def tangent_rate(self, t):
        a = self.rate * self._check_domain(t)
        return -self.rate * np.stack([np.cos(a), np.sin(a), np.zeros_like(a)], axis=-1)


@dataclass(frozen=True)
class Helix(GuidePath):
    """Helix about the z axis; ``pitch`` is the axial advance per turn (may be negative).

    The tangent keeps a fixed polar angle (the cone angle) with respect to z.
    """

    radius: float = 1.0
    pitch: float = 1.0
    speed: float = 1.0
    turns: float = None
    kind = "helix"

    def __post_init__(self):
        _positive(self.radius, "radius")
        _positive(self.speed, "speed")
        if not np.isfinite(self.pitch):
            raise ValidationError("must be finite", field="pitch")
        if self.turns is not None:
            _positive(self.turns, "turns")

    @classmethod
    def from_cone_angle(cls, cone_angle, radius=1.0, speed=1.0, turns=None):
        """Helix whose tangent makes ``cone_angle`` (0 < angle <= pi/2) with +z."""
        if not 0.0 < cone_angle <= np.pi / 2:
            raise ValidationError(f"must lie in (0, pi/2], got {cone_angle!r}", field="cone_angle")
        pitch = 2.0 * np.pi * radius / np.tan(cone_angle)
        return cls(radius=radius, pitch=pitch, speed=speed, turns=turns)

    @property
    def _lift(self):
        return self.pitch / (2.0 * np.pi)

    @property
    def _rho(self):
        return np.hypot(self.radius, self._lift)

    @property
    def cone_angle(self):
        return float(np.arctan2(self.radius, self._lift))

    @property
    def rate(self):
        """Azimuthal rate of the tangent about z."""
        return self.speed / self._rho

    @property
    def duration(self):
        if self.turns is None:
            return np.inf
        return 2.0 * np.pi * self.turns / self.rate

    def position(self, t):
        a = self.rate * self._check_domain(t)
        return np.stack([self.radius * np.cos(a), self.radius * np.sin(a), self._lift * a], axis=-1)

    def velocity(self, t):
        a = self.rate * self._check_domain(t)
        return self.rate * np.stack(
            [-self.radius * np.sin(a), self.radius * np.cos(a), np.full_like(a, self._lift)], axis=-1
        )

    def tangent_rate(self, t):
        a = self.rate * self._check_domain(t)
        scale = self.rate * self.radius / self._rho
        return -scale * np.stack([np.cos(a), np.sin(a), np.zeros_like(a)], axis=-1)


def _spiral_arc(u, c):
    # arc length of r = c*u from u = 0, as a function of u
    return 0.5 * c * (u * np.sqrt(1.0 + u * u) + np.arcsinh(u))


@dataclass(frozen=True)
class ArchimedeanSpiral(GuidePath):
    """Planar spiral r = inner_radius + spacing * angle / (2 pi), traversed outward.

    ``spacing`` is the radial growth per turn. The curve is reparametrized by
    arc length so that it is traversed at constant ``speed``.
    """

    inner_radius: float = 1.0
    spacing: float = 1.0
    turns: float = 2.25
    speed: float = 1.0
    kind = "archimedean_spiral"

    def __post_init__(self):
        if not np.isfinite(self.inner_radius) or self.inner_radius < 0.0:
            raise ValidationError(f"must be >= 0, got {self.inner_radius!r}", field="inner_radius")
        _positive(self.spacing, "spacing")
        _positive(self.turns, "turns")
        _positive(self.speed, "speed")

    @classmethod
    def from_arc_length(cls, arc_length, turns, inner_radius=1.0, speed=1.0):
        """Solve for the spacing that gives the requested total arc length (bisection)."""
        arc_length = _positive(arc_length, "arc_length")
        turns = _positive(turns, "turns")
        floor = 2.0 * np.pi * inner_radius * turns
        if arc_length <= floor:
            raise ValidationError(
                f"{arc_length!r} is not longer than the {turns!r}-turn circle at inner radius "
                f"{inner_radius!r} ({floor!r})",
                field="arc_length",
            )

        def excess(spacing):
            return cls(inner_radius, spacing, turns, speed).duration * speed - arc_length

        lo, hi = 1e-9 * arc_length, 1.0
        while excess(hi) < 0.0:
            hi *= 2.0
        spacing = optimize.bisect(excess, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
        return cls(inner_radius=inner_radius, spacing=spacing, turns=turns, speed=speed)

    @property
    def _c(self):
        return self.spacing / (2.0 * np.pi)

    @property
    def _u0(self):
        return self.inner_radius / self._c

    @property
    def total_angle(self):
        return 2.0 * np.pi * self.turns

    @property
    def length(self):
        c, u0 = self._c, self._u0
        return float(_spiral_arc(u0 + self.total_angle, c) - _spiral_arc(u0, c))

    @property
    def duration(self):
        return self.length / self.speed

    def _u_of_t(self, t):
        # invert s(u) by Newton; s is convex and increasing so this is monotone
        c, u0 = self._c, self._u0
        target = self.speed * t + _spiral_arc(u0, c)
        u_hi = u0 + self.total_angle
        u = u0 + (t / self.duration) * self.total_angle if self.duration > 0 else np.full_like(t, u0)
        for _ in range(100):
            step = (_spiral_arc(u, c) - target) / (c * np.sqrt(1.0 + u * u))
            u = np.clip(u - step, u0, u_hi)
            if np.max(np.abs(step), initial=0.0) <= 1e-15 * max(1.0, u_hi):
                break
        return u

    def polar_angle(self, t):
        """Polar angle of the position, measured from the start of the spiral."""
        return self._u_of_t(self._check_domain(t)) - self._u0

    def position(self, t):
        u = self._u_of_t(self._check_domain(t))
        a = u - self._u0
        r = self._c * u
        return np.stack([r * np.cos(a), r * np.sin(a), np.zeros_like(a)], axis=-1)

    def tangent_angle(self, t):
        u = self._u_of_t(self._check_domain(t))
        return (u - self._u0) + np.arctan(u)

    def curvature(self, t):
        u = self._u_of_t(self._check_domain(t))
        return (u * u + 2.0) / (self._c * (1.0 + u * u) ** 1.5)

    def velocity(self, t):
        psi = self.tangent_angle(t)
        return self.speed * np.stack([np.cos(psi), np.sin(psi), np.zeros_like(psi)], axis=-1)

    def tangent_rate(self, t):
        psi = self.tangent_angle(t)
        rate = self.speed * self.curvature(t)
        return rate[:, None] * np.stack([-np.sin(psi), np.cos(psi), np.zeros_like(psi)], axis=-1)

    def arc_length(self, t_end=None):
        """Arc length by quadrature over the polar parametrization |dr/d(angle)|."""
        angle = self.total_angle if t_end is None else float(self.polar_angle(t_end)[0])
        c, r0 = self._c, self.inner_radius
        value, _ = integrate.quad(lambda a: np.hypot(r0 + c * a, c), 0.0, angle, limit=500)
        return value


def align_rotation(a, b):
    """Minimal rotation taking unit vector ``a`` onto unit vector ``b``."""
    a = np.asarray(a, dtype=float) / np.linalg.norm(a)
    b = np.asarray(b, dtype=float) / np.linalg.norm(b)
    cross = np.cross(a, b)
    s, c = np.linalg.norm(cross), float(np.dot(a, b))
    if s < _PARALLEL_TOL:
        if c > 0.0:
            return np.eye(3)
        perp = np.cross(a, [1.0, 0.0, 0.0])
        if np.linalg.norm(perp) < 0.5:
            perp = np.cross(a, [0.0, 1.0, 0.0])
        return su2_to_so3(perp / np.linalg.norm(perp), np.pi)
    return su2_to_so3(cross / s, np.arctan2(s, c))


@dataclass(frozen=True)
class Composite(GuidePath):
    """Finite segments joined end to start with matching tangents.

    Each segment after the first is rigidly rotated (minimal rotation) so
    that its initial tangent equals the previous segment's final tangent,
    then translated onto the previous end point. All segments must share one
    speed.
    """

    segments: tuple = ()
    kind = "composite"
    _placement: tuple = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.segments:
            raise ValidationError("needs at least one segment", field="segments")
        speeds = {float(s.speed) for s in self.segments}
        if len(speeds) != 1:
            raise ValidationError(f"segments must share one speed, got {sorted(speeds)}", field="segments")
        placement = []
        rot, offset, start = np.eye(3), np.zeros(3), 0.0
        for i, seg in enumerate(self.segments):
            if not np.isfinite(seg.duration):
                raise ValidationError(f"segment {i} ({seg.kind}) has no finite length", field="segments")
            if i > 0:
                prev_rot, prev_off, prev_start, prev = placement[-1]
                end_t = prev.duration
                end_tangent = prev_rot @ prev.tangent(end_t)[0]
                end_point = prev_rot @ prev.position(end_t)[0] + prev_off
                rot = align_rotation(seg.tangent(0.0)[0], end_tangent)
                offset = end_point - rot @ seg.position(0.0)[0]
            placement.append((rot, offset, start, seg))
            start += seg.duration
        object.__setattr__(self, "_placement", tuple(placement))

    @property
    def speed(self):
        return float(self.segments[0].speed)

    @property
    def duration(self):
        return sum(s.duration for s in self.segments)

    def _dispatch(self, t, method, affine):
        t = self._check_domain(t)
        starts = np.array([p[2] for p in self._placement])
        which = np.clip(np.searchsorted(starts, t, side="right") - 1, 0, len(starts) - 1)
        out = np.empty((t.size, 3))
        for i, (rot, offset, start, seg) in enumerate(self._placement):
            mask = which == i
            if not np.any(mask):
                continue
            local = np.clip(t[mask] - start, 0.0, seg.duration)
            values = getattr(seg, method)(local)
            if values is None:
                return None
            out[mask] = values @ rot.T + (offset if affine else 0.0)
        return out

    def position(self, t):
        return self._dispatch(t, "position", affine=True)

    def velocity(self, t):
        return self._dispatch(t, "velocity", affine=False)

    def tangent_rate(self, t):
        return self._dispatch(t, "tangent_rate", affine=False)


@dataclass(frozen=True)
class FunctionPath(GuidePath):
    """Path given by an arbitrary callable r(t); derivatives by central differences.

    The callable must accept an array of times and return an (n, 3) array.
    Constant speed is the caller's responsibility.
    """

    func: object = None
    t_max: float = np.inf
    speed: float = 1.0
    h: float = 1e-6
    kind = "function"

    @property
    def duration(self):
        return self.t_max

    def position(self, t):
        return np.asarray(self.func(self._check_domain(t)), dtype=float)

    def velocity(self, t):
        t = self._check_domain(t)
        return (np.asarray(self.func(t + self.h)) - np.asarray(self.func(t - self.h))) / (2.0 * self.h)


def working_frame(k0):
    """Rotation R with R @ k0_hat = z_hat.

    Rotates about k0_hat x z_hat by the angle between them; identity when
    k0_hat = z_hat and a half turn about x when k0_hat = -z_hat.
    """
    k0 = np.asarray(k0, dtype=float)
    norm = np.linalg.norm(k0)
    if norm == 0.0:
        raise ValidationError("initial wave vector is zero", field="k0")
    u = k0 / norm
    cross = np.cross(u, _ZHAT)
    s, c = np.linalg.norm(cross), u[2]
    if s < _PARALLEL_TOL:
        if c > 0.0:
            return np.eye(3)
        return su2_to_so3([1.0, 0.0, 0.0], np.pi)
    return su2_to_so3(cross / s, np.arctan2(s, c))


def angular_velocity(k, kdot):
    """(k x kdot) / |k|^2, row-wise for stacked input."""
    k = np.asarray(k, dtype=float)
    kdot = np.asarray(kdot, dtype=float)
    k2 = np.sum(k * k, axis=-1)
    if np.any(k2 == 0.0):
        raise ValidationError("wave vector has zero length", field="k")
    return np.cross(k, kdot) / np.asarray(k2)[..., None]


def _arc_pole_approach(a, b):
    """sin(theta) at the closest approach of each great-circle arc a->b to either pole.

    Returns +inf where the closest point of the full great circle lies outside
    the arc (the endpoints then bound the approach).
    """
    n = np.cross(a, b)
    nn = np.linalg.norm(n, axis=-1)
    out = np.full(a.shape[0], np.inf)
    ok = nn > 0.0
    n_hat = n[ok] / nn[ok, None]
    nz = n_hat[:, 2]
    p = _ZHAT - nz[:, None] * n_hat
    pn = np.linalg.norm(p, axis=-1)
    good = pn > 0.0
    p_hat = np.zeros_like(p)
    p_hat[good] = p[good] / pn[good, None]
    aa, bb = a[ok], b[ok]
    for sign in (1.0, -1.0):
        q = sign * p_hat
        inside = (
            good
            & (np.einsum("ij,ij->i", np.cross(aa, q), n_hat) >= 0.0)
            & (np.einsum("ij,ij->i", np.cross(q, bb), n_hat) >= 0.0)
        )
        vals = np.where(inside, np.abs(nz), np.inf)
        out[ok] = np.minimum(out[ok], vals)
    return out


def spherical_angles(unit_vectors, times=None, eps_pole=EPS_POLE, require_pole_start=True):
    """Polar and unwrapped azimuthal angles of a sequence of unit vectors.

    Parameters
    ----------
    unit_vectors : (n, 3) array
    times : (n,) array, optional
        Only used to label a pole-passage error.
    eps_pole : float
        Samples with sin(theta) <= eps_pole have no usable azimuth.
    require_pole_start : bool
        Demand that the first vector is z_hat (working-frame convention).

    Returns
    -------
    theta, phi : (n,) arrays
        theta in [0, pi]; phi continued along the nearest branch. Leading
        and trailing polar samples inherit the azimuth of the nearest
        off-pole sample; all-polar input gives phi = 0.

    Raises
    ------
    PolePassageError
        If the sequence touches a pole (at a sample or between two samples)
        after leaving the initial pole and before its final arrival.
    """
    u = np.asarray(unit_vectors, dtype=float)
    times = np.arange(u.shape[0], dtype=float) if times is None else np.asarray(times, dtype=float)
    if require_pole_start and np.max(np.abs(u[0] - _ZHAT)) > 1e-10:
        raise ValidationError(f"first direction must be z_hat, got {u[0].tolist()}", field="unit_vectors")
    s = np.hypot(u[:, 0], u[:, 1])
    theta = np.arctan2(s, u[:, 2])
    phi = np.zeros_like(theta)
    valid = np.flatnonzero(s > eps_pole)
    if valid.size == 0:
        return theta, phi
    first, last = valid[0], valid[-1]
    gaps = np.flatnonzero(s[first:last + 1] <= eps_pole)
    if gaps.size:
        idx = first + gaps[0]
        raise PolePassageError(times[idx], s[idx])
    approach = _arc_pole_approach(u[first:last], u[first + 1:last + 1])
    hits = np.flatnonzero(approach <= eps_pole)
    if hits.size:
        idx = first + hits[0]
        raise PolePassageError(0.5 * (times[idx] + times[idx + 1]), approach[hits[0]])
    raw = np.arctan2(u[first:last + 1, 1], u[first:last + 1, 0])
    phi[first:last + 1] = np.unwrap(raw)
    phi[:first] = phi[first]
    phi[last + 1:] = phi[last]
    return theta, phi


@dataclass(frozen=True, eq=False)
class WaveVectorTrack:
    """Wave vector, its rate, the rotation field and spherical angles on a doubled grid.

    ``fine_*`` arrays have ``2 * steps + 1`` rows; index ``2n`` is node n and
    ``2n + 1`` the midpoint between nodes n and n + 1. All vectors are
    expressed in ``frame`` coordinates (``frame @ path_vector``).
    """

    k_mag: float
    fine_times: np.ndarray = field(repr=False)
    fine_k: np.ndarray = field(repr=False)
    fine_kdot: np.ndarray = field(repr=False)
    fine_omega: np.ndarray = field(repr=False)
    fine_theta: np.ndarray = field(repr=False)
    fine_phi: np.ndarray = field(repr=False)
    frame: np.ndarray = field(repr=False)
    pole_start: bool = True
    path: GuidePath = field(default=None, repr=False)

    @property
    def steps(self):
        return (self.fine_times.size - 1) // 2

    @property
    def dt(self):
        return float(self.fine_times[2] - self.fine_times[0])

    @property
    def times(self):
        return self.fine_times[::2]

    @property
    def k(self):
        return self.fine_k[::2]

    @property
    def kdot(self):
        return self.fine_kdot[::2]

    @property
    def omega(self):
        return self.fine_omega[::2]

    @property
    def theta(self):
        return self.fine_theta[::2]

    @property
    def phi(self):
        return self.fine_phi[::2]

    @property
    def k_hat(self):
        return self.k / self.k_mag

    @property
    def mid_times(self):
        return self.fine_times[1::2]

    @property
    def omega_mid(self):
        return self.fine_omega[1::2]

    @property
    def turning_rate(self):
        """Largest |omega| over the track, the characteristic turning rate."""
        return float(np.max(np.linalg.norm(self.fine_omega, axis=-1)))

    def invariant_defects(self):
        """Measured violation of each track invariant (all should be ~0)."""
        k_norm = np.linalg.norm(self.fine_k, axis=-1)
        u = self.fine_k / self.k_mag
        st, ct = np.sin(self.fine_theta), np.cos(self.fine_theta)
        recon = np.stack([st * np.cos(self.fine_phi), st * np.sin(self.fine_phi), ct], axis=-1)
        omega_scale = max(self.turning_rate, np.finfo(float).tiny)
        dphi = np.abs(np.diff(self.fine_phi))
        off_pole = (st[:-1] > EPS_POLE) & (st[1:] > EPS_POLE)
        return {
            "k_magnitude": float(np.max(np.abs(k_norm / self.k_mag - 1.0))),
            "omega_dot_k": float(np.max(np.abs(np.einsum("ij,ij->i", self.fine_omega, u))) / omega_scale),
            "theta_start": float(self.fine_theta[0]) if self.pole_start else 0.0,
            "reconstruction": float(np.max(np.abs(recon - u))),
            "phi_jump": float(np.max(dphi[off_pole], initial=0.0)),
        }


def sample_track(
    path,
    k_mag=1.0,
    t_end=None,
    steps=1000,
    frame="working",
    derivatives="auto",
    eps_pole=EPS_POLE,
):
    """Sample the wave-vector track of ``path`` on ``steps`` uniform intervals.

    Parameters
    ----------
    path : GuidePath
    k_mag : float
        Wave number |k|; dynamics depend on the direction only.
    t_end : float, optional
        Final time; defaults to the full path duration.
    steps : int
        Number of time steps (``steps + 1`` nodes), at least 2.
    frame : {"working", "path"} or (3, 3) array
        ``"working"`` rotates k_hat(0) onto z (theta(0) = 0); ``"path"`` keeps
        the path's own coordinates; an array is used as the rotation itself.
    derivatives : {"auto", "analytic", "central"}
        Source of dk/dt. ``"auto"`` uses the path's closed form when it has one.
    """
    k_mag = _positive(k_mag, "k_mag")
    if int(steps) != steps or steps < 2:
        raise ValidationError(f"must be an integer >= 2, got {steps!r}", field="steps")
    steps = int(steps)
    if t_end is None:
        t_end = path.duration
        if not np.isfinite(t_end):
            raise ValidationError("required for a path of unbounded length", field="t_end")
    t_end = _positive(t_end, "t_end")
    if t_end > path.duration * (1.0 + 1e-12):
        raise DomainError(f"t_end={t_end!r} exceeds the {path.kind} path duration {path.duration!r}")

    fine_t = np.linspace(0.0, t_end, 2 * steps + 1)
    tangent = path.tangent(fine_t)
    rate = None if derivatives == "central" else path.tangent_rate(fine_t)
    if rate is None:
        if derivatives == "analytic":
            raise ValidationError(f"{path.kind} has no closed-form tangent rate", field="derivatives")
        rate = np.gradient(tangent, fine_t[1] - fine_t[0], axis=0, edge_order=2)

    if isinstance(frame, str):
        if frame == "working":
            rot = working_frame(tangent[0])
        elif frame == "path":
            rot = np.eye(3)
        else:
            raise ValidationError(f"must be 'working' or 'path', got {frame!r}", field="frame")
    else:
        rot = np.asarray(frame, dtype=float)
        if rot.shape != (3, 3) or np.max(np.abs(rot @ rot.T - np.eye(3))) > 1e-10:
            raise ValidationError("must be a 3x3 rotation matrix", field="frame")
    pole_start = isinstance(frame, str) and frame == "working"

    k = k_mag * tangent @ rot.T
    kdot = k_mag * rate @ rot.T
    omega = angular_velocity(k, kdot)
    theta, phi = spherical_angles(k / k_mag, fine_t, eps_pole=eps_pole, require_pole_start=pole_start)
    arrays = [fine_t, k, kdot, omega, theta, phi, rot]
    for arr in arrays:
        arr.flags.writeable = False
    return WaveVectorTrack(k_mag, *arrays, pole_start=pole_start, path=path)


def transport_residual(track):
    """|kdot + k x (k x kdot) / k^2| at every node.

    Vanishes identically when |k| is constant.
    """
    k, kdot = track.k, track.kdot
    k2 = np.sum(k * k, axis=-1)[:, None]
    return np.linalg.norm(kdot + np.cross(k, np.cross(k, kdot)) / k2, axis=-1)
