"""Closed-form Bloch-level objects of the two-dimensional on-resonance
double-kicked lattice (2D-ORDKL) at quarter-period kick delay.

The model is two independent kicked chains in momentum space, one per spatial
axis.  At fixed quasiposition theta each chain reduces to a 2x2 unitary acting
on a sublattice doublet.  This module builds those unitaries in their two
chiral-symmetric time frames per axis, together with the eigenphase
dispersions, the Bloch unit vectors, and the gap-closing predicate that
delimits the topological phases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GaplessPointError, NumericalFailureError

PI = math.pi
HALF_PI = math.pi / 2.0

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

#: sin E below this is treated as a closed gap; the Bloch unit vector loses
#: all precision beyond it.
GAPLESS_SIN_E = 1e-8

#: allowed floating-point overshoot of |cos Ks * cos Kc| past 1 before the
#: arccos argument is considered corrupt rather than rounded.
ARCCOS_OVERSHOOT = 1e-14

X_FRAMES = (1, 2)
Y_FRAMES = (3, 4)
ALL_FRAMES = (1, 2, 3, 4)


def frame_axis(frame: int) -> str:
    """Spatial axis a symmetric time frame belongs to."""
    if frame in X_FRAMES:
        return "x"
    if frame in Y_FRAMES:
        return "y"
    raise ValueError(f"frame must be one of {ALL_FRAMES}, got {frame!r}")


@dataclass(frozen=True)
class KickParams:
    """Kicking strengths and fixed model constants.

    k1, k3 scale the sine kicks and k2, k4 the cosine kicks along x and y.
    The phase offsets and the reduced kick delay are stored for completeness
    but every closed-form path in this package requires the quarter-period
    point phi_x = phi_y = pi/2, hbar_tau = pi.
    """

    k1: float
    k2: float
    k3: float
    k4: float
    phi_x: float = HALF_PI
    phi_y: float = HALF_PI
    hbar_tau: float = PI

    def __post_init__(self):
        for name in ("k1", "k2", "k3", "k4"):
            if not getattr(self, name) >= 0.0:
                raise ValueError(f"kicking strength {name} must be >= 0")

    @classmethod
    def from_pi_units(cls, k1: float, k2: float, k3: float, k4: float) -> "KickParams":
        """Build from strengths quoted in multiples of pi."""
        return cls(k1 * PI, k2 * PI, k3 * PI, k4 * PI)

    def require_analytic(self) -> None:
        """Reject parameter sets outside the closed-form regime."""
        if self.phi_x != HALF_PI or self.phi_y != HALF_PI:
            raise ValueError("closed-form path requires phi_x = phi_y = pi/2")
        if self.hbar_tau != PI:
            raise ValueError("closed-form path requires hbar_tau = pi")

    def axis_strengths(self, axis: str) -> tuple[float, float]:
        """(sine-kick, cosine-kick) strengths of one axis."""
        if axis == "x":
            return self.k1, self.k2
        if axis == "y":
            return self.k3, self.k4
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")

    def frame_strengths(self, frame: int) -> tuple[float, float]:
        return self.axis_strengths(frame_axis(frame))


@dataclass(frozen=True)
class Quasiposition:
    """Bloch angle of the period-2 momentum-lattice translation symmetry,
    stored reduced into [0, 2*pi)."""

    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", float(self.theta) % (2.0 * PI))

    @classmethod
    def of(cls, value) -> "Quasiposition":
        return value if isinstance(value, Quasiposition) else cls(float(value))


@dataclass(frozen=True)
class TimeFrame:
    """Combined symmetric time frame (alpha, beta), alpha for x, beta for y."""

    alpha: int
    beta: int

    def __post_init__(self):
        if self.alpha not in X_FRAMES:
            raise ValueError("alpha must be 1 or 2")
        if self.beta not in Y_FRAMES:
            raise ValueError("beta must be 3 or 4")

    @classmethod
    def all(cls) -> tuple["TimeFrame", ...]:
        return tuple(cls(a, b) for a in X_FRAMES for b in Y_FRAMES)


@dataclass
class BlochBlock:
    """2x2 unitary on one sublattice doublet at fixed quasiposition."""

    entries: np.ndarray
    frame: int
    theta: Quasiposition

    def check(self, tol: float = 1e-12) -> None:
        """Verify unitarity, unit determinant and the chiral relation."""
        u = self.entries
        if np.abs(u.conj().T @ u - IDENTITY_2).max() > tol:
            raise NumericalFailureError("Bloch block is not unitary")
        if abs(np.linalg.det(u) - 1.0) > tol:
            raise NumericalFailureError("Bloch block determinant differs from 1")
        if np.abs(SIGMA_Z @ u @ SIGMA_Z - u.conj().T).max() > tol:
            raise NumericalFailureError("Bloch block violates chiral symmetry")


@dataclass
class BandPoint:
    """Both axis dispersions, the four combined bands and the Bloch unit
    vectors of every frame at one (theta_x, theta_y)."""

    ex: float
    ey: float
    bands: tuple[float, float, float, float]
    nvec: dict = field(default_factory=dict)


def shorthand_kappas(params: KickParams, theta, axis: str) -> tuple[float, float]:
    """Effective (sine-kick, cosine-kick) angles at one quasiposition.

    The sine kick enters through K_sin*sin(theta/2) and the cosine kick
    through K_cos*cos(theta/2).
    """
    k_sin, k_cos = params.axis_strengths(axis)
    half = Quasiposition.of(theta).theta / 2.0
    return k_sin * math.sin(half), k_cos * math.cos(half)


def _su2_xy(angle: float, half_theta: float) -> np.ndarray:
    """exp(i*angle*(cos(t/2) sigma_x + sin(t/2) sigma_y)) in closed form."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array(
        [[c, 1j * s * complex(math.cos(half_theta), -math.sin(half_theta))],
         [1j * s * complex(math.cos(half_theta), math.sin(half_theta)), c]],
        dtype=complex,
    )


def _rot_z(angle: float) -> np.ndarray:
    """exp(i*angle*sigma_z)."""
    return np.array(
        [[complex(math.cos(angle), math.sin(angle)), 0.0],
         [0.0, complex(math.cos(angle), -math.sin(angle))]],
        dtype=complex,
    )


def _half_period_factors(params: KickParams, theta, frame: int):
    params.require_analytic()
    axis = frame_axis(frame)
    ks, kc = shorthand_kappas(params, theta, axis)
    half = Quasiposition.of(theta).theta / 2.0
    # F applies the half cosine kick, the free-evolution remainder, then the
    # half sine kick; G is its chiral partner with inverted free evolution.
    f = _su2_xy(ks / 2.0, half) @ _rot_z(HALF_PI / 2.0) @ _su2_xy(-kc / 2.0, half)
    g = _su2_xy(-kc / 2.0, half) @ _rot_z(-HALF_PI / 2.0) @ _su2_xy(ks / 2.0, half)
    return f, g


def frame_matrix(params: KickParams, theta, frame: int) -> BlochBlock:
    """One-period Bloch unitary of an axis in a chiral-symmetric time frame.

    Frames 1 and 2 are the two symmetric orderings of the x-axis period
    (half sine kick outside vs half cosine kick outside), frames 3 and 4 the
    same orderings on the y axis.
    """
    f, g = _half_period_factors(params, theta, frame)
    entries = f @ g if frame in (1, 3) else g @ f
    return BlochBlock(entries=entries, frame=frame, theta=Quasiposition.of(theta))


def dispersion(params: KickParams, theta, axis: str) -> float:
    """Eigenphase dispersion E(theta) of one axis on the [0, pi] branch.

    cos E is the product of the cosines of the two effective kick angles;
    the principal arccos branch makes the +-E eigenphase pairing canonical.
    """
    ks, kc = shorthand_kappas(params, theta, axis)
    arg = math.cos(ks) * math.cos(kc)
    if abs(arg) > 1.0:
        if abs(arg) - 1.0 > ARCCOS_OVERSHOOT:
            raise NumericalFailureError(f"dispersion argument {arg!r} outside [-1, 1]")
        arg = math.copysign(1.0, arg)
    return math.acos(arg)


def dispersion_grid(params: KickParams, axis: str, thetas: np.ndarray) -> np.ndarray:
    """Vectorized dispersion over an array of quasipositions."""
    k_sin, k_cos = params.axis_strengths(axis)
    half = np.asarray(thetas, dtype=float) / 2.0
    arg = np.cos(k_sin * np.sin(half)) * np.cos(k_cos * np.cos(half))
    return np.arccos(np.clip(arg, -1.0, 1.0))


def wrap_to_pi(values):
    """Reduce angles to the principal zone (-pi, pi]."""
    wrapped = np.mod(np.asarray(values, dtype=float) + PI, 2.0 * PI) - PI
    return np.where(wrapped == -PI, PI, wrapped)


def band_energies(params: KickParams, theta_x, theta_y) -> tuple[float, ...]:
    """The four quasienergy bands +-E_x +- E_y reduced to (-pi, pi]."""
    ex = dispersion(params, theta_x, "x")
    ey = dispersion(params, theta_y, "y")
    raw = (ex + ey, ex - ey, -ex + ey, -ex - ey)
    return tuple(float(v) for v in wrap_to_pi(raw))


def unit_vector(params: KickParams, theta, frame: int) -> tuple[float, float]:
    """In-plane Bloch unit vector (n_x, n_y) of a frame matrix.

    The frame matrix equals exp(-i E (n_x sigma_x + n_y sigma_y)); the
    components follow in closed form from its off-diagonal entry.  Undefined
    where the gap closes, which raises GaplessPointError.
    """
    axis = frame_axis(frame)
    ks, kc = shorthand_kappas(params, theta, axis)
    e = dispersion(params, theta, axis)
    sin_e = math.sin(e)
    if sin_e < GAPLESS_SIN_E:
        raise GaplessPointError(
            f"gap closed at theta={Quasiposition.of(theta).theta:.6f} on axis {axis}"
        )
    half = Quasiposition.of(theta).theta / 2.0
    ch, sh = math.cos(half), math.sin(half)
    if frame in (1, 3):
        nx = -(ch * math.sin(ks) * math.cos(kc) - sh * math.sin(kc)) / sin_e
        ny = -(sh * math.sin(ks) * math.cos(kc) + ch * math.sin(kc)) / sin_e
    else:
        nx = +(ch * math.cos(ks) * math.sin(kc) + sh * math.sin(ks)) / sin_e
        ny = +(sh * math.cos(ks) * math.sin(kc) - ch * math.sin(ks)) / sin_e
    return nx, ny


def unit_vector_grid(params: KickParams, frame: int, thetas: np.ndarray):
    """Vectorized Bloch vector components over a quasiposition array.

    Returns (n_x, n_y, sin_E) without the gapless gate so callers can apply
    their own thresholding over the whole grid at once.
    """
    axis = frame_axis(frame)
    k_sin, k_cos = params.axis_strengths(axis)
    half = np.asarray(thetas, dtype=float) / 2.0
    ks = k_sin * np.sin(half)
    kc = k_cos * np.cos(half)
    e = np.arccos(np.clip(np.cos(ks) * np.cos(kc), -1.0, 1.0))
    sin_e = np.sin(e)
    ch, sh = np.cos(half), np.sin(half)
    with np.errstate(divide="ignore", invalid="ignore"):
        if frame in (1, 3):
            nx = -(ch * np.sin(ks) * np.cos(kc) - sh * np.sin(kc)) / sin_e
            ny = -(sh * np.sin(ks) * np.cos(kc) + ch * np.sin(kc)) / sin_e
        else:
            nx = +(ch * np.cos(ks) * np.sin(kc) + sh * np.sin(ks)) / sin_e
            ny = +(sh * np.cos(ks) * np.sin(kc) - ch * np.sin(ks)) / sin_e
    return nx, ny, sin_e


def band_point(params: KickParams, theta_x, theta_y) -> BandPoint:
    """Aggregate dispersion, band and Bloch-vector data at one 2D point.

    Frames whose gap is closed at the requested point carry None in the
    nvec mapping instead of a unit vector.
    """
    ex = dispersion(params, theta_x, "x")
    ey = dispersion(params, theta_y, "y")
    bands = band_energies(params, theta_x, theta_y)
    nvec = {}
    for frame in ALL_FRAMES:
        theta = theta_x if frame_axis(frame) == "x" else theta_y
        try:
            nvec[frame] = unit_vector(params, theta, frame)
        except GaplessPointError:
            nvec[frame] = None
    return BandPoint(ex=ex, ey=ey, bands=bands, nvec=nvec)


@dataclass(frozen=True)
class BoundaryWitness:
    """Integer pair certifying a gap closure on one axis.

    The effective kick angles are simultaneously integer multiples of pi at
    some quasiposition: K_sin*sin(theta/2) = m_sin*pi and
    K_cos*cos(theta/2) = m_cos*pi.
    """

    axis: str
    m_sin: int
    m_cos: int
    residual: float


def _axis_boundary(k_sin: float, k_cos: float, axis: str, tol: float):
    """Best integer witness for one axis; None when no closure exists.

    A vanishing kick strength closes the gap unconditionally: its effective
    angle is zero everywhere, and the other kick's angle vanishes at the
    quasiposition where its sin/cos factor crosses zero.
    """
    if k_sin == 0.0 or k_cos == 0.0:
        return BoundaryWitness(axis=axis, m_sin=0, m_cos=0, residual=0.0)
    best = None
    target = 1.0 / PI**2
    for m_sin in range(0, int(k_sin / PI * (1.0 + 1e-12)) + 1):
        for m_cos in range(0, int(k_cos / PI * (1.0 + 1e-12)) + 1):
            residual = abs(
                m_sin**2 / k_sin**2 + m_cos**2 / k_cos**2 - target
            )
            if best is None or residual < best.residual:
                best = BoundaryWitness(axis, m_sin, m_cos, residual)
    if best is not None and best.residual <= tol:
        return best
    return None


def on_phase_boundary(params: KickParams, tol: float = 1e-9):
    """Whether the parameter point closes a quasienergy gap on either axis.

    Returns (flag, witnesses) where witnesses lists one BoundaryWitness per
    closing axis.  The certificate equation per axis reads
    m_sin^2/K_sin^2 + m_cos^2/K_cos^2 = 1/pi^2 with integer m limited by
    |m*pi| <= K; tol bounds the allowed residual of that equation.
    """
    witnesses = []
    for axis in ("x", "y"):
        k_sin, k_cos = params.axis_strengths(axis)
        hit = _axis_boundary(k_sin, k_cos, axis, tol)
        if hit is not None:
            witnesses.append(hit)
    return bool(witnesses), tuple(witnesses)


def boundary_residuals(params: KickParams):
    """Best gap-closure certificate per axis regardless of distance.

    Unlike on_phase_boundary this always reports both axes, each with the
    integer pair minimizing the certificate residual, so scans can contour
    the residual field.
    """
    out = []
    for axis in ("x", "y"):
        k_sin, k_cos = params.axis_strengths(axis)
        hit = _axis_boundary(k_sin, k_cos, axis, tol=float("inf"))
        if hit is not None:
            out.append(hit)
    return tuple(out)
