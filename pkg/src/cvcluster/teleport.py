"""Teleportation-based input coupling and the teleport+two-step construction.

A Bell measurement (balanced beam splitter followed by two homodynes at
phases theta0 and theta1) teleports the input onto a cluster end node while
applying M_tel(theta_plus, theta_minus), theta_pm = theta0 +/- theta1.  Two
additional elementary steps restore full one-mode universality.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import DegenerateMeasurementError, SingularParameterError
from .symplectic import SymplecticMap, compose_many, elementary_step, require_symplectic

#: |cos(theta_minus)| below this is rejected as a failed teleportation.
DEGENERACY_TOL = 1e-9
#: Zero-denominator guard for the explicit parameter formulas.
SINGULAR_DENOM_TOL = 1e-9
#: Vanishing-numerator tolerance for the 0/0 -> 0 convention.
DEGENERATE_NUMERATOR_TOL = 1e-9


def _wrap_angle(theta: float) -> float:
    """Wrap to (-pi, pi]."""
    w = math.remainder(theta, 2.0 * math.pi)
    if w <= -math.pi:
        w += 2.0 * math.pi
    return w


@dataclass(frozen=True)
class TelepAngles:
    """Bell-measurement homodyne phases, with derived sum/difference angles."""

    theta0: float
    theta1: float

    @property
    def theta_plus(self) -> float:
        return self.theta0 + self.theta1

    @property
    def theta_minus(self) -> float:
        return self.theta0 - self.theta1


@dataclass(frozen=True)
class TelepPlusTwoParams:
    """Teleport coupling followed by two elementary steps."""

    angles: TelepAngles
    kappa3: float
    kappa4: float
    free_param: float  # the chosen theta0

    def reconstruct(self) -> SymplecticMap:
        return compose_many(
            elementary_step(self.kappa4),
            elementary_step(self.kappa3),
            mtel(self.angles.theta_plus, self.angles.theta_minus),
        )


def mtel(theta_plus: float, theta_minus: float) -> SymplecticMap:
    """Transformation applied by a generalized teleportation.

    Returns (1/cos(t-)) ((cos t+, sin t- + sin t+), (sin t- - sin t+, cos t+)),
    which has determinant 1.

    Raises:
        DegenerateMeasurementError: theta_minus within 1e-9 of pi/2 + n pi,
            where one input quadrature is measured outright and the
            teleportation fails.
    """
    cm = np.cos(theta_minus)
    if abs(cm) < DEGENERACY_TOL:
        raise DegenerateMeasurementError(
            f"theta_minus={theta_minus} is within {DEGENERACY_TOL} of pi/2 + n*pi"
        )
    cp, sp, sm = np.cos(theta_plus), np.sin(theta_plus), np.sin(theta_minus)
    m = np.array([[cp, sm + sp], [sm - sp, cp]]) / cm
    return SymplecticMap(1, m)


def canonicalize(angles: TelepAngles) -> TelepAngles:
    """Shift both derived angles by pi when cos(theta_minus) < 0.

    The transformation is unchanged; afterwards cos(theta_minus) > 0.  Both
    stored phases are wrapped to (-pi, pi].
    """
    cm = np.cos(angles.theta_minus)
    if abs(cm) < DEGENERACY_TOL:
        raise DegenerateMeasurementError(
            f"theta_minus={angles.theta_minus} is degenerate"
        )
    t0, t1 = angles.theta0, angles.theta1
    if cm < 0.0:
        t0 += np.pi  # adds pi to both theta_plus and theta_minus
    return TelepAngles(_wrap_angle(t0), _wrap_angle(t1))


def mtel_factored(theta_plus: float, theta_minus: float) -> tuple[float, float, float]:
    """Rotation-squeeze-rotation factorization of the teleportation map.

    Returns (phi1, r, phi2) with M_tel = R(phi1) S(r) R(phi2), where
    phi1 = -theta_plus/2 + pi/4, phi2 = -theta_plus/2 - pi/4 and
    tanh(r) = sin(theta_minus): a 45-degree squeeze sandwiched by rotations.
    """
    cm = np.cos(theta_minus)
    if abs(cm) < DEGENERACY_TOL:
        raise DegenerateMeasurementError(
            f"theta_minus={theta_minus} is degenerate"
        )
    r = float(np.arctanh(np.sin(theta_minus))) if cm > 0 else float(
        np.arctanh(np.sin(theta_minus + np.pi))
    )
    if cm < 0:
        theta_plus = theta_plus + np.pi
    phi1 = -theta_plus / 2.0 + np.pi / 4.0
    phi2 = -theta_plus / 2.0 - np.pi / 4.0
    return float(phi1), r, float(phi2)


def _solve_telep(a: float, b: float, c: float, d: float, theta0: float):
    """Angles and kappas for a fixed theta0, or raise at a singular choice."""
    st0 = np.sin(theta0)
    if abs(st0) < 1e-12:
        raise SingularParameterError(f"theta0={theta0}: cot(theta0) diverges")
    ct0 = np.cos(theta0) / st0

    den1 = 2.0 * c - (1.0 + d) * ct0
    num1 = 1.0 - d
    if abs(den1) < SINGULAR_DENOM_TOL:
        if abs(num1) > DEGENERATE_NUMERATOR_TOL:
            raise SingularParameterError("cot(theta1) denominator vanishes")
        ct1 = 0.0
    else:
        ct1 = num1 / den1
    theta1 = float(np.arctan2(1.0, ct1))  # in (0, pi), cot(theta1) = ct1

    kappa3 = c - (1.0 + d) * ct0
    num4 = 1.0 - a + b * ct0
    den4 = c - d * ct0
    if abs(den4) < SINGULAR_DENOM_TOL:
        if abs(num4) > DEGENERATE_NUMERATOR_TOL:
            raise SingularParameterError("kappa4 denominator vanishes")
        kappa4 = 0.0
    else:
        kappa4 = num4 / den4

    angles = TelepAngles(float(theta0), theta1)
    if abs(np.cos(angles.theta_minus)) < DEGENERACY_TOL:
        raise SingularParameterError("theta0 leads to a degenerate teleportation")
    return canonicalize(angles), float(kappa3), float(kappa4)


def telep_noise_proxy(angles: TelepAngles, kappa3: float, kappa4: float) -> float:
    """Gain proxy: amplification cosh^2(r) = 1/cos^2(theta_minus) for each of
    the two Bell homodynes plus (1 + kappa^2) per elementary step."""
    cm = np.cos(angles.theta_minus)
    return float(2.0 / (cm * cm) + (1.0 + kappa3 ** 2) + (1.0 + kappa4 ** 2))


_THETA_GRID = np.linspace(0.0, np.pi, 403)[1:-1]


def select_free_theta0(target: SymplecticMap) -> float:
    """Pick theta0 minimizing the gain proxy over a grid of (0, pi), with
    golden-section refinement; deterministic, ties resolve to the grid."""
    a, b, c, d = target.abcd()

    def objective(t0: float) -> float:
        if not 0.0 < t0 < np.pi:
            return np.inf
        try:
            angles, k3, k4 = _solve_telep(a, b, c, d, t0)
        except SingularParameterError:
            return np.inf
        return telep_noise_proxy(angles, k3, k4)

    values = np.array([objective(t) for t in _THETA_GRID])
    i = int(np.argmin(values))
    best_t, best_v = float(_THETA_GRID[i]), float(values[i])
    if 0 < i < len(_THETA_GRID) - 1 and np.isfinite(values[i - 1]) and np.isfinite(values[i + 1]):
        try:
            res = optimize.minimize_scalar(
                objective,
                bracket=(float(_THETA_GRID[i - 1]), best_t, float(_THETA_GRID[i + 1])),
                method="golden",
                options={"xtol": 1e-12},
            )
            if np.isfinite(res.fun) and res.fun < best_v:
                return float(res.x)
        except ValueError:
            pass
    return best_t


def decompose_telep_plus_two(
    target: SymplecticMap, theta0: float = None
) -> TelepPlusTwoParams:
    """Decompose a one-mode target as M(k4) M(k3) M_tel(theta+, theta-).

    theta0 is a free parameter; when absent it is chosen to minimize the
    gain proxy.  Raises SingularParameterError when an explicitly supplied
    theta0 hits a zero denominator of the closed forms.
    """
    if target.n != 1:
        raise ValueError("teleport+two-step synthesis applies to one-mode maps")
    require_symplectic(target)
    a, b, c, d = target.abcd()
    if theta0 is None:
        theta0 = select_free_theta0(target)
    angles, kappa3, kappa4 = _solve_telep(a, b, c, d, float(theta0))
    return TelepPlusTwoParams(
        angles=angles, kappa3=kappa3, kappa4=kappa4, free_param=float(theta0)
    )


def bell_splitter_relations() -> SymplecticMap:
    """The balanced Bell beam splitter used for teleport coupling.

    Sends (x0, x1, p0, p1) to ((x0 - p1)/sqrt2, (x1 - p0)/sqrt2,
    (p0 + x1)/sqrt2, (p1 + x0)/sqrt2); mode 0 is the input, mode 1 the
    cluster end node.
    """
    m = np.array(
        [
            [1.0, 0.0, 0.0, -1.0],
            [0.0, 1.0, -1.0, 0.0],
            [0.0, 1.0, 1.0, 0.0],
            [1.0, 0.0, 0.0, 1.0],
        ]
    ) / np.sqrt(2.0)
    return SymplecticMap(2, m)
