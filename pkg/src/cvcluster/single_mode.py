"""Four-step synthesis of arbitrary one-mode Gaussian maps.

A one-mode target (a b; c d) with det 1 factors into four elementary
gate-teleportation steps M(k4) M(k3) M(k2) M(k1), each realized by one
homodyne measurement at angle arctan(kappa).  Three steps cannot reach the
measure-zero family {d = 0, b != 1}; four always suffice.
"""

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import SingularParameterError
from .symplectic import SymplecticMap, compose_many, elementary_step, require_symplectic

#: |kappa3| below this (relative) scale is treated as a pole of the formulas.
KAPPA3_SINGULAR_TOL = 1e-9
#: Numerators below this magnitude count as vanishing (legitimate kappa3 = 0).
DEGENERATE_NUMERATOR_TOL = 1e-9
#: kappa1 grid points closer than this to the kappa3 = 0 pole are excluded.
POLE_EXCLUSION = 1e-6

_GRID = np.linspace(-20.0, 20.0, 401)


@dataclass(frozen=True)
class FourStepParams:
    """Measurement parameters (kappa1..kappa4) of a four-step decomposition."""

    kappas: tuple[float, float, float, float]
    free_param: float  # the chosen kappa1
    noise_proxy: float  # sum of squared measurement gains, >= 4

    def reconstruct(self) -> SymplecticMap:
        """Product M(k4) M(k3) M(k2) M(k1) of the four steps."""
        k1, k2, k3, k4 = self.kappas
        return compose_many(
            elementary_step(k4),
            elementary_step(k3),
            elementary_step(k2),
            elementary_step(k1),
        )


@dataclass(frozen=True)
class HomodyneSetting:
    """Homodyne angle and feedforward gain realizing one quadratic phase step."""

    theta: float  # radians in (-pi/2, pi/2]
    gain: float  # g = sqrt(1 + kappa^2) >= 1


def _solve(a: float, b: float, c: float, d: float, kappa1: float):
    """Kappas for a fixed kappa1, or raise SingularParameterError at a pole."""
    kappa3 = c - d * kappa1
    num2 = 1.0 - d
    num4 = 1.0 - a + b * kappa1
    scale = max(1.0, abs(c), abs(d * kappa1))
    if abs(kappa3) < KAPPA3_SINGULAR_TOL * scale:
        if (
            abs(num2) < DEGENERATE_NUMERATOR_TOL
            and abs(num4) < DEGENERATE_NUMERATOR_TOL
        ):
            # Legitimate kappa3 = 0 (both numerators vanish, which forces
            # d = 1 and kappa1 = c).  The closed form then only constrains
            # kappa2 + kappa4 = -b; split evenly to minimize the gain proxy.
            return (kappa1, -b / 2.0 + 0.0, 0.0, -b / 2.0 + 0.0)
        raise SingularParameterError(
            f"kappa1={kappa1} makes kappa3 vanish while a numerator is nonzero"
        )
    return (kappa1, num2 / kappa3, kappa3, num4 / kappa3)


def noise_proxy(kappas) -> float:
    """Sum of squared homodyne gains, sum_i (1 + kappa_i^2)."""
    return float(sum(1.0 + k * k for k in kappas))


def decompose_four_step(target: SymplecticMap, kappa1: float = None) -> FourStepParams:
    """Decompose a one-mode symplectic target into four elementary steps.

    Args:
        target: one-mode symplectic map (displacement ignored).
        kappa1: optional value of the free parameter; chosen by
            :func:`select_free_kappa1` when absent.

    Raises:
        SingularParameterError: the given kappa1 hits a pole of the closed
            forms (only possible when kappa1 is supplied explicitly).
    """
    if target.n != 1:
        raise ValueError("four-step synthesis applies to one-mode maps")
    require_symplectic(target)
    a, b, c, d = target.abcd()
    if kappa1 is None:
        kappa1 = select_free_kappa1(target)
    kappas = _solve(a, b, c, d, float(kappa1))
    return FourStepParams(kappas=kappas, free_param=float(kappa1), noise_proxy=noise_proxy(kappas))


def select_free_kappa1(target: SymplecticMap) -> float:
    """Pick the kappa1 minimizing the gain proxy sum_i (1 + kappa_i^2).

    Scans a fixed 401-point grid over [-20, 20] (excluding points within
    1e-6 of the kappa3 = 0 pole) and refines the best grid point by
    golden-section search.  Deterministic; ties resolve to the grid point,
    so exactly representable optima (e.g. 0 for the identity) are returned
    exactly.
    """
    a, b, c, d = target.abcd()
    pole = c / d if abs(d) > 0.0 else None

    def objective(k1: float) -> float:
        try:
            kappas = _solve(a, b, c, d, k1)
        except SingularParameterError:
            return np.inf
        near_pole = pole is not None and abs(k1 - pole) < POLE_EXCLUSION
        numerators_vanish = (
            abs(1.0 - d) < DEGENERATE_NUMERATOR_TOL
            and abs(1.0 - a + b * k1) < DEGENERATE_NUMERATOR_TOL
        )
        if near_pole and not numerators_vanish:
            return np.inf
        return noise_proxy(kappas)

    values = np.array([objective(k) for k in _GRID])
    i = int(np.argmin(values))
    best_k, best_v = float(_GRID[i]), float(values[i])
    if 0 < i < len(_GRID) - 1 and np.isfinite(values[i - 1]) and np.isfinite(values[i + 1]):
        try:
            res = optimize.minimize_scalar(
                objective,
                bracket=(float(_GRID[i - 1]), best_k, float(_GRID[i + 1])),
                method="golden",
                options={"xtol": 1e-12},
            )
            if np.isfinite(res.fun) and res.fun < best_v:
                return float(res.x)
        except ValueError:
            pass  # bracket not strictly unimodal at grid resolution
    return best_k


def three_step_reachable(target: SymplecticMap) -> bool:
    """Whether three elementary steps suffice for the target.

    The unreachable family is {d = 0, b != 1}: a three-step product always
    has d3 = kappa2, and d3 = 0 forces b3 = 1.
    """
    if target.n != 1:
        raise ValueError("reachability test applies to one-mode maps")
    _, b, _, d = target.abcd()
    return not (abs(d) < 1e-12 and abs(b - 1.0) > 1e-12)


def homodyne_setting(kappa: float) -> HomodyneSetting:
    """Angle and gain measuring g (x sin(theta) + p cos(theta)) = kappa x + p."""
    return HomodyneSetting(theta=float(np.arctan(kappa)), gain=float(np.hypot(1.0, kappa)))


def rsr_decompose(target: SymplecticMap) -> tuple[float, float, float]:
    """Factor a one-mode symplectic map as R(phi1) S(xi) R(phi2), xi >= 0.

    Computed from the singular value decomposition of the 2x2 matrix with
    both orthogonal factors forced to be proper rotations.
    """
    if target.n != 1:
        raise ValueError("rotation-squeeze-rotation applies to one-mode maps")
    require_symplectic(target)
    u, s, vt = np.linalg.svd(target.matrix)
    if np.linalg.det(u) < 0:
        flip = np.diag([1.0, -1.0])
        u = u @ flip
        vt = flip @ vt
    phi1 = float(np.arctan2(u[1, 0], u[0, 0]))
    phi2 = float(np.arctan2(vt[1, 0], vt[0, 0]))
    xi = float(np.log(s[0]))
    return phi1, xi, phi2
