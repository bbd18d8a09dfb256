"""Analytic test problems with exact solutions for convergence studies."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dec_ode import OdeSystem
from .errors import InvalidParameterError

__all__ = ["TestProblem", "linear_system", "vibrating_system", "dahlquist"]


@dataclass(frozen=True)
class TestProblem:
    """An ODE system bundled with its exact solution on [t0, t_end]."""

    __test__ = False  # not a pytest collection target

    system: OdeSystem
    exact: Callable[[float], np.ndarray]
    t0: float
    t_end: float
    u0: np.ndarray
    name: str


def linear_system() -> TestProblem:
    """2x2 constant-coefficient relaxation: u' = -5u + v, v' = 5u - v.

    The total s = u + v is conserved (the matrix columns sum to zero), and
    the deviation from the steady state (s/6, 5s/6) decays like exp(-6t).
    """
    u0 = np.array([0.9, 0.1])
    total = u0.sum()
    offset = u0[0] - total / 6.0

    def rhs(t: float, u: np.ndarray) -> np.ndarray:
        return np.array([-5.0 * u[0] + u[1], 5.0 * u[0] - u[1]])

    def exact(t: float) -> np.ndarray:
        first = total / 6.0 + offset * math.exp(-6.0 * t)
        return np.array([first, total - first])

    return TestProblem(OdeSystem(2, rhs), exact, 0.0, 1.0, u0, "linear")


def vibrating_system(mass: float = 5.0, damping: float = 2.0,
                     stiffness: float = 5.0, forcing: float = 1.0,
                     omega: float = 2.0, phase: float = 0.1,
                     y0: float = 0.5, v0: float = 0.25,
                     t_end: float = 4.0) -> TestProblem:
    """Forced damped oscillator m y'' + r y' + k y = F cos(w t + phi),
    written as a first-order system in (y, y').

    The exact solution is the steady-state response (amplitude and phase from
    the complex impedance) plus the homogeneous part, whose form follows the
    damping regime: the discriminant r^2 - 4km picks decaying exponentials,
    a critically damped t-multiplied pair, or a damped oscillation.  The two
    free constants come from a 2x2 solve against (y0, v0).
    """
    m, r, k = float(mass), float(damping), float(stiffness)
    if m <= 0 or k <= 0 or omega <= 0:
        raise InvalidParameterError("mass, stiffness and omega must be positive")
    if r < 0 or forcing < 0:
        raise InvalidParameterError("damping and forcing must be nonnegative")

    impedance = complex(k - m * omega**2, omega * r)
    amp = forcing / abs(impedance) if forcing > 0 else 0.0
    shift = phase - cmath.phase(impedance)

    def particular(t: float) -> tuple[float, float]:
        return (amp * math.cos(omega * t + shift),
                -amp * omega * math.sin(omega * t + shift))

    disc = r * r - 4.0 * k * m
    if disc > 0:
        root = math.sqrt(disc)
        lam1 = (-r + root) / (2.0 * m)
        lam2 = (-r - root) / (2.0 * m)

        def basis(t: float):
            e1, e2 = math.exp(lam1 * t), math.exp(lam2 * t)
            return ((e1, e2), (lam1 * e1, lam2 * e2))
    elif disc == 0:
        lam = -r / (2.0 * m)

        def basis(t: float):
            e = math.exp(lam * t)
            return ((e, t * e), (lam * e, (1.0 + lam * t) * e))
    else:
        sigma = -r / (2.0 * m)
        freq = math.sqrt(-disc) / (2.0 * m)

        def basis(t: float):
            e = math.exp(sigma * t)
            c, s = math.cos(freq * t), math.sin(freq * t)
            return ((e * c, e * s),
                    (e * (sigma * c - freq * s), e * (sigma * s + freq * c)))

    yp0, vp0 = particular(0.0)
    rows = basis(0.0)
    mat = np.array(rows)
    consts = np.linalg.solve(mat, np.array([y0 - yp0, v0 - vp0]))

    def exact(t: float) -> np.ndarray:
        (b1, b2), (d1, d2) = basis(t)
        yp, vp = particular(t)
        return np.array([consts[0] * b1 + consts[1] * b2 + yp,
                         consts[0] * d1 + consts[1] * d2 + vp])

    def rhs(t: float, u: np.ndarray) -> np.ndarray:
        y, v = u
        force = forcing * math.cos(omega * t + phase)
        return np.array([v, (force - r * v - k * y) / m])

    return TestProblem(OdeSystem(2, rhs), exact, 0.0, float(t_end),
                       np.array([float(y0), float(v0)]), "vibrating")


def dahlquist(lam: complex = -1.0 + 0.0j, t_end: float = 1.0) -> TestProblem:
    """u' = lam*u with complex lam, realized as a real 2D rotation-scaling
    acting on (Re u, Im u); u0 = 1 + 0i."""
    lam = complex(lam)
    a, b = lam.real, lam.imag
    mat = np.array([[a, -b], [b, a]])
    u0 = np.array([1.0, 0.0])

    def rhs(t: float, u: np.ndarray) -> np.ndarray:
        return mat @ u

    def exact(t: float) -> np.ndarray:
        z = cmath.exp(lam * t)
        return np.array([z.real, z.imag])

    return TestProblem(OdeSystem(2, rhs), exact, 0.0, float(t_end), u0,
                       "dahlquist")


PROBLEMS: dict[str, Callable[[], TestProblem]] = {
    "linear": linear_system,
    "vibrating": vibrating_system,
    "dahlquist": dahlquist,
}
