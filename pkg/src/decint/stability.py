"""Stability polynomials and stability-region scans for exported tableaux.

For an explicit method, (I - zA)^{-1} expands as a finite sum of powers of
zA, so the amplification on u' = lam*u is the polynomial
R(z) = 1 + sum_r z^{r+1} b.A^r.1 of degree at most the stage count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, UnsupportedExportError
from .rk_export import ButcherTableau

__all__ = [
    "StabilityPolynomial",
    "StabilityGrid",
    "stability_polynomial",
    "region_grid",
    "real_axis_limit",
    "write_region_csv",
    "write_region_pgm",
]

TRUNCATION_TOL = 1e-14


@dataclass(frozen=True)
class StabilityPolynomial:
    """coefficients[r] multiplies z^r; trailing near-zero terms removed."""

    coefficients: np.ndarray

    @property
    def degree(self) -> int:
        return self.coefficients.size - 1

    def __call__(self, z):
        # Horner evaluation, vectorized over complex input
        acc = np.zeros_like(np.asarray(z, dtype=complex))
        for coeff in self.coefficients[::-1]:
            acc = acc * z + coeff
        return acc


@dataclass(frozen=True)
class StabilityGrid:
    re_range: tuple[float, float]
    im_range: tuple[float, float]
    resolution: tuple[int, int]
    magnitudes: np.ndarray

    @property
    def re_axis(self) -> np.ndarray:
        return np.linspace(*self.re_range, self.resolution[0])

    @property
    def im_axis(self) -> np.ndarray:
        return np.linspace(*self.im_range, self.resolution[1])

    @property
    def mask(self) -> np.ndarray:
        return self.magnitudes <= 1.0


def stability_polynomial(tab: ButcherTableau) -> StabilityPolynomial:
    if np.any(np.triu(tab.A) != 0.0):
        raise UnsupportedExportError(
            "stability expansion requires a strictly lower triangular A")
    coeffs = np.empty(tab.S + 1)
    coeffs[0] = 1.0
    vec = np.ones(tab.S)
    for r in range(tab.S):
        coeffs[r + 1] = tab.b @ vec
        vec = tab.A @ vec
    keep = tab.S + 1
    while keep > 1 and abs(coeffs[keep - 1]) < TRUNCATION_TOL:
        keep -= 1
    out = coeffs[:keep].copy()
    out.setflags(write=False)
    return StabilityPolynomial(out)


def region_grid(poly: StabilityPolynomial,
                re_range: tuple[float, float] = (-12.0, 2.0),
                im_range: tuple[float, float] = (-12.0, 12.0),
                nx: int = 600, ny: int = 600) -> StabilityGrid:
    """|R(z)| sampled on the rectangle re_range x im_range.

    ``magnitudes[i, j]`` corresponds to z = re_axis[i] + 1j * im_axis[j].
    """
    if nx < 2 or ny < 2:
        raise InvalidParameterError("grid needs at least 2 points per axis")
    if re_range[1] <= re_range[0] or im_range[1] <= im_range[0]:
        raise InvalidParameterError("grid intervals must be nonempty")
    re = np.linspace(*re_range, nx)
    im = np.linspace(*im_range, ny)
    z = re[:, None] + 1j * im[None, :]
    mags = np.abs(poly(z))
    mags.setflags(write=False)
    return StabilityGrid((float(re_range[0]), float(re_range[1])),
                         (float(im_range[0]), float(im_range[1])),
                         (nx, ny), mags)


def real_axis_limit(poly: StabilityPolynomial, search_left: float = -50.0,
                    tol: float = 1e-10) -> float:
    """Leftmost x < 0 with |R| <= 1 on [x, 0], located by bisection on the
    first crossing of |R| = 1 scanning left from the origin."""
    xs = np.linspace(0.0, search_left, 4096)
    vals = np.abs(poly(xs + 0j)) - 1.0
    crossing = np.nonzero(vals > 0.0)[0]
    if crossing.size == 0:
        return float(search_left)
    hi = xs[crossing[0] - 1]  # still stable
    lo = xs[crossing[0]]      # unstable
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if abs(poly(mid + 0j)) <= 1.0:
            hi = mid
        else:
            lo = mid
    return float(0.5 * (lo + hi))


def write_region_csv(grid: StabilityGrid, path: str) -> None:
    re = grid.re_axis
    im = grid.im_axis
    with open(path, "w") as fh:
        fh.write("re,im,magnitude\n")
        for i, x in enumerate(re):
            for j, y in enumerate(im):
                fh.write(f"{float(x)!r},{float(y)!r},"
                         f"{float(grid.magnitudes[i, j])!r}\n")


def write_region_pgm(grid: StabilityGrid, path: str) -> None:
    """Binary 8-bit PGM of the stability mask: stable cells white (255).

    Rows run top to bottom over decreasing imaginary part, columns left to
    right over increasing real part, so the file views like the complex
    plane.
    """
    nx, ny = grid.resolution
    img = np.where(grid.mask, 255, 0).astype(np.uint8)
    raster = img.T[::-1]  # (ny, nx), top row = largest imaginary part
    with open(path, "wb") as fh:
        fh.write(f"P5\n{nx} {ny}\n255\n".encode("ascii"))
        fh.write(raster.tobytes())
