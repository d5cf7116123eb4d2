"""Real vector fields on the periodic box in collocation and Fourier form.

Coefficients are stored on the full ``n x n x n`` FFT lattice (no half
spectrum) in numpy's ``fft`` ordering, normalized so that the ``k = 0``
amplitude of a constant field equals that constant::

    v(x) = sum_k  v_hat(k) exp(i (2 pi / L) k . x)

so the L2 norm obeys ``||v||_2^2 = L^3 sum_k |v_hat(k)|^2``.

Integer wavevector components live in ``(-n/2, n/2]``; the Nyquist index is
stored as ``+n/2``. Odd-order derivatives (curl, divergence, gradient) see a
zero wavenumber on the Nyquist plane, because ``i k`` applied there cannot
yield a real field. The default dealias rule removes the Nyquist plane
anyway.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import MalformedFieldError, OutOfBandError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi

# relative tolerance on |c(-k) - conj c(k)| used by to_physical
SYMMETRY_TOL = 1e-10
# relative tolerance on the discrete divergence for H0 membership
SOLENOIDAL_TOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Uniform ``n^3`` collocation grid on the box ``[0, L)^3``."""

    n: int
    box_length: float = TWO_PI
    dealias_fraction: float = 2.0 / 3.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 4 or self.n % 2:
            raise ValueError(f"n must be an even integer >= 4, got {self.n!r}")
        if not self.box_length > 0:
            raise ValueError(f"box_length must be positive, got {self.box_length!r}")
        if not 0 < self.dealias_fraction <= 1:
            raise ValueError(
                f"dealias_fraction must lie in (0, 1], got {self.dealias_fraction!r}"
            )
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "box_length", float(self.box_length))
        object.__setattr__(self, "dealias_fraction", float(self.dealias_fraction))

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n)

    @property
    def volume(self) -> float:
        return self.box_length**3

    @property
    def cell_volume(self) -> float:
        return self.volume / self.n**3

    @property
    def k_scale(self) -> float:
        """Physical wavenumber of the integer index 1, ``2 pi / L``."""
        return TWO_PI / self.box_length

    @property
    def lambda1(self) -> float:
        """Smallest nonzero eigenvalue of A = -Laplacian on mean-free fields."""
        return self.k_scale**2

    @property
    def cutoff(self) -> int:
        """Largest integer |k_i| kept by the dealias rule."""
        return int(np.floor(self.dealias_fraction * self.n / 2 + 1e-12))

    @cached_property
    def kint_1d(self) -> np.ndarray:
        k = np.fft.fftfreq(self.n, d=1.0 / self.n)
        k[self.n // 2] = self.n // 2
        return k

    @cached_property
    def kint(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Integer wavevector components, broadcastable to ``shape``."""
        k = self.kint_1d
        return (k[:, None, None], k[None, :, None], k[None, None, :])

    @cached_property
    def kvec(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Physical wavevector components with Nyquist zeroed (odd derivatives)."""
        k = self.kint_1d * self.k_scale
        k[self.n // 2] = 0.0
        return (k[:, None, None], k[None, :, None], k[None, None, :])

    @cached_property
    def kint_sq(self) -> np.ndarray:
        kx, ky, kz = self.kint
        return kx**2 + ky**2 + kz**2

    @cached_property
    def ksq(self) -> np.ndarray:
        """Symbol of A, ``(2 pi / L)^2 |k|^2`` with the integer |k|."""
        return self.k_scale**2 * self.kint_sq

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        kx, ky, kz = self.kint
        c = self.dealias_fraction * self.n / 2
        return (np.abs(kx) <= c) & (np.abs(ky) <= c) & (np.abs(kz) <= c)

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        """True where any integer component equals the Nyquist index."""
        h = self.n // 2
        kx, ky, kz = self.kint
        return (kx == h) | (ky == h) | (kz == h)

    @cached_property
    def neg_index(self) -> np.ndarray:
        """Index map j -> (-j mod n) along one axis."""
        return (-np.arange(self.n)) % self.n

    def coordinates(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = np.arange(self.n) * (self.box_length / self.n)
        return np.meshgrid(x, x, x, indexing="ij")


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


def reflect(grid: GridSpec, coeffs: np.ndarray) -> np.ndarray:
    """Return ``c(-k)`` for the last three axes of ``coeffs``."""
    j = grid.neg_index
    return coeffs[..., j, :, :][..., :, j, :][..., :, :, j]


def symmetrize(grid: GridSpec, coeffs: np.ndarray) -> np.ndarray:
    """Project onto conjugate-symmetric coefficients, exactly."""
    return 0.5 * (coeffs + np.conj(reflect(grid, coeffs)))


def symmetry_defect(grid: GridSpec, coeffs: np.ndarray) -> float:
    scale = np.max(np.abs(coeffs)) if coeffs.size else 0.0
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(coeffs - np.conj(reflect(grid, coeffs)))) / scale)


@dataclass(frozen=True, eq=False)
class SpectralVectorField:
    """Three-component complex coefficient array on ``grid``; immutable."""

    grid: GridSpec
    coeffs: np.ndarray
    time: float | None = None
    label: str | None = None

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != (3, *self.grid.shape):
            raise ValueError(f"coeffs must have shape (3, n, n, n), got {c.shape}")
        object.__setattr__(self, "coeffs", _readonly(c))

    def replace(self, coeffs: np.ndarray, **meta) -> SpectralVectorField:
        kw = {"time": self.time, "label": self.label}
        kw.update(meta)
        return SpectralVectorField(self.grid, coeffs, **kw)

    def __add__(self, other: SpectralVectorField) -> SpectralVectorField:
        return self.replace(self.coeffs + other.coeffs)

    def __sub__(self, other: SpectralVectorField) -> SpectralVectorField:
        return self.replace(self.coeffs - other.coeffs)

    def __mul__(self, a: float) -> SpectralVectorField:
        return self.replace(a * self.coeffs)

    __rmul__ = __mul__

    @property
    def is_mean_free(self) -> bool:
        return bool(np.all(self.coeffs[:, 0, 0, 0] == 0))

    @property
    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def is_solenoidal(self, tol: float = SOLENOIDAL_TOL) -> bool:
        return divergence_residual(self) <= tol

    def is_band_limited(self) -> bool:
        return not np.any(self.coeffs[:, ~self.grid.dealias_mask])

    def l2_norm(self) -> float:
        """Coefficient-sum (Plancherel) L2 norm."""
        return float(np.sqrt(self.grid.volume * np.sum(np.abs(self.coeffs) ** 2)))

    def inner(self, other: SpectralVectorField) -> float:
        """Real L2 inner product ``(self, other)`` over the box."""
        return float(
            self.grid.volume * np.sum((np.conj(self.coeffs) * other.coeffs).real)
        )


@dataclass(frozen=True, eq=False)
class SpectralScalarField:
    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != self.grid.shape:
            raise ValueError(f"coeffs must have shape (n, n, n), got {c.shape}")
        object.__setattr__(self, "coeffs", _readonly(c))

    def to_physical(self) -> np.ndarray:
        return ifft3(self.coeffs)


@dataclass(frozen=True, eq=False)
class PhysicalVectorField:
    """Three real component arrays sampled on the collocation lattice."""

    grid: GridSpec
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        if s.shape != (3, *self.grid.shape):
            raise ValueError(f"samples must have shape (3, n, n, n), got {s.shape}")
        object.__setattr__(self, "samples", _readonly(s))

    def magnitude(self) -> np.ndarray:
        """Pointwise Euclidean magnitude |v(x)|."""
        return np.sqrt(np.sum(self.samples**2, axis=0))


def ifft3(coeffs: np.ndarray) -> np.ndarray:
    """Real samples of conjugate-symmetric coefficients (last three axes)."""
    n = coeffs.shape[-1]
    return sfft.irfftn(
        coeffs[..., : n // 2 + 1], s=coeffs.shape[-3:], axes=(-3, -2, -1),
        norm="forward", workers=-1,
    )


def fft3(samples: np.ndarray) -> np.ndarray:
    return sfft.fftn(samples, axes=(-3, -2, -1), norm="forward", workers=-1)


def half_to_full(grid: GridSpec, half: np.ndarray) -> np.ndarray:
    """Rebuild the full lattice from the ``k_z >= 0`` half of symmetric coefficients."""
    n, h = grid.n, grid.n // 2
    full = np.empty(half.shape[:-1] + (n,), dtype=np.complex128)
    full[..., : h + 1] = half
    j = grid.neg_index
    tail = half[..., j, :, :][..., :, j, :][..., :, :, 1:h][..., ::-1]
    full[..., h + 1 :] = np.conj(tail)
    return full


def to_physical(f: SpectralVectorField) -> PhysicalVectorField:
    defect = symmetry_defect(f.grid, f.coeffs)
    if defect > SYMMETRY_TOL:
        raise MalformedFieldError(
            f"coefficients are not conjugate-symmetric (relative defect {defect:.3e})"
        )
    return PhysicalVectorField(f.grid, ifft3(f.coeffs))


def to_spectral(f: PhysicalVectorField, time: float | None = None) -> SpectralVectorField:
    coeffs = fft3(f.samples)
    return SpectralVectorField(f.grid, coeffs, time=time)


def scalar_to_spectral(grid: GridSpec, samples: np.ndarray) -> SpectralScalarField:
    return SpectralScalarField(grid, fft3(samples))


def leray_project(f: SpectralVectorField) -> SpectralVectorField:
    """Remove ``k (k . v_hat) / |k|^2`` at every k with a nonzero derivative symbol.

    The wavevector is the one used by the odd derivatives (Nyquist
    components zeroed), so the output has zero discrete divergence and
    discrete gradients are annihilated mode by mode.
    """
    g = f.grid
    kx, ky, kz = g.kvec
    k2 = kx**2 + ky**2 + kz**2
    zero = k2 == 0
    k2 = np.where(zero, 1.0, k2)
    c = f.coeffs
    kdotv = (kx * c[0] + ky * c[1] + kz * c[2]) / k2
    out = np.stack([c[0] - kx * kdotv, c[1] - ky * kdotv, c[2] - kz * kdotv])
    out[:, zero] = c[:, zero]
    return f.replace(out)


def make_mean_free(f: SpectralVectorField) -> SpectralVectorField:
    out = f.coeffs.copy()
    out[:, 0, 0, 0] = 0
    return f.replace(out)


def dealias(f: SpectralVectorField) -> SpectralVectorField:
    return f.replace(np.where(f.grid.dealias_mask, f.coeffs, 0))


def strip_nyquist(f: SpectralVectorField) -> SpectralVectorField:
    return f.replace(np.where(f.grid.nyquist_mask, 0, f.coeffs))


def divergence(f: SpectralVectorField) -> SpectralScalarField:
    kx, ky, kz = f.grid.kvec
    c = f.coeffs
    return SpectralScalarField(f.grid, 1j * (kx * c[0] + ky * c[1] + kz * c[2]))


def divergence_residual(f: SpectralVectorField) -> float:
    """``max |k . v_hat| / max |k| |v_hat|``: relative size of the divergence."""
    g = f.grid
    kx, ky, kz = g.kvec
    c = f.coeffs
    num = np.max(np.abs(kx * c[0] + ky * c[1] + kz * c[2]))
    kmag = np.sqrt(kx**2 + ky**2 + kz**2)
    den = np.max(kmag * np.sqrt(np.sum(np.abs(c) ** 2, axis=0)))
    if den == 0:
        return 0.0
    return float(num / den)


def gradient(phi: SpectralScalarField) -> SpectralVectorField:
    kx, ky, kz = phi.grid.kvec
    c = phi.coeffs
    return SpectralVectorField(phi.grid, np.stack([1j * kx * c, 1j * ky * c, 1j * kz * c]))


def zeros(grid: GridSpec) -> SpectralVectorField:
    return SpectralVectorField(grid, np.zeros((3, *grid.shape), dtype=np.complex128))


def gen_beltrami(grid: GridSpec, k: int = 1, amplitude: float = 1.0) -> SpectralVectorField:
    """``amplitude * (0, sin(k x), cos(k x))`` in box units, so that curl v = k v.

    ``k`` counts periods across the box; on a box of length L the physical
    wavenumber (and curl eigenvalue) is ``k * 2 pi / L``.
    """
    if int(k) != k or k < 1:
        raise OutOfBandError(f"Beltrami wavenumber must be a positive integer, got {k!r}")
    k = int(k)
    if k > grid.cutoff or k >= grid.n // 2:
        raise OutOfBandError(f"k={k} lies outside the retained band |k| <= {grid.cutoff}")
    c = np.zeros((3, *grid.shape), dtype=np.complex128)
    # sin(kx) = (e^{ikx} - e^{-ikx}) / 2i ; cos(kx) = (e^{ikx} + e^{-ikx}) / 2
    c[1, k, 0, 0] = -0.5j * amplitude
    c[1, -k, 0, 0] = 0.5j * amplitude
    c[2, k, 0, 0] = 0.5 * amplitude
    c[2, -k, 0, 0] = 0.5 * amplitude
    return SpectralVectorField(grid, c, label=f"beltrami(k={k})")


def gen_taylor_green(grid: GridSpec) -> SpectralVectorField:
    """``(sin x cos y cos z, -cos x sin y cos z, 0)`` in box units."""
    c = np.zeros((3, *grid.shape), dtype=np.complex128)
    for sx in (1, -1):
        for sy in (1, -1):
            for sz in (1, -1):
                c[0, sx, sy, sz] = -0.125j * sx
                c[1, sx, sy, sz] = 0.125j * sy
    return SpectralVectorField(grid, c, label="taylor_green")


def gen_random_solenoidal(
    grid: GridSpec, seed: int, decay_exponent: float = 2.0
) -> SpectralVectorField:
    """Seeded random member of H0 with spectral envelope ``|k|^-decay_exponent``.

    Draws come from numpy's counter-based Philox bit generator keyed by
    ``seed``: standard normal real and imaginary parts, shape (2, 3, n, n, n)
    in C order. The draw is symmetrized, enveloped, mean-freed, stripped of
    Nyquist modes, Leray-projected and dealiased, in that order.
    """
    if decay_exponent < 0:
        raise ValueError("decay_exponent must be >= 0")
    rng = np.random.Generator(np.random.Philox(seed))
    z = rng.standard_normal((2, 3, *grid.shape))
    c = symmetrize(grid, z[0] + 1j * z[1])
    kmag = np.sqrt(grid.kint_sq.astype(float))
    kmag[0, 0, 0] = 1.0
    c = c * kmag ** (-decay_exponent)
    f = SpectralVectorField(grid, c, label=f"random(seed={seed})")
    return dealias(leray_project(strip_nyquist(make_mean_free(f))))


def gen_random_field(grid: GridSpec, seed: int, decay_exponent: float = 1.0) -> SpectralVectorField:
    """Seeded random mean-free real field with no solenoidal constraint.

    Same draw as :func:`gen_random_solenoidal` but without the projection; the
    Nyquist plane is removed so odd derivatives stay real.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    z = rng.standard_normal((2, 3, *grid.shape))
    c = symmetrize(grid, z[0] + 1j * z[1])
    kmag = np.sqrt(grid.kint_sq.astype(float))
    kmag[0, 0, 0] = 1.0
    f = SpectralVectorField(grid, c * kmag ** (-decay_exponent), label=f"random_raw(seed={seed})")
    return strip_nyquist(make_mean_free(f))
