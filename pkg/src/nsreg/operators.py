"""Curl, fractional powers of A = -Laplacian, and the B-operators as spectral multipliers.

On the torus A is diagonal in the Fourier basis, so ``A^s`` multiplies the
amplitude at wavevector k by ``((2 pi / L)^2 |k|^2)^s``. The k = 0 mode is
outside the domain of every power: constants are modded out.

The operators

    B0 = A^-1 curl curl
    B1 = A^-1/2 curl
    B2 = curl A^-1/2
    B3(s) = A^((s-1)/2) B2 A^((1-s)/2)

are evaluated strictly by composition. On the periodic box all of these
multipliers commute, so B1, B2 and B3(s) coincide; this is a property of
the torus and does not carry over to bounded domains with boundary, which is
why the compositions are kept literal instead of simplified.
"""
from __future__ import annotations

import enum
import logging
import math
import warnings

import numpy as np

from .errors import NotAVorticityError, SingularModeError, UndefinedRatioError
from .fields import (
    SpectralVectorField,
    divergence_residual,
    make_mean_free,
)

logger = logging.getLogger(__name__)

MAX_ORDER = 8.0
VORTICITY_TOL = 1e-10


class OperatorTag(enum.Enum):
    A_POWER = "A_POWER"
    CURL = "CURL"
    B0 = "B0"
    B1 = "B1"
    B2 = "B2"
    B3 = "B3"


def check_order(s: float) -> float:
    s = float(s)
    if not math.isfinite(s) or abs(s) > MAX_ORDER:
        raise ValueError(f"fractional order must be finite with |s| <= {MAX_ORDER}, got {s}")
    return s


def curl(f: SpectralVectorField) -> SpectralVectorField:
    """Amplitudes ``i k x v_hat(k)``."""
    kx, ky, kz = f.grid.kvec
    c = f.coeffs
    out = np.stack(
        [
            1j * (ky * c[2] - kz * c[1]),
            1j * (kz * c[0] - kx * c[2]),
            1j * (kx * c[1] - ky * c[0]),
        ]
    )
    return f.replace(out)


def a_symbol(grid, s: float) -> np.ndarray:
    """Multiplier of ``A^s`` with the k = 0 entry set to zero."""
    ksq = grid.ksq.copy()
    ksq[0, 0, 0] = 1.0
    m = ksq**s
    m[0, 0, 0] = 0.0
    return m


def a_power(s: float, f: SpectralVectorField) -> SpectralVectorField:
    s = check_order(s)
    if not f.is_mean_free:
        if s < 0:
            raise SingularModeError(
                f"A^{s} is undefined on fields with a nonzero k = 0 mode; make the field mean-free first"
            )
        warnings.warn("a_power: input carries a mean; removing it", RuntimeWarning, stacklevel=2)
        f = make_mean_free(f)
    if s == 0:
        return f
    return f.replace(f.coeffs * a_symbol(f.grid, s))


def _require_mean_free(f: SpectralVectorField, name: str):
    # curl would silently drop the mean; B-operators act on mean-free fields only
    if not f.is_mean_free:
        raise SingularModeError(f"{name} is defined on mean-free fields only")


def b0_apply(f: SpectralVectorField) -> SpectralVectorField:
    _require_mean_free(f, "B0")
    return a_power(-1.0, curl(curl(f)))


def b1_apply(f: SpectralVectorField) -> SpectralVectorField:
    _require_mean_free(f, "B1")
    return a_power(-0.5, curl(f))


def b2_apply(f: SpectralVectorField) -> SpectralVectorField:
    return curl(a_power(-0.5, f))


def b3_apply(s: float, f: SpectralVectorField) -> SpectralVectorField:
    s = check_order(s)
    _require_mean_free(f, "B3")
    return a_power((s - 1) / 2, b2_apply(a_power((1 - s) / 2, f)))


def reconstruct_velocity(omega: SpectralVectorField) -> SpectralVectorField:
    """Recover u from its vorticity via ``u = A^-1 curl omega``."""
    if not omega.is_mean_free:
        raise NotAVorticityError("vorticity must be mean-free")
    r = divergence_residual(omega)
    if r > VORTICITY_TOL:
        raise NotAVorticityError(f"field is not solenoidal (relative divergence {r:.3e})")
    return a_power(-1.0, curl(omega))


def theorem1_residual(u: SpectralVectorField, s: float) -> float:
    """Relative mismatch ``||A^s u - A^(s-1) curl omega||_2 / ||A^s u||_2``, omega = curl u."""
    s = check_order(s)
    lhs = a_power(s, u)
    ref = lhs.l2_norm()
    if ref == 0:
        raise UndefinedRatioError("A^s u vanishes; relative residual undefined")
    rhs = a_power(s - 1, curl(curl(u)))
    return (lhs - rhs).l2_norm() / ref


def curl_curl_residual(v: SpectralVectorField) -> float:
    """Relative L2 error of ``A^-1 curl curl v = v``."""
    ref = v.l2_norm()
    if ref == 0:
        raise UndefinedRatioError("zero field")
    return (a_power(-1.0, curl(curl(v))) - v).l2_norm() / ref
