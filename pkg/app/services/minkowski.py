"""
Lorentz-Minkowski 4-space R^4_1 and its complexification.

Vectors are plain numpy arrays whose last axis has length 4, index 0 timelike,
signature (-,+,+,+). Every operation broadcasts over leading axes, so a whole
grid of vectors can be handled in one call.
"""
from enum import Enum

import numpy as np
from numpy.typing import NDArray

from app.errors import ZeroVector

RVec4 = NDArray[np.float64]
CVec4 = NDArray[np.complex128]

# Diagonal of the Lorentz form
SIGNATURE = np.array([-1.0, 1.0, 1.0, 1.0])

# Default threshold on |<v,v>| below which a vector counts as lightlike
LIGHTLIKE_TOL = 1e-12


class CausalCharacter(str, Enum):
    SPACELIKE = "spacelike"
    TIMELIKE = "timelike"
    LIGHTLIKE = "lightlike"


def lorentz_dot(u, v) -> np.ndarray | float:
    """-u0 v0 + u1 v1 + u2 v2 + u3 v3 over the last axis."""
    result = np.einsum("...i,...i->...", SIGNATURE * np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    return float(result) if np.ndim(result) == 0 else result


def clorentz_dot(u, v) -> np.ndarray | complex:
    """Complex bilinear (not Hermitian) extension of the Lorentz form."""
    result = np.einsum("...i,...i->...", SIGNATURE * np.asarray(u, dtype=complex), np.asarray(v, dtype=complex))
    return complex(result) if np.ndim(result) == 0 else result


def hermitian_dot(u, v) -> np.ndarray | complex:
    """<u, conj v>; real and equal to |f_w|-type quantities for null f_w."""
    return clorentz_dot(u, np.conj(np.asarray(v, dtype=complex)))


def causal_character(v, tol: float = LIGHTLIKE_TOL) -> CausalCharacter:
    vector = np.asarray(v, dtype=float)
    if not np.any(vector):
        raise ZeroVector("causal character of the zero vector is undefined")
    norm2 = lorentz_dot(vector, vector)
    if abs(norm2) <= tol:
        return CausalCharacter.LIGHTLIKE
    return CausalCharacter.SPACELIKE if norm2 > 0 else CausalCharacter.TIMELIKE


def basis(index: int) -> RVec4:
    vector = np.zeros(4)
    vector[index] = 1.0
    return vector
