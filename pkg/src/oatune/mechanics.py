"""Stiffness-matrix algebra in Voigt notation (order 11, 22, 33, 23, 13, 12).

Rotations of 6x6 stiffness matrices are applied through the Mandel (Kelvin)
representation, where a 3-D rotation acts as an orthonormal 6x6 congruence;
this keeps positive definiteness and the Mandel eigenvalue spectrum exact.
"""

from __future__ import annotations

import numpy as np


class MechanicsError(ValueError):
    """Raised for non-symmetric, singular, or non-positive-definite stiffness input."""


# Voigt index -> tensor index pair
_VOIGT_PAIRS = ((0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1))

# Upper-triangle (row-major) component order: Q11, Q12, ..., Q16, Q22, ..., Q66
_TRIU_ROWS, _TRIU_COLS = np.triu_indices(6)

# Voigt <-> Mandel diagonal scaling
_MANDEL = np.diag([1.0, 1.0, 1.0, np.sqrt(2.0), np.sqrt(2.0), np.sqrt(2.0)])
_MANDEL_INV = np.diag([1.0, 1.0, 1.0, 1 / np.sqrt(2.0), 1 / np.sqrt(2.0), 1 / np.sqrt(2.0)])


def components_to_matrix(q) -> np.ndarray:
    """Assemble the symmetric 6x6 stiffness from its 21 upper-triangle components."""
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (21,):
        raise MechanicsError(f"expected 21 stiffness components, got shape {q.shape}")
    c = np.zeros((6, 6))
    c[_TRIU_ROWS, _TRIU_COLS] = q
    c[_TRIU_COLS, _TRIU_ROWS] = q
    return c


def matrix_to_components(c: np.ndarray) -> np.ndarray:
    """Extract the 21 upper-triangle components (row-major) of a 6x6 matrix."""
    c = np.asarray(c, dtype=np.float64)
    if c.shape != (6, 6):
        raise MechanicsError(f"expected a 6x6 matrix, got shape {c.shape}")
    return c[_TRIU_ROWS, _TRIU_COLS].copy()


def assemble_orthotropic(e1: float, e2: float, e3: float, nu: float) -> np.ndarray:
    """Orthotropic stiffness from axis moduli and one mean Poisson ratio.

    The normal block inverts the compliance S_ii = 1/E_i,
    S_ij = -nu/sqrt(E_i E_j) (i != j), which is positive definite for any
    nu in (-1, 0.5); shear moduli are G_ij = sqrt(E_i E_j)/(2 (1 + nu)).
    """
    if min(e1, e2, e3) <= 0:
        raise MechanicsError(f"axis moduli must be positive, got {(e1, e2, e3)}")
    if not -1.0 < nu < 0.5:
        raise MechanicsError(f"poisson ratio {nu} outside (-1, 0.5)")
    e = np.array([e1, e2, e3])
    s = -nu / np.sqrt(np.outer(e, e))
    np.fill_diagonal(s, 1.0 / e)
    c = np.zeros((6, 6))
    c[:3, :3] = np.linalg.inv(s)
    c[3, 3] = np.sqrt(e2 * e3) / (2.0 * (1.0 + nu))  # G23
    c[4, 4] = np.sqrt(e1 * e3) / (2.0 * (1.0 + nu))  # G13
    c[5, 5] = np.sqrt(e1 * e2) / (2.0 * (1.0 + nu))  # G12
    return c


def rotation_matrix(g1: float, g2: float, g3: float) -> np.ndarray:
    """Rotation by Euler angles about the fixed x, y, z axes: R = Rz(g3) Ry(g2) Rx(g1)."""
    c1, s1 = np.cos(g1), np.sin(g1)
    c2, s2 = np.cos(g2), np.sin(g2)
    c3, s3 = np.cos(g3), np.sin(g3)
    rx = np.array([[1, 0, 0], [0, c1, -s1], [0, s1, c1]])
    ry = np.array([[c2, 0, s2], [0, 1, 0], [-s2, 0, c2]])
    rz = np.array([[c3, -s3, 0], [s3, c3, 0], [0, 0, 1]])
    return rz @ ry @ rx


def mandel_rotation(r: np.ndarray) -> np.ndarray:
    """Orthonormal 6x6 representation of a 3-D rotation on symmetric tensors."""
    q = np.empty((6, 6))
    root2 = np.sqrt(2.0)
    for a, (i, j) in enumerate(_VOIGT_PAIRS):
        for b, (k, l) in enumerate(_VOIGT_PAIRS):
            if i == j and k == l:
                q[a, b] = r[i, k] * r[i, k]
            elif i == j:
                q[a, b] = root2 * r[i, k] * r[i, l]
            elif k == l:
                q[a, b] = root2 * r[i, k] * r[j, k]
            else:
                q[a, b] = r[i, k] * r[j, l] + r[i, l] * r[j, k]
    return q


def rotate_stiffness(c: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Rotate a Voigt stiffness matrix by the 3-D rotation r."""
    q = mandel_rotation(r)
    c_mandel = _MANDEL @ c @ _MANDEL
    rotated = q @ c_mandel @ q.T
    return _MANDEL_INV @ rotated @ _MANDEL_INV


def to_mandel(c: np.ndarray) -> np.ndarray:
    """Voigt stiffness -> Mandel form (congruence by diag(1,1,1,sqrt2,sqrt2,sqrt2))."""
    return _MANDEL @ np.asarray(c, dtype=np.float64) @ _MANDEL


def engineering_constants(q) -> tuple[float, float, float]:
    """Directional moduli (E11, E22, E33) from a symmetric positive-definite stiffness.

    Accepts either the 21-component vector or the full 6x6 matrix.
    """
    q = np.asarray(q, dtype=np.float64)
    c = components_to_matrix(q) if q.shape == (21,) else q
    if c.shape != (6, 6):
        raise MechanicsError(f"expected 21 components or a 6x6 matrix, got shape {q.shape}")
    if not np.allclose(c, c.T, rtol=1e-10, atol=1e-10):
        raise MechanicsError("stiffness matrix is not symmetric")
    eigvals = np.linalg.eigvalsh(c)
    if eigvals.min() <= 0:
        raise MechanicsError(
            f"stiffness matrix is not positive definite (min eigenvalue {eigvals.min():g})"
        )
    s = np.linalg.inv(c)
    return 1.0 / s[0, 0], 1.0 / s[1, 1], 1.0 / s[2, 2]
