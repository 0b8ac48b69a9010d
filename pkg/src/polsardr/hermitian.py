"""Closed-form linear algebra for 3x3 Hermitian matrices.

Every function accepts stacked inputs of shape ``(..., 3, 3)`` (complex128)
and broadcasts over the leading axes, so the same code paths serve single
matrices and whole covariance images.  All operations are pure.
"""

from __future__ import annotations

import numpy as np

from .errors import NotPositiveDefinite, SingularMatrix

# A matrix counts as singular when |det| < DET_TOL; a Cholesky pivot fails
# when it drops below PIVOT_RTOL times the largest diagonal entry.
DET_TOL = 1e-300
PIVOT_RTOL = 1e-12


def identity() -> np.ndarray:
    return np.eye(3, dtype=np.complex128)


def assemble(d1, d2, d3, o12, o13, o23) -> np.ndarray:
    """Build Hermitian arrays from the six independent entries.

    ``d1, d2, d3`` are the (real) diagonal, ``o12, o13, o23`` the upper
    off-diagonal entries; the lower triangle is filled by conjugation, so the
    result is Hermitian by construction.
    """
    d1, d2, d3, o12, o13, o23 = np.broadcast_arrays(
        d1, d2, d3, np.asarray(o12, dtype=np.complex128),
        np.asarray(o13, dtype=np.complex128), np.asarray(o23, dtype=np.complex128)
    )
    out = np.empty(np.shape(d1) + (3, 3), dtype=np.complex128)
    out[..., 0, 0] = d1
    out[..., 1, 1] = d2
    out[..., 2, 2] = d3
    out[..., 0, 1] = o12
    out[..., 1, 0] = np.conj(o12)
    out[..., 0, 2] = o13
    out[..., 2, 0] = np.conj(o13)
    out[..., 1, 2] = o23
    out[..., 2, 1] = np.conj(o23)
    return out


def hermitian_part(m) -> np.ndarray:
    """Exactly symmetrize: 0.5 * (m + m^H)."""
    m = np.asarray(m, dtype=np.complex128)
    return 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))


def _entries(m):
    m = np.asarray(m, dtype=np.complex128)
    return (m[..., 0, 0].real, m[..., 1, 1].real, m[..., 2, 2].real,
            m[..., 0, 1], m[..., 0, 2], m[..., 1, 2])


def det3(m) -> np.ndarray | float:
    """Determinant of a Hermitian 3x3 matrix (real by hermitivity)."""
    a, d, f, b, c, e = _entries(m)
    det = (a * d * f
           - a * np.abs(e) ** 2
           - f * np.abs(b) ** 2
           - d * np.abs(c) ** 2
           + 2.0 * (b * e * np.conj(c)).real)
    return det if det.ndim else float(det)


def inv3(m) -> np.ndarray:
    """Cofactor inverse; Hermitian in, Hermitian out.

    Raises SingularMatrix when any determinant magnitude is below DET_TOL.
    """
    a, d, f, b, c, e = _entries(m)
    det = np.asarray(det3(m))
    if np.any(np.abs(det) < DET_TOL):
        raise SingularMatrix(f"|det| < {DET_TOL} (min |det| = {np.abs(det).min():.3e})")
    return assemble(
        (d * f - np.abs(e) ** 2) / det,
        (a * f - np.abs(c) ** 2) / det,
        (a * d - np.abs(b) ** 2) / det,
        (c * np.conj(e) - b * f) / det,
        (b * e - c * d) / det,
        (c * np.conj(b) - a * e) / det,
    )


def trace3(m) -> np.ndarray | float:
    m = np.asarray(m)
    t = (m[..., 0, 0] + m[..., 1, 1] + m[..., 2, 2]).real
    return t if t.ndim else float(t)


def trace_product(a, b) -> np.ndarray | float:
    """tr(a @ b) for Hermitian a, b (real-valued): sum_ij a_ij * conj(b_ij)."""
    t = np.einsum("...ij,...ij->...", np.asarray(a), np.conj(np.asarray(b))).real
    return t if t.ndim else float(t)


def cholesky3(m) -> np.ndarray:
    """Lower-triangular factor A with A @ A^H = m.

    Raises NotPositiveDefinite when a pivot is <= PIVOT_RTOL times the
    largest diagonal entry of the corresponding matrix.
    """
    a, d, f, b, c, e = _entries(m)
    tol = PIVOT_RTOL * np.maximum(np.maximum(a, d), f)

    p1 = a
    if np.any(p1 <= tol):
        raise NotPositiveDefinite("first Cholesky pivot below tolerance")
    l11 = np.sqrt(p1)
    l21 = np.conj(b) / l11
    l31 = np.conj(c) / l11
    p2 = d - np.abs(l21) ** 2
    if np.any(p2 <= tol):
        raise NotPositiveDefinite("second Cholesky pivot below tolerance")
    l22 = np.sqrt(p2)
    l32 = (np.conj(e) - l31 * np.conj(l21)) / l22
    p3 = f - np.abs(l31) ** 2 - np.abs(l32) ** 2
    if np.any(p3 <= tol):
        raise NotPositiveDefinite("third Cholesky pivot below tolerance")
    l33 = np.sqrt(p3)

    out = np.zeros(np.shape(np.asarray(p1)) + (3, 3), dtype=np.complex128)
    out[..., 0, 0] = l11
    out[..., 1, 0] = l21
    out[..., 1, 1] = l22
    out[..., 2, 0] = l31
    out[..., 2, 1] = l32
    out[..., 2, 2] = l33
    return out


def frobenius_distance(a, b) -> np.ndarray | float:
    d = np.sqrt(np.sum(np.abs(np.asarray(a) - np.asarray(b)) ** 2, axis=(-2, -1)))
    return d if d.ndim else float(d)


def convex_combine(a, b, t: float) -> np.ndarray:
    """(1 - t) * a + t * b; preserves positive definiteness for t in [0, 1]."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    return (1.0 - t) * np.asarray(a, dtype=np.complex128) + t * np.asarray(b, dtype=np.complex128)


def is_positive_definite(m) -> np.ndarray | bool:
    """True iff all three leading principal minors are strictly positive."""
    a, d, f, b, c, e = _entries(m)
    ok = (a > 0) & (a * d - np.abs(b) ** 2 > 0) & (np.asarray(det3(m)) > 0)
    return ok if ok.ndim else bool(ok)


# Packed layout shared with the binary image format:
# [C11, C22, C33, Re C12, Im C12, Re C13, Im C13, Re C23, Im C23]
def to_packed(m) -> np.ndarray:
    a, d, f, b, c, e = _entries(m)
    return np.stack([a, d, f, b.real, b.imag, c.real, c.imag, e.real, e.imag], axis=-1)


def from_packed(p) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.shape[-1] != 9:
        raise ValueError(f"packed arrays need a trailing axis of size 9, got {p.shape}")
    return assemble(
        p[..., 0], p[..., 1], p[..., 2],
        p[..., 3] + 1j * p[..., 4],
        p[..., 5] + 1j * p[..., 6],
        p[..., 7] + 1j * p[..., 8],
    )
