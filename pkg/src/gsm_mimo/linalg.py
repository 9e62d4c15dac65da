"""Small complex matrix kernel.

Matrices are plain ``complex128`` numpy arrays. Every operation also accepts
stacks of matrices (leading batch axes), which is how the simulator evaluates
all antenna-group combinations of a trial at once.
"""

import numpy as np

__all__ = [
    "DimensionError",
    "SingularMatrixError",
    "cmatrix",
    "identity",
    "matmul",
    "hermitian",
    "inverse",
    "trace",
]

# pivot threshold, relative to the largest initial row magnitude
SINGULAR_RTOL = 1e-12


class DimensionError(ValueError):
    """Operands have incompatible shapes."""


class SingularMatrixError(ValueError):
    """A pivot fell below the singularity threshold during elimination."""


def cmatrix(data):
    """Build a read-only complex matrix from nested sequences or an array.

    Raises
    ------
    ValueError
        If the input is not two-dimensional, is empty, or holds NaN/Inf.
    """
    a = np.array(data, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    a.setflags(write=False)
    return a


def identity(n):
    return cmatrix(np.eye(n))


def _check_matrix(a, name):
    if a.ndim < 2:
        raise DimensionError(f"{name} must be at least 2-D, got shape {a.shape}")


def matmul(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    _check_matrix(a, "a")
    _check_matrix(b, "b")
    if a.shape[-1] != b.shape[-2]:
        raise DimensionError(
            f"cannot multiply {a.shape[-2]}x{a.shape[-1]} by {b.shape[-2]}x{b.shape[-1]}"
        )
    return np.matmul(a, b)


def hermitian(a):
    """Conjugate transpose over the last two axes."""
    a = np.asarray(a)
    _check_matrix(a, "a")
    return np.conj(np.swapaxes(a, -1, -2))


def trace(a):
    a = np.asarray(a)
    _check_matrix(a, "a")
    if a.shape[-1] != a.shape[-2]:
        raise DimensionError(f"trace needs a square matrix, got {a.shape[-2:]}")
    return np.trace(a, axis1=-2, axis2=-1)


def inverse(a):
    """Invert a square matrix (or a stack of them).

    Gauss-Jordan elimination with partial pivoting on the augmented system
    ``[a | I]``. The elimination runs column by column over the whole stack,
    so the Python-level loop has only ``n`` iterations regardless of batch
    size.

    Raises
    ------
    SingularMatrixError
        If any pivot magnitude drops below ``1e-12`` times the largest
        initial row magnitude of its matrix.
    """
    a = np.asarray(a)
    _check_matrix(a, "a")
    n = a.shape[-1]
    if a.shape[-2] != n:
        raise DimensionError(f"inverse needs a square matrix, got {a.shape[-2:]}")

    batch_shape = a.shape[:-2]
    work = np.concatenate(
        [
            a.reshape(-1, n, n).astype(np.complex128, copy=True),
            np.broadcast_to(np.eye(n, dtype=np.complex128), (int(np.prod(batch_shape, dtype=int)), n, n)),
        ],
        axis=-1,
    )
    nb = work.shape[0]
    rows = np.arange(nb)
    # max over rows of the row infinity norm
    scale = np.abs(work[:, :, :n]).max(axis=(1, 2))
    threshold = SINGULAR_RTOL * scale

    for col in range(n):
        piv = col + np.argmax(np.abs(work[:, col:, col]), axis=1)
        if np.any(piv != col):
            top = work[rows, col].copy()
            work[rows, col] = work[rows, piv]
            work[rows, piv] = top
        pivot = work[:, col, col].copy()
        if np.any(~(np.abs(pivot) > threshold)):
            raise SingularMatrixError(
                f"matrix is singular to working precision (column {col})"
            )
        work[:, col] /= pivot[:, None]
        factors = work[:, :, col].copy()
        factors[:, col] = 0.0
        work -= factors[:, :, None] * work[:, col][:, None, :]

    return work[:, :, n:].reshape(*batch_shape, n, n)
