"""Dense third-order tensors, observation masks and mode-n (un)folding.

Storage is row-major over (interval, location, day), so entry
``(i1, i2, i3)`` lives at flat offset ``i1*n2*n3 + i2*n3 + i3``.

Unfolding follows the Kolda-Bader column map: for mode ``n`` the column of
entry ``(i1, i2, i3)`` is ``sum_{k != n} i_k * J_k`` with
``J_k = prod_{m < k, m != n} I_m``, i.e. the lowest remaining mode varies
fastest along the columns.
"""

from __future__ import annotations

from typing import Sequence, Tuple

import numpy as np

from .errors import DimensionError, ParameterError

Dims = Tuple[int, int, int]


def _check_dims(dims: Sequence[int]) -> Dims:
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3 or any(d < 1 for d in dims):
        raise DimensionError(f"dims must be three positive extents, got {dims}")
    return dims


def _check_mode(mode: int) -> int:
    if mode not in (0, 1, 2):
        raise ParameterError(f"mode must be 0, 1 or 2, got {mode!r}")
    return mode


class Tensor3:
    """Immutable dense third-order tensor of finite float64 values.

    Missing data never lives here as NaN: use a :class:`MaskTensor`.
    """

    __slots__ = ("_data",)

    def __init__(self, data):
        arr = np.array(data, dtype=np.float64, order="C", copy=True)
        if arr.ndim != 3 or 0 in arr.shape:
            raise DimensionError(f"expected a non-empty 3-d array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            bad = int(np.flatnonzero(~np.isfinite(arr.ravel()))[0])
            raise ParameterError(f"tensor contains a non-finite value at flat index {bad}")
        arr.setflags(write=False)
        self._data = arr

    @classmethod
    def from_flat(cls, dims: Sequence[int], flat) -> "Tensor3":
        dims = _check_dims(dims)
        flat = np.asarray(flat, dtype=np.float64).ravel()
        if flat.size != dims[0] * dims[1] * dims[2]:
            raise DimensionError(f"{flat.size} values do not fill dims {dims}")
        return cls(flat.reshape(dims))

    @classmethod
    def zeros(cls, dims: Sequence[int]) -> "Tensor3":
        return cls(np.zeros(_check_dims(dims)))

    @property
    def data(self) -> np.ndarray:
        """Read-only ``(n1, n2, n3)`` view."""
        return self._data

    @property
    def dims(self) -> Dims:
        return self._data.shape

    @property
    def size(self) -> int:
        return self._data.size

    def flat(self) -> np.ndarray:
        """Values in canonical linearization order."""
        return self._data.ravel()

    def __array__(self, dtype=None, copy=None):
        if dtype is None or np.dtype(dtype) == self._data.dtype:
            return self._data.copy() if copy else self._data
        return self._data.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, Tensor3):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self._data, other._data)

    __hash__ = None

    def __repr__(self):
        return f"Tensor3(dims={self.dims})"


class MaskTensor:
    """Binary observation indicator, 1 where an entry is observed."""

    __slots__ = ("_bits",)

    def __init__(self, bits):
        arr = np.asarray(bits)
        if arr.ndim != 3 or 0 in arr.shape:
            raise DimensionError(f"expected a non-empty 3-d array, got shape {arr.shape}")
        if arr.dtype == np.bool_:
            arr = arr.astype(np.uint8)
        else:
            if not np.all((arr == 0) | (arr == 1)):
                raise ParameterError("mask entries must be exactly 0 or 1")
            arr = arr.astype(np.uint8)
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        self._bits = arr

    @classmethod
    def ones(cls, dims: Sequence[int]) -> "MaskTensor":
        return cls(np.ones(_check_dims(dims), dtype=np.uint8))

    @classmethod
    def zeros(cls, dims: Sequence[int]) -> "MaskTensor":
        return cls(np.zeros(_check_dims(dims), dtype=np.uint8))

    @property
    def bits(self) -> np.ndarray:
        """Read-only ``uint8`` array of shape ``dims``."""
        return self._bits

    @property
    def dims(self) -> Dims:
        return self._bits.shape

    @property
    def size(self) -> int:
        return self._bits.size

    def as_bool(self) -> np.ndarray:
        return self._bits.astype(bool)

    def count(self) -> int:
        """Number of observed (1) entries."""
        return int(np.count_nonzero(self._bits))

    def complement(self) -> "MaskTensor":
        return MaskTensor(1 - self._bits)

    def __and__(self, other: "MaskTensor") -> "MaskTensor":
        _same_dims(self, other)
        return MaskTensor(self._bits & other._bits)

    def __or__(self, other: "MaskTensor") -> "MaskTensor":
        _same_dims(self, other)
        return MaskTensor(self._bits | other._bits)

    def __array__(self, dtype=None, copy=None):
        if dtype is None or np.dtype(dtype) == self._bits.dtype:
            return self._bits.copy() if copy else self._bits
        return self._bits.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, MaskTensor):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self._bits, other._bits)

    __hash__ = None

    def __repr__(self):
        return f"MaskTensor(dims={self.dims}, observed={self.count()})"


def _same_dims(a, b):
    if tuple(a.dims) != tuple(b.dims):
        raise DimensionError(f"dimension mismatch: {tuple(a.dims)} vs {tuple(b.dims)}")


def unfold_shape(dims: Sequence[int], mode: int) -> Tuple[int, int]:
    dims = _check_dims(dims)
    mode = _check_mode(mode)
    return dims[mode], dims[0] * dims[1] * dims[2] // dims[mode]


def unfold(t, mode: int) -> np.ndarray:
    """Mode-``mode`` unfolding of a third-order tensor.

    Parameters
    ----------
    t : Tensor3 or array_like
        Tensor of shape ``(n1, n2, n3)``.
    mode : {0, 1, 2}

    Returns
    -------
    ndarray
        Matrix of shape ``(I_mode, prod of the other extents)``.
    """
    mode = _check_mode(mode)
    arr = np.asarray(t)
    if arr.ndim != 3:
        raise DimensionError(f"expected a 3-d tensor, got shape {arr.shape}")
    return np.reshape(np.moveaxis(arr, mode, 0), (arr.shape[mode], -1), order="F")


def fold(m, mode: int, dims: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`unfold`; returns an ``ndarray`` of shape ``dims``."""
    dims = _check_dims(dims)
    mode = _check_mode(mode)
    m = np.asarray(m)
    if m.shape != unfold_shape(dims, mode):
        raise DimensionError(
            f"matrix shape {m.shape} does not match mode-{mode} unfolding "
            f"{unfold_shape(dims, mode)} of dims {dims}"
        )
    rest = [d for k, d in enumerate(dims) if k != mode]
    arr = np.reshape(m, (dims[mode], *rest), order="F")
    return np.ascontiguousarray(np.moveaxis(arr, 0, mode))


def fold_tensor(m, mode: int, dims: Sequence[int]) -> Tensor3:
    return Tensor3(fold(m, mode, dims))


def frobenius_norm(t) -> float:
    return float(np.linalg.norm(np.asarray(t).ravel()))


def inner_product(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.dot(a.ravel(), b.ravel()))


def hadamard(t, mask) -> np.ndarray:
    """Zero every entry of ``t`` where ``mask`` is 0."""
    a, m = np.asarray(t), np.asarray(mask)
    if a.shape != m.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {m.shape}")
    return np.where(m.astype(bool), a, 0.0)


def axpy(alpha: float, x, y) -> np.ndarray:
    """``alpha * x + y`` elementwise."""
    x, y = np.asarray(x), np.asarray(y)
    if x.shape != y.shape:
        raise DimensionError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return alpha * x + y


def scale(alpha: float, x) -> np.ndarray:
    return alpha * np.asarray(x)
