"""Seeded synthesis of random (RM) and fiber-structured (FM-n) missingness.

Reproducibility contract: every mask is drawn from a fresh
``numpy.random.Generator(PCG64(seed))``. Exactly one draw is made per
call, ``rng.permutation(n_units)``, and its first ``count`` entries are the
removed units. Units are flat entry offsets for RM and, for FM-n, flat
offsets into the row-major grid of the two remaining modes (e.g. FM-0
units are ``(location, day)`` pairs ``i2 * n3 + i3``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, ParameterError, UnrecoverableMaskError
from .tensor_core import MaskTensor, _check_dims, _check_mode


class Pattern(str, enum.Enum):
    RM = "rm"
    FM0 = "fm0"
    FM1 = "fm1"
    FM2 = "fm2"

    @classmethod
    def parse(cls, name: str) -> "Pattern":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("-", "")
        try:
            return cls(key)
        except ValueError:
            raise ParameterError(f"unknown missing pattern {name!r}") from None

    @property
    def fiber_mode(self):
        """Mode whose fibers are removed, ``None`` for RM."""
        return None if self is Pattern.RM else int(self.value[2])


@dataclass(frozen=True)
class MissingSpec:
    pattern: Pattern
    rate: float
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "pattern", Pattern.parse(self.pattern))
        if not 0.0 < self.rate < 1.0:
            raise ParameterError(f"missing rate must lie in (0, 1), got {self.rate}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        object.__setattr__(self, "seed", int(self.seed))


def _removed_units(n_units: int, rate: float, seed: int) -> np.ndarray:
    # round() is half-to-even
    count = round(rate * n_units)
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.permutation(n_units)[:count]


def generate_mask(dims: Sequence[int], spec: MissingSpec) -> MaskTensor:
    """Observation mask (1 = kept) for ``dims`` following ``spec``.

    RM removes ``round(rate * n1*n2*n3)`` entries. FM-n removes
    ``round(rate * U)`` whole mode-n fibers out of the ``U`` fibers
    spanned by the other two modes.

    Raises
    ------
    UnrecoverableMaskError
        If nothing would remain observed.
    """
    dims = _check_dims(dims)
    mode = spec.pattern.fiber_mode
    if mode is None:
        bits = np.ones(dims[0] * dims[1] * dims[2], dtype=np.uint8)
        bits[_removed_units(bits.size, spec.rate, spec.seed)] = 0
        bits = bits.reshape(dims)
    else:
        rest = tuple(d for k, d in enumerate(dims) if k != mode)
        fibers = np.ones(rest[0] * rest[1], dtype=np.uint8)
        fibers[_removed_units(fibers.size, spec.rate, spec.seed)] = 0
        fibers = np.expand_dims(fibers.reshape(rest), mode)
        bits = np.ascontiguousarray(np.broadcast_to(fibers, dims))
    if not bits.any():
        raise UnrecoverableMaskError(
            f"{spec.pattern.value} at rate {spec.rate} removes every entry of dims {dims}"
        )
    return MaskTensor(bits)


def fiber_structure_check(P, mode: int) -> bool:
    """True iff every mode-``mode`` fiber is entirely observed or entirely missing."""
    mode = _check_mode(mode)
    bits = np.asarray(P)
    if bits.ndim != 3:
        raise DimensionError(f"expected a 3-d mask, got shape {bits.shape}")
    return bool(np.array_equal(bits.min(axis=mode), bits.max(axis=mode)))
