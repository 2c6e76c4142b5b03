"""Lattice geometry, region bookkeeping and the Dirichlet Laplacian.

Nodes are indexed row-major. A lattice with a single row is one-dimensional
(two neighbours per node), anything else is two-dimensional (four).
Neighbours outside the grid are Dirichlet zeros.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class Lattice:
    dims: tuple[int, int]
    input_sites: tuple[int, ...]
    output_region: tuple[int, ...]
    blocked_sites: frozenset[int] = field(default_factory=frozenset)
    # input site k is driven by component input_map[k] of the sample vector
    input_map: tuple[int, ...] | None = None

    def __post_init__(self):
        rows, cols = (int(d) for d in self.dims)
        if rows < 1 or cols < 1:
            raise LatticeError(f"dims must be positive, got {self.dims}")
        object.__setattr__(self, "dims", (rows, cols))
        object.__setattr__(self, "input_sites", tuple(int(i) for i in self.input_sites))
        object.__setattr__(self, "output_region", tuple(int(i) for i in self.output_region))
        object.__setattr__(self, "blocked_sites", frozenset(int(i) for i in self.blocked_sites))
        if self.input_map is None:
            object.__setattr__(self, "input_map", tuple(range(len(self.input_sites))))
        else:
            object.__setattr__(self, "input_map", tuple(int(i) for i in self.input_map))
        if len(self.input_map) != len(self.input_sites) or any(i < 0 for i in self.input_map):
            raise LatticeError("input_map must give a non-negative component for every input site")

        n = rows * cols
        if not self.output_region:
            raise LatticeError("output_region must be non-empty")
        for name in ("input_sites", "output_region"):
            idx = getattr(self, name)
            if len(set(idx)) != len(idx):
                raise LatticeError(f"{name} contains duplicates")
            if any(i < 0 or i >= n for i in idx):
                raise LatticeError(f"{name} index out of range for {n} nodes")
        if any(i < 0 or i >= n for i in self.blocked_sites):
            raise LatticeError(f"blocked_sites index out of range for {n} nodes")
        # Inputs and outputs may share nodes (pumped output cells); blocked
        # nodes must stay clear of both.
        if self.blocked_sites & (set(self.input_sites) | set(self.output_region)):
            raise LatticeError("blocked_sites overlap input or output nodes")

    @classmethod
    def chain(cls, n, input_sites, output_region, blocked_sites=()):
        return cls((1, n), tuple(input_sites), tuple(output_region), frozenset(blocked_sites))

    @property
    def rows(self) -> int:
        return self.dims[0]

    @property
    def cols(self) -> int:
        return self.dims[1]

    @property
    def size(self) -> int:
        return self.dims[0] * self.dims[1]

    @property
    def is_1d(self) -> bool:
        return self.dims[0] == 1

    @property
    def degree(self) -> int:
        return 2 if self.is_1d else 4

    @cached_property
    def neighbors(self) -> np.ndarray:
        """(size, degree) int array of neighbour indices, -1 where the neighbour is outside."""
        rows, cols = self.dims
        r, c = np.divmod(np.arange(self.size), cols)
        if self.is_1d:
            offsets = [(0, -1), (0, 1)]
        else:
            offsets = [(-1, 0), (1, 0), (0, -1), (0, 1)]
        out = np.full((self.size, len(offsets)), -1, dtype=np.int64)
        for k, (dr, dc) in enumerate(offsets):
            rr, cc = r + dr, c + dc
            ok = (rr >= 0) & (rr < rows) & (cc >= 0) & (cc < cols)
            out[ok, k] = rr[ok] * cols + cc[ok]
        return out

    @cached_property
    def blocked_mask(self) -> np.ndarray:
        mask = np.zeros(self.size, dtype=bool)
        mask[list(self.blocked_sites)] = True
        return mask

    def check_field(self, psi) -> np.ndarray:
        psi = np.asarray(psi)
        if psi.shape[-1:] != (self.size,):
            raise LatticeError(f"field of shape {psi.shape} does not match lattice with {self.size} nodes")
        return psi

    def to_dict(self) -> dict:
        return {
            "dims": list(self.dims),
            "input_sites": list(self.input_sites),
            "output_region": list(self.output_region),
            "blocked_sites": sorted(self.blocked_sites),
            "input_map": list(self.input_map),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Lattice":
        return cls(tuple(d["dims"]), tuple(d["input_sites"]), tuple(d["output_region"]),
                   frozenset(d.get("blocked_sites", ())), d.get("input_map"))


def zero_field(lat: Lattice, batch=()) -> np.ndarray:
    return np.zeros((*batch, lat.size), dtype=np.complex128)


def laplacian(psi, lat: Lattice) -> np.ndarray:
    """Nearest-neighbour stencil sum(nbrs) - degree * psi with Dirichlet zeros.

    Works on any leading batch axes; the last axis indexes nodes.
    """
    psi = lat.check_field(psi)
    grid = psi.reshape(*psi.shape[:-1], lat.rows, lat.cols)
    out = -lat.degree * grid.astype(np.complex128, copy=True)
    out[..., :, 1:] += grid[..., :, :-1]
    out[..., :, :-1] += grid[..., :, 1:]
    if not lat.is_1d:
        out[..., 1:, :] += grid[..., :-1, :]
        out[..., :-1, :] += grid[..., 1:, :]
    return out.reshape(psi.shape)


def region_values(psi, region) -> np.ndarray:
    psi = np.asarray(psi)
    idx = np.asarray(list(region), dtype=np.int64)
    n = psi.shape[-1]
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise IndexError(f"region index out of range for field with {n} nodes")
    return psi[..., idx]
