"""Finite-dimensional tracial von Neumann algebras.

An algebra is a finite direct sum of blocks ``L^inf(Omega_j; M_{n_j})`` with
finite ``Omega_j``.  Each pair (block, point) is a *corner*: a full matrix
algebra ``M_n`` carrying the trace weight ``mu(omega)``.  Elements are stored
as one complex ``n x n`` array per corner, in block-major, point-major order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np

TOL_ALG = 1e-9


class Corner(NamedTuple):
    block: int
    point: int
    n: int
    weight: float
    offset: int  # start of this corner in the coordinate vector


@dataclass(frozen=True)
class Block:
    n: int
    weights: tuple[float, ...]

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"block size must be a positive integer, got {self.n!r}")
        if len(self.weights) == 0:
            raise ValueError("a block needs at least one point")
        if any(not np.isfinite(w) or w <= 0 for w in self.weights):
            raise ValueError(f"trace weights must be finite and > 0, got {self.weights}")


@dataclass(frozen=True)
class AlgebraSpec:
    blocks: tuple[Block, ...]

    def __post_init__(self):
        if len(self.blocks) == 0:
            raise ValueError("an algebra needs at least one block")

    @cached_property
    def corners(self) -> tuple[Corner, ...]:
        out = []
        offset = 0
        for j, blk in enumerate(self.blocks):
            for k, w in enumerate(blk.weights):
                out.append(Corner(j, k, blk.n, float(w), offset))
                offset += blk.n * blk.n
        return tuple(out)

    @property
    def dim(self) -> int:
        """Complex dimension, ``sum |Omega_j| n_j^2``."""
        return sum(c.n * c.n for c in self.corners)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(c.n for c in self.corners)

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.corners])

    def coordinate_weights(self) -> np.ndarray:
        """Trace weight of every coordinate (used for the weighted pairing)."""
        return np.concatenate([np.full(c.n * c.n, c.weight) for c in self.corners])

    def corner_slice(self, c: int) -> slice:
        cr = self.corners[c]
        return slice(cr.offset, cr.offset + cr.n * cr.n)

    def tensor(self, m: int) -> "AlgebraSpec":
        """The algebra ``M (x) M_m``: every block size multiplied by ``m``."""
        if m < 1:
            raise ValueError("m must be >= 1")
        return AlgebraSpec(tuple(Block(b.n * m, b.weights) for b in self.blocks))

    def restrict(self, corners: Sequence[int]) -> tuple["AlgebraSpec", np.ndarray]:
        """Summand spanned by the given corners, with the coordinate index map.

        Corners keep their original order; corners sharing a block stay in one
        block.  Returns ``(subspec, idx)`` such that ``v_sub = v[idx]``.
        """
        corners = sorted(set(int(c) for c in corners))
        if not corners:
            raise ValueError("cannot restrict to an empty set of corners")
        groups: dict[int, list[int]] = {}
        for c in corners:
            groups.setdefault(self.corners[c].block, []).append(c)
        blocks = []
        idx = []
        for j in sorted(groups):
            cs = groups[j]
            blocks.append(Block(self.blocks[j].n, tuple(self.corners[c].weight for c in cs)))
            for c in cs:
                sl = self.corner_slice(c)
                idx.extend(range(sl.start, sl.stop))
        return AlgebraSpec(tuple(blocks)), np.array(idx, dtype=int)

    def describe(self) -> str:
        parts = []
        for b in self.blocks:
            ws = ",".join(f"{w:g}" for w in b.weights)
            parts.append(f"M{b.n}[{ws}]")
        return " + ".join(parts)


def make_algebra(blocks: Iterable[tuple[int, Sequence[float]]]) -> AlgebraSpec:
    """Validated spec from ``[(n, [mu_1, ...]), ...]``."""
    out = []
    for item in blocks:
        n, weights = item
        if isinstance(weights, (int, float)):
            weights = [weights]
        out.append(Block(int(n) if float(n).is_integer() else n, tuple(float(w) for w in weights)))
    return AlgebraSpec(tuple(out))


def full_matrix_algebra(n: int, weight: float = 1.0) -> AlgebraSpec:
    return make_algebra([(n, [weight])])


class Element:
    """A member of a finite-dimensional algebra (and of every L^p over it)."""

    __slots__ = ("spec", "data")

    def __init__(self, spec: AlgebraSpec, data: Sequence[np.ndarray]):
        if len(data) != len(spec.corners):
            raise ValueError(f"expected {len(spec.corners)} corner matrices, got {len(data)}")
        arrs = []
        for cr, a in zip(spec.corners, data):
            a = np.asarray(a, dtype=complex)
            if a.shape != (cr.n, cr.n):
                raise ValueError(f"corner {cr.block}/{cr.point}: expected shape {(cr.n, cr.n)}, got {a.shape}")
            arrs.append(a)
        self.spec = spec
        self.data = tuple(arrs)

    # construction ---------------------------------------------------------
    @classmethod
    def zeros(cls, spec: AlgebraSpec) -> "Element":
        return cls(spec, [np.zeros((c.n, c.n), complex) for c in spec.corners])

    @classmethod
    def identity(cls, spec: AlgebraSpec) -> "Element":
        return cls(spec, [np.eye(c.n, dtype=complex) for c in spec.corners])

    @classmethod
    def from_vector(cls, spec: AlgebraSpec, v: np.ndarray) -> "Element":
        v = np.asarray(v, dtype=complex).ravel()
        if v.size != spec.dim:
            raise ValueError(f"vector of length {v.size} does not match dim {spec.dim}")
        return cls(spec, [v[spec.corner_slice(i)].reshape(c.n, c.n) for i, c in enumerate(spec.corners)])

    @classmethod
    def unit(cls, spec: AlgebraSpec, corner: int, i: int, j: int) -> "Element":
        """Matrix unit ``e_ij`` in one corner."""
        x = cls.zeros(spec)
        x.data[corner][i, j] = 1.0
        return x

    @classmethod
    def corner_projection(cls, spec: AlgebraSpec, corners: Iterable[int]) -> "Element":
        chosen = set(corners)
        return cls(spec, [np.eye(c.n, dtype=complex) if k in chosen else np.zeros((c.n, c.n), complex)
                          for k, c in enumerate(spec.corners)])

    def to_vector(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.data])

    # *-algebra structure --------------------------------------------------
    def _check(self, other: "Element"):
        if not isinstance(other, Element):
            return NotImplemented
        if other.spec != self.spec:
            raise ValueError("operands live in different algebras")

    def __add__(self, other):
        self._check(other)
        return Element(self.spec, [a + b for a, b in zip(self.data, other.data)])

    def __sub__(self, other):
        self._check(other)
        return Element(self.spec, [a - b for a, b in zip(self.data, other.data)])

    def __neg__(self):
        return Element(self.spec, [-a for a in self.data])

    def __mul__(self, s):
        if isinstance(s, Element):
            raise TypeError("use @ for the algebra product")
        return Element(self.spec, [s * a for a in self.data])

    __rmul__ = __mul__

    def __truediv__(self, s):
        return Element(self.spec, [a / s for a in self.data])

    def __matmul__(self, other):
        self._check(other)
        return Element(self.spec, [a @ b for a, b in zip(self.data, other.data)])

    @property
    def H(self) -> "Element":
        return Element(self.spec, [a.conj().T for a in self.data])

    def transpose(self) -> "Element":
        return Element(self.spec, [a.T for a in self.data])

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(a))) if a.size else 0.0 for a in self.data)

    def opnorm(self) -> float:
        """Operator norm (max singular value over corners)."""
        return max(float(np.linalg.norm(a, 2)) for a in self.data)

    def __repr__(self):
        return f"Element({self.spec.describe()}, dim={self.spec.dim})"


def trace(x: Element) -> complex:
    """Weighted trace ``sum mu_j(omega) Tr(x_{j,omega})``."""
    return complex(sum(c.weight * np.trace(a) for c, a in zip(x.spec.corners, x.data)))


def multiply(x: Element, y: Element) -> Element:
    return x @ y


def adjoint(x: Element) -> Element:
    return x.H


def distance(x: Element, y: Element) -> float:
    """Max-entry distance; scale-aware callers multiply tolerances themselves."""
    return (x - y).max_abs()


def allclose(x: Element, y: Element, tol: float = TOL_ALG) -> bool:
    return distance(x, y) <= tol


def minimal_central_projections(spec: AlgebraSpec) -> list[Element]:
    """One central projection per corner; they partition the unit."""
    return [Element.corner_projection(spec, [k]) for k in range(len(spec.corners))]


def is_projection(x: Element, tol: float = TOL_ALG) -> bool:
    return allclose(x @ x, x, tol) and allclose(x.H, x, tol)


def subhomogeneous_degree(spec: AlgebraSpec) -> int:
    return max(b.n for b in spec.blocks)


def opposite(spec: AlgebraSpec) -> AlgebraSpec:
    """``M^op``, realized on the same block structure through transposition."""
    return spec


def op_iso(x: Element) -> Element:
    """The *-isomorphism ``M^op -> M``: blockwise transposition."""
    return x.transpose()


# random sampling ---------------------------------------------------------

def random_matrix(rng: np.random.Generator, n: int, k: int | None = None) -> np.ndarray:
    k = n if k is None else k
    return (rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))) / np.sqrt(2)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(random_matrix(rng, n))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_element(spec: AlgebraSpec, rng: np.random.Generator, hermitian: bool = False) -> Element:
    data = [random_matrix(rng, c.n) for c in spec.corners]
    if hermitian:
        data = [(a + a.conj().T) / 2 for a in data]
    return Element(spec, data)


def random_block_unitary(spec: AlgebraSpec, rng: np.random.Generator) -> Element:
    return Element(spec, [random_unitary(rng, c.n) for c in spec.corners])


def random_algebra(rng: np.random.Generator, max_n: int = 3, max_dim: int = 25,
                   max_blocks: int = 3, max_points: int = 2, min_n: int = 1) -> AlgebraSpec:
    """Random small spec with total dimension at most ``max_dim``."""
    while True:
        nb = int(rng.integers(1, max_blocks + 1))
        sizes = sorted({int(rng.integers(min_n, max_n + 1)) for _ in range(nb)})
        blocks = []
        for n in sizes:
            pts = int(rng.integers(1, max_points + 1))
            blocks.append((n, [float(rng.uniform(0.5, 2.0)) for _ in range(pts)]))
        spec = make_algebra(blocks)
        if spec.dim <= max_dim:
            return spec
