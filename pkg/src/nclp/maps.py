"""Linear maps between L^p spaces over finite-dimensional algebras.

A map is stored as a dense complex matrix acting on coordinate vectors
(block-major, point-major, row-major; see :meth:`Element.to_vector`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import AlgebraSpec, Element, full_matrix_algebra, subhomogeneous_degree


@dataclass(frozen=True, eq=False)
class LinearMap:
    source: AlgebraSpec
    target: AlgebraSpec
    p: float
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.shape != (self.target.dim, self.source.dim):
            raise ValueError(f"matrix shape {mat.shape} does not match "
                             f"{self.source.dim} -> {self.target.dim}")
        if not self.p >= 1 or not np.isfinite(self.p):
            raise ValueError(f"exponent must satisfy 1 <= p < inf, got {self.p}")
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def from_function(cls, source: AlgebraSpec, target: AlgebraSpec, p: float,
                      fn: Callable[[Element], Element]) -> "LinearMap":
        """Tabulate ``fn`` on the matrix-unit basis of ``source``."""
        cols = []
        for k in range(source.dim):
            e = np.zeros(source.dim, complex)
            e[k] = 1.0
            y = fn(Element.from_vector(source, e))
            if y.spec != target:
                raise ValueError("function returned an element of the wrong algebra")
            cols.append(y.to_vector())
        return cls(source, target, p, np.stack(cols, axis=1))

    @classmethod
    def identity(cls, spec: AlgebraSpec, p: float) -> "LinearMap":
        return cls(spec, spec, p, np.eye(spec.dim, dtype=complex))

    @classmethod
    def transpose_map(cls, spec: AlgebraSpec, p: float) -> "LinearMap":
        """Blockwise transposition (``t_n`` on every corner)."""
        return cls.from_function(spec, spec, p, lambda x: x.transpose())

    def __call__(self, x: Element) -> Element:
        if x.spec != self.source:
            raise ValueError("element does not belong to the source algebra")
        return Element.from_vector(self.target, self.matrix @ x.to_vector())

    def apply_columns(self, cols: np.ndarray) -> np.ndarray:
        return self.matrix @ cols

    def compose(self, other: "LinearMap") -> "LinearMap":
        """``self o other``."""
        if other.target != self.source:
            raise ValueError("cannot compose: algebras do not match")
        return LinearMap(other.source, self.target, self.p, self.matrix @ other.matrix)

    def __matmul__(self, other: "LinearMap") -> "LinearMap":
        return self.compose(other)

    def scaled(self, s: complex) -> "LinearMap":
        return LinearMap(self.source, self.target, self.p, s * self.matrix)

    def with_p(self, p: float) -> "LinearMap":
        return LinearMap(self.source, self.target, p, self.matrix)

    def rank(self, tol: float = 1e-10) -> int:
        if self.matrix.size == 0:
            return 0
        s = np.linalg.svd(self.matrix, compute_uv=False)
        return int(np.sum(s > tol * max(s[0], 1e-300)))

    def is_bijective(self, tol: float = 1e-10) -> bool:
        return self.source.dim == self.target.dim and self.rank(tol) == self.source.dim

    def inverse(self) -> "LinearMap":
        if self.source.dim != self.target.dim:
            raise ValueError("map between algebras of different dimension is not invertible")
        try:
            inv = np.linalg.inv(self.matrix)
        except np.linalg.LinAlgError as exc:
            raise ValueError("map is singular") from exc
        if not np.all(np.isfinite(inv)) or np.linalg.cond(self.matrix) > 1e12:
            raise ValueError("map is singular to working precision")
        return LinearMap(self.target, self.source, self.p, inv)

    def restrict(self, source_idx: np.ndarray, source: AlgebraSpec,
                 target_idx: np.ndarray, target: AlgebraSpec) -> "LinearMap":
        return LinearMap(source, target, self.p, self.matrix[np.ix_(target_idx, source_idx)])

    def adjoint_matrix(self) -> np.ndarray:
        """Matrix of the adjoint for the weighted pairing ``Re tau(z* y)``."""
        ws = self.source.coordinate_weights()
        wt = self.target.coordinate_weights()
        return (self.matrix.conj().T * wt[None, :]) / ws[:, None]

    def __repr__(self):
        return f"LinearMap({self.source.describe()} -> {self.target.describe()}, p={self.p:g})"


def embed_matrix_block(spec: AlgebraSpec, N: int, p: float) -> LinearMap:
    """Isometric copy of ``S^p_{N+1}`` inside ``L^p(spec)``.

    Picks the first corner of the first block with ``n >= N + 1`` and places
    ``a`` in its top-left ``(N+1) x (N+1)`` corner, i.e. ``a (x) eps`` with
    ``eps`` a rank-one projection of the relative commutant, scaled by
    ``||eps||_p^{-1} = mu^{-1/p}``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if subhomogeneous_degree(spec) < N + 1:
        raise ValueError(f"algebra is subhomogeneous of degree <= {N}; no M_{N + 1} block")
    corner = next(k for k, c in enumerate(spec.corners) if c.n >= N + 1)
    cr = spec.corners[corner]
    scale = cr.weight ** (-1.0 / p)
    small = full_matrix_algebra(N + 1)

    def gamma(a: Element) -> Element:
        x = Element.zeros(spec)
        x.data[corner][: N + 1, : N + 1] = scale * a.data[0]
        return x

    return LinearMap.from_function(small, spec, p, gamma)
