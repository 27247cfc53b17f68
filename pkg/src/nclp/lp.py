"""L^p norms, polar decomposition, spectral projections and matrix amplification."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import AlgebraSpec, Element

TOL_NORM = 1e-8
SUPPORT_CUT = 1e-10
CLUSTER_GAP = 1e-10


def check_exponent(p: float) -> float:
    p = float(p)
    if not (p >= 1 and np.isfinite(p)):
        raise ValueError(f"exponent must satisfy 1 <= p < inf, got {p}")
    return p


def conjugate_exponent(p: float) -> float:
    """``p' = p / (p - 1)``; infinite for ``p = 1``."""
    p = check_exponent(p)
    return np.inf if p == 1 else p / (p - 1)


def singular_values(x: Element) -> list[np.ndarray]:
    return [np.linalg.svd(a, compute_uv=False) for a in x.data]


def lp_norm_from_singular_values(svals: Sequence[np.ndarray], weights: Sequence[float], p: float) -> float:
    total = sum(w * float(np.sum(s ** p)) for s, w in zip(svals, weights))
    return total ** (1.0 / p)


def lp_norm(x: Element, p: float) -> float:
    """``tau(|x|^p)^{1/p}``, computed from singular values of every corner."""
    p = check_exponent(p)
    return lp_norm_from_singular_values(singular_values(x), [c.weight for c in x.spec.corners], p)


def _global_cut(svals: Sequence[np.ndarray]) -> float:
    top = max((float(s[0]) for s in svals if s.size), default=0.0)
    return SUPPORT_CUT * top


def polar(x: Element) -> tuple[Element, Element]:
    """``x = w B`` with ``B = |x|`` and ``w* w = s(B)``.

    Singular values below ``1e-10 * max`` are treated as zero, so ``w``
    vanishes on the numerical kernel of ``B``.
    """
    svds = [np.linalg.svd(a) for a in x.data]
    cut = _global_cut([s for _, s, _ in svds])
    ws, bs = [], []
    for u, s, vh in svds:
        keep = s > cut
        ur, sr, vr = u[:, keep], s[keep], vh[keep, :]
        ws.append(ur @ vr)
        bs.append((vr.conj().T * sr) @ vr)
    return Element(x.spec, ws), Element(x.spec, bs)


def absolute_value(x: Element) -> Element:
    return polar(x)[1]


def support_projection(b: Element) -> Element:
    """Range projection of a positive (or arbitrary) element."""
    svds = [np.linalg.svd(a) for a in b.data]
    cut = _global_cut([s for _, s, _ in svds])
    out = []
    for u, s, _ in svds:
        ur = u[:, s > cut]
        out.append(ur @ ur.conj().T)
    return Element(b.spec, out)


def pseudo_inverse(b: Element) -> Element:
    """Inverse of ``b`` on its support, zero elsewhere (same cut as :func:`polar`)."""
    svds = [np.linalg.svd(a) for a in b.data]
    cut = _global_cut([s for _, s, _ in svds])
    out = []
    for u, s, vh in svds:
        keep = s > cut
        out.append((vh[keep, :].conj().T / s[keep]) @ u[:, keep].conj().T)
    return Element(b.spec, out)


def positive_power(b: Element, t: float) -> Element:
    """``b^t`` for positive ``b`` (zero on the kernel when ``t > 0``)."""
    out = []
    for a in b.data:
        lam, v = np.linalg.eigh((a + a.conj().T) / 2)
        lam = np.clip(lam, 0.0, None)
        out.append((v * lam ** t) @ v.conj().T if t != 0 else v @ v.conj().T)
    return Element(b.spec, out)


def _clusters(lam: np.ndarray, gap: float) -> list[np.ndarray]:
    order = np.argsort(lam)
    groups, cur = [], [order[0]]
    for a, b in zip(order[:-1], order[1:]):
        if lam[b] - lam[a] > gap:
            groups.append(np.array(cur))
            cur = []
        cur.append(b)
    groups.append(np.array(cur))
    return groups


def spectral_decomposition(x: Element, gap: float = CLUSTER_GAP) -> list[tuple[float, Element]]:
    """Distinct eigenvalues of a self-adjoint ``x`` with their projections."""
    _require_selfadjoint(x)
    scale = max(1.0, x.opnorm())
    per_corner = []
    for a in x.data:
        lam, v = np.linalg.eigh((a + a.conj().T) / 2)
        per_corner.append((lam, v))
    all_lam = np.concatenate([lam for lam, _ in per_corner])
    out = []
    for grp in _clusters(all_lam, gap * scale):
        lo, hi = all_lam[grp].min(), all_lam[grp].max()
        data = []
        for lam, v in per_corner:
            sel = (lam >= lo - 1e-300) & (lam <= hi)
            vv = v[:, sel]
            data.append(vv @ vv.conj().T)
        out.append((float(all_lam[grp].mean()), Element(x.spec, data)))
    return out


def _require_selfadjoint(x: Element):
    scale = max(1.0, x.max_abs())
    if (x - x.H).max_abs() > 1e-9 * scale:
        raise ValueError("element is not self-adjoint")


def spectral_projection(x: Element, lo: float, hi: float, gap: float = CLUSTER_GAP) -> Element:
    """``chi_[lo, hi](x)`` for self-adjoint ``x`` (closed interval).

    Eigenvalues closer than ``gap`` are grouped and decided together by the
    cluster mean, so near-degenerate pairs straddling an endpoint stay whole.
    """
    proj = Element.zeros(x.spec)
    for lam, e in spectral_decomposition(x, gap):
        if lo - gap <= lam <= hi + gap:
            proj = proj + e
    return proj


# amplification -----------------------------------------------------------

class AmplifiedElement:
    """An ``m x m`` matrix ``[x_ij]`` of elements, i.e. a member of ``M (x) M_m``.

    Stored per corner as an array of shape ``(m, m, n, n)``.
    """

    __slots__ = ("base", "m", "arrays")

    def __init__(self, base: AlgebraSpec, m: int, arrays: Sequence[np.ndarray]):
        if m < 1:
            raise ValueError("m must be >= 1")
        if len(arrays) != len(base.corners):
            raise ValueError("one array per corner expected")
        arrs = []
        for c, a in zip(base.corners, arrays):
            a = np.asarray(a, dtype=complex)
            if a.shape != (m, m, c.n, c.n):
                raise ValueError(f"expected shape {(m, m, c.n, c.n)}, got {a.shape}")
            arrs.append(a)
        self.base = base
        self.m = int(m)
        self.arrays = tuple(arrs)

    @classmethod
    def from_entries(cls, entries: Sequence[Sequence[Element]]) -> "AmplifiedElement":
        m = len(entries)
        if m == 0 or any(len(row) != m for row in entries):
            raise ValueError("entries must form a non-empty square array")
        base = entries[0][0].spec
        if any(x.spec != base for row in entries for x in row):
            raise ValueError("all entries must share one algebra")
        arrays = [np.array([[entries[i][j].data[c] for j in range(m)] for i in range(m)])
                  for c in range(len(base.corners))]
        return cls(base, m, arrays)

    @classmethod
    def from_big(cls, base: AlgebraSpec, m: int, bigs: Sequence[np.ndarray]) -> "AmplifiedElement":
        arrays = []
        for c, big in zip(base.corners, bigs):
            arrays.append(np.asarray(big).reshape(m, c.n, m, c.n).transpose(0, 2, 1, 3))
        return cls(base, m, arrays)

    @classmethod
    def zeros(cls, base: AlgebraSpec, m: int) -> "AmplifiedElement":
        return cls(base, m, [np.zeros((m, m, c.n, c.n), complex) for c in base.corners])

    @classmethod
    def random(cls, base: AlgebraSpec, m: int, rng: np.random.Generator) -> "AmplifiedElement":
        return cls(base, m, [(rng.standard_normal((m, m, c.n, c.n))
                              + 1j * rng.standard_normal((m, m, c.n, c.n))) / np.sqrt(2)
                             for c in base.corners])

    def entry(self, i: int, j: int) -> Element:
        return Element(self.base, [a[i, j] for a in self.arrays])

    def entries(self) -> list[list[Element]]:
        return [[self.entry(i, j) for j in range(self.m)] for i in range(self.m)]

    def big(self, c: int) -> np.ndarray:
        """Corner ``c`` as the block matrix ``[x_ij]`` of size ``m n``."""
        a = self.arrays[c]
        m, n = self.m, a.shape[-1]
        return a.transpose(0, 2, 1, 3).reshape(m * n, m * n)

    def bigs(self) -> list[np.ndarray]:
        return [self.big(c) for c in range(len(self.arrays))]

    def as_element(self) -> Element:
        """The same data viewed in ``base (x) M_m``."""
        return Element(self.base.tensor(self.m), self.bigs())

    def columns(self) -> np.ndarray:
        """Coordinate vectors of all entries, shape ``(dim, m*m)`` (entry ``i*m + j``)."""
        m = self.m
        return np.concatenate([a.reshape(m * m, -1).T for a in self.arrays], axis=0)

    @classmethod
    def from_columns(cls, base: AlgebraSpec, m: int, cols: np.ndarray) -> "AmplifiedElement":
        arrays = []
        for k, c in enumerate(base.corners):
            sl = base.corner_slice(k)
            arrays.append(cols[sl, :].T.reshape(m, m, c.n, c.n))
        return cls(base, m, arrays)

    def padded(self, m_new: int) -> "AmplifiedElement":
        """Embed into ``M (x) M_{m_new}`` in the top-left ``m x m`` corner."""
        if m_new < self.m:
            raise ValueError("cannot pad to a smaller size")
        arrays = []
        for a in self.arrays:
            b = np.zeros((m_new, m_new) + a.shape[2:], complex)
            b[: self.m, : self.m] = a
            arrays.append(b)
        return AmplifiedElement(self.base, m_new, arrays)

    def __add__(self, other: "AmplifiedElement"):
        return AmplifiedElement(self.base, self.m, [a + b for a, b in zip(self.arrays, other.arrays)])

    def __sub__(self, other: "AmplifiedElement"):
        return AmplifiedElement(self.base, self.m, [a - b for a, b in zip(self.arrays, other.arrays)])

    def __mul__(self, s):
        return AmplifiedElement(self.base, self.m, [s * a for a in self.arrays])

    __rmul__ = __mul__

    def __truediv__(self, s):
        return AmplifiedElement(self.base, self.m, [a / s for a in self.arrays])

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(a))) for a in self.arrays)

    def __repr__(self):
        return f"AmplifiedElement({self.base.describe()}, m={self.m})"


def amplified_norm(X: AmplifiedElement, p: float) -> float:
    """Norm of ``[x_ij]`` in ``L^p(M (x) M_m)``."""
    return lp_norm(X.as_element(), p)


def transpose_outer(X: AmplifiedElement) -> AmplifiedElement:
    """``[x_ij] -> [x_ji]``."""
    return AmplifiedElement(X.base, X.m, [a.transpose(1, 0, 2, 3) for a in X.arrays])


def transpose_inner(X: AmplifiedElement) -> AmplifiedElement:
    """``[x_ij] -> [t(x_ij)]`` with ``t`` the blockwise transposition."""
    return AmplifiedElement(X.base, X.m, [a.transpose(0, 1, 3, 2) for a in X.arrays])


def op_amplified_norm(X: AmplifiedElement, p: float) -> float:
    """Norm of ``[x_ij]`` in ``L^p(M^op (x) M_m)``.

    ``op_iso (x) id`` is a trace preserving *-isomorphism
    ``M^op (x) M_m -> M (x) M_m``, so this is the norm of ``[t(x_ij)]``.
    """
    return amplified_norm(transpose_inner(X), p)


def check_optr_cb(X: AmplifiedElement, p: float, rtol: float = TOL_NORM) -> bool:
    """``||[x_ij]||_{L^p(M^op (x) M_m)} == ||[x_ji]||_{L^p(M (x) M_m)}``."""
    lhs = op_amplified_norm(X, p)
    rhs = amplified_norm(transpose_outer(X), p)
    return abs(lhs - rhs) <= rtol * max(lhs, rhs, 1e-300)


def matrix_unit_family(base: AlgebraSpec, m: int, corner: int, swap: bool = False) -> AmplifiedElement:
    """``sum_{i,j<k} e_ij (x) e_ij`` in one corner, ``k = min(m, n)``.

    With ``swap`` the entries are ``x_ij = e_ji`` instead (the SWAP family).
    """
    X = AmplifiedElement.zeros(base, m)
    n = base.corners[corner].n
    k = min(m, n)
    for i in range(k):
        for j in range(k):
            if swap:
                X.arrays[corner][i, j, j, i] = 1.0
            else:
                X.arrays[corner][i, j, i, j] = 1.0
    return X
