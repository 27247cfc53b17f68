"""Separating maps: Yeadon triples, Jordan splitting and bijective decomposition.

Every map here is finite dimensional, so w*-continuity is automatic and the
positive operator ``B`` of a Yeadon triple is bounded.  All checks work on the
matrix-unit basis of the source, which makes them certificates rather than
samples.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .algebra import (TOL_ALG, AlgebraSpec, Block, Element, random_element, random_matrix,
                      random_unitary, trace)
from .lp import polar, pseudo_inverse, spectral_decomposition, support_projection
from .maps import LinearMap

log = logging.getLogger(__name__)

TOL_SEP = 1e-8


class NotSeparatingError(ValueError):
    """Raised when a map fails one of the Yeadon conditions."""

    def __init__(self, condition: str, residual: float):
        super().__init__(f"condition {condition} violated (residual {residual:.3e})")
        self.condition = condition
        self.residual = residual


class NotJordanError(ValueError):
    pass


class DecompositionError(ValueError):
    pass


# basis bookkeeping -------------------------------------------------------

def _basis_labels(spec: AlgebraSpec) -> list[tuple[int, int, int]]:
    return [(k, a, b) for k, c in enumerate(spec.corners) for a in range(c.n) for b in range(c.n)]


def _product_table(spec: AlgebraSpec) -> np.ndarray:
    """``table[k, l]`` is the basis index of ``u_k u_l`` or -1 when it vanishes."""
    labels = _basis_labels(spec)
    index = {lab: i for i, lab in enumerate(labels)}
    d = len(labels)
    table = np.full((d, d), -1, dtype=int)
    for i, (c, a, b) in enumerate(labels):
        for j, (c2, a2, b2) in enumerate(labels):
            if c == c2 and b == a2:
                table[i, j] = index[(c, a, b2)]
    return table


def _adjoint_index(spec: AlgebraSpec) -> np.ndarray:
    labels = _basis_labels(spec)
    index = {lab: i for i, lab in enumerate(labels)}
    return np.array([index[(c, b, a)] for (c, a, b) in labels])


def _images(matrix: np.ndarray, target: AlgebraSpec) -> list[np.ndarray]:
    """Images of every source basis vector, per target corner: shape ``(d_s, n, n)``."""
    out = []
    for k, c in enumerate(target.corners):
        sl = target.corner_slice(k)
        out.append(matrix[sl, :].T.reshape(-1, c.n, c.n))
    return out


def _stack(imgs: list[np.ndarray]) -> np.ndarray:
    """Inverse of :func:`_images`."""
    return np.concatenate([a.reshape(a.shape[0], -1).T for a in imgs], axis=0)


@dataclass
class ProductResiduals:
    star: float
    multiplicative: float
    anti_multiplicative: float
    jordan: float


def product_residuals(J: LinearMap, right: Element | None = None) -> ProductResiduals:
    """How far ``x -> J(x) r`` is from being *-preserving, (anti-)multiplicative, Jordan.

    Evaluated on all pairs of matrix units of the source.
    """
    table = _product_table(J.source)
    adj = _adjoint_index(J.source)
    imgs = _images(J.matrix, J.target)
    if right is not None:
        imgs = [a @ r for a, r in zip(imgs, right.data)]
    star = mult = anti = jord = 0.0
    nz = table >= 0
    safe = np.where(nz, table, 0)
    for a in imgs:
        star = max(star, float(np.max(np.abs(a[adj] - a.conj().transpose(0, 2, 1)), initial=0.0)))
        prod = np.einsum("kab,lbc->klac", a, a)
        jxy = np.where(nz[:, :, None, None], a[safe], 0.0)
        mult = max(mult, float(np.max(np.abs(jxy - prod), initial=0.0)))
        prod_t = prod.transpose(1, 0, 2, 3)
        anti = max(anti, float(np.max(np.abs(jxy - prod_t), initial=0.0)))
        sym = jxy + jxy.transpose(1, 0, 2, 3)
        jord = max(jord, float(np.max(np.abs(sym - prod - prod_t), initial=0.0)))
    return ProductResiduals(star, mult, anti, jord)


def is_jordan(J: LinearMap, tol: float = TOL_ALG) -> bool:
    r = product_residuals(J)
    scale = max(1.0, float(np.max(np.abs(J.matrix))) ** 2)
    return r.star <= tol * scale and r.jordan <= tol * scale


# Yeadon triples ----------------------------------------------------------

@dataclass
class YeadonTriple:
    w: Element
    B: Element
    J: LinearMap
    residuals: dict = field(default_factory=dict)

    def map(self, p: float | None = None) -> LinearMap:
        return build_yeadon_map(self.w, self.B, self.J, self.J.p if p is None else p, validate=False)

    @property
    def kind(self) -> str:
        """``direct``, ``anti-direct``, ``both`` (commutative image) or ``mixed``."""
        r = product_residuals(self.J)
        tol = 1e-8 * max(1.0, float(np.max(np.abs(self.J.matrix))) ** 2)
        m, a = r.multiplicative <= tol, r.anti_multiplicative <= tol
        return "both" if m and a else "direct" if m else "anti-direct" if a else "mixed"


def _commutator_residual(B: Element, imgs: list[np.ndarray]) -> float:
    res = 0.0
    for _, proj in spectral_decomposition((B + B.H) / 2, gap=1e-8 * max(1.0, B.opnorm())):
        for P, a in zip(proj.data, imgs):
            if a.size:
                res = max(res, float(np.max(np.abs(P @ a - a @ P), initial=0.0)))
    return res


def triple_residuals(w: Element, B: Element, J: LinearMap, T: LinearMap | None = None) -> dict:
    """Residuals of conditions (a), (b), (c) and of the Jordan identities."""
    sB = support_projection(B)
    one = Element.identity(J.source)
    J1 = J(one)
    imgs = _images(J.matrix, J.target)
    pr = product_residuals(J)
    out = {
        "a_wstarw_support": (w.H @ w - sB).max_abs(),
        "a_J1_support": (J1 - sB).max_abs(),
        "b_commutation": _commutator_residual(B, imgs),
        "jordan_star": pr.star,
        "jordan_product": pr.jordan,
    }
    if T is not None:
        wb = w @ B
        model = _stack([wbc @ a for wbc, a in zip(wb.data, imgs)])
        out["c_factorization"] = float(np.max(np.abs(model - T.matrix), initial=0.0))
    return out


def extract_yeadon(T: LinearMap, tol: float = TOL_ALG) -> YeadonTriple:
    """Canonical Yeadon triple of ``T``.

    ``h = T(1)`` has polar decomposition ``w B``; ``J(x) = B^+ w* T(x)``.  The
    triple is then checked against conditions (a)-(c) and the Jordan
    identities; any failure raises :class:`NotSeparatingError`.
    """
    one = Element.identity(T.source)
    h = T(one)
    w, B = polar(h)
    left = pseudo_inverse(B) @ w.H
    imgs = [lc @ a for lc, a in zip(left.data, _images(T.matrix, T.target))]
    J = LinearMap(T.source, T.target, T.p, _stack(imgs))
    res = triple_residuals(w, B, J, T)
    tscale = max(1.0, float(np.max(np.abs(T.matrix))))
    jscale = max(1.0, float(np.max(np.abs(J.matrix)))) ** 2
    limits = {
        "a_wstarw_support": tol,
        "a_J1_support": tol * jscale,
        "b_commutation": tol * jscale,
        "jordan_star": tol * jscale,
        "jordan_product": tol * jscale,
        "c_factorization": tol * tscale,
    }
    for key, lim in limits.items():
        if res[key] > lim:
            raise NotSeparatingError(key, res[key])
    return YeadonTriple(w, B, J, res)


def build_yeadon_map(w: Element, B: Element, J: LinearMap, p: float, validate: bool = True,
                     tol: float = TOL_ALG) -> LinearMap:
    """Assemble ``T(x) = w B J(x)`` after checking the triple."""
    if validate:
        res = triple_residuals(w, B, J)
        scale = max(1.0, float(np.max(np.abs(J.matrix)))) ** 2
        for key, val in res.items():
            lim = tol * (scale if not key.startswith("a_wstar") else 1.0) * max(1.0, B.opnorm())
            if val > lim:
                raise ValueError(f"invalid Yeadon triple: {key} residual {val:.3e}")
    wb = w @ B
    imgs = [wbc @ a for wbc, a in zip(wb.data, _images(J.matrix, J.target))]
    return LinearMap(J.source, J.target, p, _stack(imgs))


# separating test ----------------------------------------------------------

@dataclass
class SeparatingResult:
    separating: bool
    reason: str
    witness: tuple[Element, Element] | None = None
    residual: float = 0.0
    triple: YeadonTriple | None = None

    def __bool__(self):
        return self.separating


def _disjointness_residual(T: LinearMap, x: Element, y: Element) -> float:
    tx, ty = T(x), T(y)
    return max((tx.H @ ty).max_abs(), (tx @ ty.H).max_abs())


def is_separating(T: LinearMap, trials: int = 20, seed: int = 0, tol: float = TOL_SEP) -> SeparatingResult:
    """Randomized plus certificate-based separating test.

    First every disjoint pair of matrix units and ``trials`` random disjoint
    pairs ``x = p a r``, ``y = q b s`` (``p _|_ q``, ``r _|_ s``) are checked;
    then the Yeadon triple is extracted and validated.
    """
    opn = float(np.linalg.norm(T.matrix, 2)) if T.matrix.size else 0.0
    scale = max(opn, 1e-300) ** 2

    # matrix-unit pairs: disjoint iff different corners, or a != a' and b != b'
    labels = _basis_labels(T.source)
    imgs = _images(T.matrix, T.target)
    for ci, img in enumerate(imgs):
        if img.size == 0:
            continue
        left = np.einsum("kba,lbc->klac", img.conj(), img)   # T(x)* T(y)
        right = np.einsum("kab,lcb->klac", img, img.conj())  # T(x) T(y)*
        bad = np.maximum(np.abs(left).max(axis=(2, 3)), np.abs(right).max(axis=(2, 3)))
        for k, (c, a, b) in enumerate(labels):
            for l, (c2, a2, b2) in enumerate(labels):
                if c == c2 and (a == a2 or b == b2):
                    continue
                if bad[k, l] > tol * scale:
                    x = Element.from_vector(T.source, np.eye(T.source.dim)[k])
                    y = Element.from_vector(T.source, np.eye(T.source.dim)[l])
                    return SeparatingResult(False, "disjoint matrix units not mapped to disjoint images",
                                            (x, y), float(bad[k, l]))

    rng = np.random.default_rng(seed)
    for _ in range(trials):
        x, y = random_disjoint_pair(T.source, rng)
        res = _disjointness_residual(T, x, y)
        nx, ny = x.opnorm(), y.opnorm()
        if res > tol * scale * max(nx * ny, 1e-300) * 10:
            return SeparatingResult(False, "random disjoint pair not mapped to disjoint images", (x, y), res)

    try:
        triple = extract_yeadon(T)
    except NotSeparatingError as exc:
        return SeparatingResult(False, f"Yeadon extraction failed: {exc}", None, exc.residual)
    return SeparatingResult(True, "all checks passed", None, 0.0, triple)


def random_disjoint_pair(spec: AlgebraSpec, rng: np.random.Generator) -> tuple[Element, Element]:
    """``x = p a r`` and ``y = q b s`` with ``p q = 0`` and ``r s = 0``."""
    def split_projections():
        P, Q = [], []
        for c in spec.corners:
            u = random_unitary(rng, c.n)
            mask = rng.random(c.n) < 0.5
            P.append(u[:, mask] @ u[:, mask].conj().T)
            Q.append(u[:, ~mask] @ u[:, ~mask].conj().T)
        return Element(spec, P), Element(spec, Q)

    p, q = split_projections()
    r, s = split_projections()
    a = random_element(spec, rng)
    b = random_element(spec, rng)
    return p @ a @ r, q @ b @ s


# Jordan splitting ---------------------------------------------------------

def _orthonormal_span(vectors: np.ndarray, tol: float) -> np.ndarray:
    if vectors.shape[1] == 0:
        return vectors
    u, s, _ = np.linalg.svd(vectors, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return vectors[:, :0]
    return u[:, s > tol * s[0]]


def generated_algebra(J: LinearMap, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal coordinate basis (columns) of the algebra generated by ``J(M)``.

    Words in the generators are added until the span stops growing; in
    finite dimension this happens after at most ``dim(target)`` rounds.
    """
    target = J.target
    gens = [Element.from_vector(target, J.matrix[:, k]) for k in range(J.source.dim)]
    basis = _orthonormal_span(J.matrix, tol)
    for _ in range(max(1, target.dim)):
        cur = [Element.from_vector(target, basis[:, i]) for i in range(basis.shape[1])]
        words = [(d @ g).to_vector() for d in cur for g in gens]
        new = _orthonormal_span(np.column_stack([basis] + words) if words else basis, tol)
        if new.shape[1] == basis.shape[1]:
            return new
        basis = new
    return basis


def _commutator_matrix(basis: np.ndarray, target: AlgebraSpec, gens: list[Element]) -> np.ndarray:
    rows = []
    elems = [Element.from_vector(target, basis[:, i]) for i in range(basis.shape[1])]
    for g in gens:
        rows.append(np.column_stack([(d @ g - g @ d).to_vector() for d in elems]))
    return np.vstack(rows)


def center_minimal_projections(J: LinearMap, seed: int = 0, tol: float = 1e-9) -> list[Element]:
    """Minimal central projections of the algebra ``D`` generated by ``J(M)``."""
    target = J.target
    basis = generated_algebra(J)
    if basis.shape[1] == 0:
        return []
    gens = [Element.from_vector(target, basis[:, i]) for i in range(basis.shape[1])]
    C = _commutator_matrix(basis, target, gens)
    _, s, vh = np.linalg.svd(C)
    s_full = np.zeros(vh.shape[0])
    s_full[: s.size] = s
    null = vh[s_full <= tol * max(1.0, s_full.max(initial=0.0))].conj().T
    center = basis @ null
    rng = np.random.default_rng(seed)
    coeff = rng.standard_normal(center.shape[1]) + 1j * rng.standard_normal(center.shape[1])
    h = Element.from_vector(target, center @ coeff)
    h = (h + h.H) / 2
    unit = J(Element.identity(J.source))
    shift = h.opnorm() + 1.0
    g = h + unit * shift
    projs = [proj for lam, proj in spectral_decomposition(g, gap=1e-6 * shift) if lam > 0.5]
    return projs


@dataclass
class JordanSplit:
    e: Element
    f: Element
    pi: LinearMap
    sigma: LinearMap
    central: list[tuple[Element, str]]


def _right_multiply(J: LinearMap, r: Element) -> LinearMap:
    imgs = [a @ rc for a, rc in zip(_images(J.matrix, J.target), r.data)]
    return LinearMap(J.source, J.target, J.p, _stack(imgs))


def jordan_split(J: LinearMap, tol: float = 1e-8, seed: int = 0) -> JordanSplit:
    """Split a Jordan homomorphism into *-homomorphic and anti-*-homomorphic parts.

    Each minimal central projection ``z`` of the generated algebra is tested:
    ``x -> J(x) z`` multiplicative goes to ``e``, anti-multiplicative to ``f``;
    corners that are both (commutative image) go to ``e``.
    """
    scale = max(1.0, float(np.max(np.abs(J.matrix)))) ** 2
    if not is_jordan(J, tol):
        raise NotJordanError("map is not a Jordan homomorphism")
    e = Element.zeros(J.target)
    f = Element.zeros(J.target)
    central = []
    for z in center_minimal_projections(J, seed=seed):
        r = product_residuals(J, right=z)
        mult = r.multiplicative <= tol * scale
        anti = r.anti_multiplicative <= tol * scale
        if mult:
            e = e + z
            central.append((z, "both" if anti else "direct"))
        elif anti:
            f = f + z
            central.append((z, "anti-direct"))
        else:
            raise NotJordanError("a central corner is neither multiplicative nor anti-multiplicative "
                                 f"(residuals {r.multiplicative:.2e}, {r.anti_multiplicative:.2e})")
    return JordanSplit(e, f, _right_multiply(J, e), _right_multiply(J, f), central)


# corner bookkeeping -------------------------------------------------------

def _corner_images(J: LinearMap) -> list[Element]:
    return [J(Element.corner_projection(J.source, [k])) for k in range(len(J.source.corners))]


def _corner_indicator(x: Element, tol: float) -> list[int] | None:
    """Corners where ``x`` is the identity, or ``None`` if ``x`` is not a sum of corner units."""
    out = []
    for k, a in enumerate(x.data):
        eye = np.eye(a.shape[0])
        if np.max(np.abs(a - eye), initial=0.0) <= tol:
            out.append(k)
        elif np.max(np.abs(a), initial=0.0) > tol:
            return None
    return out


def _coords(spec: AlgebraSpec, corners) -> np.ndarray:
    idx = [np.arange(spec.corner_slice(c).start, spec.corner_slice(c).stop) for c in corners]
    return np.concatenate(idx) if idx else np.zeros(0, dtype=int)


@dataclass
class BijectiveSplit:
    alpha: Element
    beta: Element
    direct_corners: list[int]
    anti_corners: list[int]
    target_direct_corners: list[int]
    target_anti_corners: list[int]
    M1: AlgebraSpec | None
    M2: AlgebraSpec | None
    N1: AlgebraSpec | None
    N2: AlgebraSpec | None
    T1: LinearMap | None
    T2: LinearMap | None
    e: Element
    f: Element
    triple: YeadonTriple
    checks: dict = field(default_factory=dict)

    def reassemble(self, T: LinearMap) -> np.ndarray:
        """Matrix of ``T1 + T2`` placed back into ``T``'s coordinates."""
        out = np.zeros_like(T.matrix)
        parts = ((self.T1, self.direct_corners, self.target_direct_corners),
                 (self.T2, self.anti_corners, self.target_anti_corners))
        for Ti, src, tgt in parts:
            if Ti is not None:
                out[np.ix_(_coords(T.target, tgt), _coords(T.source, src))] = Ti.matrix
        return out


def _restrict_map(T: LinearMap, src: list[int], tgt: list[int]):
    if not src:
        return None, None, None
    M, sidx = T.source.restrict(src)
    N, tidx = T.target.restrict(tgt)
    return M, N, T.restrict(sidx, M, tidx, N)


def decompose_bijective(T: LinearMap, tol: float = 1e-8) -> BijectiveSplit:
    """``T = T1 + T2`` with ``T1`` direct on ``alpha M`` and ``T2`` anti-direct on ``beta M``."""
    if not T.is_bijective():
        raise DecompositionError("map is not bijective")
    triple = extract_yeadon(T)
    one = Element.identity(T.target)
    unitary_res = max((triple.w.H @ triple.w - one).max_abs(), (triple.w @ triple.w.H - one).max_abs())
    if unitary_res > tol:
        raise DecompositionError(f"w is not unitary for a surjective map (residual {unitary_res:.2e})")
    split = jordan_split(triple.J, tol=tol)
    pscale = max(1.0, float(np.max(np.abs(triple.J.matrix))))
    ker_sigma = [k for k, im in enumerate(_corner_images(split.sigma)) if im.max_abs() <= tol * pscale]
    ker_pi = [k for k, im in enumerate(_corner_images(split.pi)) if im.max_abs() <= tol * pscale]
    if set(ker_sigma) & set(ker_pi):
        raise DecompositionError("alpha * beta != 0: J is not injective")
    ncorners = len(T.source.corners)
    if sorted(ker_sigma + ker_pi) != list(range(ncorners)):
        raise DecompositionError("alpha + beta != 1: a summand is neither direct nor anti-direct")

    # ker(sigma) must be exactly L^p(alpha M), and likewise for pi
    checks = {}
    for name, part, inside in (("ker_sigma", split.sigma, ker_sigma), ("ker_pi", split.pi, ker_pi)):
        outside = [k for k in range(ncorners) if k not in inside]
        cols_in = _coords(T.source, inside)
        cols_out = _coords(T.source, outside)
        vanish = float(np.max(np.abs(part.matrix[:, cols_in]), initial=0.0))
        rank_out = np.linalg.matrix_rank(part.matrix[:, cols_out], tol=tol * pscale) if cols_out.size else 0
        checks[name] = {"vanishing": vanish, "rank_complement": int(rank_out), "dim_complement": int(cols_out.size)}
        if vanish > tol * pscale or rank_out != cols_out.size:
            raise DecompositionError(f"{name} is not a central summand")

    n1 = _corner_indicator(split.e, 1e-6)
    n2 = _corner_indicator(split.f, 1e-6)
    if n1 is None or n2 is None:
        raise DecompositionError("e, f are not central in the target")
    alpha = Element.corner_projection(T.source, ker_sigma)
    beta = Element.corner_projection(T.source, ker_pi)
    M1, N1, T1 = _restrict_map(T, ker_sigma, n1)
    M2, N2, T2 = _restrict_map(T, ker_pi, n2)
    out = BijectiveSplit(alpha, beta, ker_sigma, ker_pi, n1, n2, M1, M2, N1, N2, T1, T2,
                         split.e, split.f, triple, checks)
    resid = float(np.max(np.abs(out.reassemble(T) - T.matrix), initial=0.0))
    checks["reassembly"] = resid
    if resid > tol * max(1.0, float(np.max(np.abs(T.matrix)))):
        raise DecompositionError(f"T != T1 + T2 (residual {resid:.2e})")
    return out


@dataclass
class InverseReport:
    Tinv: LinearMap
    separating: bool
    j_inverse_matches: bool
    residuals: dict
    twisted_matches: bool = False


def inverse_analysis(T: LinearMap, tol: float = 1e-8, seed: int = 0) -> InverseReport:
    """Invert ``T``, test the inverse for separation and compare Jordan parts.

    ``j_inverse_matches`` compares the Jordan map ``J'`` of ``T^{-1}`` with
    ``J^{-1}``.  On the anti-direct summand the two differ by the inner
    automorphism ``Ad(v*)`` with ``v = J^{-1}(w*)`` unless ``v`` is central
    there, so the report also checks ``J' o J = alpha + beta Ad(v*)``
    (``twisted_matches``), which holds for every bijective separating map.
    """
    Tinv = T.inverse()
    sep = is_separating(Tinv, seed=seed)
    res: dict = {}
    matches = twisted = False
    if sep:
        triple = extract_yeadon(T)
        J, Jp = triple.J, sep.triple.J
        JpJ = Jp.matrix @ J.matrix
        res["JprimeJ_minus_id"] = float(np.max(np.abs(JpJ - np.eye(T.source.dim)), initial=0.0))
        res["JJprime_minus_id"] = float(np.max(np.abs(J.matrix @ Jp.matrix - np.eye(T.target.dim)), initial=0.0))
        matches = max(res["JprimeJ_minus_id"], res["JJprime_minus_id"]) <= tol
        try:
            split = decompose_bijective(T, tol=tol)
        except DecompositionError as exc:
            res["twist_reason"] = str(exc)
        else:
            v = Element.from_vector(T.source, np.linalg.solve(J.matrix, triple.w.H.to_vector()))
            anti = set(split.anti_corners)
            vb = Element(T.source, [a if k in anti else np.zeros_like(a) for k, a in enumerate(v.data)])
            model = LinearMap.from_function(
                T.source, T.source, T.p,
                lambda x: split.alpha @ x + vb.H @ x @ vb)
            res["twist_residual"] = float(np.max(np.abs(JpJ - model.matrix), initial=0.0))
            twisted = res["twist_residual"] <= tol
    else:
        res["reason"] = sep.reason
    return InverseReport(Tinv, bool(sep), matches, res, twisted)


@dataclass
class KernelSplit:
    M0: Element
    complement: Element
    kernel_corners: list[int]
    checks: dict


def kernel_summand(T: LinearMap, tol: float = 1e-8) -> KernelSplit:
    """Central projection ``M0`` with ``ker T = L^p(M0 M)``."""
    triple = extract_yeadon(T)
    scale = max(1.0, float(np.max(np.abs(triple.J.matrix))))
    kern = [k for k, im in enumerate(_corner_images(triple.J)) if im.max_abs() <= tol * scale]
    rest = [k for k in range(len(T.source.corners)) if k not in kern]
    tscale = max(1.0, float(np.max(np.abs(T.matrix))))
    cols_k, cols_r = _coords(T.source, kern), _coords(T.source, rest)
    vanish = float(np.max(np.abs(T.matrix[:, cols_k]), initial=0.0))
    rank_r = int(np.linalg.matrix_rank(T.matrix[:, cols_r], tol=tol * tscale)) if cols_r.size else 0
    rank_T = int(np.linalg.matrix_rank(T.matrix, tol=tol * tscale))
    checks = {"kernel_vanishing": vanish, "rank_complement": rank_r, "dim_complement": int(cols_r.size),
              "nullity": T.source.dim - rank_T, "dim_M0": int(cols_k.size)}
    if vanish > tol * tscale or rank_r != cols_r.size or checks["nullity"] != checks["dim_M0"]:
        raise NotSeparatingError("kernel", vanish)
    return KernelSplit(Element.corner_projection(T.source, kern), Element.corner_projection(T.source, rest),
                       kern, checks)


# exact norm of a separating map -------------------------------------------

def corner_densities(T: LinearMap, triple: YeadonTriple | None = None,
                     split: JordanSplit | None = None) -> list[tuple[float, float]]:
    """Per source corner ``z``: ``tau(B^p pi(z)) / tau(z)`` and ``tau(B^p sigma(z)) / tau(z)``.

    These are the central densities of ``x -> ||T x||_p^p`` split into the
    direct and anti-direct parts.
    """
    from .lp import positive_power
    triple = triple or extract_yeadon(T)
    split = split or jordan_split(triple.J)
    Bp = positive_power(triple.B, T.p)
    out = []
    for k, c in enumerate(T.source.corners):
        z = Element.corner_projection(T.source, [k])
        tz = c.weight * c.n
        hpi = trace(Bp @ split.pi(z)).real / tz
        hsig = trace(Bp @ split.sigma(z)).real / tz
        out.append((max(hpi, 0.0), max(hsig, 0.0)))
    return out


def separating_norm(T: LinearMap) -> float:
    """Exact ``||T: L^p -> L^p||`` of a separating map from its Yeadon triple."""
    dens = corner_densities(T)
    return max(a + b for a, b in dens) ** (1.0 / T.p)


# generators ---------------------------------------------------------------

@dataclass
class RandomTriple:
    w: Element
    B: Element
    J: LinearMap
    kinds: list[str]


def random_yeadon_triple(source: AlgebraSpec, rng: np.random.Generator, p: float,
                         kind: str = "mixed", max_target_dim: int = 25,
                         full_support: bool = False) -> RandomTriple:
    """A random valid triple ``(w, B, J)`` on ``source``.

    The target is built from a few single-point blocks.  Each hosts copies of
    source corners, either ``x`` (direct) or ``x^T`` (anti-direct), plus
    optional unused dimensions so that ``J(1) < 1``.  ``B`` is a random
    positive element of the commutant of ``J(M)`` with support ``J(1)``.
    """
    ncorn = len(source.corners)
    for _ in range(200):
        tblocks = []  # list of [(corner, transposed, multiplicity)], pad
        order = list(rng.permutation(ncorn))
        ntb = int(rng.integers(1, min(3, ncorn) + 1))
        assign = [[] for _ in range(ntb)]
        for i, c in enumerate(order):
            assign[i % ntb].append(c)
        for cs in assign:
            groups = []
            for c in cs:
                if kind == "direct":
                    types = [False]
                elif kind == "anti":
                    types = [True]
                else:
                    types = [bool(rng.integers(0, 2))] if rng.random() < 0.6 else [False, True]
                for t in types:
                    groups.append((c, t, int(rng.integers(1, 3))))
            pad = 0 if full_support else int(rng.integers(0, 2))
            tblocks.append((groups, pad))
        sizes = [sum(source.corners[c].n * k for c, _, k in g) + pad for g, pad in tblocks]
        if sum(s * s for s in sizes) <= max_target_dim:
            break
    else:
        raise ValueError("could not fit a random target within the dimension budget")

    target = AlgebraSpec(tuple(Block(s, (float(rng.uniform(0.5, 2.0)),)) for s in sizes))
    unitaries = [random_unitary(rng, s) for s in sizes]

    def J_fn(x: Element) -> Element:
        out = []
        for (groups, pad), U, s in zip(tblocks, unitaries, sizes):
            a = np.zeros((s, s), complex)
            off = 0
            for c, t, k in groups:
                xc = x.data[c].T if t else x.data[c]
                n = xc.shape[0]
                for _ in range(k):
                    a[off:off + n, off:off + n] = xc
                    off += n
            out.append(U @ a @ U.conj().T)
        return Element(target, out)

    J = LinearMap.from_function(source, target, p, J_fn)
    Bdata = []
    for (groups, pad), U, s in zip(tblocks, unitaries, sizes):
        a = np.zeros((s, s), complex)
        off = 0
        for c, t, k in groups:
            n = source.corners[c].n
            G = random_matrix(rng, k)
            P = G @ G.conj().T + 0.5 * np.eye(k)
            a[off:off + k * n, off:off + k * n] = np.kron(P, np.eye(n))
            off += k * n
        Bdata.append(U @ a @ U.conj().T)
    B = Element(target, Bdata)
    J1 = J(Element.identity(source))
    V = Element(target, [random_unitary(rng, s) for s in sizes])
    w = V @ J1
    kinds = []
    for groups, _ in tblocks:
        kinds.extend("anti" if t else "direct" for _, t, _ in groups)
    return RandomTriple(w, B, J, kinds)


@dataclass
class PlantedBijective:
    T: LinearMap
    alpha_corners: list[int]
    beta_corners: list[int]
    J: LinearMap
    B: Element
    w: Element


def random_bijective_separating(source: AlgebraSpec, rng: np.random.Generator, p: float,
                                anti_fraction: float = 0.5, anti_w: str = "central") -> PlantedBijective:
    """Direct (+) anti-direct bijective separating map with known ``alpha, beta``.

    Every source corner is sent onto its own target corner, transposed for
    the anti-direct part.  Abelian corners (``n = 1``) count as direct.
    ``w`` is a random unitary on direct corners; on anti-direct corners it is
    a random phase (``anti_w="central"``) or a random unitary (``"generic"``).
    """
    if anti_w not in ("central", "generic"):
        raise ValueError("anti_w must be 'central' or 'generic'")
    ncorn = len(source.corners)
    anti = [bool(rng.random() < anti_fraction) and source.corners[k].n > 1 for k in range(ncorn)]
    # target: same corner sizes, grouped by size into multi-point blocks, shuffled
    by_size: dict[int, list[int]] = {}
    for k in rng.permutation(ncorn):
        by_size.setdefault(source.corners[int(k)].n, []).append(int(k))
    blocks, placement = [], {}
    for n in sorted(by_size):
        ks = by_size[n]
        blocks.append(Block(n, tuple(float(rng.uniform(0.5, 2.0)) for _ in ks)))
        for k in ks:
            placement[k] = len(placement)
    target = AlgebraSpec(tuple(blocks))
    # placement[k] counts corners in block order, which matches target.corners
    unitaries = {k: random_unitary(rng, source.corners[k].n) for k in range(ncorn)}

    def J_fn(x: Element) -> Element:
        out = [None] * ncorn
        for k in range(ncorn):
            xc = x.data[k].T if anti[k] else x.data[k]
            U = unitaries[k]
            out[placement[k]] = U @ xc @ U.conj().T
        return Element(target, out)

    J = LinearMap.from_function(source, target, p, J_fn)
    B = Element(target, [float(rng.uniform(0.5, 2.0)) * np.eye(c.n) for c in target.corners])
    anti_target = {placement[k] for k in range(ncorn) if anti[k]}
    wdata = []
    for t, c in enumerate(target.corners):
        if t in anti_target and anti_w == "central":
            wdata.append(np.exp(2j * np.pi * rng.random()) * np.eye(c.n))
        else:
            wdata.append(random_unitary(rng, c.n))
    w = Element(target, wdata)
    T = build_yeadon_map(w, B, J, p)
    alpha = [k for k in range(ncorn) if not anti[k]]
    beta = [k for k in range(ncorn) if anti[k]]
    return PlantedBijective(T, alpha, beta, J, B, w)
