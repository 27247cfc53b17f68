"""S^1-valued norms, amplified maps and cb / S^1-bounded norm estimators.

The S^1-valued norm of ``X = [x_ij]`` is an infimum over factorizations
``x_ij = sum_k a_ik b_kj`` of ``||sum a a*||_p^{1/2} ||sum b* b||_p^{1/2}``.
Per corner, write ``A = [a_ik]`` and ``B = [b_kj]`` as big matrices.  Then
``sum_{i,k} a_ik a_ik* = Tr_m(A A*)`` (partial trace over the outer index) and
the infimum only depends on ``W = A A*``; it is convex in ``W``.  We take
``A = G`` square and ``B = G^{-1} X`` and run L-BFGS on ``G``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .algebra import AlgebraSpec, Element
from .lp import (AmplifiedElement, amplified_norm, check_exponent, conjugate_exponent, lp_norm,
                 matrix_unit_family, transpose_inner, transpose_outer)
from .maps import LinearMap
from .parallel import pmap

log = logging.getLogger(__name__)

TOL_FACT = 1e-8
DEFAULT_RESTARTS = 2
CHUNK = 40  # L-BFGS iterations between certificate evaluations
ROUNDING_GUARD = 1e-12  # relative margin so certified lower bounds survive rounding


# factorizations ------------------------------------------------------------

@dataclass
class Factorization:
    """``x_ij = sum_k a_ik b_kj`` with ``a``, ``b`` stored as ``m x K`` / ``K x m`` arrays."""

    a: list[np.ndarray]  # per corner, big matrix of shape (m n, K n)
    b: list[np.ndarray]  # per corner, big matrix of shape (K n, m n)
    base: AlgebraSpec
    m: int

    @property
    def inner_size(self) -> int:
        c = self.base.corners[0]
        return self.a[0].shape[1] // c.n

    def a_entry(self, i: int, k: int) -> Element:
        return Element(self.base, [A[i * c.n:(i + 1) * c.n, k * c.n:(k + 1) * c.n]
                                   for A, c in zip(self.a, self.base.corners)])

    def b_entry(self, k: int, j: int) -> Element:
        return Element(self.base, [B[k * c.n:(k + 1) * c.n, j * c.n:(j + 1) * c.n]
                                   for B, c in zip(self.b, self.base.corners)])

    def product(self) -> AmplifiedElement:
        return AmplifiedElement.from_big(self.base, self.m, [A @ B for A, B in zip(self.a, self.b)])

    def row_sum(self) -> Element:
        """``sum_{i,k} a_ik a_ik*``."""
        return Element(self.base, [_ptrace(A @ A.conj().T, self.m, c.n)
                                   for A, c in zip(self.a, self.base.corners)])

    def column_sum(self) -> Element:
        """``sum_{k,j} b_kj* b_kj``."""
        return Element(self.base, [_ptrace(B.conj().T @ B, self.m, c.n)
                                   for B, c in zip(self.b, self.base.corners)])

    def value(self, p: float) -> float:
        return float(np.sqrt(lp_norm(self.row_sum(), p) * lp_norm(self.column_sum(), p)))

    def residual(self, X: AmplifiedElement) -> float:
        return (self.product() - X).max_abs()


def _ptrace(W: np.ndarray, m: int, n: int) -> np.ndarray:
    """Partial trace over the outer ``m``-index of an ``(m n) x (m n)`` matrix."""
    return np.einsum("iaib->ab", W.reshape(m, n, m, n))


def _lift(P: np.ndarray, m: int) -> np.ndarray:
    return np.kron(np.eye(m), P)


def _psd_power(P: np.ndarray, t: float) -> tuple[float, np.ndarray]:
    """``Tr(P^{t+1})`` and ``P^t`` for Hermitian ``P >= 0``."""
    lam, v = np.linalg.eigh((P + P.conj().T) / 2)
    lam = np.clip(lam, 0.0, None)
    if t == 0:
        return float(lam.sum()), np.eye(P.shape[0])
    return float(np.sum(lam ** (t + 1))), (v * lam ** t) @ v.conj().T


# the S^1-valued norm, upper estimate ----------------------------------------

class _S1Objective:
    """``G -> ||Tr_m G G*||_p + ||Tr_m (G^{-1}X)*(G^{-1}X)||_p`` with its gradient."""

    def __init__(self, bigs: Sequence[np.ndarray], weights: Sequence[float], sizes: Sequence[int],
                 m: int, p: float):
        self.bigs = [np.asarray(x) for x in bigs]
        self.weights = list(weights)
        self.sizes = list(sizes)
        self.m = m
        self.p = p
        self.shapes = [x.shape for x in self.bigs]
        self.n_real = sum(2 * s[0] * s[1] for s in self.shapes)

    def pack(self, Gs: Sequence[np.ndarray]) -> np.ndarray:
        return np.concatenate([np.concatenate([g.real.ravel(), g.imag.ravel()]) for g in Gs])

    def unpack(self, v: np.ndarray) -> list[np.ndarray]:
        out, pos = [], 0
        for s in self.shapes:
            k = s[0] * s[1]
            out.append((v[pos:pos + k] + 1j * v[pos + k:pos + 2 * k]).reshape(s))
            pos += 2 * k
        return out

    def parts(self, Gs: Sequence[np.ndarray]):
        p, m = self.p, self.m
        S1 = S2 = 0.0
        cache = []
        for G, X, mu, n in zip(Gs, self.bigs, self.weights, self.sizes):
            V = np.linalg.solve(G, X)
            t1, P1 = _psd_power(_ptrace(G @ G.conj().T, m, n), p - 1)
            t2, P2 = _psd_power(_ptrace(V.conj().T @ V, m, n), p - 1)
            S1 += mu * t1
            S2 += mu * t2
            cache.append((V, P1, P2))
        return S1, S2, cache

    def __call__(self, v: np.ndarray) -> tuple[float, np.ndarray]:
        Gs = self.unpack(v)
        try:
            S1, S2, cache = self.parts(Gs)
        except np.linalg.LinAlgError:
            return 1e300, np.zeros_like(v)
        p, m = self.p, self.m
        f1, f2 = S1 ** (1 / p), S2 ** (1 / p)
        if not np.isfinite(f1 + f2):
            return 1e300, np.zeros_like(v)
        c1 = S1 ** (1 / p - 1) if S1 > 0 else 0.0
        c2 = S2 ** (1 / p - 1) if S2 > 0 else 0.0
        grads = []
        for G, mu, (V, P1, P2) in zip(Gs, self.weights, cache):
            g1 = 2 * c1 * mu * (_lift(P1, m) @ G)
            g2 = -2 * c2 * mu * np.linalg.solve(G.conj().T, V @ _lift(P2, m) @ V.conj().T)
            grads.append(g1 + g2)
        return f1 + f2, self.pack(grads)


def _polar_seed(bigs: Sequence[np.ndarray], delta: float) -> list[np.ndarray]:
    """``G = |X*|^{1/2}`` regularized; exact for ``m = 1`` and for ``p = 1``."""
    out = []
    for X in bigs:
        u, s, _ = np.linalg.svd(X)
        out.append((u * np.sqrt(s + delta)) @ u.conj().T)
    return out


@dataclass
class S1Upper:
    value: float
    factorization: Factorization
    converged: bool
    iterations: int
    lower: float = 0.0  # certified lower bound found along the way

    def __iter__(self):
        yield self.value
        yield self.factorization

    @property
    def gap(self) -> float:
        return (self.value - self.lower) / self.value if self.value > 0 else 0.0


def _factor_value(A: Sequence[np.ndarray], B: Sequence[np.ndarray], weights, m: int, p: float):
    f1 = sum(w * _psd_power(_ptrace(a @ a.conj().T, m, a.shape[0] // m), p - 1)[0]
             for a, w in zip(A, weights)) ** (1 / p)
    f2 = sum(w * _psd_power(_ptrace(b.conj().T @ b, m, b.shape[1] // m), p - 1)[0]
             for b, w in zip(B, weights)) ** (1 / p)
    return f1, f2


def _balanced(A, B, weights, scale: float, base: AlgebraSpec, m: int, p: float):
    """Rescale ``(A, B) -> (lam A, B / lam)`` so both factors contribute equally."""
    f1, f2 = _factor_value(A, B, weights, m, p)
    lam = (f2 / f1) ** 0.25 if f1 > 0 and f2 > 0 else 1.0
    A = [lam * a * np.sqrt(scale) for a in A]
    B = [b / lam * np.sqrt(scale) for b in B]
    return scale * float(np.sqrt(f1 * f2)), Factorization(A, B, base, m)


def _exact_polar_pair(bigs: Sequence[np.ndarray]):
    """``A = |X*|^{1/2}``, ``B = u |X|^{1/2}`` with no regularization."""
    A, B = [], []
    for X in bigs:
        u, s, vh = np.linalg.svd(X)
        A.append((u * np.sqrt(s)) @ u.conj().T)
        B.append((u * np.sqrt(s)) @ vh)
    return A, B


def s1_norm_upper(X: AmplifiedElement, p: float, restarts: int = DEFAULT_RESTARTS, max_iter: int = 500,
                  seed: int = 0, gtol: float = 1e-10, gap_tol: float = 1e-6) -> S1Upper:
    """Upper estimate of ``||[x_ij]||_{L^p(M; S^1_m)}`` with an explicit factorization.

    Candidates are the exact polar factorization, an L-BFGS descent from the
    regularized polar seed and up to ``restarts`` descents from Gaussian
    points.  After each candidate the certified lower bound of
    :func:`s1_norm_lower` is evaluated at the best factorization; once the
    relative gap is below ``gap_tol`` the search stops.  Every returned value
    is attained by the returned factorization, so it is a valid upper bound
    whether or not the optimizer converged.
    """
    p = check_exponent(p)
    base, m = X.base, X.m
    scale = X.max_abs()
    if scale == 0:
        zero = [np.zeros((m * c.n, m * c.n), complex) for c in base.corners]
        return S1Upper(0.0, Factorization(zero, zero, base, m), True, 0, 0.0)
    weights = [c.weight for c in base.corners]
    bigs = [b / scale for b in X.bigs()]
    obj = _S1Objective(bigs, weights, [c.n for c in base.corners], m, p)
    top = max(float(np.linalg.norm(b, 2)) for b in bigs)
    rng = np.random.default_rng(seed)

    best = _balanced(*_exact_polar_pair(bigs), weights, scale, base, m, p)
    lower = _certified_lower(X, p, best[1])
    iters = 0
    ran_ok = False
    for r in range(restarts + 1):
        if best[0] - lower <= gap_tol * best[0]:
            break
        if r == 0:
            G = _polar_seed(bigs, 1e-6 * top)
        else:
            G = [(rng.standard_normal(b.shape) + 1j * rng.standard_normal(b.shape)) / np.sqrt(2 * b.shape[0])
                 + 1e-3 * np.eye(b.shape[0]) for b in bigs]
        # descend in chunks and stop as soon as the certificate closes the gap
        done = 0
        while done < max_iter:
            res = minimize(obj, obj.pack(G), jac=True, method="L-BFGS-B",
                           options={"maxiter": min(CHUNK, max_iter - done), "gtol": gtol, "ftol": 1e-15,
                                    "maxcor": 30})
            done += max(int(res.nit), 1)
            iters += int(res.nit)
            G = obj.unpack(res.x)
            try:
                Vs = [np.linalg.solve(g, x) for g, x in zip(G, bigs)]
            except np.linalg.LinAlgError:
                break
            cand = _balanced(G, Vs, weights, scale, base, m, p)
            if np.isfinite(cand[0]) and cand[0] < best[0]:
                best = cand
                lower = max(lower, _certified_lower(X, p, best[1]))
            if res.success:
                ran_ok = True
                break
            if best[0] - lower <= gap_tol * best[0]:
                break
    converged = best[0] - lower <= gap_tol * best[0] or ran_ok
    return S1Upper(best[0], best[1], converged, iters, min(lower, best[0]))


# the S^1-valued norm, lower estimate ------------------------------------------

def _norming_dual(bigs: Sequence[np.ndarray], weights: Sequence[float], p: float) -> list[np.ndarray]:
    """``z`` with ``||z||_{p'} = 1`` and ``tau(z* y) = ||y||_p``."""
    svds = [np.linalg.svd(y) for y in bigs]
    total = sum(w * float(np.sum(s ** p)) for (_, s, _), w in zip(svds, weights))
    if total == 0:
        return [np.zeros_like(y) for y in bigs]
    norm = total ** (1 / p)
    top = max(float(s[0]) for _, s, _ in svds if s.size)
    out = []
    for u, s, vh in svds:
        if p == 1:
            d = (s > 1e-12 * top).astype(float)
        else:
            d = (s / norm) ** (p - 1)
        out.append((u * d) @ vh)
    return out


def _norming_primal(bigs: Sequence[np.ndarray], weights: Sequence[float], p: float) -> list[np.ndarray]:
    """``x`` with ``||x||_p = 1`` and ``tau(x* u) = ||u||_{p'}`` for ``u`` in ``L^{p'}``."""
    q = conjugate_exponent(p)
    svds = [np.linalg.svd(u) for u in bigs]
    out = [np.zeros_like(u) for u in bigs]
    if np.isinf(q):
        c = int(np.argmax([s[0] if s.size else 0.0 for _, s, _ in svds]))
        u, s, vh = svds[c]
        out[c] = np.outer(u[:, 0], vh[0]) / weights[c]
        return out
    total = sum(w * float(np.sum(s ** q)) for (_, s, _), w in zip(svds, weights))
    if total == 0:
        return out
    norm = total ** (1 / q)
    for k, (u, s, vh) in enumerate(svds):
        out[k] = (u * (s / norm) ** (q - 1)) @ vh
    return out


def _compress(X: AmplifiedElement, xi: np.ndarray, eta: np.ndarray) -> list[np.ndarray]:
    return [np.einsum("i,j,ijab->ab", xi.conj(), eta, a) for a in X.arrays]


def _compression_lower(X: AmplifiedElement, p: float, iters: int, seed: int) -> float:
    """``max ||sum_ij conj(xi_i) x_ij eta_j||_p`` over unit vectors, by monotone dual ascent."""
    weights = [c.weight for c in X.base.corners]
    m = X.m
    rng = np.random.default_rng(seed)
    norms = np.array([[lp_norm(X.entry(i, j), p) for j in range(m)] for i in range(m)])
    i0, j0 = np.unravel_index(int(np.argmax(norms)), norms.shape)
    starts = [(np.eye(m)[i0].astype(complex), np.eye(m)[j0].astype(complex))]
    for _ in range(2):
        a = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        b = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        starts.append((a / np.linalg.norm(a), b / np.linalg.norm(b)))
    best = 0.0
    for xi, eta in starts:
        prev = -1.0
        for _ in range(iters):
            y = _compress(X, xi, eta)
            val = float(sum(w * np.sum(np.linalg.svd(a, compute_uv=False) ** p)
                            for a, w in zip(y, weights)) ** (1 / p))
            best = max(best, val)
            if val <= prev * (1 + 1e-12):
                break
            prev = val
            Z = _norming_dual(y, weights, p)
            Gm = sum(w * np.einsum("ab,ijab->ij", z.conj(), a) for z, a, w in zip(Z, X.arrays, weights))
            u, _, vh = np.linalg.svd(Gm)
            xi, eta = u[:, 0], vh[0].conj()
    return best


def _weighted_trace_norm(bigs: Sequence[np.ndarray], weights: Sequence[float]) -> float:
    return float(sum(w * np.sum(np.linalg.svd(b, compute_uv=False)) for b, w in zip(bigs, weights)))


def _schatten(mats: Sequence[np.ndarray], weights: Sequence[float], r: float) -> float:
    return float(sum(w * np.sum(np.linalg.svd(a, compute_uv=False) ** r)
                     for a, w in zip(mats, weights)) ** (1 / r))


def _pairing_lower(X: AmplifiedElement, p: float, alpha: list[np.ndarray], beta: list[np.ndarray],
                   iters: int) -> float:
    """``sup ||(alpha (x) 1) X (beta (x) 1)||_1 / (||alpha||_{2p'} ||beta||_{2p'})``.

    Each term is a lower bound: for ``x_ij = sum a_ik b_kj`` Cauchy-Schwarz and
    Hoelder give ``|<(alpha (x) 1) Z (beta (x) 1), X>| <= ||Z||_inf ||alpha||_{2p'}
    ||beta||_{2p'} ||sum a a*||_p^{1/2} ||sum b* b||_p^{1/2}``.  Starting from
    ``(alpha, beta)``, the contraction ``Z``, ``alpha`` and ``beta`` are updated
    in turn; each update can only increase the pairing.
    """
    m = X.m
    weights = [c.weight for c in X.base.corners]
    r = 2 * conjugate_exponent(p)
    rd = r / (r - 1)
    bigs = X.bigs()
    best = 0.0
    na, nb = _schatten(alpha, weights, r), _schatten(beta, weights, r)
    if na == 0 or nb == 0:
        return 0.0
    alpha = [a / na for a in alpha]
    beta = [b / nb for b in beta]
    prev = -1.0
    for _ in range(iters):
        inner = [_lift(a, m) @ x @ _lift(b, m) for a, x, b in zip(alpha, bigs, beta)]
        val = _weighted_trace_norm(inner, weights)
        best = max(best, val)
        if val <= prev * (1 + 1e-12):
            break
        prev = val
        Z = []
        for y in inner:
            u, _, vh = np.linalg.svd(y)
            Z.append(u @ vh)
        # alpha: maximize Re tau(alpha C) with C = Tr_m(X (beta (x) 1) Z*)
        C = [_ptrace(x @ _lift(b, m) @ z.conj().T, m, x.shape[0] // m) for x, b, z in zip(bigs, beta, Z)]
        alpha = [d.conj().T for d in _norming_dual(C, weights, rd)]
        D = [_ptrace(z.conj().T @ _lift(a, m) @ x, m, x.shape[0] // m) for x, a, z in zip(bigs, alpha, Z)]
        beta = [d.conj().T for d in _norming_dual(D, weights, rd)]
    return best


def _certified_lower(X: AmplifiedElement, p: float, fac: Factorization, iters: int = 200) -> float:
    """Pairing lower bound seeded from ``fac`` (the trace norm at ``p = 1``)."""
    if p == 1:
        return amplified_norm(X, 1.0) * (1 - ROUNDING_GUARD)
    t = (p - 1) / 2
    alpha = [_psd_power(P, t)[1] for P in fac.row_sum().data]
    beta = [_psd_power(Q, t)[1] for Q in fac.column_sum().data]
    return _pairing_lower(X, p, alpha, beta, iters) * (1 - ROUNDING_GUARD)


def s1_norm_lower(X: AmplifiedElement, p: float, iters: int = 50, seed: int = 0,
                  factorization: Factorization | None = None) -> float:
    """Certified lower bound for ``||[x_ij]||_{L^p(M; S^1_m)}``.

    Takes the best of a weighted trace-norm pairing seeded from a
    near-optimal factorization (exact for ``m = 1`` and for ``p = 1``) and,
    when that leaves a gap, entry norms and vector compressions
    ``xi* [x_ij] eta`` (contractions for the S^1-valued norm).
    """
    p = check_exponent(p)
    if X.max_abs() == 0:
        return 0.0
    if factorization is None:
        up = s1_norm_upper(X, p, seed=seed)
        val, ref = up.lower, up.value
    else:
        val, ref = _certified_lower(X, p, factorization, 4 * iters), factorization.value(p)
    if val >= ref * (1 - 1e-9):
        return val
    return max(val, _compression_lower(X, p, iters, seed) * (1 - ROUNDING_GUARD))


# amplified maps ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AmplifiedMap:
    """``T (x) id_{M_m}`` acting entrywise; ``kind`` is ``"Sp"`` or ``"S1"``."""

    T: LinearMap
    m: int
    kind: str = "Sp"

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.kind not in ("Sp", "S1"):
            raise ValueError("kind must be 'Sp' or 'S1'")

    def __call__(self, X: AmplifiedElement) -> AmplifiedElement:
        if X.base != self.T.source or X.m != self.m:
            raise ValueError("amplified element does not match the map")
        return AmplifiedElement.from_columns(self.T.target, self.m, self.T.matrix @ X.columns())

    def adjoint(self, Y: AmplifiedElement) -> AmplifiedElement:
        """Adjoint for the pairing ``(tau (x) Tr)(Y* X)``."""
        return AmplifiedElement.from_columns(self.T.source, self.m, self.T.adjoint_matrix() @ Y.columns())

    def as_linear_map(self) -> LinearMap:
        src, tgt = self.T.source.tensor(self.m), self.T.target.tensor(self.m)

        def fn(x: Element) -> Element:
            X = AmplifiedElement.from_big(self.T.source, self.m, x.data)
            return self(X).as_element()

        return LinearMap.from_function(src, tgt, self.T.p, fn)

    def norm_of(self, X: AmplifiedElement) -> float:
        """The norm this amplification is measured in (``Sp`` exact, ``S1`` upper)."""
        if self.kind == "Sp":
            return amplified_norm(X, self.T.p)
        return s1_norm_upper(X, self.T.p).value


def amplify_map(T: LinearMap, m: int, kind: str = "Sp") -> AmplifiedMap:
    return AmplifiedMap(T, m, kind)


# norm estimates ----------------------------------------------------------------

@dataclass
class NormEstimate:
    lower: float
    upper: float | None
    converged: bool
    iterations: int
    witness: AmplifiedElement | None = None
    per_m: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lower < 0:
            raise ValueError("lower bound must be non-negative")


def analytic_upper(T: LinearMap, kind: str) -> float | None:
    """Exact or analytic upper bound for recognized maps, else ``None``.

    Any separating map splits per source corner into a direct part (which
    contributes its plain norm) and an anti-direct part (a weighted copy of
    the transposition on that corner).  With densities ``h_pi, h_sigma``:
    ``||T||_cb <= max (h_pi + h_sigma n^{2p|1/p - 1/2|})^{1/p}`` and
    ``||T||_{S^1} <= max (h_pi + h_sigma n^p)^{1/p}``.
    """
    from .separating import NotJordanError, NotSeparatingError, corner_densities, extract_yeadon, jordan_split
    if np.max(np.abs(T.matrix), initial=0.0) == 0:
        return 0.0
    try:
        triple = extract_yeadon(T)
        split = jordan_split(triple.J)
    except (NotSeparatingError, NotJordanError):
        return None
    p = T.p
    dens = corner_densities(T, triple, split)
    worst = 0.0
    for (hpi, hsig), c in zip(dens, T.source.corners):
        if kind == "cb":
            factor = c.n ** (2 * p * abs(1 / p - 0.5))
        elif kind == "S1":
            factor = float(c.n) ** p
        else:
            raise ValueError("kind must be 'cb' or 'S1'")
        worst = max(worst, hpi + hsig * factor)
    return worst ** (1 / p) * (1 + ROUNDING_GUARD)


def _seed_families(spec: AlgebraSpec, m: int) -> list[AmplifiedElement]:
    out = []
    for c in range(len(spec.corners)):
        out.append(matrix_unit_family(spec, m, c))
        out.append(matrix_unit_family(spec, m, c, swap=True))
    return out


def _normalize(X: AmplifiedElement, p: float) -> AmplifiedElement | None:
    nx = amplified_norm(X, p)
    return None if nx == 0 else X / nx


def _power_iteration(A: AmplifiedMap, X: AmplifiedElement, p: float, max_iter: int, tol: float):
    """Dual power iteration for ``sup ||A X||_p / ||X||_p``; the value never decreases."""
    src_w = [c.weight for c in A.T.source.corners]
    tgt_w = [c.weight for c in A.T.target.corners]
    X = _normalize(X, p)
    if X is None:
        return 0.0, None, 0, True
    val = amplified_norm(A(X), p)
    for it in range(1, max_iter + 1):
        Y = A(X)
        Z = AmplifiedElement.from_big(A.T.target, A.m, _norming_dual(Y.bigs(), tgt_w, p))
        U = A.adjoint(Z)
        Xn = AmplifiedElement.from_big(A.T.source, A.m, _norming_primal(U.bigs(), src_w, p))
        new = amplified_norm(A(Xn), p)
        if new <= val * (1 + tol):
            if new > val:
                X, val = Xn, new
            return val, X, it, True
        X, val = Xn, new
    return val, X, max_iter, False


def cb_norm_estimate(T: LinearMap, p: float | None = None, m_max: int | None = None,
                     restarts: int = 8, seed: int = 0, max_iter: int = 200, tol: float = 1e-12) -> NormEstimate:
    """Lower estimate of ``||T||_cb`` (sup over ``m <= m_max``) with an analytic upper.

    For each ``m`` the ratio ``||(T (x) id) X||_p / ||X||_p`` is maximized by
    dual power iteration from matrix-unit families, random points and the
    best witness of the previous ``m``.
    """
    p = check_exponent(T.p if p is None else p)
    T = T.with_p(p)
    m_max = m_max or 2 * max(T.source.sizes)
    rng = np.random.default_rng(seed)
    best_val, best_X = 0.0, None
    per_m = {}
    iters = 0
    all_conv = True
    for m in range(1, m_max + 1):
        A = amplify_map(T, m, "Sp")
        starts = _seed_families(T.source, m)
        starts += [AmplifiedElement.random(T.source, m, rng) for _ in range(restarts)]
        if best_X is not None:
            starts.append(best_X.padded(m))
        runs = pmap(lambda X0: _power_iteration(A, X0, p, max_iter, tol), starts)
        for val, X, it, conv in runs:
            iters += it
            all_conv = all_conv and conv
            if X is not None and (val > best_val or (best_X is not None and best_X.m < m and val >= best_val)):
                best_val, best_X = val, X
        if best_X is not None and best_X.m < m:
            best_X = best_X.padded(m)
        per_m[m] = best_val
    best_val *= 1 - ROUNDING_GUARD
    upper = analytic_upper(T, "cb")
    if upper is not None and best_val > upper * (1 + 1e-9):
        log.warning("cb lower estimate %.6g exceeds analytic upper %.6g", best_val, upper)
    converged = all_conv or (upper is not None and best_val >= upper * (1 - 1e-9))
    return NormEstimate(best_val, upper, converged, iters, best_X, per_m)


def s1_bounded_norm_estimate(T: LinearMap, p: float | None = None, m_max: int | None = None,
                             restarts: int = 8, seed: int = 0, s1_restarts: int = 1) -> NormEstimate:
    """Lower estimate of ``||T||_{S^1}`` over ``m <= m_max``.

    The certified ratio is ``s1_norm_lower(T X) / s1_norm_upper(X)``; the
    heuristic ratio ``s1_norm_upper(T X) / s1_norm_upper(X)`` is reported in
    ``details``.  At ``p = 1`` both are exact.
    """
    p = check_exponent(T.p if p is None else p)
    T = T.with_p(p)
    m_max = m_max or 2 * max(T.source.sizes)
    rng = np.random.default_rng(seed)
    best_val, best_X, heuristic = 0.0, None, 0.0
    per_m = {}
    iters = 0
    converged = True
    for m in range(1, m_max + 1):
        A = amplify_map(T, m, "S1")
        starts = _seed_families(T.source, m)
        starts += [AmplifiedElement.random(T.source, m, rng) for _ in range(restarts)]
        if best_X is not None:
            starts.append(best_X.padded(m))

        def ratio(X):
            den = s1_norm_upper(X, p, restarts=s1_restarts, seed=seed)
            if den.value == 0:
                return 0.0, 0.0, X, den.iterations, den.converged
            Y = A(X)
            num_lo = s1_norm_lower(Y, p, seed=seed)
            num_up = s1_norm_upper(Y, p, restarts=s1_restarts, seed=seed)
            return (num_lo / den.value, num_up.value / den.value, X,
                    den.iterations + num_up.iterations, den.converged and num_up.converged)

        for lo, hi, X, it, conv in pmap(ratio, starts):
            iters += it
            converged = converged and conv
            heuristic = max(heuristic, hi)
            if lo > best_val:
                best_val, best_X = lo, X
        per_m[m] = best_val
    upper = analytic_upper(T, "S1")
    return NormEstimate(best_val, upper, converged, iters, best_X, per_m,
                        {"heuristic_ratio": heuristic})


# special identities ----------------------------------------------------------------

@dataclass
class IdentityReport:
    n: int
    m: int
    p: float
    samples: int
    cb_max_rel: float
    s1_max_rel: float
    passed: bool
    failures: list = field(default_factory=list)


def check_special_identities(n: int, m: int, p: float, samples: int = 20, seed: int = 0,
                             rtol_cb: float = 1e-8, rtol_s1: float = 1e-3) -> IdentityReport:
    """Transposition identities on random ``[x_ij]`` over ``M_n``.

    ``||[t(x_ij)]||_p = ||[x_ji]||_p`` holds exactly for the S^p norms and is
    compared through upper estimates on both sides for the S^1-valued norm.
    Realizing ``M^op`` through transposition, the S^1 check is also the
    opposite-algebra identity.
    """
    from .algebra import full_matrix_algebra
    p = check_exponent(p)
    spec = full_matrix_algebra(n)
    rng = np.random.default_rng(seed)
    cb_rel = s1_rel = 0.0
    failures = []
    for s in range(samples):
        X = AmplifiedElement.random(spec, m, rng)
        tin, tout = transpose_inner(X), transpose_outer(X)
        a, b = amplified_norm(tin, p), amplified_norm(tout, p)
        r = abs(a - b) / max(a, b)
        cb_rel = max(cb_rel, r)
        u = s1_norm_upper(tin, p, seed=seed).value
        v = s1_norm_upper(tout, p, seed=seed).value
        r2 = abs(u - v) / max(u, v)
        s1_rel = max(s1_rel, r2)
        if r > rtol_cb or r2 > rtol_s1:
            failures.append({"sample": s, "cb_rel": r, "s1_rel": r2})
    return IdentityReport(n, m, p, samples, cb_rel, s1_rel, not failures, failures)
