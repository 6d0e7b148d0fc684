"""Numerical verification of the Schwarz calculation for holomorphic maps
f: (M, g) -> (N, h) between chart metrics.

The central identity (checked by cross-validation, one side finite
difference, one side assembled from exact curvature data):

    box_g u = |nabla df|^2
              + Ric2(g)_{k lbar} g^{k qbar} g^{p lbar} h_{a bbar}
                f^a_p conj(f^b_q)
              - R^h_{a bbar c dbar} (g^{i jbar} f^a_i conj(f^b_j))
                                    (g^{p qbar} f^c_p conj(f^d_q))

with u = tr_{omega_g}(f* omega_h) and box_g u = g^{i jbar} d^2 u / dz_i dzbar_j.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import certify as certify_mod
from . import curvature, linalg, metric as metric_mod, wirtinger
from .certify import Budget
from .metric import MetricJet, MetricSpec
from .wirtinger import Expr

RANK_SV_THRESHOLD = 1e-8
CRITICAL_U = 1e-10


@dataclass(frozen=True)
class MapSpec:
    """Holomorphic map given by target components in z_1..z_m; holomorphy is
    structural (conjugated variables are rejected at construction)."""

    m: int
    components: tuple[Expr, ...]
    texts: tuple[str, ...]

    @property
    def n_target(self) -> int:
        return len(self.components)

    @property
    def is_constant(self) -> bool:
        return all(_has_no_variable(c) for c in self.components)

    @classmethod
    def from_components(cls, m: int, texts: list[str],
                        params: dict[str, float] | None = None) -> "MapSpec":
        comps = []
        for text in texts:
            e = wirtinger.parse(text, m, params)
            if not wirtinger.is_holomorphic(e):
                raise wirtinger.NotHolomorphicError(
                    f"map component {text!r} contains conjugated variables")
            comps.append(e)
        return cls(m=m, components=tuple(comps), texts=tuple(texts))

    @classmethod
    def identity(cls, m: int) -> "MapSpec":
        return cls.from_components(m, [f"z{k + 1}" for k in range(m)])


def _has_no_variable(e: Expr) -> bool:
    if isinstance(e, wirtinger.Var):
        return False
    if isinstance(e, (wirtinger.Const, wirtinger.Param)):
        return True
    if isinstance(e, wirtinger.Neg):
        return _has_no_variable(e.arg)
    if isinstance(e, wirtinger.Pow):
        return _has_no_variable(e.base)
    return _has_no_variable(e.left) and _has_no_variable(e.right)


def map_to_dict(f: MapSpec) -> dict:
    return {"domain_dim": f.m, "target_dim": f.n_target,
            "components": list(f.texts)}


def map_from_dict(d: dict) -> MapSpec:
    f = MapSpec.from_components(int(d["domain_dim"]), list(d["components"]))
    if "target_dim" in d and int(d["target_dim"]) != f.n_target:
        raise ValueError("target_dim does not match the number of components")
    return f


def load_map(path: str) -> MapSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return map_from_dict(json.load(fh))


@dataclass
class MapJet:
    """Pointwise map data: value, df[a, i] = df_a/dz_i, and the symmetric
    second derivatives d2f[a, i, j]."""

    p: np.ndarray
    fp: np.ndarray
    df: np.ndarray
    d2f: np.ndarray


def map_jet(f: MapSpec, p) -> MapJet:
    p = np.asarray(p, dtype=complex)
    if p.shape != (f.m,):
        raise ValueError(f"point must have {f.m} coordinates, got {p.shape}")
    nt = f.n_target
    fp = np.zeros(nt, complex)
    df = np.zeros((nt, f.m), complex)
    d2f = np.zeros((nt, f.m, f.m), complex)
    for a, comp in enumerate(f.components):
        j = wirtinger.holo_jet(comp, p)
        fp[a] = j.value
        df[a] = j.d1
        d2f[a] = 0.5 * (j.d2 + j.d2.T)
    return MapJet(p=p, fp=fp, df=df, d2f=d2f)


# --------------------------------------------------------------------------
# Pullback trace and covariant differential


def pullback_form(h: np.ndarray, df: np.ndarray) -> np.ndarray:
    """(f* h)[i, j] = sum h[a, b] df[a, i] conj(df[b, j])."""
    return np.einsum("ab,ai,bj->ij", h, df, df.conj())


def trace_u(gj: MetricJet, hj: MetricJet, mj: MapJet) -> float:
    """u = g^{i jbar} h_{a bbar} f^a_i conj(f^b_j) >= 0, zero iff df = 0."""
    val = np.einsum("ji,ij->", gj.g_inv, pullback_form(hj.g, mj.df))
    return float(val.real)


def u_value(g: MetricSpec, h: MetricSpec, f: MapSpec, p) -> float:
    """Fast evaluation of u at p (metric values and first map derivatives only)."""
    p = np.asarray(p, dtype=complex)
    gmat = metric_mod.eval_matrix(g, p)
    nt = f.n_target
    fp = np.zeros(nt, complex)
    df = np.zeros((nt, f.m), complex)
    for a, comp in enumerate(f.components):
        jh = wirtinger.holo_jet(comp, p)
        fp[a] = jh.value
        df[a] = jh.d1
    hmat = metric_mod.eval_matrix(h, fp)
    ginv = np.linalg.inv(0.5 * (gmat + gmat.conj().T))
    return float(np.einsum("ji,ij->", ginv, pullback_form(hmat, df)).real)


def nabla_df(gj: MetricJet, hj: MetricJet, mj: MapJet) -> tuple[np.ndarray, float]:
    """Covariant differential ofds = df in T*M (x) f*(TN) and its squared norm.

    (nabla df)^a_{ij} = d_j f^a_i - Gamma^{g,k}_{ji} f^a_k
                        + Gamma^{h,a}_{bc}(f(p)) f^b_j f^c_i,
    contracted with g^{-1}, g^{-1}, h for the norm.
    """
    gam_g = curvature.connection(gj)
    gam_h = curvature.connection(hj)
    nd = (mj.d2f
          - np.einsum("kji,ak->aij", gam_g, mj.df)
          + np.einsum("abc,bj,ci->aij", gam_h, mj.df, mj.df))
    norm2 = np.einsum("ab,pi,qj,aij,bpq->", hj.g, gj.g_inv, gj.g_inv,
                      nd, nd.conj())
    return nd, float(norm2.real)


# --------------------------------------------------------------------------
# Finite-difference Laplacians


def _fd_mixed_hessian(fun, p: np.ndarray, step: float) -> np.ndarray:
    """Mixed complex Hessian d^2 fun / dz_i dzbar_j of a real scalar by
    central differences in the 2m real coordinates."""
    m = p.shape[0]
    h = step

    def at(*moves) -> float:
        q = p.copy()
        for r, s in moves:
            if r < m:
                q[r] += s * h
            else:
                q[r - m] += 1j * s * h
        return fun(q)

    f0 = fun(p)
    hess = np.zeros((2 * m, 2 * m))
    plus = [at((r, +1)) for r in range(2 * m)]
    minus = [at((r, -1)) for r in range(2 * m)]
    for r in range(2 * m):
        hess[r, r] = (plus[r] - 2 * f0 + minus[r]) / h ** 2
        for s in range(r + 1, 2 * m):
            cross = (at((r, +1), (s, +1)) - at((r, +1), (s, -1))
                     - at((r, -1), (s, +1)) + at((r, -1), (s, -1))) / (4 * h ** 2)
            hess[r, s] = hess[s, r] = cross
    return 0.25 * (hess[:m, :m] + hess[m:, m:]
                   + 1j * (hess[:m, m:] - hess[m:, :m]))


def _fd_holomorphic_gradient(fun, p: np.ndarray, step: float) -> np.ndarray:
    """d fun / dz_i of a real scalar by central differences."""
    m = p.shape[0]
    grad = np.zeros(m, complex)
    for k in range(m):
        qp, qm = p.copy(), p.copy()
        qp[k] += step
        qm[k] -= step
        dx = (fun(qp) - fun(qm)) / (2 * step)
        qp, qm = p.copy(), p.copy()
        qp[k] += 1j * step
        qm[k] -= 1j * step
        dy = (fun(qp) - fun(qm)) / (2 * step)
        grad[k] = 0.5 * (dx - 1j * dy)
    return grad


def box_scalar_fd(fun, p, ginv: np.ndarray, step: float = 1e-3) -> float:
    """box fun = g^{i jbar} d^2 fun / dz_i dzbar_j by central differences."""
    if not 0.0 < step <= 1e-2:
        raise ValueError(f"step must be in (0, 1e-2], got {step}")
    p = np.asarray(p, dtype=complex)
    hess = _fd_mixed_hessian(fun, p, step)
    return float(np.einsum("ji,ij->", ginv, hess).real)


def box_u_fd(g: MetricSpec, h: MetricSpec, f: MapSpec, p,
             step: float = 1e-3) -> float:
    """Complex Laplacian of u at p by finite differences of the exact u."""
    p = np.asarray(p, dtype=complex)
    ginv = metric_mod.jet(g, p).g_inv
    return box_scalar_fd(lambda q: u_value(g, h, f, q), p, ginv, step)


def bochner_rhs(g: MetricSpec, h: MetricSpec, f: MapSpec, p) -> float:
    """Formula side of the identity, assembled from exact curvature data."""
    p = np.asarray(p, dtype=complex)
    gj = metric_mod.jet(g, p)
    mj = map_jet(f, p)
    hj = metric_mod.jet(h, mj.fp)
    _, norm2 = nabla_df(gj, hj, mj)
    ric2 = curvature.ricci(curvature.chern_tensor(gj), gj.g).ric2
    phi = pullback_form(hj.g, mj.df)
    middle = np.einsum("kl,qk,lp,pq->", ric2, gj.g_inv, gj.g_inv, phi)
    rh = curvature.chern_tensor(hj).R
    amat = np.einsum("ji,ai,bj->ab", gj.g_inv, mj.df, mj.df.conj())
    last = np.einsum("abcd,ab,cd->", rh, amat, amat)
    return norm2 + float(middle.real) - float(last.real)


def bochner_residual(g: MetricSpec, h: MetricSpec, f: MapSpec, p,
                     step: float = 1e-3, tol: float = linalg.TOL_FD,
                     richardson: bool = True) -> float:
    """|box_u (finite differences) - formula route|.

    When the plain central difference misses tol, the Laplacian is redone
    with steps (step, step/2) combined fourth order before reporting.
    """
    rhs = bochner_rhs(g, h, f, p)
    box1 = box_u_fd(g, h, f, p, step)
    res = abs(box1 - rhs)
    if res > tol and richardson:
        box2 = box_u_fd(g, h, f, p, step / 2)
        res = abs((4.0 * box2 - box1) / 3.0 - rhs)
    return res


# --------------------------------------------------------------------------
# Inequality machinery


@dataclass(frozen=True)
class SchwarzBounds:
    """Constants of the curvature hypotheses: Ric2(g) >= -lam g + mu f*h and
    target bisectional curvature <= -kappa; r is the maximal df rank found."""

    lam: float
    mu: float
    kappa: float
    r: int | None = None

    def __post_init__(self):
        if self.mu < 0 or self.kappa < 0:
            raise ValueError("mu and kappa must be nonnegative")


def numerical_rank(df: np.ndarray, threshold: float = RANK_SV_THRESHOLD) -> int:
    return int(np.sum(np.linalg.svd(df, compute_uv=False) > threshold))


def cauchy_schwarz_residual(phi: np.ndarray, n: int) -> float:
    """||Phi||_F^2 - (tr Phi)^2 / n for a Hermitian Phi; nonnegative up to
    rounding whenever Phi is expressed in a unitary frame."""
    fro2 = float(np.einsum("pq,pq->", phi, phi.conj()).real)
    tr = float(np.trace(phi).real)
    return fro2 - tr * tr / n


@dataclass
class PointInequality:
    point: np.ndarray
    u: float
    rank: int
    hyp_ric2_min_eig: float
    hyp_ric2_ok: bool
    hyp_rbc_status: str
    hyp_rbc_ok: bool
    hypotheses_ok: bool
    cs_residual: float
    rank_bound_residual: float | None
    box_u: float
    conclusion_u_residual: float
    box_log_u: float | None
    conclusion_log_residual: float | None
    kato_residual: float
    notes: str = ""


@dataclass
class SchwarzReport:
    bounds: SchwarzBounds
    points: list[PointInequality]
    notices: list[str]

    @property
    def hypotheses_verified_everywhere(self) -> bool:
        return all(pt.hypotheses_ok for pt in self.points)


def schwarz_inequality_report(g: MetricSpec, h: MetricSpec, f: MapSpec,
                              points, bounds: SchwarzBounds,
                              budget: Budget | None = None,
                              step: float = 1e-3) -> SchwarzReport:
    """Checks, pointwise: hypothesis (i) Ric2(g) + lam g - mu f*h >= 0,
    hypothesis (ii) B_h <= -kappa at the image point (via certify), the
    trace Cauchy-Schwarz step, the canonical-form rank bound, and the
    conclusions box u >= -lam u + (kappa/r + mu/n) u^2 and, away from
    critical points, box log u >= -lam + (kappa/r + mu/n) u.

    Conclusions are asserted only where both hypotheses verified.
    """
    budget = budget or Budget(samples=2000, starts=4)
    points = [np.asarray(p, complex) for p in points]
    if not points:
        raise ValueError("point set must be nonempty")
    notices = []
    if f.is_constant:
        notices.append("constant map: u = 0 everywhere, log branch skipped")

    jets = []
    ranks = []
    for p in points:
        gj = metric_mod.jet(g, p)
        mj = map_jet(f, p)
        hj = metric_mod.jet(h, mj.fp)
        jets.append((gj, mj, hj))
        ranks.append(numerical_rank(mj.df))
    r_max = max(max(ranks), 1)
    bounds = SchwarzBounds(lam=bounds.lam, mu=bounds.mu, kappa=bounds.kappa,
                           r=r_max)
    nd = g.n
    coeff = bounds.kappa / r_max + bounds.mu / nd

    out = []
    for p, (gj, mj, hj), rank in zip(points, jets, ranks):
        u = trace_u(gj, hj, mj)
        phi = pullback_form(hj.g, mj.df)

        ric2 = curvature.ricci(curvature.chern_tensor(gj), gj.g).ric2
        hyp1 = ric2 + bounds.lam * gj.g - bounds.mu * phi
        min_eig = float(np.linalg.eigvalsh(0.5 * (hyp1 + hyp1.conj().T))[0])
        hyp1_ok = min_eig >= -1e-10

        t_h = curvature.at_point(h, mj.fp).unitary
        verdict = certify_mod.certify_sign(t_h, "<=", -bounds.kappa, budget)
        hyp2_ok = verdict.status == "certified"

        eg = linalg.unitary_frame(gj.g)
        phi_u = np.einsum("ia,jb,ij->ab", eg.E, eg.E.conj(), phi)
        cs = cauchy_schwarz_residual(phi_u, nd)

        rank_residual = None
        if bounds.kappa > 0 and u > CRITICAL_U:
            eh = linalg.unitary_frame(hj.g)
            df_tilde = np.linalg.inv(eh.E) @ mj.df @ eg.E
            uu, sv, _ = np.linalg.svd(df_tilde)
            weights = np.zeros(f.n_target)
            weights[:sv.shape[0]] = sv ** 2
            e2 = linalg.UnitaryFrame(eh.E @ uu, base_metric_tag=eh.base_metric_tag)
            rh_u = curvature.to_frame(curvature.chern_tensor(hj), e2).R
            s_val = float(np.einsum("aacc,a,c->", rh_u, weights, weights).real)
            rank_residual = -(bounds.kappa / r_max) * float(np.sum(weights)) ** 2 - s_val

        box_u = box_scalar_fd(lambda q: u_value(g, h, f, q), p, gj.g_inv, step)
        concl_u = box_u - (-bounds.lam * u + coeff * u * u)

        box_log = None
        concl_log = None
        kato = 0.0
        if u > CRITICAL_U:
            box_log = box_scalar_fd(lambda q: np.log(u_value(g, h, f, q)),
                                    p, gj.g_inv, step)
            concl_log = box_log - (-bounds.lam + coeff * u)
            du = _fd_holomorphic_gradient(lambda q: u_value(g, h, f, q), p, step)
            du_norm2 = float(np.einsum("ji,i,j->", gj.g_inv, du, du.conj()).real)
            _, nd_norm2 = nabla_df(gj, hj, mj)
            kato = nd_norm2 - du_norm2 / u
        else:
            _, nd_norm2 = nabla_df(gj, hj, mj)
            kato = nd_norm2

        out.append(PointInequality(
            point=p, u=u, rank=rank,
            hyp_ric2_min_eig=min_eig, hyp_ric2_ok=hyp1_ok,
            hyp_rbc_status=verdict.status, hyp_rbc_ok=hyp2_ok,
            hypotheses_ok=hyp1_ok and hyp2_ok,
            cs_residual=cs, rank_bound_residual=rank_residual,
            box_u=box_u, conclusion_u_residual=concl_u,
            box_log_u=box_log, conclusion_log_residual=concl_log,
            kato_residual=kato,
            notes="" if u > CRITICAL_U else "critical point: log branch skipped"))
    return SchwarzReport(bounds=bounds, points=out, notices=notices)


@dataclass
class SupBoundReport:
    max_u: float
    points_checked: int
    constants_bound: float | None
    constants_status: str
    rank_bound: float | None
    rank_status: str
    measured_b: float | None
    rank: int | None


def sup_bound_check(g: MetricSpec, h: MetricSpec, f: MapSpec, points,
                    bounds: SchwarzBounds) -> SupBoundReport:
    """Compare the sampled sup of u with the two closed-form bounds.

    Constants branch (kappa + mu > 0): sup u <= n lam/(kappa + mu).
    Rank branch (kappa > 0): sup u <= r b / kappa with b measured from the
    second Ricci curvature over the sample. Sampled checks can only report
    'consistent' or 'violated (hypotheses likely unmet or region not
    representative)'; they never assert the global statement.
    """
    points = [np.asarray(p, complex) for p in points]
    max_u = 0.0
    measured_b = 0.0
    max_rank = 0
    for p in points:
        gj = metric_mod.jet(g, p)
        mj = map_jet(f, p)
        hj = metric_mod.jet(h, mj.fp)
        max_u = max(max_u, trace_u(gj, hj, mj))
        max_rank = max(max_rank, numerical_rank(mj.df))
        ric2 = curvature.ricci(curvature.chern_tensor(gj), gj.g).ric2
        eg = linalg.unitary_frame(gj.g)
        ric2_u = np.einsum("ia,jb,ij->ab", eg.E, eg.E.conj(), ric2)
        low = float(np.linalg.eigvalsh(0.5 * (ric2_u + ric2_u.conj().T))[0])
        measured_b = max(measured_b, -low)

    def classify(bound: float | None) -> str:
        if bound is None:
            return "no bound applicable"
        if max_u <= bound + 1e-9:
            return "consistent"
        return "violated (hypotheses likely unmet or region not representative)"

    constants = None
    if bounds.kappa + bounds.mu > 0:
        constants = g.n * bounds.lam / (bounds.kappa + bounds.mu)
    rank_bound = None
    if bounds.kappa > 0:
        rank_bound = max(max_rank, 1) * measured_b / bounds.kappa
    return SupBoundReport(max_u=max_u, points_checked=len(points),
                          constants_bound=constants,
                          constants_status=classify(constants),
                          rank_bound=rank_bound,
                          rank_status=classify(rank_bound),
                          measured_b=measured_b, rank=max_rank)
