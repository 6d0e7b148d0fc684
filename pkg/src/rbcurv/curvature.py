"""Chern connection and curvature engine.

Conventions, fixed once and echoed in every CLI report:

  * Curvature components R[i, j, k, l] represent R_{i jbar k lbar} with the
    FIRST index pair carrying the derivative directions:

        R_{i jbar k lbar} = - d^2 g_{k lbar} / dz_i dzbar_j
                            + g^{p qbar} (d g_{k qbar} / dz_i)
                                         (d g_{p lbar} / dzbar_j)

    where g^{p qbar} = (G^{-1})[q, p] for the plain matrix inverse of
    G[a, b] = g_{a bbar}.

  * Connection coefficients Gamma[k, i, j] represent Gamma^k_{ij} with i the
    derivative direction and j the vector index:
    Gamma^k_{ij} = sum_q g^{k qbar} d g_{j qbar} / dz_i.

  * Torsion is T^k_{ij} = Gamma^k_{ij} - Gamma^k_{ji}. The torsion 2-form
    normalization inherited by the curvature-derivative identity uses
    TORSION_FORM_FACTOR * T (factor calibrated once, see
    calibrate_torsion_factor).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg, metric as metric_mod
from .linalg import UnitaryFrame
from .metric import MetricJet, MetricSpec

# Calibrated once by calibrate_torsion_factor() and frozen: the 2-form torsion
# coefficients of the curvature-derivative identity are half of Gamma - Gamma^T.
TORSION_FORM_FACTOR = 0.5

COORDINATE = "coordinate"


class FrameMismatchError(ValueError):
    """Tensor and argument are expressed in different frames."""


@dataclass
class ChernTensor:
    """Rank-4 curvature array R[i, j, k, l] = R_{i jbar k lbar} with a frame tag."""

    R: np.ndarray
    frame: str | UnitaryFrame = COORDINATE
    tag: str = ""

    @property
    def n(self) -> int:
        return self.R.shape[0]

    @property
    def in_unitary_frame(self) -> bool:
        return isinstance(self.frame, UnitaryFrame)


def chern_tensor(j: MetricJet) -> ChernTensor:
    """Coordinate-frame Chern curvature tensor from an exact metric jet."""
    second = np.einsum("ikq,qp,jpl->ijkl", j.dg_hol, j.g_inv, j.dg_anti)
    return ChernTensor(R=-j.ddg + second, frame=COORDINATE, tag=j.tag)


def to_frame(t: ChernTensor, frame: UnitaryFrame) -> ChernTensor:
    """Express a coordinate-frame tensor in a unitary frame.

    R'_{a bbar c dbar} = sum R_{i jbar k lbar} E_ia conj(E_jb) E_kc conj(E_ld).
    """
    if t.frame != COORDINATE:
        raise FrameMismatchError("tensor is not in the coordinate frame")
    if t.tag and frame.base_metric_tag and t.tag != frame.base_metric_tag:
        raise FrameMismatchError(
            f"frame belongs to {frame.base_metric_tag!r}, tensor to {t.tag!r}")
    e = frame.E
    rp = np.einsum("ijkl,ia,jb,kc,ld->abcd", t.R, e, e.conj(), e, e.conj())
    return ChernTensor(R=rp, frame=frame, tag=t.tag)


def hermitian_pair_residual(t: ChernTensor) -> float:
    """Max |R_{i jbar k lbar} - conj(R_{j ibar l kbar})|."""
    return float(np.abs(t.R - t.R.transpose(1, 0, 3, 2).conj()).max())


@dataclass
class PointCurvature:
    """Curvature bundle at one point: jet, deterministic unitary frame, and
    the tensor in both frames."""

    jet: MetricJet
    frame: UnitaryFrame
    coord: ChernTensor
    unitary: ChernTensor


def at_point(spec: MetricSpec, p) -> PointCurvature:
    j = metric_mod.jet(spec, p)
    frame = linalg.unitary_frame(j.g, tag=j.tag)
    coord = chern_tensor(j)
    return PointCurvature(jet=j, frame=frame, coord=coord,
                          unitary=to_frame(coord, frame))


# --------------------------------------------------------------------------
# Connection, torsion, Gauduchon form


def connection(j: MetricJet) -> np.ndarray:
    """Connection coefficients Gamma[k, i, j] = Gamma^k_{ij} (deriv i, vector j)."""
    return np.einsum("ijq,qk->kij", j.dg_hol, j.g_inv)


@dataclass
class TorsionData:
    """Connection, torsion and Gauduchon 1-form components.

    T[k, i, j] = Gamma^k_{ij} - Gamma^k_{ji} (antisymmetric in (i, j) by
    construction); eta[j] = sum_i T[i, i, j].
    """

    gamma: np.ndarray
    T: np.ndarray
    eta: np.ndarray

    @property
    def max_torsion(self) -> float:
        return float(np.abs(self.T).max())

    @property
    def max_eta(self) -> float:
        return float(np.abs(self.eta).max())


def torsion(j: MetricJet) -> TorsionData:
    gamma = connection(j)
    t = gamma - gamma.transpose(0, 2, 1)
    eta = np.einsum("iij->j", t)
    return TorsionData(gamma=gamma, T=t, eta=eta)


def dbar_gamma(j: MetricJet) -> np.ndarray:
    """Exact d Gamma^k_{ij} / dzbar_l, shaped [k, i, j, l].

    Needs only the stored first and mixed second derivatives:
    d(G^{-1})/dzbar_l = -G^{-1} (dG/dzbar_l) G^{-1}.
    """
    d_ginv = -np.einsum("qa,lab,bk->lqk", j.g_inv, j.dg_anti, j.g_inv)
    term1 = np.einsum("iljq,qk->kijl", j.ddg, j.g_inv)
    term2 = np.einsum("ijq,lqk->kijl", j.dg_hol, d_ginv)
    return term1 + term2


def dbar_torsion(j: MetricJet) -> np.ndarray:
    """Exact d T^k_{ij} / dzbar_l (the (0,1) Chern covariant derivative in
    holomorphic coordinates), shaped [k, i, j, l]."""
    dg = dbar_gamma(j)
    return dg - dg.transpose(0, 2, 1, 3)


def torsion_identity_residual(spec: MetricSpec, p,
                              sigma: float = TORSION_FORM_FACTOR) -> float:
    """Residual of the curvature-derivative identity for the torsion.

    Computes D^k_{ij,lbar} = d T^k_{ij} / dzbar_l exactly, lowers k with g,
    and returns max |2 sigma (lowered D)_{ij q l} -
    (R_{j lbar i qbar} - R_{i lbar j qbar})|.
    """
    j = metric_mod.jet(spec, p)
    lowered = np.einsum("kijl,kq->ijql", dbar_torsion(j), j.g)
    r = chern_tensor(j).R
    rhs = np.einsum("jliq->ijql", r) - np.einsum("iljq->ijql", r)
    return float(np.abs(2.0 * sigma * lowered - rhs).max())


def calibrate_torsion_factor(spec: MetricSpec | None = None, points: int = 20,
                             radius: float = 0.1, seed: int = 2024) -> float:
    """Pick the factor in {1, 1/2} minimizing the identity residual.

    Run once on a non-Kaehler metric (default example_2_2, eps = 0.3); the
    winner is frozen as TORSION_FORM_FACTOR.
    """
    spec = spec or metric_mod.catalog("example_2_2", eps=0.3)
    pts = metric_mod.ball_points(spec.n, radius, points, seed=seed)
    best = None
    for sigma in (1.0, 0.5):
        worst = max(torsion_identity_residual(spec, p, sigma) for p in pts)
        if best is None or worst < best[1]:
            best = (sigma, worst)
    return best[0]


# --------------------------------------------------------------------------
# Ricci tensors and scalar curvature forms


@dataclass
class RicciTriple:
    """The three metric traces of the Chern curvature.

    ric1[i, j] = g^{k lbar} R_{i jbar k lbar}   (trace over the vector pair)
    ric2[i, j] = g^{k lbar} R_{k lbar i jbar}   (trace over the derivative pair)
    ric3[i, j] = g^{k lbar} R_{i lbar k jbar}   (mixed trace)
    """

    ric1: np.ndarray
    ric2: np.ndarray
    ric3: np.ndarray

    def max_asymmetry(self) -> float:
        return max(linalg.hermitian_asymmetry(self.ric1),
                   linalg.hermitian_asymmetry(self.ric2),
                   linalg.hermitian_asymmetry(self.ric3))


def ricci(t: ChernTensor, g: np.ndarray) -> RicciTriple:
    """Ricci triple of a coordinate-frame tensor with the metric value g.

    g^{k lbar} = (G^{-1})[l, k], so the contraction weight for the (k, l)
    slots is G^{-1} transposed into 'lk' order.
    """
    if t.frame != COORDINATE:
        raise FrameMismatchError("ricci expects a coordinate-frame tensor")
    ginv = linalg.invert_pd(g)
    ric1 = np.einsum("ijkl,lk->ij", t.R, ginv)
    ric2 = np.einsum("klij,lk->ij", t.R, ginv)
    ric3 = np.einsum("ilkj,lk->ij", t.R, ginv)
    return RicciTriple(ric1=ric1, ric2=ric2, ric3=ric3)


def ric2_matrix(t: ChernTensor, g: np.ndarray) -> np.ndarray:
    """Second Ricci curvature alone (the Schwarz-lemma hypothesis input)."""
    return ricci(t, g).ric2


# --------------------------------------------------------------------------
# Sectional and bisectional curvature forms


def hsc_many(t: ChernTensor, g: np.ndarray, directions: np.ndarray,
             tol: float = 1e-10) -> np.ndarray:
    """Holomorphic sectional curvature H(v) = R(v, vbar, v, vbar)/|v|_g^4
    for a batch of direction rows."""
    v = np.asarray(directions, dtype=complex)
    if v.ndim == 1:
        v = v[None, :]
    norms2 = np.einsum("kl,bk,bl->b", g, v, v.conj()).real
    if np.any(np.sqrt(np.maximum(norms2, 0.0)) <= 1e-14):
        raise ValueError("degenerate direction: |v|_g <= 1e-14")
    num = np.einsum("ijkl,bi,bj,bk,bl->b", t.R, v, v.conj(), v, v.conj())
    worst = float(np.abs(num.imag).max(initial=0.0))
    if worst > tol * max(1.0, float(np.abs(num.real).max(initial=0.0))):
        raise ValueError(f"holomorphic sectional value not real: imag {worst:.3e}")
    return num.real / norms2 ** 2


def hsc(t: ChernTensor, g: np.ndarray, v) -> float:
    """Holomorphic sectional curvature in a single direction."""
    return float(hsc_many(t, g, np.asarray(v, complex)[None, :])[0])


@dataclass(frozen=True)
class FrameWeights:
    """Unitary frame plus nonnegative weights with sum of squares 1."""

    frame: UnitaryFrame
    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        object.__setattr__(self, "a", a)
        if np.any(a < 0):
            raise ValueError("weights must be nonnegative")
        if abs(np.sum(a ** 2) - 1.0) > 1e-12:
            raise ValueError("weights must satisfy sum a_i^2 = 1 within 1e-12")


def _require_frame(t: ChernTensor, frame: UnitaryFrame | None = None) -> None:
    if not t.in_unitary_frame:
        raise FrameMismatchError(
            "operation requires a tensor expressed in a unitary frame")
    if frame is not None and not np.allclose(t.frame.E, frame.E, atol=1e-12):
        raise FrameMismatchError("tensor frame differs from the supplied frame")


def rbc_value(t: ChernTensor, w: FrameWeights, tol: float = 1e-10) -> float:
    """Real bisectional curvature value
    B = (1/|a|^2) sum_{i,j} R_{i ibar j jbar} a_i a_j in the tensor's frame."""
    _require_frame(t, w.frame)
    diag = np.einsum("iijj->ij", t.R)
    val = complex(w.a @ diag @ w.a) / float(np.sum(w.a ** 2))
    if abs(val.imag) > tol * max(1.0, abs(val.real)):
        raise ValueError(f"bisectional value not real: imag {val.imag:.3e}")
    return val.real


def check_psd_direction(xi: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Validate a PSD Hermitian direction with tr(xi^2) = 1; returns it symmetrized."""
    m = linalg.require_hermitian(xi, tol, label="direction")
    w = np.linalg.eigvalsh(m)
    if w[0] < -tol:
        raise ValueError(f"direction not PSD: min eigenvalue {w[0]:.3e}")
    norm2 = float(np.sum(w ** 2))
    if abs(norm2 - 1.0) > tol:
        raise ValueError(f"direction not normalized: tr(xi^2) = {norm2:.12f}")
    return m


def quad_form(t: ChernTensor, xi: np.ndarray, tol: float = 1e-10) -> float:
    """Quadratic form Q(xi) = sum R_{i jbar k lbar} xi_ij xi_kl on the
    PSD sphere tr(xi^2) = 1; equals the bisectional value of the spectral
    decomposition of xi."""
    _require_frame(t)
    m = check_psd_direction(xi, tol)
    val = complex(np.einsum("ijkl,ij,kl->", t.R, m, m))
    if abs(val.imag) > tol * max(1.0, abs(val.real)):
        raise ValueError(f"quadratic form not real: imag {val.imag:.3e}")
    return val.real


def pair_sum(t: ChernTensor, a, tol: float = 1e-10) -> float:
    """Averaged pair form sum_{i,k} (R_{i ibar k kbar} + R_{i kbar k ibar}) a_i a_k.

    Positivity of this form for all nonnegative weights is equivalent to
    positive holomorphic sectional curvature; contrast with rbc_value.
    """
    _require_frame(t)
    a = np.asarray(a, dtype=float)
    if np.any(a < 0) or not np.any(a > 0):
        raise ValueError("weights must be nonnegative and not all zero")
    d1 = np.einsum("iikk->ik", t.R)
    d2 = np.einsum("ikki->ik", t.R)
    val = complex(a @ (d1 + d2) @ a)
    if abs(val.imag) > tol * max(1.0, abs(val.real)):
        raise ValueError(f"pair sum not real: imag {val.imag:.3e}")
    return val.real


# --------------------------------------------------------------------------
# Symmetry diagnostics


@dataclass
class SymmetryReport:
    """Max residuals of the tensor symmetries measured on one tensor."""

    hermitian_pair: float
    kahler_like: float
    pair_skew: float
    constant_rbc: float
    c: float


def symmetry_report(t: ChernTensor, c: float = 0.0) -> SymmetryReport:
    """Residuals of (i) Hermitian pair symmetry, (ii) Kaehler-like index
    symmetries, (iii) pair skew-symmetry, (iv) the constant-curvature
    pattern R + swap = 2c delta_il delta_kj (frames matter for iii/iv)."""
    r = t.R
    n = t.n
    herm = hermitian_pair_residual(t)
    kahler = max(float(np.abs(r - r.transpose(2, 1, 0, 3)).max()),
                 float(np.abs(r - r.transpose(0, 3, 2, 1)).max()))
    swapped = r + r.transpose(2, 3, 0, 1)
    skew = float(np.abs(swapped).max())
    eye = np.eye(n)
    pattern = 2.0 * c * np.einsum("il,kj->ijkl", eye, eye)
    const = float(np.abs(swapped - pattern).max())
    return SymmetryReport(hermitian_pair=herm, kahler_like=kahler,
                          pair_skew=skew, constant_rbc=const, c=c)
