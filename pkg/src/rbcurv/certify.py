"""Sign certification for the real bisectional quadratic form on the PSD
sphere {xi Hermitian, xi >= 0, tr(xi^2) = 1}.

Three evidence tiers, never conflated:

  1. spectral bounds: extreme eigenvalues of the form extended to the whole
     Hermitian unit sphere; they enclose the PSD-restricted extrema, so a
     bound clearing the threshold is a certificate;
  2. multi-start projected gradient descent on the factor chart
     xi = V V^H / ||V V^H||_F with the exact gradient of the quadratic form;
  3. seeded sampling of frames/weights and of normalized Gram matrices.

A Verdict is `certified` only on tier-1 evidence, `refuted` only with an
explicit witness direction violating the condition by at least the
strictness margin, and `inconclusive` otherwise (with both envelopes
reported).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import curvature, metric as metric_mod
from .curvature import ChernTensor
from .metric import MetricSpec

STRICT_MARGIN = 1e-9
CONDITION_OPS = (">", ">=", "<", "<=")


@dataclass(frozen=True)
class Budget:
    """Work budget for one certification call."""

    samples: int = 100_000
    starts: int = 32
    tol: float = 1e-10
    seed: int = 0
    iter_cap: int = 500
    chunk: int = 65536

    def __post_init__(self):
        if self.samples < 1 or self.starts < 1 or self.iter_cap < 1:
            raise ValueError("samples, starts and iter_cap must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True)
class PsdDirection:
    """PSD Hermitian matrix with tr(xi^2) = 1, the argument of the form."""

    xi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "xi", curvature.check_psd_direction(self.xi))


@dataclass
class Verdict:
    """Certification result for one sign condition at one tensor."""

    condition: str
    op: str
    threshold: float
    status: str  # "certified" | "refuted" | "inconclusive"
    spectral_lower: float
    spectral_upper: float
    best_min: float
    best_max: float
    witness: PsdDirection | None
    witness_value: float | None
    samples: int
    starts: int
    seed: int
    evidence: str
    note: str = ""


# --------------------------------------------------------------------------
# Real representation of the quadratic form on Hermitian matrices


def hermitian_basis(n: int) -> np.ndarray:
    """Orthonormal basis of the real space of Hermitian n x n matrices
    under <A, B> = Re tr(AB): diagonal units, then symmetric and
    antisymmetric pair matrices in lexicographic order."""
    mats = []
    for i in range(n):
        m = np.zeros((n, n), complex)
        m[i, i] = 1.0
        mats.append(m)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for i in range(n):
        for j in range(i + 1, n):
            s = np.zeros((n, n), complex)
            s[i, j] = s[j, i] = inv_sqrt2
            mats.append(s)
            a = np.zeros((n, n), complex)
            a[i, j] = 1j * inv_sqrt2
            a[j, i] = -1j * inv_sqrt2
            mats.append(a)
    return np.stack(mats)


def quad_operator(t: ChernTensor) -> np.ndarray:
    """Real symmetric matrix representing xi -> Re Q(xi) in the Hermitian basis."""
    basis = hermitian_basis(t.n)
    c = np.einsum("ijkl,sij,tkl->st", t.R, basis, basis).real
    return 0.5 * (c + c.T)


def spectral_bounds(t: ChernTensor) -> tuple[float, float]:
    """Eigenvalue range of the form on the full Hermitian unit sphere.

    Guaranteed sandwich: lower <= min over the PSD sphere and
    max over the PSD sphere <= upper.
    """
    qhat = quad_operator(t)
    w = np.linalg.eigvalsh(qhat)
    slack = 64.0 * np.finfo(float).eps * float(np.abs(qhat).max(initial=0.0))
    return float(w[0]) - slack, float(w[-1]) + slack


def _coords(basis: np.ndarray, m: np.ndarray) -> np.ndarray:
    return np.einsum("sij,ji->s", basis, m).real


def _from_coords(basis: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("s,sij->ij", v, basis)


def quad_values(t: ChernTensor, xis: np.ndarray) -> np.ndarray:
    """Re Q(xi) for a batch of Hermitian directions, no validation."""
    return np.einsum("ijkl,bij,bkl->b", t.R, xis, xis).real


# --------------------------------------------------------------------------
# Samplers


def _batch_unitaries(rng, count: int, n: int) -> np.ndarray:
    """Haar unitaries via vectorized Gram-Schmidt (positive-diagonal QR)."""
    z = (rng.standard_normal((count, n, n))
         + 1j * rng.standard_normal((count, n, n))) / np.sqrt(2.0)
    q = np.empty_like(z)
    for j in range(n):
        v = z[:, :, j].copy()
        for k in range(j):
            proj = np.einsum("bi,bi->b", q[:, :, k].conj(), v)
            v -= proj[:, None] * q[:, :, k]
        q[:, :, j] = v / np.linalg.norm(v, axis=1, keepdims=True)
    return q


def _frame_weight_directions(rng, count: int, n: int) -> np.ndarray:
    """xi = U diag(a) U^H with Haar U and simplex-of-squares weights a."""
    u = _batch_unitaries(rng, count, n)
    a = np.sqrt(rng.dirichlet(np.ones(n), size=count))
    return np.einsum("buv,bv,bwv->buw", u, a.astype(complex), u.conj())


def _gram_directions(rng, count: int, n: int) -> np.ndarray:
    """xi = V V^H / ||V V^H||_F with complex Gaussian V."""
    v = (rng.standard_normal((count, n, n))
         + 1j * rng.standard_normal((count, n, n))) / np.sqrt(2.0)
    w = np.einsum("bik,bjk->bij", v, v.conj())
    norms = np.sqrt(np.einsum("bij,bij->b", w, w.conj()).real)
    return w / norms[:, None, None]


@dataclass
class SampleExtrema:
    min_value: float
    argmin: np.ndarray
    max_value: float
    argmax: np.ndarray
    count: int
    seed: int


def sample_extrema(t: ChernTensor, count: int, seed: int,
                   chunk: int = 65536) -> SampleExtrema:
    """Envelope of Q over `count` sampled directions, deterministic per seed.

    Two samplers interleaved by global sample parity: (Haar frame, random
    simplex-of-squares weights) on even indices, normalized Gram matrices on
    odd indices. Chunked sequential generation makes the first N draws of a
    2N-sample run identical to an N-sample run.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    n = t.n
    ss = np.random.SeedSequence(seed)
    child_frame, child_gram = ss.spawn(2)
    rng_frame = np.random.default_rng(child_frame)
    rng_gram = np.random.default_rng(child_gram)

    best_min = np.inf
    best_max = -np.inf
    argmin = argmax = None
    for start in range(0, count, chunk):
        m = min(chunk, count - start)
        n_frame = (m + (1 if start % 2 == 0 else 0)) // 2
        n_gram = m - n_frame
        batches = []
        if n_frame:
            batches.append(_frame_weight_directions(rng_frame, n_frame, n))
        if n_gram:
            batches.append(_gram_directions(rng_gram, n_gram, n))
        xis = np.concatenate(batches) if len(batches) > 1 else batches[0]
        vals = quad_values(t, xis)
        i_min = int(np.argmin(vals))
        i_max = int(np.argmax(vals))
        if vals[i_min] < best_min:
            best_min = float(vals[i_min])
            argmin = xis[i_min].copy()
        if vals[i_max] > best_max:
            best_max = float(vals[i_max])
            argmax = xis[i_max].copy()
    return SampleExtrema(min_value=best_min, argmin=argmin,
                         max_value=best_max, argmax=argmax,
                         count=count, seed=seed)


# --------------------------------------------------------------------------
# Projected gradient descent on the factor chart


@dataclass
class OptimizationResult:
    value: float
    direction: PsdDirection
    converged: bool
    starts: int


def _project_psd_coords(basis: np.ndarray, v: np.ndarray) -> np.ndarray | None:
    """Nearest point of the PSD sphere: clip negative eigenvalues, renormalize."""
    xi = _from_coords(basis, v)
    w, u = np.linalg.eigh(0.5 * (xi + xi.conj().T))
    w = np.clip(w, 0.0, None)
    norm = float(np.sqrt(np.sum(w ** 2)))
    if norm < 1e-150:
        return None
    xi = (u * (w / norm)) @ u.conj().T
    return _coords(basis, xi)


def optimize_extremum(t: ChernTensor, direction: str, starts: int = 32,
                      tol: float = 1e-10, seed: int = 0, iter_cap: int = 500,
                      warm: tuple = ()) -> OptimizationResult:
    """Best local extremum of Q on the PSD sphere by multi-start projected
    gradient descent in direction space.

    Each step minimizes the exact quadratic restriction of the form to the
    great circle spanned by the iterate and its Riemannian gradient (closed
    form, no finite differences), then projects back onto the PSD sphere,
    backtracking along the circle if the projection spoils the decrease.
    Runs `starts` random Gram starts plus any warm-start directions; a run
    stops when the step improvement drops below tol.
    """
    if direction not in ("min", "max"):
        raise ValueError("direction must be 'min' or 'max'")
    if starts < 1:
        raise ValueError("starts must be >= 1")
    sign = 1.0 if direction == "min" else -1.0
    n = t.n
    basis = hermitian_basis(n)
    qhat = sign * quad_operator(t)

    rng = np.random.default_rng(seed)
    start_coords = []
    for x in warm:
        c = _project_psd_coords(basis, _coords(basis, np.asarray(x, complex)))
        if c is not None:
            start_coords.append(c)
    gram = _gram_directions(rng, starts, n)
    start_coords.extend(_coords(basis, x) for x in gram)

    best_val = np.inf
    best_coords = None
    all_converged = True
    for v0 in start_coords:
        v = v0 / np.linalg.norm(v0)
        fcur = float(v @ qhat @ v)
        converged = False
        for _ in range(iter_cap):
            qv = qhat @ v
            r = 2.0 * (qv - fcur * v)
            rn = float(np.linalg.norm(r))
            if rn < 1e-14:
                converged = True
                break
            u_dir = -r / rn
            a = fcur
            b = 2.0 * float(u_dir @ qv)
            c = float(u_dir @ qhat @ u_dir)
            theta = 0.5 * np.arctan2(-b, c - a)
            accepted = False
            while abs(theta) > 1e-18:
                cand = np.cos(theta) * v + np.sin(theta) * u_dir
                vp = _project_psd_coords(basis, cand)
                if vp is not None:
                    fn = float(vp @ qhat @ vp)
                    if fn < fcur:
                        accepted = True
                        break
                theta *= 0.5
            if not accepted:
                converged = True
                break
            delta = fcur - fn
            v, fcur = vp, fn
            if delta < tol:
                converged = True
                break
        if fcur < best_val:
            best_val = fcur
            best_coords = v
        all_converged = all_converged and converged

    xi = _from_coords(basis, best_coords)
    w, u = np.linalg.eigh(0.5 * (xi + xi.conj().T))
    w = np.clip(w, 0.0, None)
    w /= np.sqrt(np.sum(w ** 2))
    xi = (u * w) @ u.conj().T
    return OptimizationResult(value=sign * best_val,
                              direction=PsdDirection(xi),
                              converged=all_converged,
                              starts=len(start_coords))


# --------------------------------------------------------------------------
# Certification


def _canonical_probes(n: int) -> np.ndarray:
    """Deterministic seed directions: one-hot weights and uniform weights."""
    probes = []
    for i in range(n):
        m = np.zeros((n, n), complex)
        m[i, i] = 1.0
        probes.append(m)
    probes.append(np.eye(n, dtype=complex) / np.sqrt(n))
    return np.stack(probes)


def condition_text(op: str, c: float) -> str:
    return f"B {op} {c:g}"


def certify_sign(t: ChernTensor, op: str, c: float,
                 budget: Budget | None = None) -> Verdict:
    """Decide a sign condition B `op` c with three-tier evidence.

    certified: the spectral bound alone clears the threshold.
    refuted: some evaluated direction violates by >= the strictness margin;
    the witness and its re-evaluated value ship with the verdict.
    inconclusive: neither, with both envelopes reported.
    """
    if op not in CONDITION_OPS:
        raise ValueError(f"condition must be one of {CONDITION_OPS}, got {op!r}")
    budget = budget or Budget()
    lo, hi = spectral_bounds(t)

    probes = _canonical_probes(t.n)
    probe_vals = quad_values(t, probes)
    ext = sample_extrema(t, budget.samples, budget.seed, budget.chunk)

    candidates_min = [(float(v), probes[i]) for i, v in enumerate(probe_vals)]
    candidates_min.append((ext.min_value, ext.argmin))
    candidates_max = [(float(v), probes[i]) for i, v in enumerate(probe_vals)]
    candidates_max.append((ext.max_value, ext.argmax))

    warm_min = min(candidates_min, key=lambda kv: kv[0])[1]
    warm_max = max(candidates_max, key=lambda kv: kv[0])[1]
    opt_min = optimize_extremum(t, "min", budget.starts, budget.tol,
                                budget.seed, budget.iter_cap, warm=(warm_min,))
    opt_max = optimize_extremum(t, "max", budget.starts, budget.tol,
                                budget.seed + 1, budget.iter_cap, warm=(warm_max,))
    candidates_min.append((opt_min.value, opt_min.direction.xi))
    candidates_max.append((opt_max.value, opt_max.direction.xi))

    best_min, xi_min = min(candidates_min, key=lambda kv: kv[0])
    best_max, xi_max = max(candidates_max, key=lambda kv: kv[0])

    note = ""
    if not (opt_min.converged and opt_max.converged):
        note = "optimizer hit the iteration cap on at least one start"

    if op == ">":
        certified = lo > c
        violated = best_min <= c - STRICT_MARGIN
        witness_xi = xi_min
    elif op == ">=":
        certified = lo >= c
        violated = best_min <= c - STRICT_MARGIN
        witness_xi = xi_min
    elif op == "<":
        certified = hi < c
        violated = best_max >= c + STRICT_MARGIN
        witness_xi = xi_max
    else:  # "<="
        certified = hi <= c
        violated = best_max >= c + STRICT_MARGIN
        witness_xi = xi_max

    witness = None
    witness_value = None
    if certified:
        status, evidence = "certified", "spectral_bound"
    elif violated:
        status, evidence = "refuted", "witness"
        witness = PsdDirection(witness_xi)
        witness_value = curvature.quad_form(t, witness.xi)
    else:
        status, evidence = "inconclusive", "sampling+optimization"

    return Verdict(condition=condition_text(op, c), op=op, threshold=c,
                   status=status, spectral_lower=lo, spectral_upper=hi,
                   best_min=best_min, best_max=best_max, witness=witness,
                   witness_value=witness_value, samples=budget.samples,
                   starts=budget.starts, seed=budget.seed,
                   evidence=evidence, note=note)


# --------------------------------------------------------------------------
# Constant bisectional-curvature checker


@dataclass
class ConstantRbcReport:
    """Pointwise residual bundle for the constant-curvature identities.

    component_residual: max |R + pairswap(R) - 2c d_il d_kj| in a unitary
    frame; eta_residual: |trace of dbar eta (2-form normalization) +
    c n(n-1)/2|; for c = 0 the three Ricci norms and the pair skew-symmetry
    residual are checked as well.
    """

    spec_name: str
    point: np.ndarray
    c: float
    component_residual: float
    eta_trace: complex
    eta_residual: float
    ricci_norms: tuple[float, float, float] | None
    skew_residual: float | None
    tol: float
    consistent: bool


def constant_rbc_check(spec: MetricSpec, p, c: float,
                       tol: float = 1e-8) -> ConstantRbcReport:
    """Check whether the point is consistent with constant bisectional
    curvature c (all residuals <= tol)."""
    pc = curvature.at_point(spec, p)
    n = spec.n
    rep = curvature.symmetry_report(pc.unitary, c=c)

    j = pc.jet
    deta = np.einsum("iijl->jl", curvature.dbar_torsion(j))
    # metric trace with g^{j lbar} = (G^{-1})[l, j]
    trace = complex(np.einsum("jl,lj->", deta, j.g_inv))
    eta_trace = curvature.TORSION_FORM_FACTOR * trace
    target = -0.5 * c * n * (n - 1)
    eta_residual = abs(eta_trace - target)

    ricci_norms = None
    skew_residual = None
    consistent = rep.constant_rbc <= tol and eta_residual <= tol
    if c == 0.0:
        tr = curvature.ricci(pc.coord, j.g)
        ricci_norms = (float(np.abs(tr.ric1).max()),
                       float(np.abs(tr.ric2).max()),
                       float(np.abs(tr.ric3).max()))
        skew_residual = rep.pair_skew
        consistent = consistent and max(ricci_norms) <= tol and skew_residual <= tol

    return ConstantRbcReport(spec_name=spec.name, point=np.asarray(p, complex),
                             c=c, component_residual=rep.constant_rbc,
                             eta_trace=eta_trace, eta_residual=eta_residual,
                             ricci_norms=ricci_norms, skew_residual=skew_residual,
                             tol=tol, consistent=consistent)


# --------------------------------------------------------------------------
# Region scans


@dataclass(frozen=True)
class Region:
    radius: float
    count: int
    mode: str = "random"  # "random" | "grid"


def region_points(n: int, region: Region, seed: int) -> np.ndarray:
    if region.count < 1:
        raise ValueError("region count must be >= 1")
    if region.mode == "random":
        return metric_mod.ball_points(n, region.radius, region.count, seed=seed)
    if region.mode != "grid":
        raise ValueError(f"unknown region mode {region.mode!r}")
    axes = 2 * n
    k = 1
    while k ** axes < region.count:
        k += 1
        if k ** axes > 1_000_000:
            raise ValueError("grid too large; reduce count or use random mode")
    ticks = np.linspace(-region.radius, region.radius, k) if k > 1 else np.array([0.0])
    mesh = np.meshgrid(*([ticks] * axes), indexing="ij")
    flat = np.stack([m.ravel() for m in mesh], axis=1)
    pts = flat[:, :n] + 1j * flat[:, n:]
    inside = np.linalg.norm(pts, axis=1) <= region.radius + 1e-12
    return pts[inside][:region.count]


@dataclass
class ScanResult:
    points: np.ndarray
    verdicts: list[Verdict]
    counts: dict[str, int]
    positive_evidence: int
    negative_evidence: int
    summary: str


def scan(spec: MetricSpec, region: Region, op: str, c: float,
         budget: Budget | None = None) -> ScanResult:
    """Certify the condition at every sampled point of the region.

    The summary states only what the evidence class supports; sampling
    evidence is never reported as proof.
    """
    budget = budget or Budget()
    if spec.domain_hint is not None and region.radius > spec.domain_hint:
        raise ValueError(
            f"region radius {region.radius} exceeds validity radius "
            f"{spec.domain_hint} of {spec.name!r}")
    pts = region_points(spec.n, region, budget.seed)
    verdicts = []
    for idx, p in enumerate(pts):
        t = curvature.at_point(spec, p).unitary
        verdicts.append(certify_sign(t, op, c,
                                     replace(budget, seed=budget.seed + idx)))
    counts = {"certified": 0, "refuted": 0, "inconclusive": 0}
    for v in verdicts:
        counts[v.status] += 1
    positive = sum(1 for v in verdicts if v.best_min > STRICT_MARGIN)
    negative = sum(1 for v in verdicts if v.best_max < -STRICT_MARGIN)
    total = len(verdicts)
    cond = condition_text(op, c)
    parts = [f"{cond}: {counts['certified']} certified, {counts['refuted']} refuted, "
             f"{counts['inconclusive']} inconclusive of {total} points"]
    if op in (">", ">=") and counts["refuted"] == 0:
        parts.append(f"no violations found; strictly positive envelope at "
                     f"{positive} of {total} points")
    if op in ("<", "<=") and counts["refuted"] == 0:
        parts.append(f"no violations found; strictly negative envelope at "
                     f"{negative} of {total} points")
    return ScanResult(points=pts, verdicts=verdicts, counts=counts,
                      positive_evidence=positive, negative_evidence=negative,
                      summary="; ".join(parts))
