"""Hermitian metric specifications on a chart, the metric catalog, and
pointwise jet assembly.

A MetricSpec stores only the upper triangle (i <= j) of the entry
expressions; the lower triangle is derived by conjugation, so a spec with
g_ij != conj(g_ji) cannot be constructed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import linalg, wirtinger
from .linalg import NotPositiveDefiniteError
from .wirtinger import Expr, EvaluationError


class CatalogError(ValueError):
    """Unknown catalog entry or parameter outside its admissible range."""


class DomainError(ValueError):
    """Point lies outside the declared validity radius of the spec."""


@dataclass(frozen=True)
class MetricSpec:
    """Hermitian metric on a chart of C^n given by entry expressions."""

    name: str
    n: int
    params: dict[str, float]
    domain_hint: float | None
    upper: dict[tuple[int, int], Expr]
    upper_text: tuple[tuple[str, ...], ...]

    def entry(self, i: int, j: int) -> Expr:
        """Entry expression for g_{i jbar} (0-based); lower triangle by conjugation."""
        if i <= j:
            return self.upper[(i, j)]
        return wirtinger.conjugate(self.upper[(j, i)])

    @classmethod
    def from_entries(cls, name: str, n: int, rows: list[list[str]],
                     params: dict[str, float] | None = None,
                     domain_hint: float | None = None) -> "MetricSpec":
        """Build a spec from upper-triangle entry strings.

        rows[i] holds the entries (i, i), (i, i+1), ..., (i, n-1). Diagonal
        entries are validated real-valued by sampling 32 points, and the
        metric must be positive definite at the chart origin.
        """
        params = dict(params or {})
        if len(rows) != n or any(len(row) != n - i for i, row in enumerate(rows)):
            raise ValueError(
                f"expected upper-triangle rows of lengths {list(range(n, 0, -1))}")
        upper: dict[tuple[int, int], Expr] = {}
        for i, row in enumerate(rows):
            for off, text in enumerate(row):
                upper[(i, i + off)] = wirtinger.parse(text, n, params)
        spec = cls(name=name, n=n, params=params, domain_hint=domain_hint,
                   upper=upper, upper_text=tuple(tuple(row) for row in rows))
        spec._check_real_diagonal()
        g0 = eval_matrix(spec, np.zeros(n, complex))
        w = np.linalg.eigvalsh(linalg.require_hermitian(g0, 1e-9, label="g(0)"))
        if w[0] <= 0:
            raise ValueError(
                f"metric {name!r} is not positive definite at the origin "
                f"(min eigenvalue {w[0]:.3e})")
        return spec

    def _check_real_diagonal(self, count: int = 32) -> None:
        rng = np.random.default_rng(0)
        radius = min(self.domain_hint or 0.1, 0.1)
        pts = ball_points(self.n, radius, count, rng=rng)
        for i in range(self.n):
            e = self.upper[(i, i)]
            for p in pts:
                v = wirtinger.evaluate(e, p)
                if abs(v.imag) > 1e-12 * max(1.0, abs(v)):
                    raise ValueError(
                        f"diagonal entry ({i + 1},{i + 1}) of {self.name!r} is not "
                        f"real-valued: imag {v.imag:.3e} at sampled point")


def ball_points(n: int, radius: float, count: int,
                seed: int | None = None, rng=None) -> np.ndarray:
    """Uniform sample of `count` points in the complex n-ball of given radius."""
    if rng is None:
        rng = np.random.default_rng(seed)
    x = rng.standard_normal((count, 2 * n))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    r = radius * rng.random(count) ** (1.0 / (2 * n))
    pts = x * r[:, None]
    return pts[:, :n] + 1j * pts[:, n:]


def eval_matrix(spec: MetricSpec, p) -> np.ndarray:
    """Metric value g(p) only (no derivatives)."""
    p = np.asarray(p, dtype=complex)
    g = np.zeros((spec.n, spec.n), complex)
    for (i, j), e in spec.upper.items():
        v = wirtinger.evaluate(e, p)
        g[i, j] = v
        if i != j:
            g[j, i] = v.conjugate()
        else:
            g[i, i] = v.real
    return g


@dataclass
class MetricJet:
    """Pointwise metric data: g, first derivatives, mixed second derivatives.

    dg_hol[i, k, l] = d g_{k lbar} / dz_i
    dg_anti[j, k, l] = d g_{k lbar} / dzbar_j
    ddg[i, j, k, l] = d^2 g_{k lbar} / dz_i dzbar_j
    """

    p: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    dg_hol: np.ndarray
    dg_anti: np.ndarray
    ddg: np.ndarray
    spec_name: str = ""

    @property
    def n(self) -> int:
        return self.g.shape[0]

    @property
    def tag(self) -> str:
        pt = ",".join(f"{z.real:.12g}{z.imag:+.12g}j" for z in self.p)
        return f"{self.spec_name}@({pt})"


def jet(spec: MetricSpec, p) -> MetricJet:
    """Assemble the exact metric 2-jet at p and validate its invariants."""
    p = np.asarray(p, dtype=complex)
    if p.shape != (spec.n,):
        raise ValueError(f"point must have {spec.n} coordinates, got {p.shape}")
    if spec.domain_hint is not None and np.linalg.norm(p) > spec.domain_hint + 1e-12:
        raise DomainError(
            f"point with |z| = {np.linalg.norm(p):.4g} outside validity radius "
            f"{spec.domain_hint} of {spec.name!r}")
    n = spec.n
    g = np.zeros((n, n), complex)
    dg_hol = np.zeros((n, n, n), complex)
    dg_anti = np.zeros((n, n, n), complex)
    ddg = np.zeros((n, n, n, n), complex)
    for (k, l), e in spec.upper.items():
        j2 = wirtinger.jet2(e, p)
        g[k, l] = j2.value
        dg_hol[:, k, l] = j2.d1_hol
        dg_anti[:, k, l] = j2.d1_anti
        ddg[:, :, k, l] = j2.d2_mixed
        if k != l:
            g[l, k] = j2.value.conjugate()
            dg_hol[:, l, k] = j2.d1_anti.conj()
            dg_anti[:, l, k] = j2.d1_hol.conj()
            ddg[:, :, l, k] = j2.d2_mixed.conj().T
        else:
            if abs(j2.value.imag) > 1e-12 * max(1.0, abs(j2.value)):
                raise ValueError(
                    f"diagonal entry ({k + 1},{k + 1}) not real at point: "
                    f"imag {j2.value.imag:.3e}")
            g[k, k] = j2.value.real
    g = linalg.require_hermitian(g, 1e-12, label=f"g({spec.name})")
    g_inv = linalg.invert_pd(g)
    return MetricJet(p=p, g=g, g_inv=g_inv, dg_hol=dg_hol, dg_anti=dg_anti,
                     ddg=ddg, spec_name=spec.name)


def fd_jet(spec: MetricSpec, p, step: float = 1e-4) -> MetricJet:
    """Finite-difference counterpart of jet(), the independent oracle."""
    p = np.asarray(p, dtype=complex)
    n = spec.n
    g = np.zeros((n, n), complex)
    dg_hol = np.zeros((n, n, n), complex)
    dg_anti = np.zeros((n, n, n), complex)
    ddg = np.zeros((n, n, n, n), complex)
    for k in range(n):
        for l in range(n):
            j2 = wirtinger.fd_jet2(spec.entry(k, l), p, step)
            g[k, l] = j2.value
            dg_hol[:, k, l] = j2.d1_hol
            dg_anti[:, k, l] = j2.d1_anti
            ddg[:, :, k, l] = j2.d2_mixed
    g = 0.5 * (g + g.conj().T)
    return MetricJet(p=p, g=g, g_inv=np.linalg.inv(g), dg_hol=dg_hol,
                     dg_anti=dg_anti, ddg=ddg, spec_name=spec.name + "(fd)")


@dataclass
class ValidationReport:
    spec_name: str
    samples: int
    radius: float
    min_eigenvalue: float
    min_eigenvalue_point: np.ndarray
    max_asymmetry: float
    max_diag_imag: float
    first_failure: dict | None

    @property
    def positive_definite(self) -> bool:
        return self.first_failure is None and self.min_eigenvalue > 0


def validate(spec: MetricSpec, radius: float | None = None, count: int = 100,
             seed: int = 0) -> ValidationReport:
    """Sample the region and report positivity and Hermiticity diagnostics.

    Failures (non-PD points, evaluation errors at poles) are report content,
    not exceptions.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    radius = radius if radius is not None else (spec.domain_hint or 1.0)
    pts = ball_points(spec.n, radius, count, seed=seed)
    min_eig = np.inf
    min_pt = pts[0]
    max_asym = 0.0
    max_imag = 0.0
    failure = None
    for p in pts:
        try:
            g = eval_matrix(spec, p)
        except EvaluationError as exc:
            if failure is None:
                failure = {"point": p, "reason": str(exc)}
            continue
        max_asym = max(max_asym, linalg.hermitian_asymmetry(g))
        max_imag = max(max_imag, float(np.abs(np.imag(np.diagonal(g))).max()))
        w = np.linalg.eigvalsh(0.5 * (g + g.conj().T))
        if w[0] < min_eig:
            min_eig = float(w[0])
            min_pt = p
        if w[0] <= 0 and failure is None:
            failure = {"point": p, "reason": f"min eigenvalue {w[0]:.3e} <= 0"}
    return ValidationReport(spec_name=spec.name, samples=count, radius=radius,
                            min_eigenvalue=min_eig, min_eigenvalue_point=min_pt,
                            max_asymmetry=max_asym, max_diag_imag=max_imag,
                            first_failure=failure)


def scale(spec: MetricSpec, factor: float, name: str | None = None) -> MetricSpec:
    """Metric multiplied by a positive constant."""
    if factor <= 0:
        raise ValueError("scale factor must be positive")
    rows = [[f"{factor!r}*({text})" for text in row] for row in spec.upper_text]
    return MetricSpec.from_entries(name or f"{factor}*{spec.name}", spec.n, rows,
                                   params=spec.params, domain_hint=spec.domain_hint)


# --------------------------------------------------------------------------
# Catalog


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise CatalogError(message)


def _int_param(params: dict, key: str, default=None) -> int:
    if key not in params:
        _require(default is not None, f"missing required parameter {key!r}")
        return default
    v = params[key]
    _require(float(v) == int(v), f"parameter {key!r} must be an integer")
    return int(v)


def _flat_rows(n: int) -> list[list[str]]:
    return [["1" if j == i else "0" for j in range(i, n)] for i in range(n)]


def _fs_rows(n: int, offset: int = 0) -> list[list[str]]:
    s = " + ".join(f"z{offset + k + 1}*zb{offset + k + 1}" for k in range(n))
    one = f"(1 + {s})"
    rows = []
    for i in range(n):
        zi = offset + i + 1
        row = [f"({one} - z{zi}*zb{zi})/{one}^2"]
        for j in range(i + 1, n):
            zj = offset + j + 1
            row.append(f"-zb{zi}*z{zj}/{one}^2")
        rows.append(row)
    return rows


def _build_flat(params: dict) -> MetricSpec:
    n = _int_param(params, "n")
    _require(n >= 1, "flat metric needs n >= 1")
    return MetricSpec.from_entries("flat", n, _flat_rows(n), params={"n": n})


def _build_fs(params: dict) -> MetricSpec:
    n = _int_param(params, "n")
    _require(n >= 1, "fubini_study_affine needs n >= 1")
    return MetricSpec.from_entries("fubini_study_affine", n, _fs_rows(n),
                                   params={"n": n})


def _build_ex22(params: dict) -> MetricSpec:
    n = _int_param(params, "n", default=2)
    eps = float(params.get("eps", np.nan))
    _require("eps" in params, "example_2_2 needs parameter eps")
    _require(0.0 < eps < 1.0, f"eps must lie in (0, 1), got {eps}")
    _require(n >= 2, "example_2_2 needs n >= 2")
    rows = []
    for i in range(1, n + 1):
        row = [f"1 + normsq(z) + (eps - 2)*z{i}*zb{i}"]
        for j in range(i + 1, n + 1):
            row.append(f"(eps - 2)*zb{i}*z{j}")
        rows.append(row)
    return MetricSpec.from_entries("example_2_2", n, rows,
                                   params={"n": n, "eps": eps}, domain_hint=0.2)


def _build_ex22_dual(params: dict) -> MetricSpec:
    # Closed-form inverse of example_2_2 (Sherman-Morrison). With the
    # conjugation pattern zb_i z_j matching g's own, the Chern curvature at
    # the origin is exactly the negative of example_2_2's, giving H < 0
    # while B is not <= 0 there.
    n = _int_param(params, "n", default=2)
    eps = float(params.get("eps", np.nan))
    _require("eps" in params, "example_2_2_dual needs parameter eps")
    _require(0.0 < eps < 1.0, f"eps must lie in (0, 1), got {eps}")
    _require(n >= 2, "example_2_2_dual needs n >= 2")
    den = "((1 + normsq(z))*(1 - (1 - eps)*normsq(z)))"
    rows = []
    for i in range(1, n + 1):
        row = [f"1/(1 + normsq(z)) + (2 - eps)*z{i}*zb{i}/{den}"]
        for j in range(i + 1, n + 1):
            row.append(f"(2 - eps)*zb{i}*z{j}/{den}")
        rows.append(row)
    return MetricSpec.from_entries("example_2_2_dual", n, rows,
                                   params={"n": n, "eps": eps}, domain_hint=0.2)


def _build_ex23(params: dict) -> MetricSpec:
    b = float(params.get("b", np.nan))
    _require("b" in params, "example_2_3 needs parameter b")
    _require(b > 0, f"b must be positive, got {b}")
    rows = [
        ["1 - z1*zb1 + (1 + b)*z2*zb2", "(1 + b)*zb1*z2"],
        ["1 - (1 + 4*b)*z1*zb1 - z2*zb2"],
    ]
    return MetricSpec.from_entries("example_2_3", 2, rows,
                                   params={"b": b}, domain_hint=0.2)


def _build_product(params: dict) -> MetricSpec:
    n1 = _int_param(params, "n1", default=1)
    n2 = _int_param(params, "n2", default=2)
    _require(n1 >= 1 and n2 >= 1, "product blocks need n1, n2 >= 1")
    n = n1 + n2
    fs = _fs_rows(n2, offset=n1)
    rows = []
    for i in range(n):
        row = []
        for j in range(i, n):
            if i < n1 and j < n1:
                row.append("1" if i == j else "0")
            elif i < n1 or j < n1:
                row.append("0")
            else:
                row.append(fs[i - n1][j - i])
        rows.append(row)
    return MetricSpec.from_entries("product_flat_fs", n, rows,
                                   params={"n1": n1, "n2": n2})


_CATALOG = {
    "flat": {
        "build": _build_flat,
        "params": "n (dimension, >= 1)",
        "description": "Euclidean metric, identity matrix on C^n.",
    },
    "fubini_study_affine": {
        "build": _build_fs,
        "params": "n (dimension, >= 1)",
        "description": ("Fubini-Study metric on the affine chart, potential "
                        "log(1 + |z|^2); Kaehler with constant holomorphic "
                        "sectional curvature 2."),
    },
    "example_2_2": {
        "build": _build_ex22,
        "params": "eps in (0, 1); n >= 2 (default 2)",
        "description": ("U(n)-invariant metric (1 + |z|^2) d_ij + (eps - 2) "
                        "zb_i z_j with positive holomorphic sectional "
                        "curvature but non-nonnegative real bisectional "
                        "curvature near the origin."),
    },
    "example_2_2_dual": {
        "build": _build_ex22_dual,
        "params": "eps in (0, 1); n >= 2 (default 2)",
        "description": ("Dual companion of example_2_2 (closed-form matrix "
                        "inverse); its curvature at the origin is exactly the "
                        "negative of example_2_2's, so H < 0 near the origin "
                        "while B is not <= 0."),
    },
    "example_2_3": {
        "build": _build_ex23,
        "params": "b > 0 (n fixed to 2)",
        "description": ("Metric on C^2 with positive real bisectional "
                        "curvature at the origin whose three Ricci tensors "
                        "each have a negative diagonal entry."),
    },
    "product_flat_fs": {
        "build": _build_product,
        "params": "n1 >= 1 (flat block, default 1), n2 >= 1 (FS block, default 2)",
        "description": "Block product of flat C^{n1} with the FS affine chart on C^{n2}.",
    },
}


def catalog(name: str, params: dict[str, float] | None = None, **kw) -> MetricSpec:
    """Build a catalog metric by name; kw entries override params."""
    merged = dict(params or {})
    merged.update(kw)
    if name not in _CATALOG:
        raise CatalogError(
            f"unknown catalog metric {name!r}; known: {', '.join(sorted(_CATALOG))}")
    return _CATALOG[name]["build"](merged)


def catalog_names() -> list[str]:
    return sorted(_CATALOG)


def catalog_info(name: str) -> dict:
    if name not in _CATALOG:
        raise CatalogError(f"unknown catalog metric {name!r}")
    meta = _CATALOG[name]
    return {"name": name, "params": meta["params"],
            "description": meta["description"]}


# --------------------------------------------------------------------------
# JSON metric files


def spec_to_dict(spec: MetricSpec) -> dict:
    d = {
        "name": spec.name,
        "dimension": spec.n,
        "parameters": dict(spec.params),
        "entries_upper": [list(row) for row in spec.upper_text],
    }
    if spec.domain_hint is not None:
        d["domain_radius"] = spec.domain_hint
    return d


def spec_from_dict(d: dict) -> MetricSpec:
    return MetricSpec.from_entries(
        d.get("name", "metric"), int(d["dimension"]),
        [list(row) for row in d["entries_upper"]],
        params=d.get("parameters"), domain_hint=d.get("domain_radius"))


def load_metric(path: str) -> MetricSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return spec_from_dict(json.load(fh))


def save_metric(spec: MetricSpec, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec_to_dict(spec), fh, indent=2, sort_keys=True)
        fh.write("\n")
