import json

import numpy as np
import pytest

from rbcurv import metric, wirtinger
from rbcurv.metric import (CatalogError, DomainError, MetricSpec, ball_points,
                           catalog, catalog_names, eval_matrix, fd_jet, jet,
                           load_metric, save_metric, scale, validate)


def test_catalog_has_six_entries():
    assert len(catalog_names()) == 6


def test_example_2_2_is_identity_at_origin():
    spec = catalog("example_2_2", eps=0.3)
    g = eval_matrix(spec, np.zeros(2, complex))
    assert np.abs(g - np.eye(2)).max() <= 1e-15


def test_flat_is_identity_everywhere():
    spec = catalog("flat", n=3)
    for p in ball_points(3, 2.0, 10, seed=0):
        assert np.abs(eval_matrix(spec, p) - np.eye(3)).max() == 0


def test_dual_is_inverse_of_example_2_2():
    g_spec = catalog("example_2_2", eps=0.3)
    h_spec = catalog("example_2_2_dual", eps=0.3)
    for p in ball_points(2, 0.1, 20, seed=1):
        g = eval_matrix(g_spec, p)
        h = eval_matrix(h_spec, p)
        assert np.abs(g @ h - np.eye(2)).max() <= 1e-10


def test_catalog_parameter_validation():
    with pytest.raises(CatalogError):
        catalog("example_2_2", eps=1.5)
    with pytest.raises(CatalogError):
        catalog("example_2_3", b=-1.0)
    with pytest.raises(CatalogError):
        catalog("example_2_2", params={})
    with pytest.raises(CatalogError, match="unknown catalog"):
        catalog("nosuch", {})
    with pytest.raises(CatalogError):
        catalog("flat", params={})


def test_jet_flat_has_zero_derivatives():
    spec = catalog("flat", n=2)
    j = jet(spec, np.array([0.3, 0.1j], dtype=complex))
    assert np.all(j.dg_hol == 0) and np.all(j.dg_anti == 0)
    assert np.all(j.ddg == 0)
    assert np.abs(j.g_inv - np.eye(2)).max() == 0


def test_jet_example_2_2_second_derivative_pattern():
    # ddg[i,j,k,l] at 0 must be d_ij d_kl + (eps-2) d_il d_kj
    eps = 0.3
    spec = catalog("example_2_2", eps=eps)
    j = jet(spec, np.zeros(2, complex))
    eye = np.eye(2)
    expect = (np.einsum("ij,kl->ijkl", eye, eye)
              + (eps - 2.0) * np.einsum("il,kj->ijkl", eye, eye))
    assert np.abs(j.ddg - expect).max() <= 1e-15


def test_jet_invariants_example_2_3():
    spec = catalog("example_2_3", b=1.0)
    j = jet(spec, np.array([0.1, 0.05], dtype=complex))
    for i in range(2):
        assert np.abs(j.dg_anti[i] - j.dg_hol[i].conj().T).max() <= 1e-12
        for k in range(2):
            assert np.abs(j.ddg[i, k] - j.ddg[k, i].conj().T).max() <= 1e-12
    assert np.abs(j.g @ j.g_inv - np.eye(2)).max() <= 1e-10


def test_jet_domain_enforced():
    spec = catalog("example_2_2", eps=0.3)
    with pytest.raises(DomainError):
        jet(spec, np.array([0.5, 0.5], dtype=complex))


def test_jet_non_pd_reports_eigenvalue():
    rows = [["1 - 2*z1*zb1"]]
    spec = MetricSpec.from_entries("shrinking", 1, rows)
    with pytest.raises(metric.NotPositiveDefiniteError, match="eigenvalue"):
        jet(spec, np.array([0.9 + 0j]))


def test_validate_flat():
    rep = validate(catalog("flat", n=2), radius=1.0, count=50, seed=0)
    assert rep.min_eigenvalue == pytest.approx(1.0)
    assert rep.positive_definite


def test_validate_example_2_2_inside_radius():
    rep = validate(catalog("example_2_2", eps=0.3), radius=0.2,
                   count=1000, seed=0)
    assert rep.min_eigenvalue > 0
    assert rep.first_failure is None


def test_validate_dual_large_radius_reports_failure():
    spec = catalog("example_2_2_dual", eps=0.3)
    big = MetricSpec(name=spec.name, n=spec.n, params=spec.params,
                     domain_hint=None, upper=spec.upper,
                     upper_text=spec.upper_text)
    rep = validate(big, radius=2.0, count=500, seed=0)
    assert rep.first_failure is not None


def test_structural_hermiticity():
    spec = catalog("example_2_3", b=1.0)
    p = np.array([0.07, -0.04 + 0.02j], dtype=complex)
    lower = wirtinger.evaluate(spec.entry(1, 0), p)
    upper = wirtinger.evaluate(spec.entry(0, 1), p)
    assert lower == upper.conjugate()


def test_from_entries_rejects_imaginary_diagonal():
    with pytest.raises(ValueError, match="not real-valued"):
        MetricSpec.from_entries("bad", 1, [["1 + i*z1*zb1"]])


def test_from_entries_rejects_non_pd_origin():
    with pytest.raises(ValueError, match="origin"):
        MetricSpec.from_entries("bad", 1, [["-1"]])


def test_json_roundtrip(tmp_path):
    spec = catalog("example_2_2", eps=0.3)
    path = tmp_path / "m.json"
    save_metric(spec, str(path))
    loaded = load_metric(str(path))
    assert loaded.n == spec.n
    p = np.array([0.1, 0.05j], dtype=complex)
    assert np.abs(eval_matrix(loaded, p) - eval_matrix(spec, p)).max() == 0
    raw = json.loads(path.read_text())
    assert set(raw) >= {"name", "dimension", "parameters", "entries_upper"}


def test_scale_multiplies_entries():
    spec = catalog("fubini_study_affine", n=2)
    doubled = scale(spec, 2.0)
    p = np.array([0.2, 0.1j], dtype=complex)
    assert np.abs(eval_matrix(doubled, p) - 2.0 * eval_matrix(spec, p)).max() <= 1e-15


def test_product_metric_block_structure():
    spec = catalog("product_flat_fs", n1=1, n2=2)
    assert spec.n == 3
    p = np.array([0.4, 0.1, 0.2j], dtype=complex)
    g = eval_matrix(spec, p)
    assert g[0, 0] == 1.0
    assert np.abs(g[0, 1:]).max() == 0
    fs = catalog("fubini_study_affine", n=2)
    g_fs = eval_matrix(fs, p[1:])
    assert np.abs(g[1:, 1:] - g_fs).max() <= 1e-15


@pytest.mark.parametrize("name,params,radius", [
    ("flat", {"n": 2}, 0.5),
    ("fubini_study_affine", {"n": 2}, 0.5),
    ("example_2_2", {"eps": 0.3}, 0.2),
    ("example_2_2_dual", {"eps": 0.3}, 0.2),
    ("example_2_3", {"b": 1.0}, 0.2),
    ("product_flat_fs", {"n1": 1, "n2": 1}, 0.5),
])
def test_property_jet_invariants_and_fd_match(name, params, radius):
    spec = catalog(name, params)
    pts = ball_points(spec.n, radius, 100, seed=3)
    for p in pts:
        j = jet(spec, p)
        for i in range(spec.n):
            assert np.abs(j.dg_anti[i] - j.dg_hol[i].conj().T).max() <= 1e-12
            for k in range(spec.n):
                assert np.abs(j.ddg[i, k] - j.ddg[k, i].conj().T).max() <= 1e-12
        assert np.abs(j.g @ j.g_inv - np.eye(spec.n)).max() <= 1e-10
    for p in pts:
        j = jet(spec, p)
        fd = fd_jet(spec, p, step=1e-4)
        scale_ = max(1.0, np.abs(j.ddg).max())
        assert np.abs(j.ddg - fd.ddg).max() <= 1e-5 * scale_
        assert np.abs(j.dg_hol - fd.dg_hol).max() <= 1e-5 * scale_
