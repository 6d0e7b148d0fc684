"""Acceptance gate: one test per criterion, each at its stated tolerance.

Run with `pytest tests/test_acceptance.py -v -s` to see one PASS line per
criterion. Budgets follow the stated counts (1e5 directions, 1e6 samples,
50 points per map triple, and so on).
"""

import json

import numpy as np
import pytest

from rbcurv import certify, curvature, linalg, sampling, schwarz
from rbcurv.certify import Budget, Region
from rbcurv.cli import main as cli_main
from rbcurv.curvature import FrameWeights, at_point, hsc_many, quad_form
from rbcurv.metric import MetricSpec, ball_points, catalog, jet
from rbcurv.schwarz import MapSpec, SchwarzBounds

ORIGIN2 = np.zeros(2, complex)


def report(num, text):
    print(f"[criterion {num:02d}] PASS  {text}")


def hyperbolic_ball(n=2):
    den = "(1 - normsq(z))"
    rows = []
    for i in range(1, n + 1):
        row = [f"({den} + z{i}*zb{i})/{den}^2"]
        for j in range(i + 1, n + 1):
            row.append(f"zb{i}*z{j}/{den}^2")
        rows.append(row)
    return MetricSpec.from_entries("hyperbolic_ball", n, rows, domain_hint=0.9)


def test_criterion_01_example_2_2_components():
    eps = 0.3
    t = at_point(catalog("example_2_2", eps=eps), ORIGIN2).coord
    eye = np.eye(2)
    expect = (-np.einsum("ij,kl->ijkl", eye, eye)
              + (2 - eps) * np.einsum("il,kj->ijkl", eye, eye))
    err = np.abs(t.R - expect).max()
    assert err <= 1e-10
    report(1, f"example_2_2 curvature at 0 matches closed form, err {err:.2e}")


def test_criterion_02_example_2_2_hsc_constant():
    pc = at_point(catalog("example_2_2", eps=0.3), ORIGIN2)
    rng = np.random.default_rng(20)
    dirs = rng.standard_normal((100_000, 2)) + 1j * rng.standard_normal((100_000, 2))
    vals = hsc_many(pc.coord, pc.jet.g, dirs)
    err = np.abs(vals - 0.7).max()
    assert err <= 1e-9
    report(2, f"H = 0.7 on 1e5 random directions, max deviation {err:.2e}")


def test_criterion_03_example_2_2_rbc_witness():
    eps = 0.3
    worst = 0.0
    for n in (2, 3, 4):
        pc = at_point(catalog("example_2_2", eps=eps, n=n), np.zeros(n, complex))
        w = FrameWeights(pc.frame, np.full(n, 1 / np.sqrt(n)))
        val = curvature.rbc_value(pc.unitary, w)
        worst = max(worst, abs(val - (-n + 2 - eps)))
        assert abs(val - (-n + 2 - eps)) <= 1e-10
        verdict = certify.certify_sign(pc.unitary, ">=", 0.0,
                                       Budget(samples=50_000, starts=8, seed=n))
        assert verdict.status == "refuted"
        reval = quad_form(pc.unitary, verdict.witness.xi)
        assert abs(reval - verdict.witness_value) <= 1e-9
        assert verdict.witness_value <= -(n - 2 + eps) + 1e-6
    report(3, f"B(uniform) = -n+2-eps for n in 2..4 (max err {worst:.2e}); "
              "B >= 0 refuted with reproducible witnesses")


def test_criterion_04_dual_metric_h_negative_b_not_nonpositive():
    spec = catalog("example_2_2_dual", eps=0.3)
    rng = np.random.default_rng(21)
    pts = ball_points(2, 0.05, 100, seed=22)
    max_h = -np.inf
    for p in pts:
        pc = at_point(spec, p)
        dirs = rng.standard_normal((10, 2)) + 1j * rng.standard_normal((10, 2))
        max_h = max(max_h, hsc_many(pc.coord, pc.jet.g, dirs).max())
    assert max_h < 0

    uniform = np.eye(2, dtype=complex) / np.sqrt(2)
    for p in pts[:3]:
        pc = at_point(spec, p)
        q_uniform = quad_form(pc.unitary, uniform)
        assert q_uniform > 0
        verdict = certify.certify_sign(pc.unitary, "<=", 0.0,
                                       Budget(samples=20_000, starts=8, seed=1))
        assert verdict.status == "refuted"
        assert verdict.witness_value > 0
    report(4, f"H < 0 at 1000 sampled pairs (max {max_h:.4f}); "
              f"B <= 0 refuted, uniform-weights Q = {q_uniform:.4f} > 0")


def test_criterion_05_example_2_3():
    pc = at_point(catalog("example_2_3", b=1.0), ORIGIN2)
    rng = np.random.default_rng(23)
    worst = 0.0
    for _ in range(1000):
        v = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        m = v @ v.conj().T
        m /= np.sqrt(np.einsum("ij,ij->", m, m.conj()).real)
        x, y, tt = m[0, 0].real, m[1, 1].real, m[0, 1]
        expect = x * x + y * y + 3 * x * y - 4 * abs(tt) ** 2
        worst = max(worst, abs(quad_form(pc.unitary, m) - expect))
    assert worst <= 1e-10

    tr = curvature.ricci(pc.coord, pc.jet.g)
    assert tr.ric3[0, 0].real == -1.0 and abs(tr.ric3[0, 0].imag) == 0.0
    assert tr.ric1[1, 1] == pytest.approx(-1.0, abs=1e-14)
    assert tr.ric2[0, 0] == pytest.approx(-1.0, abs=1e-14)

    ext = certify.sample_extrema(pc.unitary, 1_000_000, seed=24)
    opt = certify.optimize_extremum(pc.unitary, "min", starts=16, seed=25,
                                    warm=(ext.argmin,))
    assert ext.min_value > 0 and opt.value > 0
    report(5, f"Q form reproduced on 1e3 PSD directions (err {worst:.2e}); "
              f"Ricci entries -1 placed; 1e6 samples + optimization min "
              f"{min(ext.min_value, opt.value):.4f} > 0")


def test_criterion_06_kahler_sanity_fs():
    for n in (2, 3):
        spec = catalog("fubini_study_affine", n=n)
        rng = np.random.default_rng(30 + n)
        pts = ball_points(n, 0.4, 100, seed=26 + n)
        hsc_vals = []
        for p in pts:
            pc = at_point(spec, p)
            td = curvature.torsion(pc.jet)
            assert td.max_torsion <= 1e-10 and td.max_eta <= 1e-10
            rep_ = curvature.symmetry_report(pc.unitary)
            assert rep_.kahler_like <= 1e-8
            d = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            hsc_vals.append(curvature.hsc(pc.coord, pc.jet.g, d))
        hsc_vals = np.array(hsc_vals)
        c_star = float(hsc_vals.mean())
        assert hsc_vals.max() - hsc_vals.min() <= 1e-8
        for p in pts[:3]:
            t = at_point(spec, p).unitary
            mn = certify.optimize_extremum(t, "min", starts=8, seed=27)
            mx = certify.optimize_extremum(t, "max", starts=8, seed=28)
            assert mn.value == pytest.approx(c_star, abs=1e-6)
            assert mx.value == pytest.approx((n + 1) * c_star / 2, abs=1e-6)
    report(6, f"FS n=2,3: Kaehler residuals in tolerance; HSC constant "
              f"c* = {c_star:.9f}; envelopes [c*, (n+1)c*/2] hit within 1e-6")


def test_criterion_07_fs_moment_identity():
    cases = [(2, (1, 1, 2, 2), 1 / 6), (3, (1, 1, 2, 2), 1 / 12),
             (3, (1, 2, 2, 1), 1 / 12)]
    lines = []
    for n, idx, target in cases:
        est = sampling.fs_moment(n, *idx, count=1_000_000, seed=40 + n)
        assert est.target == pytest.approx(target)
        assert abs(est.value - est.target) <= 3 * est.std_error
        lines.append(f"n={n} idx={idx}: {est.value.real:.6f} vs {target:.6f}")
    report(7, "moment identity within 3 sigma at 1e6 samples; " + "; ".join(lines))


def test_criterion_08_berger_equivalence():
    rng = np.random.default_rng(50)
    for k in range(20):
        n = int(rng.integers(2, 4))
        r = rng.standard_normal((n,) * 4) + 1j * rng.standard_normal((n,) * 4)
        r = 0.5 * (r + r.transpose(1, 0, 3, 2).conj())
        t = curvature.ChernTensor(
            r, frame=linalg.UnitaryFrame(np.eye(n, dtype=complex), "synthetic"))
        b = rng.random(n)
        rep_ = sampling.berger_check(t, b, count=200_000, seed=60 + k)
        assert rep_.agrees, (k, rep_.mc_value, rep_.closed_form, rep_.gate)

    pc = at_point(catalog("example_2_2", eps=0.3), ORIGIN2)
    b = np.full(2, 1 / np.sqrt(2))
    closed = sampling.berger_closed_form(pc.unitary, b)
    w = FrameWeights(pc.frame, b)
    b_val = curvature.rbc_value(pc.unitary, w)
    assert closed > 0 and b_val == pytest.approx(-0.3, abs=1e-12)
    report(8, f"20 synthesized tensors agree MC vs closed form (3 sigma); "
              f"example_2_2 gap: pair sum {closed:.4f} > 0 while B = {b_val:.1f}")


def test_criterion_09_bochner_identity_five_triples():
    flat1 = catalog("flat", n=1)
    flat2 = catalog("flat", n=2)
    fs2 = catalog("fubini_study_affine", n=2)
    triples = [
        ("flat->flat id", flat2, flat2, MapSpec.identity(2), 0.5),
        ("flat->flat z^2", flat1, flat1,
         MapSpec.from_components(1, ["z1^2"]), 0.5),
        ("fs->example_2_2 id", fs2, catalog("example_2_2", eps=0.3),
         MapSpec.identity(2), 0.05),
        ("fs->dual id", fs2, catalog("example_2_2_dual", eps=0.3),
         MapSpec.identity(2), 0.05),
        ("example_2_3->fs quad", catalog("example_2_3", b=1.0), fs2,
         MapSpec.from_components(2, ["z1^2", "z1*z2"]), 0.1),
    ]
    worst = {}
    for name, g, h, f, radius in triples:
        pts = ball_points(g.n, radius, 50, seed=70)
        res = [schwarz.bochner_residual(g, h, f, p, step=1e-3) for p in pts]
        worst[name] = max(res)
        assert worst[name] <= 1e-4, (name, worst[name])
    summary = ", ".join(f"{k}: {v:.1e}" for k, v in worst.items())
    report(9, f"identity residual <= 1e-4 at 50 points per triple ({summary})")


def test_criterion_10_schwarz_inequality_machinery():
    rng = np.random.default_rng(80)
    for _ in range(1000):
        n = int(rng.integers(1, 5))
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        phi = 0.5 * (a + a.conj().T)
        assert schwarz.cauchy_schwarz_residual(phi, n) >= -1e-12

    flat2 = catalog("flat", n=2)
    ball = hyperbolic_ball(2)
    pts = ball_points(2, 0.2, 8, seed=81)
    rep_ = schwarz.schwarz_inequality_report(
        flat2, ball, MapSpec.identity(2), pts,
        SchwarzBounds(lam=0.0, mu=0.0, kappa=0.9),
        budget=Budget(samples=2000, starts=4, seed=0))
    assert rep_.hypotheses_verified_everywhere
    for pt in rep_.points:
        assert pt.hyp_rbc_status == "certified"
        assert pt.rank_bound_residual >= -1e-8
        assert pt.conclusion_u_residual >= -1e-4
        assert pt.conclusion_log_residual >= -1e-4
    report(10, "Cauchy-Schwarz >= -1e-12 on 1e3 random forms; rank bound and "
               "conclusions hold at all 8 points with certified B_h <= -0.9")


def test_criterion_11_torsion_identity_calibrated():
    assert curvature.TORSION_FORM_FACTOR == 0.5
    spec = catalog("example_2_2", eps=0.3)
    worst = max(curvature.torsion_identity_residual(spec, p)
                for p in ball_points(2, 0.1, 20, seed=90))
    assert worst <= 1e-8
    kahler_worst = 0.0
    for name, params, radius in (("flat", {"n": 2}, 0.5),
                                 ("fubini_study_affine", {"n": 2}, 0.4),
                                 ("fubini_study_affine", {"n": 3}, 0.4),
                                 ("product_flat_fs", {"n1": 1, "n2": 2}, 0.4)):
        s = catalog(name, params)
        for p in ball_points(s.n, radius, 10, seed=91):
            kahler_worst = max(kahler_worst,
                               curvature.torsion_identity_residual(s, p))
    assert kahler_worst <= 1e-10
    report(11, f"sigma = 0.5 frozen; residual {worst:.1e} on example_2_2 "
               f"(<= 1e-8), {kahler_worst:.1e} on Kaehler catalog (<= 1e-10)")


def test_criterion_12_constant_rbc_checker():
    flat_rep = certify.constant_rbc_check(catalog("flat", n=3),
                                          np.zeros(3, complex), c=0.0)
    assert flat_rep.consistent
    assert flat_rep.component_residual <= 1e-12
    assert abs(flat_rep.eta_trace) <= 1e-12

    e23 = certify.constant_rbc_check(catalog("example_2_3", b=1.0), ORIGIN2,
                                     c=0.0)
    assert not e23.consistent and e23.component_residual >= 0.1

    for name, params in (("fubini_study_affine", {"n": 2}),
                         ("example_2_2", {"eps": 0.3}),
                         ("example_2_2_dual", {"eps": 0.3}),
                         ("example_2_3", {"b": 1.0})):
        spec = catalog(name, params)
        p = np.full(spec.n, 0.03, dtype=complex)
        pc = at_point(spec, p)
        w = FrameWeights(pc.frame, np.full(spec.n, 1 / np.sqrt(spec.n)))
        c_guess = curvature.rbc_value(pc.unitary, w)
        assert not certify.constant_rbc_check(spec, p, c=c_guess).consistent
    report(12, "flat passes c=0 at 1e-12 with vanishing eta trace; "
               "example_2_3 fails c=0 at >= 0.1; no catalog metric "
               "misreported as constant")


def test_criterion_13_cli_byte_determinism(tmp_path):
    invocations = [
        ["certify", "example_2_2", "--eps", "0.3", "--point", "0,0",
         "--cond", "nonneg", "--samples", "5000", "--starts", "4",
         "--seed", "17"],
        ["eval", "example_2_3", "--b", "1", "--point", "0,0", "--seed", "17"],
        ["mc", "fs-moment", "--n", "2", "--idx", "1,1,2,2",
         "--samples", "50000", "--seed", "17"],
        ["schwarz", "flat", "flat", "identity", "--n", "2", "--points", "3",
         "--radius", "0.2", "--seed", "17"],
    ]
    for k, args in enumerate(invocations):
        a = tmp_path / f"a{k}.json"
        b = tmp_path / f"b{k}.json"
        assert cli_main(args + ["--out", str(a)]) == 0
        assert cli_main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes(), args
        json.loads(a.read_text())  # well-formed
    report(13, "4 CLI invocations repeated with the same seed are "
               "byte-identical")
