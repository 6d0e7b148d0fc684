import json

import numpy as np
import pytest

from rbcurv import cli
from rbcurv.cli import main, parse_complex, parse_point


def run_json(args, tmp_path, name="report.json"):
    out = tmp_path / name
    code = main(args + ["--out", str(out)])
    return code, json.loads(out.read_text())


def test_parse_complex_forms():
    assert parse_complex("0.3") == 0.3
    assert parse_complex("0.1+0.2i") == 0.1 + 0.2j
    assert parse_complex("-0.3i") == -0.3j
    assert parse_complex("i") == 1j
    assert np.array_equal(parse_point("0.3,0.1i"), np.array([0.3, 0.1j]))
    with pytest.raises(ValueError):
        parse_complex("zed")


def test_catalog_list_has_six_entries(tmp_path):
    code, rep = run_json(["catalog", "list"], tmp_path)
    assert code == 0
    assert rep["results"]["catalog"]["count"] == 6


def test_catalog_show_echoes_entries(tmp_path):
    code, rep = run_json(["catalog", "show", "example_2_2"], tmp_path)
    assert code == 0
    entry = rep["results"]["catalog"]["entry"]
    assert any("eps - 2" in text for row in entry["entries_upper"]
               for text in row)


def test_catalog_show_unknown_exits_2(capsys):
    assert main(["catalog", "show", "nosuch"]) == 2
    assert "error" in capsys.readouterr().err


def test_eval_example_2_3_reports_ricci(tmp_path):
    code, rep = run_json(["eval", "example_2_3", "--b", "1", "--point", "0,0"],
                         tmp_path)
    assert code == 0
    ric3 = rep["results"]["ricci"]["ric3"]
    assert ric3[0][0] == pytest.approx([-1.0, 0.0])


def test_eval_flat_zero_blocks(tmp_path):
    code, rep = run_json(["eval", "flat", "--n", "2", "--point", "0.3,0.1"],
                         tmp_path)
    assert code == 0
    assert rep["results"]["torsion"]["max_torsion"] == 0.0
    assert rep["results"]["curvature_symmetry"]["pair_skew_residual"] == 0.0


def test_eval_fs_hsc_constant(tmp_path):
    code, rep = run_json(["eval", "fubini_study_affine", "--n", "2",
                          "--point", "0.2,0.1", "--directions", "100"],
                         tmp_path)
    assert code == 0
    block = rep["results"]["hsc_random"]
    assert block["spread"] <= 1e-8
    assert block["mean"] == pytest.approx(2.0, abs=1e-8)


def test_eval_bad_point_exits_2(capsys):
    assert main(["eval", "flat", "--n", "2", "--point", "0.1"]) == 2
    assert main(["eval", "flat", "--n", "2", "--point", "xyz,1"]) == 2
    capsys.readouterr()


def test_certify_refuted_fail_on(tmp_path):
    args = ["certify", "example_2_2", "--eps", "0.3", "--point", "0,0",
            "--cond", "nonneg", "--samples", "5000", "--starts", "4",
            "--fail-on", "refuted"]
    code, rep = run_json(args, tmp_path)
    assert code == 3
    verdict = rep["results"]["verdict"]
    assert verdict["status"] == "refuted"
    assert verdict["witness_value"][0] <= -0.29 if isinstance(
        verdict["witness_value"], list) else verdict["witness_value"] <= -0.29


def test_certify_flat_certified(tmp_path):
    code, rep = run_json(["certify", "flat", "--n", "3", "--cond", "nonneg",
                          "--samples", "1000", "--starts", "2"], tmp_path)
    assert code == 0
    assert rep["results"]["verdict"]["status"] == "certified"


def test_certify_scan_positive_evidence(tmp_path):
    code, rep = run_json(["certify", "example_2_3", "--b", "1",
                          "--radius", "0.05", "--points", "5", "--cond", "pos",
                          "--samples", "2000", "--starts", "2"], tmp_path)
    assert code == 0
    scan = rep["results"]["scan"]
    assert scan["counts"]["refuted"] == 0
    assert scan["positive_evidence"] == 5


def test_certify_bad_condition_exits_2(capsys):
    assert main(["certify", "flat", "--n", "2", "--cond", "sideways"]) == 2
    capsys.readouterr()


def test_schwarz_flat_identity(tmp_path):
    code, rep = run_json(["schwarz", "flat", "flat", "identity", "--n", "2",
                          "--points", "3", "--radius", "0.2"], tmp_path)
    assert code == 0
    assert rep["results"]["bochner"]["max_residual"] <= 1e-10
    assert rep["results"]["inequalities"]["rank"] == 2


def test_schwarz_dimension_mismatch_exits_2(capsys):
    assert main(["schwarz", "flat", "flat", "z1^2", "--n", "2"]) == 2
    capsys.readouterr()


def test_schwarz_constant_map_notice(tmp_path):
    code, rep = run_json(["schwarz", "flat", "flat", "0.1,0.2", "--n", "2",
                          "--points", "2", "--radius", "0.1"], tmp_path)
    assert code == 0
    notices = rep["results"]["inequalities"]["notices"]
    assert any("constant map" in note for note in notices)


def test_schwarz_fs_to_dual(tmp_path):
    code, rep = run_json(["schwarz", "fubini_study_affine", "example_2_2_dual",
                          "identity", "--n", "2", "--eps", "0.3",
                          "--points", "4", "--radius", "0.05"], tmp_path)
    assert code == 0
    assert rep["results"]["bochner"]["max_residual"] <= 1e-4


def test_mc_fs_moment_exact_dimension_one(tmp_path):
    code, rep = run_json(["mc", "fs-moment", "--n", "1", "--idx", "1,1,1,1",
                          "--samples", "1000"], tmp_path)
    assert code == 0
    est = rep["results"]["estimate"]
    assert est["value"] == pytest.approx([1.0, 0.0], abs=1e-12)
    assert est["within_gate"] is True


def test_mc_fs_moment_n2(tmp_path):
    code, rep = run_json(["mc", "fs-moment", "--n", "2", "--idx", "1,1,2,2",
                          "--samples", "200000", "--seed", "7"], tmp_path)
    assert code == 0
    est = rep["results"]["estimate"]
    assert est["target"] == pytest.approx(1 / 6)
    assert est["within_gate"] is True


def test_mc_berger_agreement_flag(tmp_path):
    code, rep = run_json(["mc", "berger", "--metric", "example_2_2",
                          "--eps", "0.3", "--b", "uniform",
                          "--samples", "100000"], tmp_path)
    assert code == 0
    assert rep["results"]["estimate"]["agrees"] is True


def test_mc_bad_indices_exit_2(capsys):
    assert main(["mc", "fs-moment", "--n", "2", "--idx", "1,1,3,1",
                 "--samples", "10"]) == 2
    assert main(["mc", "fs-moment", "--n", "2", "--idx", "1,1",
                 "--samples", "10"]) == 2
    capsys.readouterr()


def test_byte_determinism(tmp_path):
    args = ["certify", "example_2_2", "--eps", "0.3", "--point", "0,0",
            "--cond", "nonneg", "--samples", "3000", "--starts", "3",
            "--seed", "11"]
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_reports_are_traceable_and_carry_conventions(tmp_path):
    for args in (["eval", "flat", "--n", "2"],
                 ["certify", "flat", "--n", "2", "--cond", "nonneg",
                  "--samples", "500", "--starts", "2"],
                 ["mc", "fs-moment", "--n", "1", "--idx", "1,1,1,1",
                  "--samples", "100"],
                 ["catalog", "list"]):
        code, rep = run_json(args, tmp_path)
        assert code == 0
        assert rep["tool_version"]
        conv = rep["convention_block"]
        assert conv["torsion_form_factor"] == 0.5
        assert "index_pair_convention" in conv
        for name, block in rep["results"].items():
            assert "op" in block, (args, name)
        assert "work" in rep["timings"]


def test_metric_json_file_input(tmp_path):
    from rbcurv import metric
    spec = metric.catalog("example_2_2", eps=0.3)
    path = tmp_path / "metric.json"
    metric.save_metric(spec, str(path))
    code, rep = run_json(["eval", str(path), "--point", "0,0"], tmp_path)
    assert code == 0
    g = rep["results"]["metric"]["g"]
    assert g[0][0] == pytest.approx([1.0, 0.0])


def test_map_json_file_input(tmp_path):
    import json as _json
    path = tmp_path / "map.json"
    path.write_text(_json.dumps({"domain_dim": 2, "target_dim": 2,
                                 "components": ["z1", "z2"]}))
    code, rep = run_json(["schwarz", "flat", "flat", str(path), "--n", "2",
                          "--points", "2", "--radius", "0.1"], tmp_path)
    assert code == 0
    assert rep["results"]["bochner"]["max_residual"] <= 1e-10
