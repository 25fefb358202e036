import json

import pytest

from varmeas.harness_cli import (
    CampaignConfig,
    GALLERY_IDS,
    build_scenario,
    default_config,
    emit_plotdata,
    gallery,
    main,
    read_plotdata,
    run_check,
    run_suite,
)
from varmeas.reports import HYPOTHESIS_FAILED, PASS, TheoremReport

MIX_SPEC = {"kind": "convex_mix", "name": "t",
            "params": {"m": [0.6, 0.4], "mu": [0.4, 0.6],
                       "rate": {"kind": "power", "c": 1.0, "p": 1.0},
                       "f": [1.0, -1.0]}}


class TestScenarios:
    def test_convex_mix_bundle(self):
        sc = build_scenario(MIX_SPEC)
        assert sc["measure"].nonneg
        assert sc["function"].is_constant

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            build_scenario({"kind": "nope"})

    def test_missing_kind(self):
        with pytest.raises(ValueError):
            build_scenario({"params": {}})

    def test_th2v_requires_singleton(self):
        sc = build_scenario({"kind": "scaled_multi",
                             "params": {"atoms": 2, "dim": 2,
                                        "rate": {"kind": "power", "c": 1.0, "p": 1.0}}})
        with pytest.raises(ValueError):
            run_check("th2v", sc, horizon=16, tol=None)

    def test_run_check_th1(self):
        rep = run_check("th1", build_scenario(MIX_SPEC), horizon=32, tol=None)
        assert rep.verdict == PASS

    def test_declared_certificates_override(self):
        spec = dict(MIX_SPEC, certificates=[
            {"target": "tv", "kind": "power", "c": 3.0, "p": 1.0}])
        sc = build_scenario(spec)
        assert sc["measure"].tv_cert.c == 3.0
        assert sc["measure"].verify_certificates(32) == []  # looser bound still sound
        with pytest.raises(ValueError):
            build_scenario(dict(MIX_SPEC, certificates=[{"target": "bogus",
                                                         "kind": "zero"}]))

    def test_horizon_never_flips_pass_to_fail(self):
        # identical verdicts at horizon 8 and 512, looser final gap at 8
        sc8 = build_scenario(MIX_SPEC)
        rep8 = run_check("th1", sc8, horizon=8, tol=None)
        rep512 = run_check("th1", build_scenario(MIX_SPEC), horizon=512, tol=None)
        assert rep8.verdict == rep512.verdict == PASS
        assert rep8.final_gap >= rep512.final_gap


class TestGallery:
    @pytest.mark.parametrize("gid", GALLERY_IDS)
    def test_every_entry_reproduces(self, gid):
        entry = gallery(gid)
        assert entry.report.verdict == PASS

    def test_rem2_split_values(self):
        entry = gallery("rem2_weak_not_tv", level=10)
        cert = entry.report.hypothesis_results[0].certificate
        assert all(abs(v - 1.0) <= 1e-12 for v in cert["tv_values"])
        assert cert["coarse_algebra_gap"] <= 1e-12

    def test_unknown_id(self):
        with pytest.raises(ValueError):
            gallery("nope")


class TestSuite:
    def test_default_suite_all_green_and_reproducible(self, tmp_path):
        out1 = tmp_path / "r1.json"
        out2 = tmp_path / "r2.json"
        cfg = default_config()
        code1, _ = run_suite(CampaignConfig(cfg.seed, cfg.horizon, cfg.tolerance,
                                            cfg.jobs[:4], str(out1)),
                             out_stream=open(tmp_path / "log1", "w"))
        code2, _ = run_suite(CampaignConfig(cfg.seed, cfg.horizon, cfg.tolerance,
                                            cfg.jobs[:4], str(out2)),
                             out_stream=open(tmp_path / "log2", "w"))
        assert code1 == code2 == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_expectation_mismatch_flips_exit_code(self, tmp_path):
        job = {"theorem": "th1", "expect": "hypothesis_failed", "family": MIX_SPEC}
        code, results = run_suite(
            CampaignConfig(jobs=(job,), output=str(tmp_path / "r.json")),
            out_stream=open(tmp_path / "log", "w"))
        # gallery entries still reproduce, but the mismatched job trips the code
        assert code == 1
        assert not results[0]["matched"]

    def test_config_validation(self):
        with pytest.raises(ValueError):
            CampaignConfig(horizon=4)
        with pytest.raises(ValueError):
            CampaignConfig(tolerance=0.0)

    def test_config_from_dict_cross_product(self):
        cfg = CampaignConfig.from_dict({"theorem_ids": ["th1"],
                                        "family_specs": [MIX_SPEC],
                                        "output": "x.json"})
        assert cfg.jobs[0]["theorem"] == "th1"

    def test_seed_env_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("VARMEAS_SEED", "777")
        out = tmp_path / "r.json"
        run_suite(CampaignConfig(jobs=(), output=str(out)),
                  out_stream=open(tmp_path / "log", "w"))
        assert json.loads(out.read_text())["seed"] == 777


class TestPlotData:
    def test_round_trip(self, tmp_path):
        rep = run_check("th1", build_scenario(MIX_SPEC), horizon=16, tol=None)
        path = tmp_path / "curve.csv"
        emit_plotdata(rep, str(path))
        header = path.read_text().splitlines()[0]
        assert header == "n,gap,theorem,family"
        rows = read_plotdata(str(path))
        assert len(rows) == len(rep.curve)
        for (n, gap, theorem, family), (cn, cgap) in zip(rows, rep.curve):
            assert n == cn and gap == cgap
            assert theorem == rep.theorem_id and family == rep.family

    def test_empty_curve_header_only(self, tmp_path):
        rep = TheoremReport.build("demo", "fam", [], [], 0.0, 1.0)
        path = tmp_path / "empty.csv"
        emit_plotdata(rep, str(path))
        assert path.read_text().strip() == "n,gap,theorem,family"
        assert read_plotdata(str(path)) == []


class TestCli:
    def test_check_subcommand(self, tmp_path, capsys):
        fam = tmp_path / "fam.json"
        fam.write_text(json.dumps(MIX_SPEC))
        code = main(["check", "th1", "--family", str(fam), "--horizon", "32"])
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        assert out["verdict"] == "pass"

    def test_check_inline_json(self, capsys):
        code = main(["check", "th1", "--family", json.dumps(MIX_SPEC),
                     "--horizon", "16"])
        assert code == 0

    def test_bad_family_json_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{ not json")
        assert main(["check", "th1", "--family", str(bad)]) == 2

    def test_gallery_subcommand(self, capsys):
        assert main(["gallery", "mass_escape"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["id"] == "mass_escape"

    def test_emit_plot_subcommand(self, tmp_path, capsys):
        rep = run_check("th1", build_scenario(MIX_SPEC), horizon=16, tol=None)
        rp = tmp_path / "rep.json"
        rp.write_text(json.dumps(rep.to_dict()))
        out = tmp_path / "c.csv"
        assert main(["emit-plot", str(rp), str(out)]) == 0
        assert read_plotdata(str(out))

    def test_counterexample_check_exits_1(self, capsys):
        spec = json.dumps({"kind": "mass_escape", "params": {"atoms": 4}})
        assert main(["check", "th1", "--family", spec, "--horizon", "32"]) == 1
        out = json.loads(capsys.readouterr().out)
        assert out["verdict"] == HYPOTHESIS_FAILED
