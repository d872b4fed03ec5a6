import json


from ldpgrid import load_csv
from ldpgrid.bench import read_results
from ldpgrid.cli import main


class TestSynthCommand:
    def test_writes_dataset(self, tmp_path):
        out = tmp_path / "pts.csv"
        code = main(
            ["synth", "--kind", "clustered", "--n-users", "500", "--seed", "3", "--out", str(out)]
        )
        assert code == 0
        ds, dropped = load_csv(str(out))
        assert len(ds) == 500 and dropped == 0

    def test_uniform_with_bbox(self, tmp_path):
        out = tmp_path / "pts.csv"
        code = main(
            ["synth", "--kind", "uniform", "--n-users", "100", "--seed", "1",
             "--bbox", "0,0,2,4", "--out", str(out)]
        )
        assert code == 0
        ds, _ = load_csv(str(out))
        assert ds.lons.max() <= 2.0 and ds.lats.max() <= 4.0


class TestCompareCommand:
    def test_flags_run_end_to_end(self, tmp_path):
        out = tmp_path / "res.csv"
        code = main(
            ["compare", "--dataset", "clustered", "--method", "ug", "--method", "privag",
             "--epsilon", "1.0", "--rho", "0.05", "--reps", "1", "--gamma", "20",
             "--n", "3", "--seed", "11", "--out", str(out)]
        )
        assert code == 0
        rows = read_results(str(out))
        assert {r.method for r in rows} == {"ug", "privag"}
        meta = json.loads((tmp_path / "res.csv.meta.json").read_text())
        assert meta["command"] == "compare"
        assert meta["ug_n_per_epsilon"] == {"1.0": 3}

    def test_csv_dataset_path(self, tmp_path):
        data_path = tmp_path / "pts.csv"
        main(["synth", "--kind", "clustered", "--n-users", "2000", "--seed", "5",
              "--out", str(data_path)])
        out = tmp_path / "res.csv"
        code = main(
            ["compare", "--dataset", str(data_path), "--bbox", "0,0,1,1",
             "--method", "aag", "--epsilon", "1.0", "--rho", "0.05",
             "--reps", "1", "--gamma", "10", "--seed", "2", "--out", str(out)]
        )
        assert code == 0
        assert all(r.method == "aag" for r in read_results(str(out)))

    def test_identical_invocations_identical_bytes(self, tmp_path):
        argv = ["compare", "--dataset", "clustered", "--method", "privag",
                "--epsilon", "1.0", "--rho", "0.05", "--reps", "2", "--gamma", "15",
                "--seed", "9"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(argv + ["--out", str(a)]) == 0
        assert main(argv + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestConfigFile:
    def test_config_with_flag_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "dataset = clustered\n"
            "n_users = 1500\n"
            "methods = privag\n"
            "epsilons = 1.0\n"
            "rhos = 0.05\n"
            "reps = 1\n"
            "gamma = 10\n"
            "seed = 4\n"
            "# comment line\n"
        )
        out = tmp_path / "res.csv"
        code = main(["compare", "--config", str(cfg), "--reps", "2", "--out", str(out)])
        assert code == 0
        rows = read_results(str(out))
        assert {r.rep for r in rows} == {0, 1}  # flag overrode reps=1

    def test_unknown_key_fails(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("no_such_key = 1\n")
        assert main(["compare", "--config", str(cfg)]) == 2

    def test_preset_requires_csv_path(self):
        assert main(["compare", "--dataset", "gowalla"]) == 2


class TestGridinfoCommand:
    def test_defaults_to_adaptive_methods(self, tmp_path):
        out = tmp_path / "res.csv"
        code = main(
            ["gridinfo", "--dataset", "clustered", "--epsilon", "1.0",
             "--reps", "1", "--seed", "3", "--out", str(out)]
        )
        assert code == 0
        methods = {r.method for r in read_results(str(out))}
        assert methods == {"initial", "privag", "aag"}


class TestSweepCommand:
    def test_runs_with_sizes(self, tmp_path):
        out = tmp_path / "res.csv"
        code = main(
            ["sweep-uniform", "--dataset", "clustered", "--epsilon", "1.0",
             "--rho", "0.05", "--n", "2", "--n", "4", "--reps", "1",
             "--gamma", "10", "--seed", "8", "--out", str(out)]
        )
        assert code == 0
        assert {r.n_grid for r in read_results(str(out))} == {2, 4}

    def test_missing_sizes_is_config_error(self, tmp_path):
        code = main(
            ["sweep-uniform", "--dataset", "clustered", "--epsilon", "1.0",
             "--rho", "0.05", "--reps", "1", "--gamma", "10",
             "--out", str(tmp_path / "r.csv")]
        )
        assert code == 2


class TestFlagPlumbing:
    def test_alpha_sigma_override_both_methods(self):
        from ldpgrid.cli import _build_config, build_parser

        args = build_parser().parse_args(
            ["compare", "--dataset", "clustered", "--alpha", "0.1", "--sigma", "0.4"]
        )
        config = _build_config(args)
        assert config.privag_alpha == 0.1 and config.aag_alpha == 0.1
        assert config.privag_sigma == 0.4 and config.aag_sigma == 0.4

    def test_per_method_config_keys_beat_generic(self, tmp_path):
        from ldpgrid.cli import _build_config, build_parser

        cfg = tmp_path / "run.cfg"
        cfg.write_text("alpha = 0.05\naag_alpha = 0.3\n")
        args = build_parser().parse_args(["compare", "--config", str(cfg)])
        config = _build_config(args)
        assert config.privag_alpha == 0.05  # generic key fills the gap
        assert config.aag_alpha == 0.3  # specific key wins


class TestBadInput:
    def test_bad_bbox(self, tmp_path):
        code = main(
            ["compare", "--dataset", "clustered", "--bbox", "1,2,3",
             "--out", str(tmp_path / "r.csv")]
        )
        assert code == 2

    def test_missing_csv_file(self, tmp_path):
        code = main(
            ["compare", "--dataset", str(tmp_path / "absent.csv"),
             "--out", str(tmp_path / "r.csv")]
        )
        assert code == 2
