import subprocess
import sys

import numpy as np
import pytest

from mfvol import cli, evaluation
from mfvol.cli import FactorTable
from mfvol.errors import LengthMismatch, MalformedRow, MissingColumn


def run(argv):
    return cli.main(argv)


@pytest.fixture(scope="module")
def pipeline(scenario_dir, tmp_path_factory):
    """rv + pca + midas-fit artifacts shared by the command tests."""
    out = tmp_path_factory.mktemp("pipeline")
    assert run(["rv", "--intraday", str(scenario_dir / "intraday.csv"),
                "--out-csv", str(out / "rv.csv"),
                "--out-sidecar", str(out / "rv_lambda.json")]) == 0
    assert run(["pca", "--daily", str(scenario_dir / "daily.csv"),
                "--attention", str(scenario_dir / "attention.csv"),
                "--monthly", str(scenario_dir / "monthly.csv"),
                "--rv", str(out / "rv.csv"),
                "--out-dir", str(out)]) == 0
    assert run(["midas-fit", "--factors", str(out / "factors.csv"),
                "--n-lags", "6",
                "--out-fit", str(out / "midas_fit.json"),
                "--out-h", str(out / "h.csv")]) == 0
    return out


class TestFactorTableIO:
    def small_table(self):
        return FactorTable(
            dates=["2020-01-01", "2020-01-02", "2020-01-03"],
            split=["train", "train", "test"],
            columns={"ret": np.array([0.1, -0.2, 0.3]),
                     "rv": np.array([1.0, 2.0, 3.0]),
                     "tech1": np.array([0.5, 0.6, 0.7])},
            col_order=["ret", "rv", "tech1"],
        )

    def test_roundtrip(self, tmp_path):
        table = self.small_table()
        path = tmp_path / "factors.csv"
        cli.write_factors(table, str(path))
        back = cli.read_factors(str(path))
        assert back.dates == table.dates
        assert back.split == table.split
        assert back.col_order == table.col_order
        for name in table.col_order:
            assert np.array_equal(back.columns[name], table.columns[name])

    def test_bad_header(self, tmp_path):
        path = tmp_path / "f.csv"
        path.write_text("date,ret,rv\n2020-01-01,0.1,1.0\n")
        with pytest.raises(MalformedRow):
            cli.read_factors(str(path))

    def test_bad_split_token(self, tmp_path):
        path = tmp_path / "f.csv"
        path.write_text("date,split,ret,rv\n2020-01-01,validation,0.1,1.0\n")
        with pytest.raises(MalformedRow):
            cli.read_factors(str(path))

    def test_dates_must_increase(self, tmp_path):
        path = tmp_path / "f.csv"
        path.write_text("date,split,ret,rv\n"
                        "2020-01-02,train,0.1,1.0\n"
                        "2020-01-01,train,0.2,2.0\n")
        with pytest.raises(MalformedRow):
            cli.read_factors(str(path))

    def test_join_h_trailing_block(self, tmp_path):
        table = self.small_table()
        h = tmp_path / "h.csv"
        h.write_text("date,tau,g,h\n"
                     "2020-01-02,1.0,1.0,1.5\n"
                     "2020-01-03,1.0,1.0,2.5\n")
        joined = cli.join_h(table, str(h))
        assert joined.dates == ["2020-01-02", "2020-01-03"]
        assert np.array_equal(joined.columns["h"], [1.5, 2.5])
        assert joined.split == ["train", "test"]

    def test_join_h_rejects_gap(self, tmp_path):
        table = self.small_table()
        h = tmp_path / "h.csv"
        h.write_text("date,tau,g,h\n"
                     "2020-01-01,1.0,1.0,1.5\n"
                     "2020-01-03,1.0,1.0,2.5\n")
        with pytest.raises(LengthMismatch):
            cli.join_h(table, str(h))

    def test_join_h_rejects_non_trailing(self, tmp_path):
        table = self.small_table()
        h = tmp_path / "h.csv"
        h.write_text("date,tau,g,h\n"
                     "2020-01-01,1.0,1.0,1.5\n"
                     "2020-01-02,1.0,1.0,2.5\n")
        with pytest.raises(LengthMismatch):
            cli.join_h(table, str(h))

    def test_join_h_rejects_unknown_dates(self, tmp_path):
        table = self.small_table()
        h = tmp_path / "h.csv"
        h.write_text("date,tau,g,h\n2021-05-05,1.0,1.0,1.5\n")
        with pytest.raises(LengthMismatch):
            cli.join_h(table, str(h))

    def test_windowed_split_labels_by_target_row(self):
        table = FactorTable(
            dates=[f"2020-01-{d:02d}" for d in range(1, 8)],
            split=["train"] * 5 + ["test"] * 2,
            columns={"ret": np.zeros(7),
                     "rv": np.arange(7, dtype=float) + 1.0,
                     "tech1": np.arange(7, dtype=float)},
            col_order=["ret", "rv", "tech1"],
        )
        dataset, sample_split = cli.windowed_split(table, ("tech1",), 2)
        assert dataset.dates == table.dates[2:]
        assert list(sample_split) == ["train", "train", "train",
                                      "test", "test"]
        # last test sample reads rows 4..5 (train+test inputs, test target)
        assert np.array_equal(dataset.X[-1][:, 0], [4.0, 5.0])
        assert dataset.y[-1] == 7.0

    def test_windowed_split_missing_column(self):
        table = self.small_table()
        with pytest.raises(MissingColumn):
            cli.windowed_split(table, ("nope",), 1)


class TestConfigFile:
    def test_parse_and_precedence(self, tmp_path):
        cfg = tmp_path / "opts.cfg"
        cfg.write_text("# comment line\n"
                       "out-csv = from_config.csv   # trailing comment\n"
                       "months = 9\n")
        parsed = cli.load_config(str(cfg))
        assert parsed == {"out_csv": "from_config.csv", "months": "9"}

    def test_malformed_line(self, tmp_path):
        cfg = tmp_path / "opts.cfg"
        cfg.write_text("no equals sign here\n")
        with pytest.raises(MalformedRow):
            cli.load_config(str(cfg))

    def test_flag_beats_config_beats_default(self, pipeline, tmp_path):
        cfg = tmp_path / "train.cfg"
        cfg.write_text("epochs = 2\nlr = 0.005\nfeatures = tech1,tech2\n")
        hist = tmp_path / "hist.csv"
        assert run(["train", "--factors", str(pipeline / "factors.csv"),
                    "--config", str(cfg),
                    "--out-model", str(tmp_path / "m.json"),
                    "--out-history", str(hist)]) == 0
        assert hist.read_text().count("\n") == 3   # header + 2 epochs

        assert run(["train", "--factors", str(pipeline / "factors.csv"),
                    "--config", str(cfg), "--epochs", "1",
                    "--out-model", str(tmp_path / "m.json"),
                    "--out-history", str(hist)]) == 0
        assert hist.read_text().count("\n") == 2   # flag overrode the file

    def test_missing_config_file(self, tmp_path):
        assert run(["rv", "--config", str(tmp_path / "absent.cfg"),
                    "--intraday", "whatever.csv"]) == 2


class TestPipeline:
    def test_artifacts_exist(self, pipeline):
        for name in ("rv.csv", "rv_lambda.json", "factors.csv",
                     "norm_stats.json", "pca_macro.json", "pca_tech.json",
                     "pca_attention.json", "midas_fit.json", "h.csv"):
            assert (pipeline / name).exists(), name

    def test_factors_have_expected_columns(self, pipeline):
        table = cli.read_factors(str(pipeline / "factors.csv"))
        assert table.col_order == ["ret", "rv", "pcm1", "pcm2",
                                   "tech1", "tech2", "tech3", "bd1"]
        assert 0 < table.n_train < table.n_rows
        assert table.split == sorted(table.split, reverse=True)  # train first

    def test_h_joins_cleanly(self, pipeline):
        table = cli.read_factors(str(pipeline / "factors.csv"))
        joined = cli.join_h(table, str(pipeline / "h.csv"))
        assert joined.dates[-1] == table.dates[-1]
        assert np.all(joined.columns["h"] > 0)

    def test_train_predict_evaluate(self, pipeline, tmp_path):
        model = tmp_path / "weights.json"
        assert run(["train", "--factors", str(pipeline / "factors.csv"),
                    "--h-file", str(pipeline / "h.csv"),
                    "--lr", "0.005", "--epochs", "3",
                    "--out-model", str(model),
                    "--out-history", str(tmp_path / "hist.csv")]) == 0

        pred = tmp_path / "pred.csv"
        assert run(["predict", "--factors", str(pipeline / "factors.csv"),
                    "--h-file", str(pipeline / "h.csv"),
                    "--model", str(model), "--out", str(pred)]) == 0
        dates, truth, values = cli.read_predictions(str(pred))
        table = cli.read_factors(str(pipeline / "factors.csv"))
        test_dates = [d for d, s in zip(table.dates, table.split)
                      if s == "test"]
        assert dates == test_dates
        rv_map = dict(zip(table.dates, table.columns["rv"]))
        assert truth == pytest.approx([rv_map[d] for d in dates])

        report = tmp_path / "report.csv"
        assert run(["evaluate", "--pred", str(pred), "--persistence",
                    "--out", str(report)]) == 0
        rows = evaluation.read_report(str(report))
        assert [r.model for r in rows] == ["transformer", "persistence"]
        assert rows[0].n == len(dates)

    def test_predict_split_all_and_train(self, pipeline, tmp_path):
        model = tmp_path / "weights.json"
        assert run(["train", "--factors", str(pipeline / "factors.csv"),
                    "--features", "tech1,tech2,tech3",
                    "--lr", "0.005", "--epochs", "2",
                    "--out-model", str(model),
                    "--out-history", str(tmp_path / "hist.csv")]) == 0
        table = cli.read_factors(str(pipeline / "factors.csv"))
        window = 5
        for which, want in (("all", table.n_rows - window),
                            ("train", table.n_train - window),
                            ("test", table.n_rows - table.n_train)):
            out = tmp_path / f"pred_{which}.csv"
            assert run(["predict", "--factors",
                        str(pipeline / "factors.csv"),
                        "--model", str(model), "--split", which,
                        "--out", str(out)]) == 0
            dates, _, _ = cli.read_predictions(str(out))
            assert len(dates) == want, which

    def test_evaluate_append_and_footer(self, pipeline, tmp_path):
        pred = tmp_path / "pred.csv"
        pred.write_text("date,rv_true,rv_pred\n"
                        + "".join(f"2020-01-{d:02d},1.{d},1.0\n"
                                  for d in range(1, 6)))
        report = tmp_path / "report.csv"
        assert run(["evaluate", "--pred", str(pred), "--group", "G1",
                    "--out", str(report), "--no-footer"]) == 0
        assert "#" not in report.read_text()
        assert run(["evaluate", "--pred", str(pred), "--group", "G2",
                    "--out", str(report), "--append"]) == 0
        rows = evaluation.read_report(str(report))
        assert [r.group for r in rows] == ["G1", "G2"]
        assert "# qlike" in report.read_text()

    def test_rerun_is_byte_identical(self, scenario_dir, pipeline,
                                     tmp_path):
        out = tmp_path
        assert run(["rv", "--intraday", str(scenario_dir / "intraday.csv"),
                    "--out-csv", str(out / "rv.csv"),
                    "--out-sidecar", str(out / "rv_lambda.json")]) == 0
        assert run(["pca", "--daily", str(scenario_dir / "daily.csv"),
                    "--attention", str(scenario_dir / "attention.csv"),
                    "--monthly", str(scenario_dir / "monthly.csv"),
                    "--rv", str(out / "rv.csv"),
                    "--out-dir", str(out)]) == 0
        assert run(["midas-fit", "--factors", str(out / "factors.csv"),
                    "--n-lags", "6",
                    "--out-fit", str(out / "midas_fit.json"),
                    "--out-h", str(out / "h.csv")]) == 0
        for name in ("rv.csv", "factors.csv", "h.csv", "midas_fit.json"):
            assert (out / name).read_bytes() \
                == (pipeline / name).read_bytes(), name


class TestAblate:
    def test_ladder_runs_and_reports(self, pipeline, tmp_path):
        report = tmp_path / "report.csv"
        assert run(["ablate", "--factors", str(pipeline / "factors.csv"),
                    "--h-file", str(pipeline / "h.csv"),
                    "--groups", "G1,G3",
                    "--lr", "0.005", "--epochs", "2",
                    "--out", str(report)]) == 0
        rows = evaluation.read_report(str(report))
        assert [r.group for r in rows] == ["G1", "G3", "-"]
        assert rows[0].n == rows[1].n
        assert rows[2].model == "persistence"


class TestExitCodes:
    def test_missing_input_file(self, tmp_path):
        assert run(["rv", "--intraday", str(tmp_path / "nope.csv")]) == 2

    def test_missing_required_option(self):
        assert run(["rv"]) == 2

    def test_feature_h_without_h_file(self, pipeline, tmp_path):
        assert run(["train", "--factors", str(pipeline / "factors.csv"),
                    "--features", "tech1,h", "--epochs", "1",
                    "--out-model", str(tmp_path / "m.json"),
                    "--out-history", str(tmp_path / "h.csv")]) == 2

    def test_unknown_feature_column(self, pipeline, tmp_path):
        assert run(["train", "--factors", str(pipeline / "factors.csv"),
                    "--features", "bogus", "--epochs", "1",
                    "--out-model", str(tmp_path / "m.json"),
                    "--out-history", str(tmp_path / "h.csv")]) == 2

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_numerical_divergence(self, pipeline, tmp_path):
        assert run(["train", "--factors", str(pipeline / "factors.csv"),
                    "--features", "tech1,tech2,tech3",
                    "--lr", "80.0", "--epochs", "30",
                    "--out-model", str(tmp_path / "m.json"),
                    "--out-history", str(tmp_path / "h.csv")]) == 3

    def test_bad_ratio(self, scenario_dir, pipeline, tmp_path):
        assert run(["pca", "--daily", str(scenario_dir / "daily.csv"),
                    "--attention", str(scenario_dir / "attention.csv"),
                    "--monthly", str(scenario_dir / "monthly.csv"),
                    "--rv", str(pipeline / "rv.csv"),
                    "--ratio", "1.0",
                    "--out-dir", str(tmp_path)]) == 2

    def test_help_via_module_entry(self):
        proc = subprocess.run([sys.executable, "-m", "mfvol", "--help"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert "simulate" in proc.stdout and "ablate" in proc.stdout

    def test_simulate_command(self, tmp_path):
        assert run(["simulate", "--out", str(tmp_path / "scen"),
                    "--seed", "2", "--months", "8", "--days-per-month", "6",
                    "--bars-per-day", "8", "--n-lags", "4"]) == 0
        assert (tmp_path / "scen" / "truth.json").exists()
