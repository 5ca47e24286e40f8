"""End-to-end checks of the command line interface."""
import json

import numpy as np
import pytest

from fuma.core import TimeSeries
from fuma.methods import METHOD_IDS
from fuma.pipeline.cli import main
from fuma.pipeline.ensemble import save_ensemble
from fuma.pipeline.forecast import run_forecast
from fuma.pipeline.io import (read_actuals_csv, read_forecast_csv,
                              read_series_csv, write_forecast_csv,
                              write_series_csv)

SEED = "11"
HOLD = "15"


@pytest.fixture(scope="session")
def cli_files(tmp_path_factory, tiny_reference, tiny_ensemble):
    """Input files plus one forecast/benchmark run shared by CLI tests."""
    root = tmp_path_factory.mktemp("cli")
    files = {
        "train_csv": root / "train.csv",
        "ensemble": root / "ensemble.json",
        "holdout_csv": root / "holdout.csv",
        "actuals_csv": root / "actuals.csv",
        "forecast_csv": root / "fuma.csv",
        "provenance": root / "provenance.json",
        "bench_dir": root / "bench",
    }
    write_series_csv(files["train_csv"], tiny_reference)
    save_ensemble(tiny_ensemble, files["ensemble"])
    code = main(["generate", "--seed", SEED, "--start", "70",
                 "--yearly", HOLD, "--quarterly", HOLD, "--monthly", HOLD,
                 "--out", str(files["holdout_csv"]),
                 "--actuals-out", str(files["actuals_csv"])])
    assert code == 0
    code = main(["forecast", "--model", str(files["ensemble"]),
                 "--series", str(files["holdout_csv"]),
                 "--out", str(files["forecast_csv"]),
                 "--provenance", str(files["provenance"]),
                 "--benchmarks-dir", str(files["bench_dir"]),
                 "--jobs", "4"])
    assert code == 0
    return files


def test_generate_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["generate", "--seed", "3", "--yearly", "2", "--quarterly", "1",
            "--monthly", "1"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    series = read_series_csv(a)
    assert [s.frequency for s in series] == ["yearly", "yearly", "quarterly",
                                             "monthly"]


def test_generate_start_offset_matches_plain_run(tmp_path):
    full = tmp_path / "full.csv"
    tail = tmp_path / "tail.csv"
    assert main(["generate", "--seed", "5", "--yearly", "4",
                 "--out", str(full)]) == 0
    assert main(["generate", "--seed", "5", "--yearly", "2", "--start", "2",
                 "--out", str(tail)]) == 0
    by_id = {s.id: s for s in read_series_csv(full)}
    for s in read_series_csv(tail):
        assert np.array_equal(s.values, by_id[s.id].values)


def test_generate_holdout_split_is_the_series_tail(cli_files, tiny_holdout):
    observed_fixture, actuals_fixture = tiny_holdout
    observed = read_series_csv(cli_files["holdout_csv"])
    actuals = read_actuals_csv(cli_files["actuals_csv"])
    assert [s.id for s in observed] == [s.id for s in observed_fixture]
    for got, want in zip(observed, observed_fixture):
        assert np.array_equal(got.values, want.values)
    for sid, tail in actuals.items():
        assert np.array_equal(tail, actuals_fixture[sid])


def test_generate_nothing_is_a_data_error(tmp_path):
    assert main(["generate", "--out", str(tmp_path / "x.csv")]) == 2


def test_usage_errors_exit_one(tmp_path):
    for argv in ([],
                 ["generate"],
                 ["no-such-command"],
                 ["train", "--series", "x.csv", "--out", "y.json",
                  "--levels", "80,abc"],
                 ["generate", "--out", "x.csv", "--yearly", "-1"],
                 ["forecast", "--model", "m", "--series", "s", "--out", "o",
                  "--mode", "median"]):
        with pytest.raises(SystemExit) as err:
            main(argv)
        assert err.value.code == 1, argv


def test_train_cli_reproduces_the_api_ensemble(cli_files, tmp_path):
    out = tmp_path / "cli-ensemble.json"
    code = main(["train", "--series", str(cli_files["train_csv"]),
                 "--out", str(out), "--seed", SEED, "--jobs", "4"])
    assert code == 0
    assert out.read_bytes() == cli_files["ensemble"].read_bytes()


def test_train_aborts_with_exit_three(tmp_path, capsys):
    rng = np.random.default_rng(70)
    series = [TimeSeries(id=f"ok-{i}", values=rng.normal(50, 5, 30),
                         period=1, horizon=6) for i in range(7)]
    series += [TimeSeries(id=f"short-{i}", values=rng.normal(50, 5, 7),
                          period=1, horizon=6) for i in range(3)]
    path = tmp_path / "bad.csv"
    write_series_csv(path, series)
    code = main(["train", "--series", str(path),
                 "--out", str(tmp_path / "e.json")])
    assert code == 3
    assert "aborted" in capsys.readouterr().err


def test_forecast_cli_matches_api(cli_files, tiny_ensemble, tiny_holdout):
    observed, _ = tiny_holdout
    records = run_forecast(tiny_ensemble, observed, jobs=4)
    api_csv = cli_files["forecast_csv"].parent / "api.csv"
    write_forecast_csv(api_csv, {r.series_id: r.intervals for r in records})
    assert api_csv.read_bytes() == cli_files["forecast_csv"].read_bytes()


def test_forecast_jobs_do_not_change_the_csv(cli_files, tiny_holdout,
                                             tmp_path):
    observed, _ = tiny_holdout
    subset_csv = tmp_path / "subset.csv"
    write_series_csv(subset_csv, observed[:6])
    outs = []
    for jobs in ("1", "2"):
        out = tmp_path / f"jobs{jobs}.csv"
        assert main(["forecast", "--model", str(cli_files["ensemble"]),
                     "--series", str(subset_csv), "--out", str(out),
                     "--jobs", jobs]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_forecast_benchmarks_dir(cli_files):
    names = set(METHOD_IDS) | {"average"}
    found = {p.stem for p in cli_files["bench_dir"].glob("*.csv")}
    assert found == names
    fuma_ids = set(read_forecast_csv(cli_files["forecast_csv"]))
    for name in names:
        bench = read_forecast_csv(cli_files["bench_dir"] / f"{name}.csv")
        assert set(bench) == fuma_ids


def test_forecast_missing_model_is_a_data_error(cli_files, tmp_path):
    assert main(["forecast", "--model", str(tmp_path / "nope.json"),
                 "--series", str(cli_files["holdout_csv"]),
                 "--out", str(tmp_path / "o.csv")]) == 2


def test_provenance_file_contents(cli_files):
    body = json.loads(cli_files["provenance"].read_text())
    assert body["mode"] == "weighted"
    assert len(body["series"]) == 45
    for entry in body["series"].values():
        for weights in entry["weights"].values():
            total = sum(float(w) for w in weights.values())
            assert abs(total - 1.0) <= 1e-9


def test_evaluate_cli_round_trip(cli_files, tmp_path, capsys):
    report_path = tmp_path / "report.json"
    tables = tmp_path / "tables"
    code = main(["evaluate", "--forecasts", str(cli_files["forecast_csv"]),
                 "--actuals", str(cli_files["actuals_csv"]),
                 "--train", str(cli_files["holdout_csv"]),
                 "--provenance", str(cli_files["provenance"]),
                 "--benchmark",
                 f"average={cli_files['bench_dir'] / 'average.csv'}",
                 "--benchmark", f"naive={cli_files['bench_dir'] / 'naive.csv'}",
                 "--report", str(report_path), "--csv-dir", str(tables)])
    assert code == 0
    out = capsys.readouterr().out
    assert "fuma @ 95%" in out
    body = json.loads(report_path.read_text())
    models = {row["model"] for row in body["metrics"]}
    assert models == {"fuma", "average", "naive"}
    overall = [row for row in body["metrics"]
               if row["frequency"] == "overall" and row["level_pct"] == 95]
    assert {row["model"] for row in overall} == models
    for row in overall:
        assert row["n_series"] == 45
        assert row["mean_msis"] > 0
    assert body["selection"], "selection rates need provenance"
    assert body["mcb"]["n_series"] == 45
    for name in ("metrics.csv", "selection.csv", "mcb.csv"):
        assert (tables / name).exists()


def test_evaluate_report_level_is_respected(cli_files, tmp_path):
    report_path = tmp_path / "report80.json"
    code = main(["evaluate", "--forecasts", str(cli_files["forecast_csv"]),
                 "--actuals", str(cli_files["actuals_csv"]),
                 "--train", str(cli_files["holdout_csv"]),
                 "--report", str(report_path), "--report-level", "80"])
    assert code == 0
    assert json.loads(report_path.read_text())["report_level"] == 80


def test_evaluate_mismatched_inputs_are_data_errors(cli_files, tmp_path):
    assert main(["evaluate", "--forecasts", str(tmp_path / "nope.csv"),
                 "--actuals", str(cli_files["actuals_csv"]),
                 "--train", str(cli_files["holdout_csv"]),
                 "--report", str(tmp_path / "r.json")]) == 2
    garbled = tmp_path / "garbled.csv"
    garbled.write_text("id,level\n")
    assert main(["evaluate", "--forecasts", str(garbled),
                 "--actuals", str(cli_files["actuals_csv"]),
                 "--train", str(cli_files["holdout_csv"]),
                 "--report", str(tmp_path / "r.json")]) == 2


def test_effects_cli(cli_files, tiny_ensemble, tmp_path):
    out = tmp_path / "effects.csv"
    assert main(["effects", "--model", str(cli_files["ensemble"]),
                 "--out", str(out), "--points", "10"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "method,level,feature,x,effect"
    assert len(lines) > 1

    name = next(term.name
                for model in tiny_ensemble.models.values()
                for term in model.smooths)
    carriers = sum(1 for model in tiny_ensemble.models.values()
                   if name in model.smooth_names)
    filtered = tmp_path / "one-feature.csv"
    assert main(["effects", "--model", str(cli_files["ensemble"]),
                 "--out", str(filtered), "--points", "10",
                 "--features", name]) == 0
    rows = filtered.read_text().splitlines()[1:]
    assert len(rows) == 10 * carriers
    assert {row.split(",")[2] for row in rows} == {name}

    assert main(["effects", "--model", str(cli_files["ensemble"]),
                 "--out", str(tmp_path / "x.csv"),
                 "--features", "no-such-feature"]) == 2


def test_threshold_path_cli(cli_files, tmp_path):
    out = tmp_path / "path.csv"
    assert main(["threshold-path", "--model", str(cli_files["ensemble"]),
                 "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "frequency,mode,tr,mean_msis"
    assert len(lines) == 1 + 2 * 3 * 21
    for line in lines[1:]:
        freq, mode, tr, mean = line.split(",")
        assert freq in ("yearly", "quarterly", "monthly")
        assert mode in ("mean", "weighted")
        assert 0.0 <= float(tr) <= 1.0
        assert float(mean) > 0
