import math

import pytest

from latrel.cli import run

from conftest import MODELS, load_model_text


def model_path(name):
    return str(MODELS / f"{name}.model")


# v({1}) = 1 but v({1,2}) = 0; boundary values are fine
NON_MONOTONE = """
[system]
name = broken
n = 3
structure = table:01000101

[components]
1 = exp(1)
2 = exp(1)
3 = exp(1)

[dependence]
kind = independent
"""


def test_validate_ok(capsys):
    assert run(["validate", model_path("bridge")]) == 0
    out = capsys.readouterr().out
    assert "ok" in out and "5 components" in out


def test_validate_non_monotone_reports_pair(tmp_path, capsys):
    path = tmp_path / "broken.model"
    path.write_text(NON_MONOTONE)
    assert run(["validate", str(path)]) == 2
    err = capsys.readouterr().err
    assert "invalid" in err
    assert "violating pair" in err


def test_non_validate_verbs_reject_non_monotone(tmp_path, capsys):
    path = tmp_path / "broken.model"
    path.write_text(NON_MONOTONE)
    assert run(["paths", str(path)]) == 2
    assert "error" in capsys.readouterr().err


def test_missing_file_is_validation_error(capsys):
    with pytest.raises(SystemExit) as e:
        run(["paths", "/no/such/file.model"])
    assert e.value.code == 2
    assert "error" in capsys.readouterr().err


def test_malformed_model_is_validation_error(tmp_path, capsys):
    path = tmp_path / "bad.model"
    path.write_text("[system]\nn = 2\n")
    with pytest.raises(SystemExit) as e:
        run(["validate", str(path)])
    assert e.value.code == 2
    assert "error" in capsys.readouterr().err


def test_usage_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as e:
        run([])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        run(["frobnicate", model_path("bridge")])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        run(["reliability", model_path("bridge"), "--grid", "nonsense"])
    assert e.value.code == 1
    capsys.readouterr()


def test_bridge_paths_and_cuts(capsys):
    assert run(["paths", model_path("bridge")]) == 0
    paths = {frozenset(map(int, line.split())) for line in capsys.readouterr().out.splitlines()}
    assert paths == {
        frozenset({1, 4}),
        frozenset({2, 5}),
        frozenset({1, 3, 5}),
        frozenset({2, 3, 4}),
    }
    assert run(["cuts", model_path("bridge")]) == 0
    cuts = {frozenset(map(int, line.split())) for line in capsys.readouterr().out.splitlines()}
    assert cuts == {
        frozenset({1, 2}),
        frozenset({4, 5}),
        frozenset({1, 3, 5}),
        frozenset({2, 3, 4}),
    }


def test_mobius_output(capsys):
    assert run(["mobius", model_path("series2")]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines == ["1 2,1"]


def test_dual_output(capsys):
    assert run(["dual", model_path("series2")]) == 0
    assert capsys.readouterr().out.strip() == "max(x1, x2)"


def test_forms_agree(capsys):
    assert run(["forms", model_path("bridge"), "--state", "1,0,1,0,1"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 6
    values = {line.split(" = ")[1] for line in lines}
    assert values == {"1"}


def test_forms_bad_state(capsys):
    assert run(["forms", model_path("bridge"), "--state", "1,x,1,0,1"]) == 1
    assert "bad state" in capsys.readouterr().err


def test_reliability_csv(tmp_path, capsys):
    out = tmp_path / "curve.csv"
    code = run(["reliability", model_path("series2"), "--grid", "0:2:5", "-o", str(out)])
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 6
    t, r = lines[-1].split(",")[:2]
    assert float(t) == 2.0
    assert float(r) == pytest.approx(math.exp(-6), rel=1e-9)


def test_reliability_stdout_and_plot(tmp_path, capsys):
    png = tmp_path / "curve.png"
    code = run(
        ["reliability", model_path("series2"), "--grid", "0.1:2:4", "--plot", str(png)]
    )
    assert code == 0
    assert png.exists() and png.stat().st_size > 0
    out = capsys.readouterr().out
    assert out.splitlines()[0].startswith("t,")


def test_log_grid(capsys):
    assert run(["reliability", model_path("series2"), "--grid", "0.1:10:3", "--log"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    ts = [float(line.split(",")[0]) for line in lines[1:]]
    assert ts[1] == pytest.approx(1.0, rel=1e-9)  # geometric midpoint of 0.1 and 10


def test_mttf_output(capsys):
    assert run(["mttf", model_path("bridge")]) == 0
    value, abs_err, diverged = capsys.readouterr().out.strip().split(",")
    assert float(value) == pytest.approx(49 / 60, abs=1e-9)
    assert diverged == "false"


def test_mttf_respects_env_tol(monkeypatch, capsys):
    monkeypatch.setenv("LATREL_TOL", "1e-6")
    assert run(["mttf", model_path("prephase_series2")]) == 0
    value = float(capsys.readouterr().out.split(",")[0])
    assert value == pytest.approx(2.0, abs=1e-5)


def test_bad_env_tol(monkeypatch, capsys):
    monkeypatch.setenv("LATREL_TOL", "soon")
    with pytest.raises(SystemExit) as e:
        run(["mttf", model_path("series2")])
    assert e.value.code == 1
    capsys.readouterr()


def test_simulate_csv_and_summary(tmp_path, capsys):
    out = tmp_path / "sim.csv"
    code = run(
        [
            "simulate",
            model_path("series2"),
            "--grid",
            "0.2:1:3",
            "-N",
            "5000",
            "--seed",
            "9",
            "-o",
            str(out),
        ]
    )
    assert code == 0
    err = capsys.readouterr().err
    assert "seed=9" in err and "N=5000" in err and "mttf=" in err
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "t,estimate,stderr"
    assert len(lines) == 4


def test_simulate_reproducible(tmp_path):
    outs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        run(
            [
                "simulate",
                model_path("bridge"),
                "--grid",
                "0.2:2:4",
                "-N",
                "2000",
                "--seed",
                "17",
                "--partitions",
                "4",
                "-o",
                str(out),
            ]
        )
        outs.append(out.read_text())
    assert outs[0] == outs[1]


def test_simulate_plot(tmp_path, capsys):
    png = tmp_path / "sim.png"
    code = run(
        [
            "simulate",
            model_path("parallel2"),
            "--grid",
            "0.2:2:4",
            "-N",
            "1000",
            "--plot",
            str(png),
            "-o",
            str(tmp_path / "sim.csv"),
        ]
    )
    assert code == 0
    assert png.exists() and png.stat().st_size > 0
    capsys.readouterr()


def test_all_bundled_models_mttf(capsys):
    for name in (
        "series2",
        "parallel2",
        "bridge",
        "bayes_series2",
        "prephase_series2",
        "bounds_series2",
    ):
        assert run(["mttf", model_path(name)]) == 0
        value, _, diverged = capsys.readouterr().out.strip().split(",")
        assert float(value) > 0
        assert diverged == "false"
