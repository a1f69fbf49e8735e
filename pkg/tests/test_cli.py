import importlib
import math

import pytest

# The package re-exports the `main` function, which shadows the submodule attribute.
cli = importlib.import_module("diploid_vortex.cli.main")
from diploid_vortex import __version__
from diploid_vortex.cli.main import run_command
from diploid_vortex.cli.verify import CheckResult
from diploid_vortex.exceptions import SingularSystemError
from diploid_vortex.utils.csvio import read_rows

NEUTRAL = ["--b", "2", "--d", "1", "--c", "0.5"]


def data_lines(text):
    return [line for line in text.splitlines() if not line.startswith("#")]


def test_fixation_exact(capsys):
    code = run_command(["fixation", "--k", "3", "--m", "2", "--n", "1", *NEUTRAL, "--nmax", "30"])
    out = capsys.readouterr().out

    assert code == 0
    assert out.startswith("# command=fixation k=3 m=2 n=1 b=2.0 d=1.0 c=0.5")
    header, row = data_lines(out)
    assert header == "k,m,n,u"
    assert float(row.split(",")[3]) == pytest.approx(1.0 / 3.0, abs=1e-6)


def test_fixation_monte_carlo(capsys):
    args = ["fixation", "--k", "3", "--m", "2", "--n", "1", *NEUTRAL]
    code = run_command([*args, "--method", "mc", "--reps", "200", "--seed", "5"])
    out = capsys.readouterr().out

    assert code == 0
    header, row = data_lines(out)
    assert header == "k,m,n,u,ci_halfwidth_99,reps,censored"
    assert row.split(",")[5:] == ["200", "0"]


def test_rates_lists_six_events(capsys):
    assert run_command(["rates", "--k", "1", "--m", "1", "--n", "0", *NEUTRAL]) == 0
    lines = data_lines(capsys.readouterr().out)

    assert lines[0] == "event,rate,k,m,n"
    assert len(lines) == 7
    # no deaths at N = 2
    assert lines[4] == "death-AA,0.0,,,"


def test_neutral_tau(capsys):
    code = run_command(["tau", "--b", "1", "--d", "1", "--c", "1", "--mu", "0.5"])
    header, row = data_lines(capsys.readouterr().out)

    assert code == 0
    assert header == "tau,T"
    tau, waiting = (float(x) for x in row.split(","))
    assert tau == pytest.approx(0.5, abs=1e-8)
    assert waiting == pytest.approx(2.0, abs=1e-7)


def test_invalid_parameters_exit_one(capsys):
    code = run_command(["tau", "--b=-1", "--d", "1", "--c", "1", "--mu", "0.5"])
    err = capsys.readouterr().err

    assert code == 1
    assert "error code=INVALID_PARAMETERS exit=1" in err


def test_unknown_flag_is_usage_error(capsys):
    code = run_command(["stationary", "--b", "1", "--d", "1", "--c", "1", "--bogus", "3"])

    assert code == 1
    assert "error code=USAGE exit=1" in capsys.readouterr().err


def test_unknown_command_is_usage_error(capsys):
    assert run_command(["no-such-command"]) == 1
    assert "error code=USAGE exit=1" in capsys.readouterr().err


def test_usage_errors_from_another_click_copy(monkeypatch, capsys):
    class ClickException(Exception):
        def format_message(self):
            return "bad option from a bundled click"

    class UsageError(ClickException):
        pass

    def raise_usage(*args, **kwargs):
        raise UsageError()

    monkeypatch.setattr(cli, "stationary_law", raise_usage)
    code = run_command(["stationary", "--b", "1", "--d", "1", "--c", "1"])

    assert code == 1
    assert "error code=USAGE exit=1 reason=bad option from a bundled click" in (
        capsys.readouterr().err
    )


def test_model_level_error_has_no_empty_field(capsys):
    code = run_command(["tau", "--b", "1", "--d", "0.5", "--c", "1", "--delta=-1", "--mu", "0.5"])
    err = capsys.readouterr().err

    assert code == 1
    assert "reason=Value error, d + delta" in err
    assert "reason=:" not in err


def test_overdominance_rejected(capsys):
    args = ["tau", "--b", "1", "--d", "1", "--c", "1", "--mu", "0.5"]
    code = run_command([*args, "--delta", "0.2", "--delta-prime", "0.1"])

    assert code == 1
    assert "error code=OVERDOMINANCE exit=1" in capsys.readouterr().err


def test_invalid_grid(capsys):
    args = ["vortex-curve", "--b", "0.02", "--c", "1", "--mu", "0.5", "--d-grid", "2:1:0.5"]

    assert run_command(args) == 1
    assert "error code=INVALID_GRID" in capsys.readouterr().err


def test_stationary_to_file(tmp_path, capsys):
    target = tmp_path / "law" / "l.csv"
    code = run_command(["stationary", "--b", "1", "--d", "0", "--c", "1", "-o", str(target)])

    assert code == 0
    assert capsys.readouterr().out == ""
    header, rows = read_rows(str(target))
    assert header == ["N", "prob"]
    assert rows[0][0] == "2"
    assert float(rows[0][1]) == pytest.approx(1.0 / (2.0 * (math.e - 2.0)), abs=1e-10)


def test_vortex_curve(capsys):
    args = ["vortex-curve", "--b", "0.02", "--c", "1", "--delta", "0.01", "--delta-prime", "0.02"]
    code = run_command([*args, "--mu", "0.5", "--d-grid", "0.5:1.5:0.5"])
    lines = data_lines(capsys.readouterr().out)

    assert code == 0
    assert lines[0] == "d,tau,T"
    assert [line.split(",")[0] for line in lines[1:]] == ["0.5", "1.0", "1.5"]
    waits = [float(line.split(",")[2]) for line in lines[1:]]
    assert waits == sorted(waits, reverse=True)


def test_meltdown_is_reproducible(capsys):
    args = ["meltdown", "--d0", "1", "--b", "0.02", "--c", "1", "--delta", "0.01"]
    args += ["--delta-prime", "0.02", "--mu", "0.5", "--fixations", "3", "--seed", "9"]
    assert run_command(args) == 0
    first = capsys.readouterr().out
    assert run_command(args) == 0
    second = capsys.readouterr().out

    assert first == second
    assert data_lines(first)[0] == "fixation_index,d,waiting_time"
    assert len(data_lines(first)) == 4


def test_simulate_writes_event_log(capsys):
    code = run_command(["simulate", "--k", "3", "--m", "2", "--n", "1", *NEUTRAL, "--seed", "4"])
    lines = data_lines(capsys.readouterr().out)

    assert code == 0
    assert lines[0] == "time,event,k,m,n"
    assert lines[1] == "0.0,start,3,2,1"


def test_verify_failure_exits_three(monkeypatch, capsys):
    results = [
        CheckResult(name="neutral", passed=True, detail="ok"),
        CheckResult(name="vortex-curve", passed=False, detail="not decreasing"),
    ]
    monkeypatch.setattr(cli, "run_verification", lambda quick: results)

    code = run_command(["verify", "--quick"])
    err = capsys.readouterr().err

    assert code == 3
    assert "error code=VERIFICATION_FAILED exit=3" in err
    assert "vortex-curve" in err


def test_verify_success(monkeypatch, capsys):
    results = [CheckResult(name="neutral", passed=True, detail="ok")]
    monkeypatch.setattr(cli, "run_verification", lambda quick: results)

    assert run_command(["verify"]) == 0
    assert "PASS" in capsys.readouterr().err


def test_numerical_failure_exits_two(monkeypatch, capsys):
    def singular(*args, **kwargs):
        raise SingularSystemError("fixation lattice", {"n_max": 30})

    monkeypatch.setattr(cli, "solve_fixation", singular)
    code = run_command(["fixation", "--k", "3", "--m", "2", "--n", "1", *NEUTRAL])

    assert code == 2
    assert "error code=SINGULAR_SYSTEM exit=2" in capsys.readouterr().err


def test_version(capsys):
    assert run_command(["version"]) == 0
    assert capsys.readouterr().out.strip() == __version__
