"""Command line behaviour: exit codes, output determinism, seed handling."""

import subprocess
import sys

import pytest

from smartauth.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out


def test_default_run_is_improved_honest(capsys):
    code, out = run_cli(capsys, "run")
    assert code == 0
    assert "verdict: accept" in out
    assert "messages sent: 2" in out


def test_honest_text_report_prints_matching_keys(capsys):
    code, out = run_cli(capsys, "run", "--scheme", "improved", "--scenario", "honest", "--seed", "5")
    assert code == 0
    client = next(l for l in out.splitlines() if l.startswith("client session key:"))
    server = next(l for l in out.splitlines() if l.startswith("server session key:"))
    assert client.split(": ")[1] == server.split(": ")[1]


def test_structured_output_is_byte_identical(capsys):
    argv = ("run", "--scheme", "baseline", "--scenario", "replay", "--seed", "9",
            "--format", "structured-lines")
    _, first = run_cli(capsys, *argv)
    _, second = run_cli(capsys, *argv)
    assert first == second
    assert first.splitlines()[0].startswith("step=0 ")


def test_trials_are_seeded_incrementally_and_ordered(capsys):
    _, combined = run_cli(capsys, "run", "--scenario", "honest", "--seed", "3",
                          "--trials", "3", "--format", "structured-lines")
    singles = []
    for seed in (3, 4, 5):
        _, out = run_cli(capsys, "run", "--scenario", "honest", "--seed", str(seed),
                         "--format", "structured-lines")
        singles.append(out)
    assert combined == "".join(singles)


def test_attack_scenario_reproduction_exits_zero(capsys):
    code, out = run_cli(capsys, "run", "--scheme", "improved", "--scenario", "replay",
                        "--seed", "2")
    assert code == 0
    assert "verdict: reject:replay" in out


def test_wrong_password_change_summary_lines(capsys):
    code, out = run_cli(capsys, "run", "--scheme", "baseline",
                        "--scenario", "wrong-password-change", "--trials", "5")
    assert code == 0
    assert "card corrupted: subsequent logins rejected: 5/5" in out
    code, out = run_cli(capsys, "run", "--scheme", "improved",
                        "--scenario", "wrong-password-change", "--trials", "5")
    assert code == 0
    assert "change rejected, card intact: logins accepted: 5/5" in out


def test_out_writes_file_and_leaves_stdout_clean(tmp_path, capsys):
    target = tmp_path / "transcript.txt"
    code, out = run_cli(capsys, "run", "--scenario", "honest", "--seed", "1",
                        "--format", "structured-lines", "--out", str(target))
    assert code == 0
    assert out == ""
    assert target.read_text().startswith("step=0 ")


def test_env_seed_fallback(capsys, monkeypatch):
    monkeypatch.setenv("SMARTAUTH_SEED", "77")
    _, via_env = run_cli(capsys, "run", "--format", "structured-lines")
    monkeypatch.delenv("SMARTAUTH_SEED")
    _, via_flag = run_cli(capsys, "run", "--seed", "77", "--format", "structured-lines")
    assert via_env == via_flag


def test_env_seed_must_be_an_integer(capsys, monkeypatch):
    monkeypatch.setenv("SMARTAUTH_SEED", "not-a-number")
    with pytest.raises(SystemExit) as err:
        main(["run"])
    assert err.value.code == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--scenario", "nonexistent"],
        ["run", "--scheme", "thirdscheme"],
        ["run", "--trials", "0"],
        ["run", "--seed", "-1"],
        ["run", "--format", "yaml"],
        ["nonexistent-command"],
        [],
    ],
)
def test_usage_errors_exit_two(capsys, argv):
    with pytest.raises(SystemExit) as err:
        main(argv)
    assert err.value.code == 2


def test_diff_confirms_expected_divergence(capsys):
    code, out = run_cli(capsys, "diff", "--seeds", "1", "2")
    assert code == 0
    assert "divergence expected exactly on: wrong-password, wrong-password-change -- confirmed" in out
    lines = [l for l in out.splitlines() if l.startswith("wrong-password ")]
    assert "diverge" in lines[0]


def test_cost_reports_deltas(capsys):
    code, out = run_cli(capsys, "cost")
    assert code == 0
    assert "hash delta (improved - baseline): 2" in out
    assert "storage delta: 1 digest (32 bytes)" in out


def test_cost_toy_width_reports_small_digests(capsys):
    code, out = run_cli(capsys, "cost", "--hash", "toy8")
    assert code == 0
    assert "storage delta: 1 digest (1 bytes)" in out


def test_module_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "smartauth", "run", "--scenario", "honest", "--seed", "0"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "verdict: accept" in proc.stdout
