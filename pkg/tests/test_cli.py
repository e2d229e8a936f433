import pytest

import main
from errors import NumericalError
from fileio.tables import read_table


def _run(capsys, *argv):
    code = main.run(list(argv))
    return code, capsys.readouterr().out.strip()


@pytest.fixture(autouse=True)
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


class TestReadmeExamples:
    @pytest.mark.parametrize("argv, output", [
        (["build", "--preset", "paper-step", "--out", "model.xyz"], "model.xyz"),
        (["build", "--preset", "paper-step", "--edge-variant", "OH/OH", "--out", "model.json"], "model.json"),
        (["dbs", "--preset", "paper-step", "--out", "dbs.csv"], "dbs.csv"),
        (["hfi", "--preset", "paper-step", "--out", "hfi.csv"], "hfi.csv"),
        (["fit", "--a", "4.0", "--b", "2.2", "--isotope", "1H"], "fit.csv"),
        (["eseem", "--a", "4.3", "--b", "2.2", "--field-t", "0.35", "--out", "eseem.csv"], "eseem.csv"),
        (["desorb", "--barrier", "0.89", "--t-c", "465", "--t-max-s", "1e-6", "--out", "desorb.csv"], "desorb.csv"),
        (["anneal", "--temperatures-c", "465,600", "--duration-s", "3600"], "anneal.csv"),
        (["sweep", "--barriers", "0.89,0.96,1.12", "--t-min-c", "300", "--t-max-c", "700"], "sweep.csv"),
    ])
    def test_runs_and_writes(self, capsys, workdir, argv, output):
        code, summary = _run(capsys, *argv)
        assert code == 0
        assert summary
        assert (workdir / output).stat().st_size > 0

    def test_config_file(self, capsys, workdir, repo_root):
        config = repo_root / "database" / "runs" / "paper_step_build.json"
        code, summary = _run(capsys, "build", "--config", str(config))
        assert code == 0
        assert (workdir / "model.xyz").exists()
        assert summary.startswith("wrote 374 atoms")


class TestSummaries:
    def test_build(self, capsys):
        _, summary = _run(capsys, "build", "--preset", "paper-step")
        assert "1 dangling bond(s)" in summary
        assert "4.36e+13 spins/cm^2" in summary
        assert "cell side 15.15 A" in summary

    def test_hfi(self, capsys, workdir):
        _, summary = _run(capsys, "hfi", "--preset", "paper-step")
        assert summary == "355 nuclei scanned, 12 with |a| or b >= 10 MHz"
        rows = read_table(workdir / "hfi.csv")
        host = next(r for r in rows if r["atom_index"] == "248")
        assert (host["isotope"], host["flagged"]) == ("13C", "1")

    def test_anneal_ratios(self, capsys):
        _, summary = _run(capsys, "anneal")
        assert "O/H/H 8.70" in summary
        assert "O/OH/OH 15.22" in summary
        assert "OH/OH 10.31" in summary

    def test_sweep_table(self, capsys, workdir):
        _run(capsys, "sweep")
        rows = read_table(workdir / "sweep.csv")
        assert len(rows) == 81
        assert list(rows[0]) == ["T_K", "T_C", "rate_per_s_0.89eV", "rate_per_s_0.96eV", "rate_per_s_1.12eV",
                                 "clamped_0.89eV", "clamped_0.96eV", "clamped_1.12eV"]
        assert {r["clamped_0.89eV"] for r in rows} == {"0"}

    def test_sweep_flags_underflowed_rates(self, capsys, workdir):
        code, _ = _run(capsys, "sweep", "--barriers", "1.12,0.89", "--t-min-k", "10", "--t-max-k", "20", "--steps", "3")
        assert code == 0
        rows = read_table(workdir / "sweep.csv")
        assert [(r["clamped_1.12eV"], r["clamped_0.89eV"]) for r in rows] == [("1", "1"), ("1", "0"), ("0", "0")]
        assert float(rows[0]["rate_per_s_0.89eV"]) == 0.0

    def test_eseem_rows(self, capsys, workdir):
        _run(capsys, "eseem", "--a", "4.3", "--b", "2.2", "--steps", "11")
        rows = read_table(workdir / "eseem.csv")
        assert len(rows) == 11
        assert float(rows[0]["E"]) == pytest.approx(1.0)

    def test_propagated_eseem_matches_closed_form(self, capsys, workdir):
        _run(capsys, "eseem", "--a", "4.3", "--b", "2.2", "--steps", "21", "--out", "closed.csv")
        _run(capsys, "eseem", "--a", "4.3", "--b", "2.2", "--steps", "21", "--method", "propagate",
             "--out", "propagated.csv")
        closed = [float(r["E"]) for r in read_table(workdir / "closed.csv")]
        propagated = [float(r["E"]) for r in read_table(workdir / "propagated.csv")]
        assert propagated == pytest.approx(closed, abs=1e-6)


class TestStructureFiles:
    def test_dbs_from_written_structure(self, capsys):
        _run(capsys, "build", "--preset", "paper-step", "--out", "model.json")
        code, summary = _run(capsys, "dbs", "--structure", "model.json")
        assert code == 0
        assert summary.startswith("1 dangling bond(s) on 1 atom(s)")

    @pytest.mark.parametrize("command, output", [
        ("build", "model.xyz"), ("build", "model.json"), ("hfi", "hfi.csv"), ("dbs", "dbs.csv"),
    ])
    def test_repeated_runs_are_byte_identical(self, capsys, workdir, command, output):
        first = workdir / f"first-{output}"
        second = workdir / f"second-{output}"
        _run(capsys, command, "--preset", "paper-step", "--out", str(first))
        _run(capsys, command, "--preset", "paper-step", "--out", str(second))
        assert first.read_bytes() == second.read_bytes()


class TestConfigOverrides:
    def test_flag_beats_config(self, capsys, workdir, repo_root):
        config = repo_root / "database" / "runs" / "paper_step_build.json"
        code, summary = _run(capsys, "build", "--config", str(config), "--edge-variant", "OH/OH", "--out", "m.json")
        assert code == 0
        assert summary.startswith("wrote 387 atoms to m.json")

    def test_config_for_another_command(self, capsys, repo_root):
        code, _ = _run(capsys, "fit", "--config", str(repo_root / "database" / "runs" / "paper_step_build.json"))
        assert code == 2


class TestExitCodes:
    @pytest.mark.parametrize("argv", [
        [],
        ["melt"],
        ["build", "--bogus"],
        ["build", "--edge-variant", "O/O"],
        ["fit", "--a", "4.0"],
        ["eseem", "--a", "4.3", "--b", "2.2", "--method", "guess"],
        ["desorb", "--steps", "1"],
        ["hfi", "--preset", "paper-step", "--lobe-offset", "0"],
        ["hfi", "--preset", "flat"],
        ["dbs", "--structure", "absent.xyz"],
        ["build", "--config", "absent.json"],
    ])
    def test_bad_input(self, capsys, argv):
        assert main.run(argv) == 2

    def test_spin_on_a_nucleus(self, capsys):
        assert main.run(["hfi", "--preset", "paper-step", "--lobe-offset", "0.05"]) == 3

    def test_numerical_failure(self, capsys, monkeypatch):
        def fail(cfg):
            raise NumericalError("integration failed")
        monkeypatch.setitem(main.HANDLERS, "desorb", fail)
        assert main.run(["desorb"]) == 3
        assert "integration failed" in capsys.readouterr().err
