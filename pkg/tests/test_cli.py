from pathlib import Path

from eglab.cli import main

GOOD = """
[experiment]
id = cli
problem = linear-ne
dim = 6
seeds = 0-1
max_iter = 40
lyapunov = yes
[scheme GEAG]
[scheme GAEGplus]
"""


def _write(tmp_path, text, name="c.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_run_verify_plotdata(tmp_path, capsys):
    cfg = _write(tmp_path, GOOD)
    out = str(tmp_path / "out")
    assert main(["run", cfg, "--out", out, "--jobs", "2"]) == 0
    assert "GEAG: mean final rel_fb_residual" in capsys.readouterr().out
    assert (Path(out) / "cli_summary.csv").exists()
    assert main(["verify", cfg, "--out", out]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 4 and all(l.startswith("PASS") for l in lines)
    assert main(["plotdata", str(Path(out) / "cli_summary.csv"), "--out", out]) == 0
    assert (Path(out) / "cli_summary.plot.tsv").exists()


def test_seed_offset(tmp_path):
    cfg = _write(tmp_path, GOOD)
    assert main(["run", cfg, "--out", str(tmp_path), "--seed-offset", "10"]) == 0
    assert (tmp_path / "cli_GEAG_seed11.csv").exists()


def test_bad_config_exits_2(tmp_path, capsys):
    cfg = _write(tmp_path, GOOD.replace("max_iter = 40", "max_iter = 40\nfoo = 1"))
    assert main(["run", cfg, "--out", str(tmp_path)]) == 2
    assert "unknown key 'foo'" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.ini")]) == 2
    assert main(["run", cfg, "--jobs", "0"]) == 2


def test_failed_runs_exit_1(tmp_path, capsys):
    cfg = _write(tmp_path, GOOD.replace("[scheme GAEGplus]", "[scheme GFEG]\neta = 40/L\nvalidate = no")
                 .replace("max_iter = 40", "max_iter = 400").replace("lyapunov = yes", ""))
    assert main(["run", cfg, "--out", str(tmp_path)]) == 1
    assert "2 of 4 runs failed" in capsys.readouterr().err


def test_failed_verify_exits_1(tmp_path, capsys):
    # a step far above the certified window breaks the closed-form bound
    cfg = _write(tmp_path, GOOD.replace("[scheme GAEGplus]", "[scheme fast]\nscheme = GEAG\neta = 1.9/L\nvalidate = no")
                 .replace("max_iter = 40", "max_iter = 200"))
    assert main(["verify", cfg, "--out", str(tmp_path)]) == 1
    assert "checks failed" in capsys.readouterr().err


def test_plotdata_on_empty_summary_exits_2(tmp_path):
    p = _write(tmp_path, "experiment,scheme,k,mean_rel_fb_residual,min_rel_fb_residual,"
                         "max_rel_fb_residual,n_runs\n", "s.csv")
    assert main(["plotdata", p]) == 2
