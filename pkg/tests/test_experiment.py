import dataclasses
import math
from pathlib import Path

import numpy as np
import pytest

from eglab.config import parse_config, parse_config_text
from eglab.experiment import (
    emit_plotdata,
    read_plotdata,
    read_summary,
    read_trace,
    run_experiment,
    summary_ks,
    verify_experiment,
)
from eglab.operators import UsageError

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

SMALL = """
[experiment]
id = small
problem = minimax
p1 = 4
p2 = 3
d_low = 0.1
seeds = 0-2
max_iter = {max_iter}
[scheme GEAG]
[scheme GFEG]
[scheme GAEGplus]
"""


def small(max_iter=60):
    return parse_config_text(SMALL.format(max_iter=max_iter))


def _rows_without_timing(path):
    out = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                continue
            out.append(line.rsplit(",", 1)[0])
    return out


def test_zero_iterations_gives_single_row(tmp_path):
    res = run_experiment(small(0), tmp_path, jobs=1)
    for p in res.trace_files:
        _, data = read_trace(p)
        assert data["k"].tolist() == [0.0]
        assert data["rel_fb_residual"].tolist() == [1.0]
    rows = read_summary(res.summary_file)
    assert {r.k for r in rows} == {0} and all(r.mean == 1.0 for r in rows)


def test_rerun_is_identical_except_timing(tmp_path):
    a = run_experiment(small(), tmp_path / "a", jobs=1)
    b = run_experiment(small(), tmp_path / "b", jobs=3)
    for pa, pb in zip(a.trace_files, b.trace_files):
        assert Path(pa).name == Path(pb).name
        assert _rows_without_timing(pa) == _rows_without_timing(pb)
    assert Path(a.summary_file).read_text() == Path(b.summary_file).read_text()


def test_trace_header_records_provenance(tmp_path):
    res = run_experiment(small(5), tmp_path, jobs=1)
    meta, data = read_trace(res.trace_files[0])
    for key in ("format_version", "experiment", "label", "seed", "L", "rho", "status", "scheme", "prng"):
        assert key in meta
    assert meta["status"] == "ok"
    assert list(data)[:4] == ["k", "residual", "fb_residual", "rel_fb_residual"]
    assert list(data)[-1] == "wall_nanos"


def test_summary_matches_traces(tmp_path):
    cfg = small()
    res = run_experiment(cfg, tmp_path, jobs=1)
    rows = read_summary(res.summary_file)
    for row in rows:
        vals = []
        for seed in cfg.seeds:
            _, data = read_trace(tmp_path / f"small_{row.scheme}_seed{seed}.csv")
            rel = data["fb_residual"][row.k] / data["fb_residual"][0] if row.k else 1.0
            assert data["rel_fb_residual"][row.k] == pytest.approx(rel, rel=1e-15, abs=0)
            vals.append(rel)
        assert abs(row.mean - np.mean(vals)) <= 1e-12 * max(1.0, abs(row.mean))
        assert row.min == pytest.approx(min(vals), rel=1e-12)
        assert row.max == pytest.approx(max(vals), rel=1e-12)
        assert row.n_runs == 3
    assert {r.k for r in rows} == set(summary_ks(cfg.max_iter))


def test_plotdata_round_trip(tmp_path):
    res = run_experiment(small(), tmp_path, jobs=1)
    out = emit_plotdata(res.summary_file, tmp_path / "p.tsv")
    blocks = read_plotdata(out)
    rows = read_summary(res.summary_file)
    assert list(blocks) == ["GEAG", "GFEG", "GAEGplus"]
    for scheme, pts in blocks.items():
        expected = [(math.log10(r.k), math.log10(r.mean)) for r in rows if r.scheme == scheme and r.k > 0]
        assert len(pts) == len(expected)
        for (a, b), (c, d) in zip(pts, expected):
            assert a == pytest.approx(c, abs=1e-12) and b == pytest.approx(d, abs=1e-12)


def test_plotdata_edge_cases(tmp_path):
    header = "experiment,scheme,k,mean_rel_fb_residual,min_rel_fb_residual,max_rel_fb_residual,n_runs\n"
    one = tmp_path / "one.csv"
    one.write_text(header + "e,GEAG,10,0.01,0.01,0.01,1\n")
    assert read_plotdata(emit_plotdata(one)) == {"GEAG": [(1.0, -2.0)]}
    empty = tmp_path / "empty.csv"
    empty.write_text(header)
    with pytest.raises(UsageError, match="empty"):
        emit_plotdata(empty)


def test_failed_run_is_marked_and_others_continue(tmp_path):
    text = """
[experiment]
id = boom
problem = linear-ne
dim = 6
seeds = 0-1
max_iter = 400
[scheme GEAG]
[scheme GFEG]
eta = 40/L
validate = no
"""
    res = run_experiment(parse_config_text(text), tmp_path, jobs=1)
    assert len(res.failures) == 2 and all(o.label == "GFEG" for o in res.failures)
    meta, _ = read_trace(res.failures[0].path)
    assert meta["status"].startswith("failed at k=")
    summary = Path(res.summary_file).read_text()
    assert "# failed_runs = 2" in summary
    assert {r.scheme for r in read_summary(res.summary_file)} == {"GEAG"}
    assert len(res.final_rel("GEAG")) == 2


def test_lyapunov_column_and_verify(tmp_path):
    text = """
[experiment]
id = lyap
problem = linear-ne
dim = 8
seeds = 0
max_iter = 200
lyapunov = yes
[scheme GEAG]
[scheme GAEG]
rule = past-gradient
"""
    cfg = parse_config_text(text)
    res = run_experiment(cfg, tmp_path, jobs=1)
    meta, data = read_trace(tmp_path / "lyap_GEAG_seed0.csv")
    assert "lyapunov" in data and "dist_to_star" in data
    meta, data = read_trace(tmp_path / "lyap_GAEG_seed0.csv")
    assert "lyapunov" not in data and "current-gradient" in meta["lyapunov_skipped"]
    outcomes = verify_experiment(cfg, tmp_path, jobs=1)
    assert all(o.passed for o in outcomes)
    assert (tmp_path / "lyap_verify.csv").exists()


def test_experiment_one_summary_has_five_default_blocks(tmp_path):
    cfg = parse_config(CONFIGS / "experiment1.ini")
    cfg = dataclasses.replace(cfg, entries=cfg.entries[:5], seeds=(0,), max_iter=30)
    res = run_experiment(cfg, tmp_path, jobs=1)
    blocks = read_plotdata(emit_plotdata(res.summary_file))
    assert list(blocks) == ["GEAG", "GFEG", "GFEGplus", "GAEG", "GAEGplus"]
