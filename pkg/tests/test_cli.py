"""Experiment runner: catalog, config round-trip, outputs, determinism, exit codes."""

from pathlib import Path

import pytest

from lpplab import cli
from lpplab.errors import ParameterError


def test_catalog_size_and_targets():
    catalog = cli.list_experiments()
    assert len(catalog) >= 10
    names = {e.name for e in catalog}
    assert len(names) == len(catalog)
    for entry in catalog:
        assert entry.verifies.strip()
        assert entry.name in cli._RUNNERS


def test_help_exits_zero(capsys):
    with pytest.raises(SystemExit) as exit_info:
        cli.main(["--help"])
    assert exit_info.value.code == 0
    assert "shape" in capsys.readouterr().out


def test_list_subcommand(capsys):
    assert cli.main(["list"]) == 0
    out = capsys.readouterr().out
    assert "cif-law" in out and "verifies:" in out


def test_config_round_trip(tmp_path):
    cfg = cli.ExperimentConfig(subcommand="shape", dist="geom:0.5", xi="0.3,0.7",
                               n=123, reps=9, seed=77, threads=2, alpha=2.5)
    text = cfg.to_text()
    again = cli.ExperimentConfig.from_text(text)
    assert again == cfg
    with pytest.raises(ParameterError):
        cli.ExperimentConfig.from_text("n = 5\n")
    with pytest.raises(ParameterError):
        cli.ExperimentConfig.from_text("subcommand = shape\nbogus = 1\n")


def test_config_file_with_flag_override(tmp_path, capsys):
    path = tmp_path / "run.cfg"
    path.write_text("subcommand = shape\ndist = exp:1\nn = 64\nreps = 4\nseed = 5\n"
                    f"out = {tmp_path / 'cfgrun'}\n# comment line\n", encoding="utf-8")
    code = cli.main(["shape", "--config", str(path), "--reps", "6"])
    assert code in (0, 1)
    header = (tmp_path / "cfgrun.csv").read_text(encoding="utf-8")
    assert "#   reps = 6" in header and "#   n = 64" in header


def test_run_writes_csv_and_summary(tmp_path):
    out = tmp_path / "shape_run"
    cfg = cli.ExperimentConfig(subcommand="shape", dist="exp:1", xi="0.5,0.5",
                               n=120, reps=8, seed=3, out=str(out))
    result = cli.run(cfg)
    csv_text = (tmp_path / "shape_run.csv").read_text(encoding="utf-8")
    lines = csv_text.splitlines()
    assert lines[0] == "# config:"
    header_idx = next(i for i, line in enumerate(lines) if not line.startswith("#"))
    assert lines[header_idx] == "replica,gn"
    assert len(lines) - header_idx - 1 == 8
    summary = (tmp_path / "shape_run.summary.txt").read_text(encoding="utf-8")
    assert "mean =" in summary and "result =" in summary
    assert result.summary["replicas"] == 8


SMALL_CONFIGS = {
    "shape": dict(n=50, reps=4),
    "flat-edge": dict(n=40, reps=2, tgrid=5),
    "martin-edge": dict(n=500, reps=2, alphas="0.2"),
    "growth-equiv": dict(n=12, reps=4),
    "queue-fixpoint": dict(n=4000, reps=1, iters=4, horizon=100),
    "f-involution": dict(n=4000, reps=1, iters=4, horizon=100),
    "busemann-marginals": dict(n=80, reps=4, probes=8),
    "busemann-props": dict(n=16, reps=6, triples=12),
    "geodesic-coalesce": dict(n=60, reps=6, offset=2),
    "geodesic-direction": dict(n=60, reps=6),
    "cif-law": dict(n=40, reps=6),
    "tie-census": dict(n=16, reps=6),
}


@pytest.mark.parametrize("name", sorted(SMALL_CONFIGS))
def test_thread_count_never_changes_output_bytes(name, tmp_path):
    texts = []
    for threads in (1, 2):
        out = tmp_path / f"{name}-t{threads}"
        cfg = cli.ExperimentConfig(subcommand=name, seed=9, out=str(out),
                                   threads=threads, **SMALL_CONFIGS[name])
        cli.run(cfg)
        body = Path(str(out) + ".csv").read_text(encoding="utf-8")
        # strip the echoed config block, which records the thread count itself
        texts.append("\n".join(l for l in body.splitlines() if not l.startswith("#")))
    assert texts[0] == texts[1]


def test_rerun_same_config_identical_bytes(tmp_path):
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / f"rerun-{tag}"
        cfg = cli.ExperimentConfig(subcommand="cif-law", n=40, reps=5, seed=2,
                                   out=str(out))
        cli.run(cfg)
        outs.append(Path(str(out) + ".csv").read_text(encoding="utf-8"))
    assert outs[0].replace("rerun-a", "rerun-b") == outs[1]


def test_threads_env_var(monkeypatch):
    cfg = cli.ExperimentConfig(subcommand="shape")
    monkeypatch.delenv(cli.THREADS_ENV_VAR, raising=False)
    assert cli._threads(cfg) == 1
    monkeypatch.setenv(cli.THREADS_ENV_VAR, "3")
    assert cli._threads(cfg) == 3
    cfg.threads = 2
    assert cli._threads(cfg) == 2


def test_path_csv_export(tmp_path):
    from lpplab import env, geodesics, passage

    f = env.sample_field(env.DistributionSpec.exponential(1.0), (0, 0), 6, 6, seed=1)
    table = passage.compute_reverse(f, (5, 5), passage.Convention.EXCLUDE_LAST)
    path = geodesics.backtrack(table, (0, 0), geodesics.TieRule.PREFER_E1)
    out = cli.export_csv(str(tmp_path / "path.csv"), ("index", "x1", "x2"),
                         path.csv_rows())
    lines = Path(out).read_text(encoding="utf-8").splitlines()
    assert lines[0] == "index,x1,x2" and lines[1] == "0,0,0"
    assert lines[-1] == f"{len(path)},5,5"


def test_exit_codes(tmp_path):
    ok = cli.main(["growth-equiv", "--n", "10", "--reps", "2", "--seed", "1",
                   "--out", str(tmp_path / "ok")])
    assert ok == 0
    # a direction far outside the near-axis regime misses the asymptotic slope
    fail = cli.main(["martin-edge", "--alphas", "0.5", "--n", "600", "--reps", "2",
                     "--seed", "1", "--out", str(tmp_path / "fail")])
    assert fail == 1
    usage = cli.main(["shape", "--dist", "nope:1", "--out", str(tmp_path / "u")])
    assert usage == 2
    with pytest.raises(SystemExit) as exit_info:
        cli.main(["not-a-subcommand"])
    assert exit_info.value.code == 2
