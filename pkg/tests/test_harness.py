import json
import math

import pytest

from rlnc_reliability import cli
from rlnc_reliability.bounds import NONSYSTEMATIC, SYSTEMATIC, NetworkSpec
from rlnc_reliability.harness import (
    ConfigError,
    ExperimentConfig,
    ResultRow,
    heterogeneous_epsilons,
    load_config,
    max_abs_gap,
    mse_report,
    parse_eps,
    preset,
    read_rows,
    rows_to_csv,
    rows_to_jsonl,
    run_sweep,
    write_rows,
)


def small_cfg(**kw):
    base = dict(K=(3,), L=(2, 3), q=(2,), eps=("0.1",), N_offsets=(0, 3), trials=2000, seed=4)
    base.update(kw)
    return ExperimentConfig(**base)


def test_heterogeneous_examples():
    assert heterogeneous_epsilons(2, 0.01, 0.1).epsilons == (0.01, 0.1)
    ten = heterogeneous_epsilons(10, 0.01, 0.1).epsilons
    assert ten == tuple(round(0.01 * i, 12) for i in range(1, 11))
    assert heterogeneous_epsilons(3, 0.0, 0.0).epsilons == (0.0, 0.0, 0.0)
    assert heterogeneous_epsilons(1, 0.2, 0.2).epsilons == (0.2,)
    with pytest.raises(ValueError):
        heterogeneous_epsilons(1, 0.01, 0.1)
    with pytest.raises(ValueError):
        heterogeneous_epsilons(3, 0.2, 0.1)


def test_parse_eps():
    assert parse_eps("0.1", 3) == NetworkSpec((0.1, 0.1, 0.1))
    assert parse_eps("0.1,0.2", 2) == NetworkSpec((0.1, 0.2))
    assert parse_eps("linspace:0.01:0.1", 10).epsilons[4] == 0.05
    for bad, L in (("0.1,0.2", 3), ("abc", 1), ("linspace:0.1", 2), ("1.5", 1)):
        with pytest.raises(ConfigError):
            parse_eps(bad, L)


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(trials=0)
    with pytest.raises(ConfigError):
        ExperimentConfig(methods=("fastest",))
    with pytest.raises(ConfigError):
        ExperimentConfig(variant=("hybrid",))
    with pytest.raises(ConfigError):
        ExperimentConfig(N_offsets=(3, 1))
    with pytest.raises(ConfigError):
        ExperimentConfig(L=(2,), eps=("0.1,0.2,0.3",))
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"K": 5, "colour": "red"})
    cfg = ExperimentConfig.from_dict({"K": 5, "N": [0, 2], "eps": 0.1})
    assert cfg.K == (5,) and cfg.N_offsets == (0, 2) and cfg.eps == ("0.1",)
    assert ExperimentConfig().trials == 100_000


def test_grid_cardinality_and_order():
    cfg = small_cfg(variant=(NONSYSTEMATIC, SYSTEMATIC), eps=("0.1", "0.2"))
    rows = run_sweep(cfg)
    assert len(rows) == len(cfg.grid()) == 2 * 2 * 2 * 4
    assert [(r.variant, r.q, r.K, r.L, r.eps_spec, r.N) for r in rows] == cfg.grid()


def test_rows_are_probabilities():
    rows = run_sweep(small_cfg(eps=("0.1", "linspace:0.05:0.3")))
    for r in rows:
        for v in r.bounds.values():
            assert v is None or 0.0 <= v <= 1.0
        assert 0.0 <= r.sim_mean <= 1.0
        assert r.sim_halfwidth > 0.0
        if r.L == 2:
            assert r.bounds["two_user"] == pytest.approx(r.bounds["multicast"], abs=1e-12)
        else:
            assert r.bounds["two_user"] is None
        assert r.gap("multicast") == r.bounds["multicast"] - r.sim_mean


def test_infeasible_method_reported_per_row():
    cfg = small_cfg(eps=("linspace:0.05:0.3",), methods=("product", "multicast_homogeneous"))
    rows = run_sweep(cfg)
    assert all(r.bounds["multicast_homogeneous"] is None and "homogeneous" in r.error for r in rows)
    assert all(r.bounds["product"] is not None for r in rows)


def test_systematic_rows_only_carry_product():
    rows = run_sweep(small_cfg(variant=(SYSTEMATIC,)))
    for r in rows:
        assert r.bounds["multicast"] is None and r.bounds["two_user"] is None
        assert r.bounds["product"] is not None
        assert r.error == ""


def test_half_width_shrinks_with_trials():
    a = run_sweep(small_cfg(trials=4_000))
    b = run_sweep(small_cfg(trials=64_000))
    for ra, rb in zip(a, b):
        if 0.05 < ra.sim_mean < 0.95:
            ratio = ra.sim_halfwidth / rb.sim_halfwidth
            assert 3.0 < ratio < 5.5


def test_parallel_sweep_matches_serial():
    cfg = small_cfg()
    assert rows_to_csv(run_sweep(cfg, workers=2)) == rows_to_csv(run_sweep(cfg))


def test_reruns_byte_identical(tmp_path):
    cfg = small_cfg()
    for fmt in ("csv", "jsonl"):
        p1, p2 = tmp_path / f"a.{fmt}", tmp_path / f"b.{fmt}"
        write_rows(run_sweep(cfg), p1, fmt)
        write_rows(run_sweep(cfg), p2, fmt)
        assert p1.read_bytes() == p2.read_bytes()


def test_csv_layout_and_roundtrip(tmp_path):
    rows = run_sweep(small_cfg())
    text = rows_to_csv(rows)
    header = text.splitlines()[0].split(",")
    assert header[:8] == ["L", "K", "N", "q", "variant", "eps_spec", "trials", "seed"]
    assert header[8:13] == ["product", "multicast", "two_user", "sim_mean", "sim_halfwidth"]
    assert len(text.splitlines()) == len(rows) + 1
    for fmt in ("csv", "jsonl"):
        path = tmp_path / f"rows.{fmt}"
        write_rows(rows, path, fmt)
        back = read_rows(path)
        assert rows_to_csv(back) == text
    for line in rows_to_jsonl(rows).splitlines():
        d = json.loads(line)
        assert set(d["gaps"]) == set(d["bounds"])


def _row(N, bound, sim, L=2, K=5):
    return ResultRow(L, K, N, 2, NONSYSTEMATIC, "0.01", 10, 0, {"multicast": bound}, sim, 0.01)


def test_mse_report_examples():
    rows = [_row(N, 0.5, 0.5) for N in range(5, 16)]
    (entry,) = mse_report(rows)
    assert entry.mse == 0.0 and entry.points == 11 and entry.method == "multicast"
    (entry,) = mse_report([_row(5, 0.4, 0.5)])
    assert entry.mse == pytest.approx(0.01)
    rows = [_row(N, 0.5, 0.6, L=2) for N in range(5, 8)] + [_row(N, 0.5, 0.5, L=3) for N in range(5, 8)]
    report = {e.group[0]: e.mse for e in mse_report(rows)}
    assert report == {2: pytest.approx(0.01), 3: 0.0}
    assert max_abs_gap(rows, "multicast") == pytest.approx(0.1)
    assert math.isnan(max_abs_gap(rows, "product"))


def test_mse_report_rejects_incomplete_sweep():
    with pytest.raises(ValueError):
        mse_report([_row(5, 0.5, 0.5), _row(7, 0.5, 0.5)])
    with pytest.raises(ValueError):
        mse_report([_row(5, 0.5, 0.5), _row(5, 0.5, 0.5)])
    broken = [_row(5, 0.5, 0.5), _row(6, None, 0.5)]
    with pytest.raises(ValueError):
        mse_report(broken)


def test_load_config(tmp_path):
    path = tmp_path / "exp.yaml"
    path.write_text(
        "trials: 500\nseed: 3\nexperiments:\n"
        "  - {K: [3], L: [2], eps: ['0.1'], N: [0, 2]}\n"
        "  - {K: [4], L: [3], eps: ['linspace:0.01:0.1'], variant: [systematic], methods: [product]}\n"
    )
    a, b = load_config(path)
    assert a.trials == b.trials == 500 and a.seed == 3
    assert b.variant == (SYSTEMATIC,) and b.methods == ("product",)
    single = tmp_path / "one.yaml"
    single.write_text("K: 3\nL: 2\n")
    (c,) = load_config(single)
    assert c.K == (3,)


def test_bundled_preset():
    cfgs = preset("paper")
    points = sum(len(c.grid()) for c in cfgs)
    # two variants x two fields x four K x three L x two rates x 11 N, plus the mixed-rate curves
    assert points == 2 * 2 * 4 * 3 * 2 * 11 + 3 * 11
    assert all(c.trials == 100_000 for c in cfgs)
    with pytest.raises(ConfigError):
        preset("nope")


# command line


def run_cli(capsys, *argv):
    rc = cli.main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_cli_bound(capsys):
    rc, out, _ = run_cli(capsys, "bound", "--N", "7", "--K", "5", "--L", "2", "--eps", "0.01")
    d = json.loads(out)
    assert rc == 0 and d["two_user"] == pytest.approx(d["multicast"], abs=1e-12)
    rc, out, _ = run_cli(capsys, "bound", "--N", "7", "--K", "5", "--L", "3", "--eps", "linspace:0.01:0.1",
                         "--method", "multicast_naive", "--method", "multicast_order_free")
    d = json.loads(out)
    assert d["multicast_naive"] == pytest.approx(d["multicast_order_free"], abs=1e-10)


def test_cli_errors(capsys):
    rc, _, err = run_cli(capsys, "simulate", "--N", "7", "--K", "5", "--trials", "0")
    assert rc == 2 and "trials" in err
    rc, _, err = run_cli(capsys, "bound", "--N", "4", "--K", "5")
    assert rc == 2
    rc, _, err = run_cli(capsys, "sweep", "--config", "/nonexistent.yaml")
    assert rc == 2
    with pytest.raises(SystemExit):
        cli.main(["bound", "--K", "5"])


def test_cli_seed_env(capsys, monkeypatch):
    args = ("simulate", "--N", "8", "--K", "5", "--L", "3", "--eps", "0.1", "--trials", "3000")
    monkeypatch.setenv(cli.SEED_ENV, "41")
    _, out_env, _ = run_cli(capsys, *args)
    _, out_flag, _ = run_cli(capsys, *args, "--seed", "41")
    _, out_other, _ = run_cli(capsys, *args, "--seed", "42")
    assert json.loads(out_env) == json.loads(out_flag)
    assert json.loads(out_env)["seed"] == 41
    assert json.loads(out_other)["seed"] == 42
    monkeypatch.setenv(cli.SEED_ENV, "abc")
    rc, _, _ = run_cli(capsys, *args)
    assert rc == 2


def test_cli_sweep_and_mse(tmp_path, capsys):
    out = tmp_path / "s.csv"
    rc, _, _ = run_cli(capsys, "sweep", "--K", "3", "--L", "2,3", "--eps", "0.1", "--N", "0:4",
                       "--trials", "1000", "--seed", "5", "--out", str(out))
    assert rc == 0
    rows = read_rows(out)
    assert len(rows) == 10 and {r.seed for r in rows} == {5}
    rc, text, _ = run_cli(capsys, "mse", "--in", str(out))
    lines = text.splitlines()
    assert rc == 0 and lines[0] == "L,K,q,variant,eps_spec,method,mse,points"
    assert len(lines) == 1 + 2 + 2 + 1  # two_user only exists for L=2
    rc, text, _ = run_cli(capsys, "sweep", "--K", "3", "--L", "2", "--N", "0:1", "--trials", "100", "--format", "jsonl")
    assert rc == 0 and len(text.splitlines()) == 2


def test_cli_correlated_example(capsys):
    rc, out, _ = run_cli(capsys, "example2", "--trials", "10000", "--seed", "2")
    d = json.loads(out)
    assert rc == 0
    assert 0.200 <= d["product_bound"] <= 0.205
    assert 0.268 <= d["improved_bound"] <= 0.274
    assert 0.30 <= d["simulated"] <= 0.36
