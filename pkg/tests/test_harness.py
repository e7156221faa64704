import csv
import json
from collections import defaultdict

import pytest

from sdaas import cli
from sdaas.errors import ValidationError
from sdaas.harness import (
    GROUPED_HEADER,
    TIMING_HEADER,
    ExperimentConfig,
    beaufort_key,
    benchmark,
    distance_key,
    group_energy,
    read_grouped,
    read_timing,
    run_experiment,
    write_grouped,
    write_timing,
)
from sdaas.selection import Mode, adaptive_select, fixed_select, read_detail, read_report, write_detail
from sdaas.wind import WindDirection


def small_config(**kw):
    base = dict(node_count=150, network_seed=3, wind_seed=4)
    base.update(kw)
    return ExperimentConfig(**base)


class TestConfig:
    @pytest.mark.parametrize(
        "kw",
        [dict(bin_width_m=0), dict(bench_sizes=[100, 100]), dict(bench_sizes=[200, 100]), dict(reps=0), dict(group_by="time")],
    )
    def test_invalid(self, kw):
        with pytest.raises(ValidationError):
            ExperimentConfig(**kw)

    def test_json_with_override(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"node_count": 99, "bin_width_m": 50.0, "reps": 2}))
        cfg = ExperimentConfig.from_json(path, reps=7)
        assert (cfg.node_count, cfg.bin_width_m, cfg.reps) == (99, 50.0, 7)

    def test_json_unknown_field(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"nodes": 99}))
        with pytest.raises(ValidationError, match="unknown"):
            ExperimentConfig.from_json(path)


def test_group_energy_excludes_unselected():
    cfg = small_config(battery_level_pct=20.0)
    net = cfg.network()
    fx = fixed_select(net.segments, cfg.swarm())
    assert len(fx.selected_ids) < len(fx.verdicts)
    rows = group_energy([fx], beaufort_key)
    assert sum(r.count for r in rows) == len(fx.selected_ids)
    assert all(r.count > 0 for r in rows)


def test_grouped_means_reproducible_from_detail(tmp_path):
    cfg = small_config()
    net = cfg.network()
    reports = [fixed_select(net.segments, cfg.swarm()), adaptive_select(net.segments, cfg.swarm())]
    write_grouped(group_energy(reports, distance_key(200.0)), tmp_path / "g.csv")
    grouped = {(r.group_key, r.mode): r for r in read_grouped(tmp_path / "g.csv")}

    lengths = {s.id: s.length_m for s in net.segments}
    expected = defaultdict(list)
    for report in reports:
        write_detail(report, tmp_path / "d.csv")
        selected = report.selected_ids
        per_edge = defaultdict(float)
        for row in read_detail(tmp_path / "d.csv"):
            per_edge[row["edge_id"]] += (row["e_drag_wh"] + row["e_updown_wh"]) / 5
        for edge, aero in per_edge.items():
            if edge in selected:
                expected[(lengths[edge] // 200) * 200, report.mode].append(aero)
    assert set(expected) == set(grouped)
    for key, vals in expected.items():
        assert grouped[key].count == len(vals)
        # detail CSV carries 6 decimals per term
        assert grouped[key].mean_aero_wh == pytest.approx(sum(vals) / len(vals), abs=1e-5)


def test_run_experiment_deterministic(tmp_path):
    cfg = small_config(bench_sizes=[50, 100], reps=1)
    paths = []
    for i in range(2):
        result = run_experiment(cfg)
        p = tmp_path / f"g{i}.csv"
        write_grouped(result.grouped, p)
        paths.append(p)
        assert [(r.nodes, r.mode) for r in result.timing] == [
            (50, Mode.FIXED), (50, Mode.ADAPTIVE), (100, Mode.FIXED), (100, Mode.ADAPTIVE),
        ]
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_timing_csv_schema(tmp_path):
    rows = benchmark(small_config(bench_sizes=[30, 60], reps=3))
    write_timing(rows, tmp_path / "t.csv")
    back = read_timing(tmp_path / "t.csv")
    assert len(back) == 4
    assert all(r.reps == 3 and r.median_ms >= 0 for r in back)
    with open(tmp_path / "t.csv") as fh:
        assert tuple(next(csv.reader(fh))) == TIMING_HEADER


def test_timing_scales_subquadratically(swarm):
    import gc
    import time

    nets = {n: ExperimentConfig().network(node_count=n) for n in (500, 2000)}

    def best_ms(select, net):
        gc.disable()
        try:
            samples = []
            for _ in range(5):
                t0 = time.perf_counter()
                select(net.segments, swarm)
                samples.append(time.perf_counter() - t0)
        finally:
            gc.enable()
        return min(samples)

    seg_ratio = len(nets[2000].segments) / len(nets[500].segments)
    for select in (fixed_select, adaptive_select):
        ratio = best_ms(select, nets[2000]) / best_ms(select, nets[500])
        # quadratic growth would give seg_ratio**2 (about 15x here)
        assert ratio < seg_ratio**1.75, select.__name__


class TestCli:
    def run(self, *argv):
        return cli.main([str(a) for a in argv])

    def test_pipeline(self, tmp_path):
        assert self.run("gen-network", "--nodes", 80, "--seed", 1, "--out", tmp_path / "net") == 0
        assert self.run("gen-wind", "--network", tmp_path / "net", "--seed", 2, "--out", tmp_path / "w.csv") == 0
        for mode in ("fixed", "adaptive"):
            out = tmp_path / f"{mode}.csv"
            code = self.run(
                "select", "--mode", mode, "--network", tmp_path / "net", "--wind", tmp_path / "w.csv",
                "--out", out, "--detail", tmp_path / f"{mode}_d.csv",
            )
            assert code == 0
            rows = read_report(out)
            assert all(r["mode"].value == mode for r in rows)
            assert len(read_detail(tmp_path / f"{mode}_d.csv")) == 5 * len(rows)

    def test_single_front_segment_flies_vee(self, tmp_path):
        net = tmp_path / "net"
        net.mkdir()
        (net / "nodes.csv").write_text("node_id,x_m,y_m\n1,0,0\n2,300,400\n")
        (net / "edges.csv").write_text("edge_id,src,dst,length_m\n1,1,2,\n")
        (tmp_path / "w.csv").write_text("edge_id,wind_speed_mps,wind_dir\n1,6.000000,FRONT\n")
        out = tmp_path / "sel.csv"
        assert self.run("select", "--mode", "adaptive", "--network", net, "--wind", tmp_path / "w.csv", "--out", out) == 0
        assert out.read_text().splitlines()[1].split(",")[:4] == ["1", "adaptive", "VEE", "true"]

    def test_missing_wind_flag(self, tmp_path, capsys):
        assert self.run("select", "--mode", "fixed", "--network", tmp_path, "--out", tmp_path / "x.csv") == 1
        assert "--wind" in capsys.readouterr().err

    def test_unknown_flag(self, capsys):
        assert self.run("gen-network", "--nodes", 5, "--seed", 1, "--out", "x", "--frobnicate") == 1
        assert "usage" in capsys.readouterr().err

    def test_io_error(self, tmp_path):
        (tmp_path / "w.csv").write_text("edge_id,wind_speed_mps,wind_dir\n")
        code = self.run("select", "--mode", "fixed", "--network", tmp_path / "nope", "--wind", tmp_path / "w.csv", "--out", tmp_path / "o.csv")
        assert code == 2

    def test_validation_error(self, tmp_path):
        assert self.run("gen-network", "--nodes", 1, "--seed", 1, "--out", tmp_path) == 1

    def test_bench_rows(self, tmp_path):
        out = tmp_path / "t.csv"
        assert self.run("bench", "--sizes", "500,1000", "--reps", 3, "--out", out) == 0
        rows = read_timing(out)
        assert [(r.nodes, r.mode) for r in rows] == [
            (500, Mode.FIXED), (500, Mode.ADAPTIVE), (1000, Mode.FIXED), (1000, Mode.ADAPTIVE),
        ]
        assert all(r.reps == 3 for r in rows)

    def test_report_stdout(self, capsys):
        assert self.run("report", "--group-by", "wind", "--nodes", 60, "--seed", 2) == 0
        lines = capsys.readouterr().out.splitlines()
        assert tuple(lines[0].split(",")) == GROUPED_HEADER
        assert {line.split(",")[1] for line in lines[1:]} == {"fixed", "adaptive"}

    def test_report_with_config_and_timing(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"node_count": 70, "network_seed": 5, "bin_width_m": 300.0}))
        code = self.run(
            "report", "--config", cfg, "--group-by", "distance", "--out", tmp_path / "g.csv",
            "--timing-out", tmp_path / "t.csv", "--sizes", "40,70", "--reps", 1,
        )
        assert code == 0
        keys = {r.group_key for r in read_grouped(tmp_path / "g.csv")}
        assert all(k % 300.0 == 0 for k in keys)
        assert len(read_timing(tmp_path / "t.csv")) == 4

    def test_tables_override(self, tmp_path):
        # swap the Front column so COLUMN becomes the cheapest head-wind formation
        from importlib import resources

        text = resources.files("sdaas").joinpath("data/formation_tables.csv").read_text()
        text = text.replace("COLUMN,FRONT,134.40,93.88,90.39,81.40,79.29,95.87,1858.78",
                            "COLUMN,FRONT,134.40,93.88,90.39,81.40,79.29,95.87,1000.00")
        (tmp_path / "t.csv").write_text(text)
        net = tmp_path / "net"
        self.run("gen-network", "--nodes", 2, "--seed", 1, "--out", net)
        (tmp_path / "w.csv").write_text("edge_id,wind_speed_mps,wind_dir\n1,3.0,FRONT\n2,3.0,FRONT\n")
        out = tmp_path / "o.csv"
        assert self.run("select", "--mode", "adaptive", "--network", net, "--wind", tmp_path / "w.csv",
                        "--out", out, "--tables", tmp_path / "t.csv") == 0
        assert {r["formation"].value for r in read_report(out)} == {"COLUMN"}
