import json
import math
import os

import numpy as np
import pytest

from tactisim.cli import main
from tactisim.estimator import Mode, ModelConfig, random_weights, save_weights
from tactisim.traces import load_trace, save_trace, synth_trace

from conftest import TINY_CONFIG


def read_csv(path):
    with open(path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    return header, rows


@pytest.fixture(scope="module")
def small_trace_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "trace.csv"
    trace = synth_trace(0.5, 0.8, 1e-3, 3000, "push", seed=4)
    save_trace(trace, path)
    return str(path)


@pytest.fixture(scope="module")
def tiny_weight_paths(tmp_path_factory):
    d = tmp_path_factory.mktemp("weights")
    mm = d / "mm.json"
    fo = d / "fo.json"
    save_weights(random_weights(TINY_CONFIG, Mode.MULTI_MODAL, seed=1), mm)
    save_weights(random_weights(TINY_CONFIG, Mode.FORCE_ONLY, seed=2), fo)
    return str(mm), str(fo)


class TestAnalytic:
    def test_known_value_present(self, tmp_path):
        rc = main(["analytic", "--mu", "1000", "--rho-list", "0.5",
                   "--dmax-start-ms", "5", "--dmax-stop-ms", "5",
                   "--dmax-count", "1", "--out-dir", str(tmp_path)])
        assert rc == 0
        header, rows = read_csv(tmp_path / "analytic.csv")
        assert header == ["rho", "dmax_s", "p_violation"]
        assert len(rows) == 1
        assert abs(float(rows[0][2]) - math.exp(-2.5)) < 1e-9

    def test_reproducible_bytes(self, tmp_path):
        args = ["analytic", "--mu", "900", "--rho-list", "0.3", "0.6",
                "--dmax-count", "5"]
        main(args + ["--out-dir", str(tmp_path / "a")])
        main(args + ["--out-dir", str(tmp_path / "b")])
        a = (tmp_path / "a" / "analytic.csv").read_bytes()
        b = (tmp_path / "b" / "analytic.csv").read_bytes()
        assert a == b


class TestDeadbandCmd:
    def test_constant_trace_reduction(self, tmp_path):
        trace_path = tmp_path / "const.csv"
        from tactisim.traces import HapticTrace
        trace = HapticTrace(ts=1e-3, forces=np.ones((200, 3)),
                            positions=np.zeros((200, 3)),
                            velocities=np.zeros((200, 3)))
        save_trace(trace, trace_path)
        rc = main(["deadband", "--trace", str(trace_path), "--c-list", "0.1",
                   "--out-dir", str(tmp_path)])
        assert rc == 0
        _, rows = read_csv(tmp_path / "deadband.csv")
        assert int(rows[0][1]) == 1
        assert abs(float(rows[0][3]) - (1 - 1 / 200)) < 1e-12

    def test_missing_trace_errors(self, tmp_path, capsys):
        rc = main(["deadband", "--out-dir", str(tmp_path)])
        assert rc == 1
        assert "error" in capsys.readouterr().err


class TestMm1Cmd:
    def test_columns_and_agreement(self, tmp_path):
        rc = main(["mm1", "--arrival-rate", "500", "--service-rate", "1000",
                   "--dmax-list-ms", "2", "5", "--n-packets", "200000",
                   "--seed", "3", "--out-dir", str(tmp_path)])
        assert rc == 0
        header, rows = read_csv(tmp_path / "mm1.csv")
        assert header == ["dmax_s", "empirical", "analytic", "rel_err"]
        for row in rows:
            assert float(row[3]) < 0.1


class TestSynthCommands:
    def test_synth_trace_writes_loadable_csv(self, tmp_path):
        out = tmp_path / "t.csv"
        rc = main(["synth-trace", "--profile", "press", "--length", "500",
                   "--seed", "5", "--out", str(out), "--out-dir", str(tmp_path)])
        assert rc == 0
        trace = load_trace(out, 1e-3)
        assert len(trace) == 500

    def test_synth_channel_csv(self, tmp_path):
        rc = main(["synth-channel", "--users", "2", "--duration-s", "0.05",
                   "--seed", "1", "--out-dir", str(tmp_path)])
        assert rc == 0
        header, rows = read_csv(tmp_path / "channel.csv")
        assert header == ["user", "tti", "se"]
        assert len(rows) == 2 * 50


class TestSimulateCmd:
    def write_cfg(self, tmp_path, **sim):
        cfg = {"seed": 7, "sim": {
            "users": 4, "duration_s": 0.3, "s_p_bytes": 8, "jnd_c": None,
            "desync": False, "video": None,
            "channel": {"type": "constant", "se": 4.0},
            "trace": {"profile": "push", "length": 2000, "seed": 2}, **sim}}
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg), encoding="utf-8")
        return str(path)

    def test_metrics_csv_shape(self, tmp_path):
        cfg = self.write_cfg(tmp_path)
        rc = main(["simulate", "--config", cfg, "--out-dir", str(tmp_path)])
        assert rc == 0
        header, rows = read_csv(tmp_path / "metrics.csv")
        assert header == ["user", "N_g", "N_d", "dropout"]
        assert len(rows) == 5  # 4 users + aggregate footer
        assert rows[-1][0] == "aggregate"

    def test_flag_overrides_config(self, tmp_path):
        cfg = self.write_cfg(tmp_path)
        rc = main(["simulate", "--config", cfg, "--users", "2",
                   "--out-dir", str(tmp_path)])
        assert rc == 0
        _, rows = read_csv(tmp_path / "metrics.csv")
        assert len(rows) == 3

    def test_unknown_key_rejected(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"sim": {"users": 2, "bogus": 1}}),
                        encoding="utf-8")
        rc = main(["simulate", "--config", str(path)])
        assert rc == 1
        assert "bogus" in capsys.readouterr().err

    def test_byte_identical_reruns(self, tmp_path):
        cfg = self.write_cfg(tmp_path, jnd_c=0.1)
        main(["simulate", "--config", cfg, "--out-dir", str(tmp_path / "a")])
        main(["simulate", "--config", cfg, "--out-dir", str(tmp_path / "b")])
        assert (tmp_path / "a" / "metrics.csv").read_bytes() == \
               (tmp_path / "b" / "metrics.csv").read_bytes()


class TestCapacityCmd:
    def test_capacity_csv(self, tmp_path):
        cfg = {"sim": {"users": 1, "duration_s": 0.3, "s_p_bytes": 8,
                       "jnd_c": None, "desync": False, "video": None,
                       "channel": {"type": "constant", "se": 7.36},
                       "trace": {"profile": "push", "length": 2000, "seed": 2,
                                 "jitter": 0.002}},
               "capacity": {"tw_list_ms": [1, 5], "u_start": 4, "u_stop": 16,
                            "u_step": 4}}
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg), encoding="utf-8")
        rc = main(["capacity", "--config", str(path), "--out-dir", str(tmp_path)])
        assert rc == 0
        header, rows = read_csv(tmp_path / "capacity.csv")
        assert header == ["Tw_ms", "U", "frac_satisfied"]
        tws = sorted({float(r[0]) for r in rows})
        assert tws == [1.0, 5.0]


class TestEstimateCmd:
    def test_output_shape_and_zoh_oracle(self, tmp_path, small_trace_path,
                                         tiny_weight_paths):
        mm, fo = tiny_weight_paths
        rc = main(["estimate", "--weights-multimodal", mm,
                   "--weights-forceonly", fo, "--trace", small_trace_path,
                   "--stride", "100", "--max-horizon-ms", "20",
                   "--out-dir", str(tmp_path)])
        assert rc == 0
        header, rows = read_csv(tmp_path / "estimate.csv")
        assert len(rows) == 20
        assert len(header) == 1 + 4 * 4  # horizon + 4 methods x (3 axes + mean)

        # ZOH at horizon 1 equals the mean squared first difference over the
        # sampled start ticks (recomputed directly from the trace)
        trace = load_trace(small_trace_path, 1e-3)
        window = TINY_CONFIG.window_len
        starts = range(window - 1, len(trace) - 20, 100)
        diffs = np.array([(trace.forces[t + 1] - trace.forces[t]) ** 2
                          for t in starts])
        expected = diffs.mean(axis=0)
        zoh_x = header.index("zoh_mse_x_n2")
        got = np.array([float(rows[0][zoh_x + i]) for i in range(3)])
        np.testing.assert_allclose(got, expected, rtol=1e-9)

    def test_zero_horizon_rejected(self, tmp_path, small_trace_path,
                                   tiny_weight_paths, capsys):
        mm, fo = tiny_weight_paths
        rc = main(["estimate", "--weights-multimodal", mm,
                   "--weights-forceonly", fo, "--trace", small_trace_path,
                   "--max-horizon-ms", "0", "--out-dir", str(tmp_path)])
        assert rc == 1
        assert "horizon" in capsys.readouterr().err

    def test_missing_weights_is_config_error(self, tmp_path, small_trace_path,
                                             capsys):
        rc = main(["estimate", "--trace", small_trace_path,
                   "--out-dir", str(tmp_path)])
        assert rc == 1
        assert "weights" in capsys.readouterr().err
