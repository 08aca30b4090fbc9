"""Experiment runner: subcommands wrapping the library, all output as CSV.

Every subcommand accepts ``--config`` (a JSON document, schema below),
``--seed``, and ``--out-dir``; command-line flags override config values.
Outputs are UTF-8, LF-terminated CSVs written atomically
(temp file + rename), with units suffixed in column names, so a given
config + seed always reproduces byte-identical files.

Config document sections (all optional; unknown keys are rejected)::

    {"seed": 0, "out_dir": ".",
     "sim": {... SimConfig fields ...},
     "estimate": {"weights_multimodal": str, "weights_forceonly": str,
                   "trace": str, "ts_s": float, "stride": int,
                   "max_horizon_ms": int},
     "capacity": {"tw_list_ms": [..], "u_start": int, "u_stop": int,
                   "u_step": int, "satisfied_frac": float},
     "analytic": {"mu": float, "rho_list": [..], "dmax_start_ms": float,
                   "dmax_stop_ms": float, "dmax_count": int},
     "deadband": {"trace": str, "ts_s": float, "c_list": [..],
                   "floor_eps_n": float},
     "mm1": {"arrival_rate": float, "service_rate": float,
              "dmax_list_ms": [..], "n_packets": int},
     "synth_trace": {"profile": str, "b": float, "stiffness_fraction": float,
                      "ts_s": float, "length": int, "amplitude": float,
                      "wall": float, "jitter": float, "out": str},
     "synth_channel": {"users": int, "duration_s": float, "tti_s": float,
                        "mean_snr_db_range": [lo, hi], "rician_k": float,
                        "shadowing_sigma_db": float, "se_cap": float,
                        "out": str}}
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import replace

import numpy as np

from .deadband import DeadbandConfig, encode_trace
from .errors import ConfigError, TactisimError
from .estimator import (Mode, baseline_linear, baseline_zoh, load_weights,
                        rollout)
from .netsim import (SimConfig, capacity_search, run_mm1_mode, run_sim,
                     save_channel_csv, synth_channel)
from .queueing import QueueModel, delay_violation_probability
from .traces import load_trace, save_trace, synth_trace

logger = logging.getLogger(__name__)

_SECTION_KEYS = {
    "estimate": {"weights_multimodal", "weights_forceonly", "trace", "ts_s",
                 "stride", "max_horizon_ms"},
    "capacity": {"tw_list_ms", "u_start", "u_stop", "u_step", "satisfied_frac"},
    "analytic": {"mu", "rho_list", "dmax_start_ms", "dmax_stop_ms", "dmax_count"},
    "deadband": {"trace", "ts_s", "c_list", "floor_eps_n"},
    "mm1": {"arrival_rate", "service_rate", "dmax_list_ms", "n_packets"},
    "synth_trace": {"profile", "b", "stiffness_fraction", "ts_s", "length",
                    "amplitude", "wall", "jitter", "out"},
    "synth_channel": {"users", "duration_s", "tti_s", "mean_snr_db_range",
                      "rician_k", "shadowing_sigma_db", "se_cap", "out"},
}
_TOP_KEYS = {"seed", "out_dir", "sim"} | set(_SECTION_KEYS)


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def write_csv(path, header, rows) -> None:
    """Atomic CSV write: temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(",".join(header) + "\n")
            for row in rows:
                f.write(",".join(_fmt(v) for v in row) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_config(path) -> dict:
    if path is None:
        return {}
    with open(path, encoding="utf-8") as f:
        doc = json.load(f)
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for section, allowed in _SECTION_KEYS.items():
        if section in doc:
            bad = set(doc[section]) - allowed
            if bad:
                raise ConfigError(f"unknown {section} keys: {sorted(bad)}")
    return doc


def _section(cfg_doc: dict, name: str, args, flag_names) -> dict:
    """Merge a config section with command-line overrides (flags win)."""
    merged = dict(cfg_doc.get(name, {}))
    for key in flag_names:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _out_path(args, cfg_doc, filename) -> str:
    out_dir = args.out_dir or cfg_doc.get("out_dir") or "."
    return os.path.join(out_dir, filename)


def _seed(args, cfg_doc) -> int:
    if args.seed is not None:
        return args.seed
    return int(cfg_doc.get("seed", 0))


def _sim_config(args, cfg_doc) -> SimConfig:
    section = dict(cfg_doc.get("sim", {}))
    if "sim" not in cfg_doc and not section:
        raise ConfigError("this subcommand needs a config file with a 'sim' section")
    if args.seed is not None:
        section["seed"] = args.seed
    elif "seed" not in section:
        section["seed"] = int(cfg_doc.get("seed", 0))
    for key in ("users", "tw_s", "duration_s"):
        value = getattr(args, key, None)
        if value is not None:
            section[key] = value
    return SimConfig.from_dict(section)


def cmd_estimate(args, cfg_doc) -> int:
    sec = _section(cfg_doc, "estimate", args,
                   ["weights_multimodal", "weights_forceonly", "trace", "ts_s",
                    "stride", "max_horizon_ms"])
    for required in ("weights_multimodal", "weights_forceonly", "trace"):
        if not sec.get(required):
            raise ConfigError(f"estimate requires {required!r}")
    horizon = int(sec.get("max_horizon_ms", 20))
    stride = int(sec.get("stride", 50))
    if horizon < 1:
        raise ConfigError("max_horizon_ms must be at least 1")
    if stride < 1:
        raise ConfigError("stride must be at least 1")
    w_mm = load_weights(sec["weights_multimodal"])
    w_fo = load_weights(sec["weights_forceonly"])
    if w_mm.mode is not Mode.MULTI_MODAL or w_fo.mode is not Mode.FORCE_ONLY:
        raise ConfigError("weights files do not match their estimate roles")
    trace = load_trace(sec["trace"], float(sec.get("ts_s", 1e-3)))
    window = max(w_mm.config.window_len, w_fo.config.window_len)
    starts = range(max(window - 1, 1), len(trace) - horizon, stride)
    if len(starts) == 0:
        raise ConfigError("trace too short for the requested horizon/stride")

    sq_err = {name: np.zeros((horizon, 3)) for name in ("mm", "fo", "zoh", "linear")}
    for t in starts:
        truth = trace.forces[t + 1:t + 1 + horizon]
        runs = {
            "mm": rollout(trace, t, horizon, w_mm, with_error=False),
            "fo": rollout(trace, t, horizon, w_fo, with_error=False),
            "zoh": baseline_zoh(trace, t, horizon, with_error=False),
            "linear": baseline_linear(trace, t, horizon, with_error=False),
        }
        for name, res in runs.items():
            sq_err[name] += (res.predictions - truth) ** 2
    n = len(starts)
    header = ["horizon_ms"]
    for name in ("mm", "fo", "zoh", "linear"):
        header += [f"{name}_mse_x_n2", f"{name}_mse_y_n2", f"{name}_mse_z_n2",
                   f"{name}_mse_mean_n2"]
    rows = []
    tick_ms = trace.ts * 1e3
    for k in range(horizon):
        row = [_fmt((k + 1) * tick_ms)]
        for name in ("mm", "fo", "zoh", "linear"):
            per_axis = sq_err[name][k] / n
            row += [per_axis[0], per_axis[1], per_axis[2], per_axis.mean()]
        rows.append(row)
    path = _out_path(args, cfg_doc, "estimate.csv")
    write_csv(path, header, rows)
    print(f"wrote {path} ({n} rollout starts)")
    return 0


def cmd_simulate(args, cfg_doc) -> int:
    cfg = _sim_config(args, cfg_doc)
    metrics = run_sim(cfg)
    rows = []
    for u in range(cfg.users):
        drop = metrics.dropout[u]
        rows.append([u, metrics.n_generated[u], metrics.n_dropped[u],
                     _fmt(float(drop)) if not math.isnan(drop) else "nan"])
    rows.append(["aggregate", int(metrics.n_generated.sum()),
                 int(metrics.n_dropped.sum()), metrics.aggregate_dropout])
    path = _out_path(args, cfg_doc, "metrics.csv")
    write_csv(path, ["user", "N_g", "N_d", "dropout"], rows)
    print(f"wrote {path} (aggregate dropout {metrics.aggregate_dropout:.6g})")
    return 0


def cmd_capacity(args, cfg_doc) -> int:
    cfg = _sim_config(args, cfg_doc)
    sec = _section(cfg_doc, "capacity", args,
                   ["tw_list_ms", "u_start", "u_stop", "u_step", "satisfied_frac"])
    tw_list = sec.get("tw_list_ms")
    if not tw_list:
        raise ConfigError("capacity requires tw_list_ms")
    u_start = int(sec.get("u_start", 2))
    u_stop = int(sec.get("u_stop", 100))
    u_step = int(sec.get("u_step", 2))
    frac = float(sec.get("satisfied_frac", 0.95))
    u_range = list(range(u_start, u_stop + 1, u_step))
    rows = []
    capacities = []
    for tw_ms in tw_list:
        tw_cfg = replace(cfg, tw_s=float(tw_ms) * 1e-3)
        result = capacity_search(tw_cfg, u_range, satisfied_frac=frac)
        capacities.append((tw_ms, result.capacity))
        for users, _n_ok, f in result.rows:
            rows.append([tw_ms, users, f])
    path = _out_path(args, cfg_doc, "capacity.csv")
    write_csv(path, ["Tw_ms", "U", "frac_satisfied"], rows)
    for tw_ms, cap in capacities:
        print(f"Tw={tw_ms} ms: capacity {cap} users")
    print(f"wrote {path}")
    return 0


def cmd_analytic(args, cfg_doc) -> int:
    sec = _section(cfg_doc, "analytic", args,
                   ["mu", "rho_list", "dmax_start_ms", "dmax_stop_ms", "dmax_count"])
    mu = float(sec.get("mu", 1000.0))
    rho_list = sec.get("rho_list", [0.3, 0.5, 0.7, 0.9])
    start = float(sec.get("dmax_start_ms", 0.0))
    stop = float(sec.get("dmax_stop_ms", 20.0))
    count = int(sec.get("dmax_count", 21))
    if count < 1:
        raise ConfigError("dmax_count must be at least 1")
    dmax_values = np.linspace(start, stop, count) * 1e-3
    rows = []
    for rho in rho_list:
        model = QueueModel(arrival_rate=rho * mu, service_rate=mu)
        for d in dmax_values:
            rows.append([rho, d, delay_violation_probability(model, float(d))])
    path = _out_path(args, cfg_doc, "analytic.csv")
    write_csv(path, ["rho", "dmax_s", "p_violation"], rows)
    print(f"wrote {path}")
    return 0


def cmd_deadband(args, cfg_doc) -> int:
    sec = _section(cfg_doc, "deadband", args, ["trace", "ts_s", "c_list",
                                               "floor_eps_n"])
    if not sec.get("trace"):
        raise ConfigError("deadband requires a trace path")
    trace = load_trace(sec["trace"], float(sec.get("ts_s", 1e-3)))
    c_list = sec.get("c_list", [0.05, 0.1, 0.2])
    floor_eps = float(sec.get("floor_eps_n", 1e-3))
    rows = []
    for c in c_list:
        mask, reduction = encode_trace(trace.forces,
                                       DeadbandConfig(c=float(c), floor_eps=floor_eps))
        rows.append([c, int(mask.sum()), mask.size, reduction])
    path = _out_path(args, cfg_doc, "deadband.csv")
    write_csv(path, ["jnd_c", "transmitted", "total", "reduction_ratio"], rows)
    print(f"wrote {path}")
    return 0


def cmd_mm1(args, cfg_doc) -> int:
    sec = _section(cfg_doc, "mm1", args,
                   ["arrival_rate", "service_rate", "dmax_list_ms", "n_packets"])
    lam = float(sec.get("arrival_rate", 500.0))
    mu = float(sec.get("service_rate", 1000.0))
    dmax_ms = sec.get("dmax_list_ms", [1.0, 2.0, 5.0, 10.0])
    n = int(sec.get("n_packets", 1_000_000))
    seed = _seed(args, cfg_doc)
    dmax_s = np.asarray(dmax_ms, dtype=np.float64) * 1e-3
    empirical = run_mm1_mode(lam, mu, dmax_s, n_packets=n, seed=seed)
    model = QueueModel(arrival_rate=lam, service_rate=mu)
    rows = []
    for d, emp in zip(dmax_s, empirical):
        closed = delay_violation_probability(model, float(d))
        rel = abs(emp - closed) / closed if closed > 0 else float("nan")
        rows.append([d, emp, closed, rel])
    path = _out_path(args, cfg_doc, "mm1.csv")
    write_csv(path, ["dmax_s", "empirical", "analytic", "rel_err"], rows)
    print(f"wrote {path}")
    return 0


def cmd_synth_trace(args, cfg_doc) -> int:
    sec = _section(cfg_doc, "synth_trace", args,
                   ["profile", "b", "stiffness_fraction", "ts_s", "length",
                    "amplitude", "wall", "jitter", "out"])
    trace = synth_trace(
        float(sec.get("b", 0.5)), float(sec.get("stiffness_fraction", 0.8)),
        float(sec.get("ts_s", 1e-3)), int(sec.get("length", 100_000)),
        sec.get("profile", "push"), _seed(args, cfg_doc),
        amplitude=float(sec.get("amplitude", 0.03)),
        wall=float(sec.get("wall", 0.01)),
        jitter=float(sec.get("jitter", 5e-4)))
    path = _out_path(args, cfg_doc, sec.get("out", "trace.csv"))
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    save_trace(trace, path)
    print(f"wrote {path} ({len(trace)} samples)")
    return 0


def cmd_synth_channel(args, cfg_doc) -> int:
    sec = _section(cfg_doc, "synth_channel", args,
                   ["users", "duration_s", "tti_s", "rician_k",
                    "shadowing_sigma_db", "se_cap", "out"])
    snr_range = tuple(cfg_doc.get("synth_channel", {}).get("mean_snr_db_range",
                                                           (5.0, 20.0)))
    profile = synth_channel(
        int(sec.get("users", 10)), float(sec.get("duration_s", 10.0)),
        float(sec.get("tti_s", 1e-3)), _seed(args, cfg_doc),
        mean_snr_db_range=snr_range,
        rician_k=float(sec.get("rician_k", 10.0)),
        shadowing_sigma_db=float(sec.get("shadowing_sigma_db", 4.0)),
        se_cap=float(sec.get("se_cap", 7.4)))
    path = _out_path(args, cfg_doc, sec.get("out", "channel.csv"))
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    save_channel_csv(profile, path)
    print(f"wrote {path} ({profile.n_users} users x {profile.n_ttis} ttis)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tactisim",
        description="Haptic estimation and delay-bound-relaxation experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON experiment config")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out-dir", dest="out_dir", default=None)

    p = sub.add_parser("estimate", help="MSE vs. horizon for all estimators")
    common(p)
    p.add_argument("--weights-multimodal", dest="weights_multimodal")
    p.add_argument("--weights-forceonly", dest="weights_forceonly")
    p.add_argument("--trace")
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("--max-horizon-ms", dest="max_horizon_ms", type=int, default=None)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("simulate", help="one simulation run -> per-user metrics")
    common(p)
    p.add_argument("--users", type=int, default=None)
    p.add_argument("--tw-ms", dest="tw_s", type=lambda v: float(v) * 1e-3,
                   default=None, help="relaxed delay bound, milliseconds")
    p.add_argument("--duration-s", dest="duration_s", type=float, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("capacity", help="capacity over delay-bound relaxations")
    common(p)
    p.add_argument("--tw-list-ms", dest="tw_list_ms", type=float, nargs="+",
                   default=None)
    p.add_argument("--u-start", dest="u_start", type=int, default=None)
    p.add_argument("--u-stop", dest="u_stop", type=int, default=None)
    p.add_argument("--u-step", dest="u_step", type=int, default=None)
    p.add_argument("--duration-s", dest="duration_s", type=float, default=None)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("analytic", help="closed-form delay violation sweeps")
    common(p)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--rho-list", dest="rho_list", type=float, nargs="+",
                   default=None)
    p.add_argument("--dmax-start-ms", dest="dmax_start_ms", type=float, default=None)
    p.add_argument("--dmax-stop-ms", dest="dmax_stop_ms", type=float, default=None)
    p.add_argument("--dmax-count", dest="dmax_count", type=int, default=None)
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("deadband", help="packet reduction per JND constant")
    common(p)
    p.add_argument("--trace")
    p.add_argument("--c-list", dest="c_list", type=float, nargs="+", default=None)
    p.add_argument("--floor-eps-n", dest="floor_eps_n", type=float, default=None)
    p.set_defaults(func=cmd_deadband)

    p = sub.add_parser("mm1", help="Monte-Carlo queue vs. closed form")
    common(p)
    p.add_argument("--arrival-rate", dest="arrival_rate", type=float, default=None)
    p.add_argument("--service-rate", dest="service_rate", type=float, default=None)
    p.add_argument("--dmax-list-ms", dest="dmax_list_ms", type=float, nargs="+",
                   default=None)
    p.add_argument("--n-packets", dest="n_packets", type=int, default=None)
    p.set_defaults(func=cmd_mm1)

    p = sub.add_parser("synth-trace", help="write a synthetic haptic trace CSV")
    common(p)
    p.add_argument("--profile", choices=["push", "tap", "press"], default=None)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--stiffness-fraction", dest="stiffness_fraction", type=float,
                   default=None)
    p.add_argument("--length", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_synth_trace)

    p = sub.add_parser("synth-channel", help="write a synthetic channel CSV")
    common(p)
    p.add_argument("--users", type=int, default=None)
    p.add_argument("--duration-s", dest="duration_s", type=float, default=None)
    p.add_argument("--rician-k", dest="rician_k", type=float, default=None)
    p.add_argument("--se-cap", dest="se_cap", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_synth_channel)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg_doc = load_config(args.config)
        return args.func(args, cfg_doc)
    except TactisimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
