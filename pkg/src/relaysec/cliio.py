"""Config files, CSV output and the command-line entry point."""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import fields
from importlib import resources

import numpy as np

from .channel import SystemConfig
from .errors import ArgumentError, ConfigError, RelaySecError
from .harness import SweepResult, parse_algo, sweep_buffer, sweep_eta, sweep_snr

HEADER = ("axis", "algorithm", "mean_secrecy", "std_error", "visited_sets")
COMMANDS = ("sweep-snr", "sweep-eta", "sweep-buffer", "selftest")
DEFAULT_ALGOS = {
    "sweep-snr": "RJFS,BF-RJFS",
    "sweep-eta": "RJFS,RJFS:noic",
    "sweep-buffer": "BF-RJFS",
}
EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


# ---------------------------------------------------------------- config text

def _field_types() -> dict:
    defaults = SystemConfig()
    return {f.name: type(getattr(defaults, f.name)) for f in fields(SystemConfig)}


def _parse_value(key: str, raw: str, kind):
    raw = raw.strip()
    try:
        if kind is tuple:
            items = [x.strip() for x in raw.split(",") if x.strip()]
            if key == "buffer_grid":
                return tuple(int(x) for x in items)
            return tuple(float(x) for x in items)
        if kind is complex or key == "corr_r":
            val = complex(raw.replace(" ", ""))
            return val.real if val.imag == 0 else val
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    raise ConfigError(f"unsupported key type for {key}")


def parse_config(text: str) -> SystemConfig:
    """Flat ``key = value`` lines; ``#`` starts a comment. Missing keys keep
    their defaults (the mimo preset); unknown keys are rejected together."""
    kinds = _field_types()
    values, unknown = {}, []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (p.strip() for p in line.split("=", 1))
        if key not in kinds:
            unknown.append(key)
            continue
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key}")
        values[key] = _parse_value(key, raw, kinds[key])
    if unknown:
        raise ConfigError("unknown keys: " + ", ".join(unknown))
    return SystemConfig(**values).validate()


def _fmt_value(val) -> str:
    if isinstance(val, tuple):
        return ", ".join(repr(v) for v in val)
    if isinstance(val, complex):
        return repr(val).strip("()")
    return repr(val)


def serialize_config(cfg: SystemConfig) -> str:
    return "".join(f"{f.name} = {_fmt_value(getattr(cfg, f.name))}\n" for f in fields(cfg))


def preset_text(name: str) -> str:
    fname = name if name.endswith(".cfg") else name + ".cfg"
    return resources.files("relaysec").joinpath("presets", fname).read_text(encoding="utf-8")


def load_preset(name: str) -> SystemConfig:
    return parse_config(preset_text(name))


def load_config(path: str | None) -> SystemConfig:
    if path is None:
        return load_preset("mimo")
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text)


# ---------------------------------------------------------------- results

def fmt_number(x: float) -> str:
    """Nine significant digits, positional notation."""
    return np.format_float_positional(float(x), precision=9, unique=False, fractional=False, trim="-")


def result_rows(result: SweepResult) -> list[tuple]:
    rows = []
    for algo in result.mean:
        for j, x in enumerate(result.axis):
            rows.append((float(x), algo, result.mean[algo][j], result.std_error[algo][j],
                         int(result.complexity.get(algo, 0))))
    rows.sort(key=lambda r: (r[0], r[1]))
    return rows


def render_results(result: SweepResult | None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    if result is not None:
        for x, algo, m, se, v in result_rows(result):
            w.writerow((fmt_number(x), algo, fmt_number(m), fmt_number(se), v))
    return buf.getvalue()


def write_results(result: SweepResult | None, path: str) -> None:
    text = render_results(result)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write results to {path}: {exc.strerror}") from exc


def read_results(path: str) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------- selftest

def _selftest_cases():
    from . import channel, linkmetrics, numerics, precoding, scheduler, selection

    def zf_identity():
        rng = np.random.default_rng(0)
        h = channel.draw_gaussian_matrix(4, 6, rng)
        u = precoding.zf_precoder(h, 2).u_full
        return np.linalg.norm(h @ u - np.eye(4)) < 1e-9

    def esr_matches_sr():
        rng = np.random.default_rng(1)
        h = channel.draw_gaussian_matrix(2, 4, rng, 6)
        he = channel.draw_gaussian_matrix(4, 4, rng, 1)
        subs = scheduler.enumerate_subsets(6, 2)
        hb = selection.stack_link1(h, subs)
        a, b = selection.esr_scores(hb, 2.0), selection.sr_scores(hb, he, 2.0)
        return np.allclose(a, b, rtol=1e-8) and np.argmax(a) == np.argmax(b)

    def cofactor_det():
        m = np.array([[2, 1j, 0], [1, 3, 1], [0, -1j, 4]])
        ref = (2 * (3 * 4 - 1 * -1j) - 1j * (1 * 4 - 0) + 0)
        return abs(numerics.det(m) - ref) < 1e-12

    def buffer_fifo():
        buf = scheduler.BufferState.empty(1, 2)
        for t in (1, 2):
            scheduler.buffer_push(buf, 0, scheduler.Packet(t))
        first, _ = scheduler.buffer_pop(buf, 0)
        return first.slot == 1 and buf.occupancy()[0] == 1

    def siso_round_trip():
        cfg = load_preset("siso")
        return parse_config(serialize_config(cfg)) == cfg

    def sweep_repeatable():
        cfg = load_preset("mimo").with_(snr_grid_db=(10.0,), trials=2, slots=3, warmup=0)
        a = render_results(sweep_snr(cfg, ["RJFS"]))
        b = render_results(sweep_snr(cfg, ["RJFS"]))
        return a == b

    return [
        ("zf gives identity", zf_identity),
        ("E-SR equals SR on square eavesdropper", esr_matches_sr),
        ("complexity counts (10, 3)", lambda: scheduler.complexity_counts(10, 3) == (120, 27)),
        ("determinant vs cofactor expansion", cofactor_det),
        ("buffer gain bound 4 over 1", lambda: linkmetrics.buffer_gain_bound(4.0, 1.0) == 1.0),
        ("no gain when equal", lambda: linkmetrics.buffer_gain_bound(3.0, 3.0) == 0.0),
        ("uncorrelated is identity", lambda: np.allclose(channel.exponential_correlation(4, 0.0), np.eye(4))),
        ("empty config gives defaults", lambda: parse_config("") == SystemConfig()),
        ("siso preset round trip", siso_round_trip),
        ("buffer is FIFO", buffer_fifo),
        ("sweep is repeatable", sweep_repeatable),
    ]


def selftest(out=None) -> tuple[int, int]:
    out = out or sys.stdout
    passed = failed = 0
    for name, fn in _selftest_cases():
        try:
            ok = bool(fn())
        except Exception as exc:  # a crashing check counts as a failure
            ok = False
            name = f"{name} ({type(exc).__name__}: {exc})"
        passed += ok
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'} {name}", file=out)
    print(f"{passed} passed, {failed} failed", file=out)
    return passed, failed


# ---------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="relaysec", description="Secrecy-rate relay selection simulator")
    p.add_argument("--config", help="config file (default: bundled mimo preset)")
    p.add_argument("--cmd", default="selftest", choices=COMMANDS)
    p.add_argument("--algos", help="comma-separated algorithm ids")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG

    if args.cmd == "selftest":
        _, failed = selftest()
        return EXIT_OK if failed == 0 else EXIT_RUNTIME

    try:
        cfg = load_config(args.config)
        if args.trials is not None:
            if args.trials < 1:
                raise ConfigError("trials >= 1")
            cfg = cfg.with_(trials=args.trials)
        if args.seed is not None:
            cfg = cfg.with_(seed=args.seed)
        algos = [a.strip() for a in (args.algos or DEFAULT_ALGOS[args.cmd]).split(",") if a.strip()]
        if not algos:
            raise ArgumentError("no algorithms given")
        for a in algos:
            parse_algo(a)
    except (ConfigError, ArgumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.cmd == "sweep-snr":
            result = sweep_snr(cfg, algos)
        elif args.cmd == "sweep-eta":
            result = sweep_eta(cfg, algos)
        else:
            result = sweep_buffer(cfg, cfg.buffer_grid, algos)
        if args.out:
            write_results(result, args.out)
        else:
            sys.stdout.write(render_results(result))
    except ArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RelaySecError, OSError, ArithmeticError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK
