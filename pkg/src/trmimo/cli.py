"""Configuration ingestion, experiment orchestration, and result emission.

Experiments are described by a flat key = value text file (lists in
brackets), validated exhaustively: every violation is reported, not just
the first. Outputs are CSV or structured text, each embedding the config
fingerprint, plus a run manifest; Monte Carlo outputs are byte-identical
for a given (config, seed) regardless of the worker count.
"""

from __future__ import annotations

import argparse
import ast
import dataclasses
import os
import platform
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy

from .channel import ChannelConfig, ConfigError
from .infotheory import rate_sweep
from .moments import (
    CapacityError,
    M_FACTOR_PEAK,
    MomentSpec,
    classify_graphs,
    neff,
    squared_mean,
    wick_exact,
)
from .stability import (
    mc_normalized_variance,
    predicted_normalized_variance,
    scaling_regression,
)
from .timereversal import SymbolStream

__all__ = ["ExperimentSpec", "parse_config", "emit_config", "run", "main", "COMMANDS"]

COMMANDS = ("stability", "sweep", "moments", "graphs", "rate", "neff")
MC_COMMANDS = frozenset({"stability", "sweep"})

_CHANNEL_INT = ("n_tx", "n_rx", "n_symbols", "seed")
_CHANNEL_FLOAT = (
    "carrier",
    "bandwidth",
    "coherence_bw",
    "symbol_interval",
    "symbol_mag",
    "noise_power",
    "tx_power",
)
_CHANNEL_LIST = ("pinholes", "variances")
_CHANNEL_KEYS = _CHANNEL_INT + _CHANNEL_FLOAT + _CHANNEL_LIST
_EXPERIMENT_KEYS = (
    "command",
    "trials",
    "workers",
    "out",
    "symbol_phases",
    "sweep_param",
    "sweep_values",
    "mc_grid",
    "p_grid",
)


@dataclass(frozen=True)
class ExperimentSpec:
    """A validated experiment: base config plus orchestration knobs."""

    config: ChannelConfig
    command: str
    trials: int = 1000
    workers: int = 1
    out: str = "results"
    symbol_phases: str = "equal"
    sweep_param: str | None = None
    sweep_values: tuple | None = None
    mc_grid: tuple[float, float, int] | None = None
    p_grid: tuple[float, ...] | None = None


def _parse_pairs(text: str):
    """Flat key = value lines -> dict of raw values, plus syntax violations."""
    pairs: dict[str, object] = {}
    violations: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            violations.append(f"line {lineno}: expected 'key = value'")
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            violations.append(f"line {lineno}: empty key")
            continue
        if key in pairs:
            violations.append(f"line {lineno}: duplicate key '{key}'")
            continue
        try:
            pairs[key] = ast.literal_eval(value)
        except (ValueError, SyntaxError):
            pairs[key] = value  # bare word, e.g. command names or paths
    return pairs, violations


def _coerce_int(key, value, violations):
    if isinstance(value, bool) or not isinstance(value, int):
        violations.append(f"{key} must be an integer, got {value!r}")
        return None
    return value


def _coerce_float(key, value, violations):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        violations.append(f"{key} must be a number, got {value!r}")
        return None
    return float(value)


def _coerce_list(key, value, violations):
    if not isinstance(value, (list, tuple)):
        violations.append(f"{key} must be a bracketed list, got {value!r}")
        return None
    return tuple(value)


def spec_from_pairs(pairs: dict) -> ExperimentSpec:
    """Build and validate an ExperimentSpec, reporting all violations."""
    violations: list[str] = []
    channel_kwargs: dict = {}
    experiment: dict = {}
    for key, value in pairs.items():
        if key in _CHANNEL_INT:
            coerced = _coerce_int(key, value, violations)
            if coerced is not None:
                channel_kwargs[key] = coerced
        elif key in _CHANNEL_FLOAT:
            coerced = _coerce_float(key, value, violations)
            if coerced is not None:
                channel_kwargs[key] = coerced
        elif key in _CHANNEL_LIST:
            coerced = _coerce_list(key, value, violations)
            if coerced is not None:
                channel_kwargs[key] = coerced
        elif key in _EXPERIMENT_KEYS:
            experiment[key] = value
        else:
            violations.append(f"unknown key '{key}'")

    command = experiment.get("command")
    if command is None:
        violations.append("missing required key 'command'")
    elif command not in COMMANDS:
        violations.append(
            f"unknown command '{command}' (choose from {', '.join(COMMANDS)})"
        )

    trials = experiment.get("trials", 1000)
    trials = _coerce_int("trials", trials, violations) or 0
    if command in MC_COMMANDS and trials < 100:
        violations.append("trials must be >= 100 for Monte Carlo commands")

    workers = experiment.get("workers", 1)
    workers = _coerce_int("workers", workers, violations) or 1
    if workers < 1:
        violations.append("workers must be >= 1")

    out = str(experiment.get("out", "results"))
    phases = str(experiment.get("symbol_phases", "equal"))
    if phases not in ("equal", "random"):
        violations.append("symbol_phases must be 'equal' or 'random'")

    sweep_param = experiment.get("sweep_param")
    sweep_values = experiment.get("sweep_values")
    if command == "sweep":
        if sweep_param is None or sweep_values is None:
            violations.append("sweep command needs sweep_param and sweep_values")
    if sweep_param is not None and sweep_param not in _CHANNEL_KEYS:
        violations.append(f"sweep_param '{sweep_param}' is not a config field")
    if sweep_values is not None:
        sweep_values = _coerce_list("sweep_values", sweep_values, violations)

    mc_grid = experiment.get("mc_grid")
    if mc_grid is not None:
        mc_grid = _coerce_list("mc_grid", mc_grid, violations)
        if mc_grid is not None and (
            len(mc_grid) != 3 or mc_grid[0] <= 0 or mc_grid[1] <= mc_grid[0]
        ):
            violations.append("mc_grid must be [min, max, points] with max > min > 0")
            mc_grid = None
    p_grid = experiment.get("p_grid")
    if p_grid is not None:
        p_grid = _coerce_list("p_grid", p_grid, violations)

    missing = [k for k in ("n_tx", "n_rx") if k not in channel_kwargs]
    for key in missing:
        violations.append(f"missing required key '{key}'")
    config = None
    if not missing:
        try:
            config = ChannelConfig(**channel_kwargs)
        except ConfigError as err:
            violations.extend(err.violations)
    if violations:
        raise ConfigError(violations)
    return ExperimentSpec(
        config=config,
        command=command,
        trials=trials,
        workers=workers,
        out=out,
        symbol_phases=phases,
        sweep_param=sweep_param,
        sweep_values=sweep_values,
        mc_grid=tuple(mc_grid) if mc_grid is not None else None,
        p_grid=tuple(p_grid) if p_grid is not None else None,
    )


def parse_config(text: str) -> ExperimentSpec:
    """Parse an experiment file; raises ConfigError listing every violation."""
    pairs, violations = _parse_pairs(text)
    if violations:
        # still attempt field validation for an exhaustive report
        try:
            spec_from_pairs(pairs)
        except ConfigError as err:
            violations.extend(err.violations)
        raise ConfigError(violations)
    return spec_from_pairs(pairs)


def _render(value) -> str:
    if isinstance(value, (tuple, list)):
        return "[" + ", ".join(_render(v) for v in value) + "]"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_config(spec: ExperimentSpec) -> str:
    """Canonical text form; parse_config(emit_config(spec)) == spec."""
    cfg = spec.config
    lines = ["# channel"]
    for key in (
        "n_tx",
        "n_rx",
        "pinholes",
        "variances",
        "carrier",
        "bandwidth",
        "coherence_bw",
        "symbol_interval",
        "n_symbols",
        "symbol_mag",
        "noise_power",
        "tx_power",
        "seed",
    ):
        lines.append(f"{key} = {_render(getattr(cfg, key))}")
    lines.append("")
    lines.append("# experiment")
    lines.append(f"command = {spec.command}")
    lines.append(f"trials = {spec.trials}")
    lines.append(f"workers = {spec.workers}")
    lines.append(f"out = {spec.out}")
    lines.append(f"symbol_phases = {spec.symbol_phases}")
    for key in ("sweep_param", "sweep_values", "mc_grid", "p_grid"):
        value = getattr(spec, key)
        if value is not None:
            lines.append(f"{key} = {_render(value)}")
    return "\n".join(lines) + "\n"


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _stream_for(spec: ExperimentSpec, cfg: ChannelConfig) -> SymbolStream:
    if spec.symbol_phases == "random":
        return SymbolStream.random_phase(cfg)
    return SymbolStream.equal_phase(cfg)


def _csv_text(estimate) -> str:
    import io

    buf = io.StringIO()
    estimate.to_csv(buf)
    return buf.getvalue()


def _run_stability(spec: ExperimentSpec, out: Path, echo) -> list[str]:
    cfg = spec.config
    estimate = mc_normalized_variance(
        cfg, spec.trials, workers=spec.workers, stream=_stream_for(spec, cfg)
    )
    _write_atomic(out / "stability.csv", _csv_text(estimate))
    pred = predicted_normalized_variance(cfg)
    echo(
        f"stability: regime {pred.regime}, measured {estimate.summary():.6g}, "
        f"predicted {pred.nvar:.6g}"
    )
    return ["stability.csv"]


def _sweep_configs(spec: ExperimentSpec) -> list[ChannelConfig]:
    configs = []
    for i, value in enumerate(spec.sweep_values):
        if spec.sweep_param in _CHANNEL_LIST:
            value = tuple(value)
        configs.append(
            dataclasses.replace(
                spec.config,
                **{spec.sweep_param: value, "seed": spec.config.seed + i},
            )
        )
    return configs


def _run_sweep(spec: ExperimentSpec, out: Path, echo) -> list[str]:
    configs = _sweep_configs(spec)
    result = scaling_regression(configs, spec.trials, workers=spec.workers)
    lines = [f"# config {spec.config.fingerprint()}"]
    lines.append(f"# sweep over {spec.sweep_param}")
    lines.append("config_id,sweep_value,predicted_nvar,measured_nvar,trials")
    for (fp, pred, meas), value in zip(result.points, spec.sweep_values):
        lines.append(f"{fp},{_render(value)},{pred!r},{meas!r},{spec.trials}")
    _write_atomic(out / "sweep.csv", "\n".join(lines) + "\n")
    reg = [
        f"# config {spec.config.fingerprint()}",
        f"slope = {result.slope!r}",
        f"intercept = {result.intercept!r}",
        f"r_squared = {result.r_squared!r}",
        f"slope_ci = {_render(result.slope_ci)}",
        f"decades = {result.decades!r}",
    ]
    _write_atomic(out / "regression.txt", "\n".join(reg) + "\n")
    echo(
        f"sweep: slope {result.slope:.4f} "
        f"(95% CI {result.slope_ci[0]:.4f}..{result.slope_ci[1]:.4f}), "
        f"r^2 {result.r_squared:.4f}"
    )
    return ["sweep.csv", "regression.txt"]


def _run_moments(spec: ExperimentSpec, out: Path, echo) -> list[str]:
    cfg = spec.config
    mspec = MomentSpec.from_config(cfg)
    value, expansion = wick_exact(mspec)
    mean_sq = squared_mean(mspec)
    n = expansion.n_stages
    lines = [
        f"# config {cfg.fingerprint()}",
        f"# exact second moment expansion, {n} stages",
        f"value = {value!r}",
        f"squared_mean = {mean_sq!r}",
        f"variance = {value - mean_sq!r}",
        "# graph lines: pairing (A=arc, L=ladder, stage 1..n), "
        "exponents over (N, K_1..), m_factor, degree, leading",
    ]
    cutoff = 2 * n - 1
    for term in expansion.terms:
        pattern = "".join(
            "L" if (term.pairing_mask >> k) & 1 else "A" for k in range(n)
        )
        exps = " ".join(str(e) for e in term.exponents)
        lines.append(
            f"{pattern},{exps},{term.m_factor},{term.degree},"
            f"{int(term.degree >= cutoff)}"
        )
    _write_atomic(out / "moments.txt", "\n".join(lines) + "\n")
    echo(f"moments: value {value!r}, variance {value - mean_sq!r}")
    return ["moments.txt"]


def _run_graphs(spec: ExperimentSpec, out: Path, echo) -> list[str]:
    cfg = spec.config
    split = classify_graphs(cfg.n_stages)
    n = split.n_stages
    lines = [
        f"# config {cfg.fingerprint()}",
        f"n_stages = {n}",
        f"leading_count = {split.leading_count}",
    ]
    for term in split.leading:
        pattern = "".join(
            "L" if (term.pairing_mask >> k) & 1 else "A" for k in range(n)
        )
        exps = " ".join(str(e) for e in term.exponents)
        lines.append(f"leading {pattern}: exponents {exps}, {term.m_factor}")
    sub_max = max((t.degree for t in split.subleading), default=0)
    lines.append(f"subleading_count = {len(split.subleading)}")
    lines.append(f"subleading_max_degree = {sub_max}")
    _write_atomic(out / "graphs.txt", "\n".join(lines) + "\n")
    echo(f"graphs: {split.leading_count} leading graphs for {n} stages")
    return ["graphs.txt"]


def _run_rate(spec: ExperimentSpec, out: Path, echo) -> list[str]:
    cfg = spec.config
    grid = spec.mc_grid if spec.mc_grid is not None else (1.0, 1000.0, 61)
    lo, hi, count = grid
    mc_values = np.geomspace(lo, hi, int(count))
    sweep = rate_sweep(cfg, mc_values, spec.p_grid)
    lines = [
        f"# config {cfg.fingerprint()}",
        "# rate in nats per unit time",
        f"# optimum: mc = {sweep.optimum.aggregate_rate!r}, "
        f"r_max = {sweep.optimum.rate!r}, "
        f"power_per_nat = {sweep.power_per_nat!r}, "
        f"predicted_nvar = {sweep.predicted_nvar_at_optimum!r}",
        f"# optimal_power = {sweep.optimal_power!r} "
        f"(unsimplified {sweep.optimal_power_unsimplified!r})",
        "mc,symbol_rate,tx_power,sir,snr,sinr,rate,is_optimum",
    ]
    for pt in sweep.points:
        lines.append(
            f"{pt.aggregate_rate!r},{pt.symbol_rate!r},{pt.tx_power!r},"
            f"{pt.sir!r},{pt.snr!r},{pt.sinr!r},{pt.rate!r},"
            f"{int(pt is sweep.optimum)}"
        )
    _write_atomic(out / "rate.csv", "\n".join(lines) + "\n")
    echo(
        f"rate: max {sweep.optimum.rate:.6g} at M C = "
        f"{sweep.optimum.aggregate_rate:.6g}, predicted nvar there "
        f"{sweep.predicted_nvar_at_optimum:.6g}"
    )
    return ["rate.csv"]


def _run_neff(spec: ExperimentSpec, out: Path, echo) -> list[str]:
    cfg = spec.config
    n_eff, n_p = neff(cfg.n_tx, cfg.pinholes)
    lines = [
        f"# config {cfg.fingerprint()}",
        f"n_eff = {n_eff!r}",
        f"n_p = {n_p!r}",
    ]
    _write_atomic(out / "neff.txt", "\n".join(lines) + "\n")
    echo(f"{n_eff:g}" + (f" {n_p:g}" if n_p is not None else ""))
    return ["neff.txt"]


_DISPATCH = {
    "stability": _run_stability,
    "sweep": _run_sweep,
    "moments": _run_moments,
    "graphs": _run_graphs,
    "rate": _run_rate,
    "neff": _run_neff,
}


def run(spec: ExperimentSpec, stdout=None) -> int:
    """Execute one experiment; writes outputs plus a manifest, returns exit code."""
    echo = (stdout or sys.stdout).write
    out = Path(spec.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    status, message, outputs, code = "ok", "", [], 0
    try:
        outputs = _DISPATCH[spec.command](spec, out, lambda s: echo(s + "\n"))
    except ConfigError as err:
        status, code = "failed", 2
        message = "; ".join(err.violations)
    except CapacityError as err:
        status, code = "failed", 3
        message = str(err)
    except ValueError as err:
        status, code = "failed", 2
        message = str(err)
    except Exception as err:  # noqa: BLE001 - manifest still records the failure
        status, code = "failed", 1
        message = f"{type(err).__name__}: {err}"
    wall = time.perf_counter() - start
    from . import __version__

    manifest = [
        "# run manifest",
        f"command = {spec.command}",
        f"status = {status}",
        f"config_fingerprint = {spec.config.fingerprint()}",
        f"seed = {spec.config.seed}",
        f"trials = {spec.trials}",
        f"workers = {spec.workers}",
        f"wall_time_s = {wall:.3f}",
        f"package = {__version__}",
        f"python = {platform.python_version()}",
        f"numpy = {np.__version__}",
        f"scipy = {scipy.__version__}",
        f"outputs = {_render(outputs)}",
    ]
    if message:
        manifest.append(f"error = {message}")
    manifest.append("")
    manifest.append("# config echo")
    manifest.append(emit_config(spec))
    _write_atomic(out / "manifest.txt", "\n".join(manifest))
    if message:
        print(f"error: {message}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="trmimo",
        description="Time-reversal MIMO stability and rate experiments",
    )
    parser.add_argument("--config", required=True, help="experiment file path")
    parser.add_argument("--command", choices=COMMANDS, help="override command")
    parser.add_argument("--trials", type=int, help="override trial count")
    parser.add_argument("--seed", type=int, help="override master seed")
    parser.add_argument("--workers", type=int, help="override worker count")
    parser.add_argument("--out", help="override output directory")
    args = parser.parse_args(argv)

    try:
        text = Path(args.config).read_text()
    except OSError as err:
        print(f"error: cannot read config: {err}", file=sys.stderr)
        return 2
    pairs, syntax_violations = _parse_pairs(text)
    for flag in ("command", "trials", "seed", "workers", "out"):
        value = getattr(args, flag)
        if value is not None:
            pairs[flag] = value
    try:
        if syntax_violations:
            raise ConfigError(syntax_violations)
        spec = spec_from_pairs(pairs)
    except ConfigError as err:
        for violation in err.violations:
            print(f"error: {violation}", file=sys.stderr)
        return 2
    try:
        return run(spec)
    except CapacityError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
