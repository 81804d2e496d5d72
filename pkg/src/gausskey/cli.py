"""Command-line front end emitting CSV/JSON for rate and landscape studies.

Subcommands: ``rate`` (one attack point), ``scan`` (physical-region grid
plus boundary), ``boundary`` (boundary only), ``critical`` (origin
gradient/Hessian diagnostics) and ``converge`` (finite-modulation sweep
against the closed form).

Exit codes: 0 success, 1 configuration error (bad flags or config
file), 2 domain/physicality error (the offending constraint is named).
Identical configurations produce byte-identical output; the only
environment dependence is ``GAUSSKEY_THREADS``, which sets the worker
count for scans.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, TextIO

from . import landscape as _landscape
from . import rates as _rates
from .attack import (
    AttackParams,
    boundary_curve,
    physical_grid,
    violated_constraint,
)
from .gaussian import DomainError

SCAN_HEADER = "g,g_prime,rate,physical,on_boundary"
CONVERGE_SWEEP = (1e2, 1e3, 1e4, 1e5, 1e6)

_CONFIG_KEYS = (
    "protocol",
    "tau",
    "omega",
    "g",
    "gprime",
    "mu",
    "grid_resolution",
    "output",
    "format",
    "clamp_nonnegative",
    "gradient_step",
    "hessian_step",
)


class ConfigError(Exception):
    """Malformed flags or configuration file (exit code 1)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit(2); we want 1
        raise ConfigError(message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    protocol: str
    tau: float
    omega: float
    g: float
    g_prime: float
    mu: float | None          # None means asymptotic
    asymptotic: bool
    grid_resolution: int
    output: str | None
    format: str
    clamp_nonnegative: bool
    gradient_step: float | None
    hessian_step: float | None


def fmt(x: float) -> str:
    """Round-trip-exact decimal rendering (17 significant digits)."""
    return format(float(x), ".17g")


def _fmt_bool(flag: bool) -> str:
    return "true" if flag else "false"


def build_parser() -> _Parser:
    parser = _Parser(
        prog="gausskey",
        description="Key rates of one-way CV-QKD under two-mode Gaussian attacks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("rate", "rate report for one attack point"),
        ("scan", "rate over the physical (g, g') grid plus boundary"),
        ("boundary", "rate along the constraint boundary"),
        ("critical", "gradient/Hessian diagnostics at the origin"),
        ("converge", "finite-modulation sweep against the closed form"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument(
            "--protocol",
            choices=_rates.VARIANTS,
            default=None,
            help="protocol variant (default noswitching)",
        )
        p.add_argument("--tau", type=float, default=None, help="channel transmissivity")
        p.add_argument("--omega", type=float, default=None, help="ancilla thermal variance")
        p.add_argument("--g", type=float, default=None, help="q-quadrature correlation")
        p.add_argument("--gprime", type=float, default=None, help="p-quadrature correlation")
        p.add_argument("--mu", default=None, help="modulation variance or 'asymptotic'")
        p.add_argument("--grid-resolution", type=int, default=None, dest="grid_resolution")
        p.add_argument("--output", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--config", default=None, help="flat key=value config file")
        p.add_argument(
            "--clamp-nonnegative",
            action="store_true",
            default=None,
            dest="clamp_nonnegative",
            help="emit max(rate, 0) instead of raw rates",
        )
        p.add_argument("--gradient-step", type=float, default=None, dest="gradient_step")
        p.add_argument("--hessian-step", type=float, default=None, dest="hessian_step")
    return parser


def _read_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as handle:
            for lineno, raw in enumerate(handle, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
                key, _, value = line.partition("=")
                key = key.strip()
                if key not in _CONFIG_KEYS:
                    raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
                values[key] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return values


def _coerce(key: str, value: str):
    try:
        if key in ("tau", "omega", "g", "gprime", "gradient_step", "hessian_step"):
            return float(value)
        if key == "grid_resolution":
            return int(value)
        if key == "clamp_nonnegative":
            lowered = value.lower()
            if lowered in ("true", "1", "yes"):
                return True
            if lowered in ("false", "0", "no"):
                return False
            raise ValueError(value)
        if key == "protocol" and value not in _rates.VARIANTS:
            raise ValueError(value)
        if key == "format" and value not in ("csv", "json"):
            raise ValueError(value)
    except ValueError as exc:
        raise ConfigError(f"invalid value for {key}: {value!r}") from exc
    return value


def _parse_mu(raw: str) -> tuple[float | None, bool]:
    if raw.lower() == "asymptotic":
        return None, True
    try:
        return float(raw), False
    except ValueError as exc:
        raise ConfigError(f"--mu must be a number or 'asymptotic', got {raw!r}") from exc


def make_config(args: argparse.Namespace) -> RunConfig:
    """Merge CLI flags over config-file values and apply defaults."""
    merged: dict[str, object] = {}
    if args.config is not None:
        for key, value in _read_config_file(args.config).items():
            merged[key] = _coerce(key, value)
    for key in _CONFIG_KEYS:
        cli_value = getattr(args, key, None)
        if cli_value is not None:
            merged[key] = cli_value

    for required in ("tau", "omega"):
        if required not in merged:
            raise ConfigError(f"missing required parameter --{required}")
    mu_raw = merged.get("mu", "asymptotic")
    mu, asymptotic = _parse_mu(str(mu_raw))
    return RunConfig(
        command=args.command,
        protocol=str(merged.get("protocol", _rates.NO_SWITCHING)),
        tau=float(merged["tau"]),
        omega=float(merged["omega"]),
        g=float(merged.get("g", 0.0)),
        g_prime=float(merged.get("gprime", 0.0)),
        mu=mu,
        asymptotic=asymptotic,
        grid_resolution=int(merged.get("grid_resolution", 101)),
        output=merged.get("output"),  # type: ignore[arg-type]
        format=str(merged.get("format", "csv")),
        clamp_nonnegative=bool(merged.get("clamp_nonnegative", False)),
        gradient_step=merged.get("gradient_step"),  # type: ignore[arg-type]
        hessian_step=merged.get("hessian_step"),  # type: ignore[arg-type]
    )


def _worker_count() -> int:
    raw = os.environ.get("GAUSSKEY_THREADS", "1")
    try:
        count = int(raw)
    except ValueError as exc:
        raise ConfigError(f"GAUSSKEY_THREADS must be an integer, got {raw!r}") from exc
    return max(1, count)


def _map_ordered(fn: Callable, items: Sequence) -> list:
    workers = _worker_count()
    if workers == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _params(cfg: RunConfig) -> AttackParams:
    params = AttackParams(tau=cfg.tau, omega=cfg.omega, g=cfg.g, g_prime=cfg.g_prime)
    violated = violated_constraint(params)
    if violated is not None:
        raise DomainError(f"unphysical attack parameters: violated {violated}")
    return params


def _clamp(cfg: RunConfig, rate: float) -> float:
    return max(rate, 0.0) if cfg.clamp_nonnegative else rate


def _write(cfg: RunConfig, text: str) -> None:
    if cfg.output is None:
        sys.stdout.write(text)
        return
    try:
        with open(cfg.output, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write output file {cfg.output}: {exc}") from exc


def _kv_csv(pairs: Iterable[tuple[str, str]]) -> str:
    lines = ["key,value"]
    lines += [f"{key},{value}" for key, value in pairs]
    return "\n".join(lines) + "\n"


def cmd_rate(cfg: RunConfig) -> str:
    params = _params(cfg)
    spec = _rates.ProtocolSpec(variant=cfg.protocol, mu=cfg.mu, asymptotic=cfg.asymptotic)
    report = _rates.rate_report(params, spec)
    rate = _clamp(cfg, report.rate)
    mu_text = "asymptotic" if cfg.asymptotic else fmt(cfg.mu)
    if cfg.format == "json":
        payload = {
            "protocol": cfg.protocol,
            "tau": cfg.tau,
            "omega": cfg.omega,
            "g": cfg.g,
            "g_prime": cfg.g_prime,
            "mu": mu_text,
            "i_ab": report.i_ab,
            "holevo": report.holevo,
            "rate": rate,
            "total_spectrum": [float(x) for x in report.total_spectrum],
            "conditional_spectrum": [float(x) for x in report.conditional_spectrum],
        }
        return json.dumps(payload, indent=2) + "\n"
    pairs = [
        ("protocol", cfg.protocol),
        ("tau", fmt(cfg.tau)),
        ("omega", fmt(cfg.omega)),
        ("g", fmt(cfg.g)),
        ("g_prime", fmt(cfg.g_prime)),
        ("mu", mu_text),
        ("i_ab", fmt(report.i_ab)),
        ("holevo", fmt(report.holevo)),
        ("rate", fmt(rate)),
        ("total_spectrum", ";".join(fmt(x) for x in report.total_spectrum)),
        ("conditional_spectrum", ";".join(fmt(x) for x in report.conditional_spectrum)),
    ]
    return _kv_csv(pairs)


def _scan_rows(cfg: RunConfig, include_grid: bool) -> list[dict]:
    _params(cfg)  # the configured point obeys the same domain checks
    spec = _rates.ProtocolSpec(variant=cfg.protocol, mu=cfg.mu, asymptotic=cfg.asymptotic)

    def rate_at(point: tuple[float, float]) -> float:
        g, gp = point
        p = AttackParams(tau=cfg.tau, omega=cfg.omega, g=g, g_prime=gp)
        if cfg.asymptotic:
            return _rates.key_rate_asymptotic(p, cfg.protocol)
        return _rates.key_rate_numeric(p, spec).rate

    boundary_points: list[tuple[float, float]] = []
    if cfg.omega > 1.0:
        boundary_points = list(boundary_curve(cfg.omega, cfg.grid_resolution).samples)
    boundary_set = set(boundary_points)

    points: list[tuple[float, float]] = []
    if include_grid:
        points = physical_grid(cfg.omega, cfg.grid_resolution)
    merged: dict[tuple[float, float], bool] = {}
    for point in points:
        merged[point] = point in boundary_set or _on_boundary(cfg.omega, point)
    for point in boundary_points:
        merged[point] = True
    ordered = sorted(merged)
    rates_list = _map_ordered(rate_at, ordered)
    return [
        {
            "g": point[0],
            "g_prime": point[1],
            "rate": _clamp(cfg, rate),
            "physical": True,
            "on_boundary": merged[point],
        }
        for point, rate in zip(ordered, rates_list)
    ]


def _on_boundary(omega: float, point: tuple[float, float]) -> bool:
    g, gp = point
    residual = omega * abs(g + gp) - (omega * omega + g * gp - 1.0)
    return abs(residual) <= 1e-9 * max(1.0, omega * omega)


def _render_rows(cfg: RunConfig, rows: list[dict]) -> str:
    origin = [row for row in rows if row["g"] == 0.0 and row["g_prime"] == 0.0]
    origin_rate = origin[0]["rate"] if origin else None
    verdict = None
    if origin_rate is not None:
        verdict = all(
            row["rate"] > origin_rate
            for row in rows
            if (row["g"], row["g_prime"]) != (0.0, 0.0)
        )
    if cfg.format == "json":
        payload = {
            "params": {
                "protocol": cfg.protocol,
                "tau": cfg.tau,
                "omega": cfg.omega,
                "mu": "asymptotic" if cfg.asymptotic else fmt(cfg.mu),
                "grid_resolution": cfg.grid_resolution,
            },
            "rows": rows,
            "origin_rate": origin_rate,
            "verdict": verdict,
        }
        return json.dumps(payload, indent=2) + "\n"
    lines = [SCAN_HEADER]
    for row in rows:
        lines.append(
            ",".join(
                (
                    fmt(row["g"]),
                    fmt(row["g_prime"]),
                    fmt(row["rate"]),
                    _fmt_bool(row["physical"]),
                    _fmt_bool(row["on_boundary"]),
                )
            )
        )
    return "\n".join(lines) + "\n"


def cmd_scan(cfg: RunConfig) -> str:
    if cfg.omega < 1.0:
        raise DomainError(f"scan needs omega >= 1, got {cfg.omega}")
    return _render_rows(cfg, _scan_rows(cfg, include_grid=True))


def cmd_boundary(cfg: RunConfig) -> str:
    if cfg.omega <= 1.0:
        raise DomainError(
            f"the physical region at omega = {cfg.omega} is a point; boundary is empty"
        )
    return _render_rows(cfg, _scan_rows(cfg, include_grid=False))


def cmd_critical(cfg: RunConfig) -> str:
    if cfg.omega <= 1.0:
        raise DomainError(
            f"the correlation region at omega = {cfg.omega} degenerates to a point; "
            "no critical-point analysis exists"
        )
    report = _landscape.critical_point_report(
        cfg.protocol,
        cfg.tau,
        cfg.omega,
        gradient_step=cfg.gradient_step,
        hessian_step=cfg.hessian_step,
    )
    residual = abs(report.det_h - report.analytic_det_h) / abs(report.analytic_det_h)
    if cfg.format == "json":
        payload = {
            "protocol": report.protocol,
            "tau": report.tau,
            "omega": report.omega,
            "gradient": list(report.gradient_at_origin),
            "hessian": [list(map(float, row)) for row in report.hessian_at_origin],
            "det_h": report.det_h,
            "analytic_det_h": report.analytic_det_h,
            "det_residual_rel": residual,
            "is_minimum": report.is_minimum,
        }
        return json.dumps(payload, indent=2) + "\n"
    hess = report.hessian_at_origin
    pairs = [
        ("protocol", report.protocol),
        ("tau", fmt(report.tau)),
        ("omega", fmt(report.omega)),
        ("gradient_g", fmt(report.gradient_at_origin[0])),
        ("gradient_g_prime", fmt(report.gradient_at_origin[1])),
        ("hessian_gg", fmt(hess[0, 0])),
        ("hessian_ggp", fmt(hess[0, 1])),
        ("hessian_gpg", fmt(hess[1, 0])),
        ("hessian_gpgp", fmt(hess[1, 1])),
        ("det_h", fmt(report.det_h)),
        ("analytic_det_h", fmt(report.analytic_det_h)),
        ("det_residual_rel", fmt(residual)),
        ("is_minimum", _fmt_bool(report.is_minimum)),
    ]
    return _kv_csv(pairs)


def cmd_converge(cfg: RunConfig) -> str:
    params = _params(cfg)
    rate_closed = _rates.key_rate_asymptotic(params, cfg.protocol)

    def row(mu: float) -> tuple[float, float, float, float]:
        spec = _rates.ProtocolSpec(variant=cfg.protocol, mu=mu, asymptotic=False)
        numeric = _rates.key_rate_numeric(params, spec).rate
        return mu, numeric, rate_closed, abs(numeric - rate_closed)

    table = _map_ordered(row, CONVERGE_SWEEP)
    if cfg.format == "json":
        payload = {
            "params": {
                "protocol": cfg.protocol,
                "tau": cfg.tau,
                "omega": cfg.omega,
                "g": cfg.g,
                "g_prime": cfg.g_prime,
            },
            "rows": [
                {
                    "mu": mu,
                    "rate_numeric": numeric,
                    "rate_asymptotic": closed,
                    "abs_delta": delta,
                }
                for mu, numeric, closed, delta in table
            ],
        }
        return json.dumps(payload, indent=2) + "\n"
    lines = ["mu,rate_numeric,rate_asymptotic,abs_delta"]
    for mu, numeric, closed, delta in table:
        lines.append(",".join((fmt(mu), fmt(numeric), fmt(closed), fmt(delta))))
    return "\n".join(lines) + "\n"


_COMMANDS = {
    "rate": cmd_rate,
    "scan": cmd_scan,
    "boundary": cmd_boundary,
    "critical": cmd_critical,
    "converge": cmd_converge,
}


def main(argv: Sequence[str] | None = None, stderr: TextIO = sys.stderr) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = make_config(args)
        text = _COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=stderr)
        return 1
    except DomainError as exc:
        print(f"domain error: {exc}", file=stderr)
        return 2
    try:
        _write(cfg, text)
    except ConfigError as exc:
        print(f"config error: {exc}", file=stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
