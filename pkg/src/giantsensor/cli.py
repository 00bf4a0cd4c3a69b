"""Command-line interface.

Exit codes: 0 success, 2 validation error, 3 numerical failure (singular
system, no steady state, ...), 4 I/O error.

Angles may be written in units of pi with a ``pi`` suffix (``0.84pi``).
Physical parameters can also come from a flat ``key = value`` config file
(``--config``); command-line flags win over the file.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigTypeError, NumericalError, UnknownKey, ValidationError
from .io import FORMATS, emit_record, emit_table, report_record
from .model import DEFAULT_CONVENTION, SensorParams, Topology, TransferConvention, build_params
from .sweep import AXES, METRICS, SweepSpec, compare_topologies, find_extremum, run_sweep
from .transfer import metrics, transfer_matrix

COMMANDS = ("metrics", "chi", "sweep", "extremum", "compare", "oracle", "figures")
OUTPUT_ENV = "GIANTSENSOR_OUTPUT_DIR"

PARAM_KEYS = ("delta", "delta12", "j_coupling", "gamma_gain", "gamma_loss", "kappa", "phi", "tau", "beta")
DEFAULT_PARAMS = {
    "delta": 0.0, "delta12": 0.0, "j_coupling": 0.1, "gamma_gain": 0.1, "gamma_loss": 0.1,
    "kappa": 1.0, "phi": 0.0, "tau": 0.0, "beta": 1.0,
}
# option key -> (parser, default)
OPTION_KEYS = {
    "omega": (float, 0.0),
    "epsilon": (float, 0.0),
    "axis": (str, "phi"),
    "lo": (float, 0.0),
    "hi": (float, 2.0 * math.pi),
    "n": (int, 2001),
    "endpoint": (bool, True),
    "workers": (int, 1),
    "metric": (str, "noise"),
    "kind": (str, "max"),
    "resolution": (float, 1e-4),
    "multimodal": (bool, False),
    "dt": (float, None),
    "tol": (float, 1e-10),
    "trajectory": (str, None),
    "out_dir": (str, None),
    "no_render": (bool, False),
}
GENERAL_KEYS = ("topology", "convention", "format", "output", "v_matrix")
PARAM_HELP = {
    "delta": "drive detuning from cavity 1 (default 0)",
    "delta12": "detuning between the cavities (default 0)",
    "j_coupling": "direct cavity coupling J (default 0.1)",
    "gamma_gain": "gain rate Gamma (default 0.1)",
    "gamma_loss": "dissipative rate gamma (default 0.1)",
    "kappa": "readout coupling, sets the unit (default 1)",
    "phi": "delay phase, e.g. 0.84pi (default 0)",
    "tau": "delay between coupling points in 1/kappa (default 0)",
    "beta": "drive amplitude (default 1)",
}


def parse_real(text) -> float:
    """Parse a float, accepting a trailing ``pi`` (``0.84pi``, ``pi``, ``-2pi``)."""
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip().lower().replace(" ", "")
    if s.endswith("pi"):
        head = s[:-2].rstrip("*")
        factor = 1.0 if head in ("", "+") else -1.0 if head == "-" else float(head)
        return factor * math.pi
    return float(s)


def _parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    s = str(text).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(text)


def parse_matrix(text):
    """Four comma-separated entries ``m11,m12,m21,m22`` (Python complex syntax allowed)."""
    parts = [p for p in str(text).replace(";", ",").split(",") if p.strip()]
    if len(parts) != 4:
        raise ValueError("expected 4 entries")
    vals = [complex(p.strip().replace(" ", "")) for p in parts]
    return [[vals[0], vals[1]], [vals[2], vals[3]]]


def _convert(key: str, value):
    try:
        if key in PARAM_KEYS:
            return parse_real(value)
        if key == "v_matrix":
            return parse_matrix(value)
        if key in OPTION_KEYS:
            kind = OPTION_KEYS[key][0]
            if kind is float:
                return parse_real(value)
            if kind is bool:
                return _parse_bool(value)
            return kind(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigTypeError(f"bad value {value!r} for {key}", key=key) from None


def read_config_file(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment. Dashes in keys map to underscores."""
    out = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigTypeError(f"{path}:{lineno}: expected key = value", key=line)
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in PARAM_KEYS and key not in OPTION_KEYS and key not in GENERAL_KEYS:
            raise UnknownKey(f"{path}:{lineno}: unknown key {key!r}", key=key)
        out[key] = _convert(key, value)
    return out


@dataclass
class RunConfig:
    command: str
    params: SensorParams
    topology: Topology = Topology.GIANT
    convention: TransferConvention = DEFAULT_CONVENTION
    output_path: str | None = None
    format: str = "csv"
    options: dict = field(default_factory=dict)


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value parameter file")
    for key in PARAM_KEYS:
        common.add_argument("--" + key.replace("_", "-"), dest=key, default=None,
                            metavar="X", help=PARAM_HELP[key])
    common.add_argument("--v", dest="v_matrix", default=None, help="V entries m11,m12,m21,m22")
    common.add_argument("--topology", choices=[t.value for t in Topology], default=None)
    common.add_argument("--convention", choices=[c.value for c in TransferConvention], default=None)
    common.add_argument("--format", choices=FORMATS, default=None)
    common.add_argument("--output", "-o", default=None, help="output file (default: stdout)")

    parser = argparse.ArgumentParser(
        prog="giantsensor",
        description="Giant-cavity sensor metrics, sweeps, time-domain cross-checks and figures.",
        epilog="exit codes: 0 ok, 2 invalid input, 3 numerical failure, 4 i/o error",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metrics", parents=[common], help="zero-frequency figures of merit")
    p = sub.add_parser("chi", parents=[common], help="state-transfer matrix")
    p.add_argument("--omega", default=None)
    p.add_argument("--epsilon", default=None)

    def sweep_args(p):
        p.add_argument("--axis", choices=AXES, default=None)
        p.add_argument("--lo", default=None)
        p.add_argument("--hi", default=None)
        p.add_argument("--n", default=None)
        p.add_argument("--no-endpoint", dest="endpoint", action="store_const", const="false", default=None)

    p = sub.add_parser("sweep", parents=[common], help="one-axis parameter sweep")
    sweep_args(p)
    p.add_argument("--workers", default=None)
    p = sub.add_parser("extremum", parents=[common], help="golden-section extremum search")
    p.add_argument("--metric", choices=METRICS, default=None)
    p.add_argument("--axis", choices=AXES, default=None)
    p.add_argument("--lo", default=None)
    p.add_argument("--hi", default=None)
    p.add_argument("--kind", choices=("max", "min"), default=None)
    p.add_argument("--resolution", default=None)
    p.add_argument("--multimodal", action="store_const", const="true", default=None,
                   help="refine around the best of several coarse extrema")
    p = sub.add_parser("compare", parents=[common], help="giant/small ratios along an axis")
    sweep_args(p)
    p = sub.add_parser("oracle", parents=[common], help="time-domain cross-check")
    p.add_argument("--epsilon", default=None)
    p.add_argument("--dt", default=None)
    p.add_argument("--tol", default=None)
    p.add_argument("--trajectory", default=None, help="dump the trajectory CSV here")
    p = sub.add_parser("figures", parents=[common], help="regenerate figure data, scripts and renders")
    p.add_argument("--out-dir", dest="out_dir", default=None)
    p.add_argument("--no-render", dest="no_render", action="store_const", const="true", default=None)
    return parser


def parse_config(argv=None) -> RunConfig:
    """Turn ``argv`` (plus an optional ``--config`` file) into a :class:`RunConfig`."""
    args = _build_parser().parse_args(argv)
    merged = {}
    if args.config:
        merged.update(read_config_file(args.config))
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        merged[key] = _convert(key, value)

    params = {k: merged.get(k, DEFAULT_PARAMS[k]) for k in PARAM_KEYS}
    params = build_params(v_matrix=merged.get("v_matrix"), **params)
    options = {k: merged.get(k, default) for k, (_, default) in OPTION_KEYS.items()}
    try:
        topology = Topology(merged.get("topology", Topology.GIANT))
        convention = TransferConvention(merged.get("convention", DEFAULT_CONVENTION))
    except ValueError as exc:
        raise ValidationError(str(exc), key="topology/convention") from None
    fmt = merged.get("format", "csv")
    if fmt not in FORMATS:
        raise ValidationError(f"format must be one of {FORMATS}", key="format")
    return RunConfig(args.command, params, topology, convention, merged.get("output"), fmt, options)


def _output(cfg: RunConfig):
    out = cfg.output_path
    if out is not None and not os.path.isabs(out) and os.environ.get(OUTPUT_ENV):
        out = os.path.join(os.environ[OUTPUT_ENV], out)
    return out


def run(cfg: RunConfig) -> None:
    o = cfg.options
    out = _output(cfg)
    if cfg.command == "metrics":
        emit_record(report_record(metrics(cfg.params, cfg.topology, cfg.convention)), out, cfg.format)
    elif cfg.command == "chi":
        chi = transfer_matrix(cfg.params, cfg.topology, cfg.convention, o["omega"], o["epsilon"])
        rec = {f"chi{i + 1}{j + 1}_{part}": float(getattr(chi[i, j], part))
               for i in range(2) for j in range(2) for part in ("real", "imag")}
        emit_record(rec, out, cfg.format)
    elif cfg.command in ("sweep", "compare"):
        spec = SweepSpec(o["axis"], o["lo"], o["hi"], o["n"], cfg.params, cfg.topology,
                         cfg.convention, endpoint=o["endpoint"])
        table = run_sweep(spec, o["workers"]) if cfg.command == "sweep" else compare_topologies(spec)
        emit_table(table, out, cfg.format)
    elif cfg.command == "extremum":
        res = find_extremum(o["metric"], o["axis"], (o["lo"], o["hi"]), cfg.params, cfg.topology,
                            cfg.convention, o["kind"], o["resolution"], not o["multimodal"])
        emit_record({"metric": o["metric"], "axis": o["axis"], "kind": res.kind, "arg": res.arg,
                     "value": res.value, "lo": res.bracket[0], "hi": res.bracket[1],
                     "refined_to": res.refined_to}, out, cfg.format)
    elif cfg.command == "oracle":
        from .oracle import integrate_mean_field, oracle_check

        rep = oracle_check(cfg.params, cfg.topology, o["epsilon"], o["tol"], o["dt"])
        if o["trajectory"]:
            integrate_mean_field(cfg.params, cfg.topology, o["epsilon"], o["dt"],
                                 rep.horizon).to_csv(o["trajectory"])
        emit_record({"deviation": rep.deviation, "b_out_deviation": rep.b_out_deviation,
                     "horizon": rep.horizon, "residual": rep.steady.residual,
                     "a1_re": rep.steady.a1.real, "a1_im": rep.steady.a1.imag,
                     "a2_re": rep.steady.a2.real, "a2_im": rep.steady.a2.imag}, out, cfg.format)
    elif cfg.command == "figures":
        from .figures import figures

        out_dir = o["out_dir"] or os.environ.get(OUTPUT_ENV) or "figures"
        for path in figures(out_dir, render=not o["no_render"], base=cfg.params):
            print(path)


def main(argv=None) -> int:
    try:
        run(parse_config(argv))
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
