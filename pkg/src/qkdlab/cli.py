"""Command-line front end: experiment runs, gate validation, result tables.

Exit codes: 0 on success, 1 when a validation suite fails, 2 for
configuration/usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__, analysis, gates, protocols
from .core import ConfigError, RandomSource, SimulationError

SEED_ENV = "QKDLAB_SEED"
DEFAULT_SEED = 7
DEFAULT_TRIALS = 25
DEFAULT_RAW_BITS = 200

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2

# Row layout of the standard experiment grid: each protocol runs every
# scenario without an eavesdropper plus the eavesdropper model each scenario
# admits (standard intercept-resend in control, high-dimensional otherwise).
GRID_ROWS = (
    ("control", protocols.Scenario.CONTROL, protocols.EveModel.NONE),
    ("scenario1", protocols.Scenario.CONVERSION, protocols.EveModel.NONE),
    ("scenario2", protocols.Scenario.RELABEL, protocols.EveModel.NONE),
    ("control_eve", protocols.Scenario.CONTROL, protocols.EveModel.STANDARD),
    ("scenario1_eve", protocols.Scenario.CONVERSION, protocols.EveModel.HD),
    ("scenario2_eve", protocols.Scenario.RELABEL, protocols.EveModel.HD),
)


@dataclass(frozen=True)
class RunConfig:
    protocol: str
    scenario: protocols.Scenario
    eve: protocols.EveModel
    trials: int
    raw_bits: int
    seed: int
    fmt: str

    def validate(self) -> None:
        if self.protocol not in protocols.PROTOCOLS:
            raise ConfigError(f"unknown protocol {self.protocol!r}")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        protocols.validate_pairing(self.scenario, self.eve)


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from exc


def _round(value) -> float:
    return round(float(value), 4)


def _fraction_cell(value) -> float | None:
    return None if value is None else _round(value)


def build_document(config: RunConfig, results) -> dict:
    stats = analysis.aggregate(results)
    trials = [
        {
            "trial": r.trial,
            "key_size": r.sifted_len,
            "sift_fraction": _round(r.sift_fraction),
            "qber": _round(r.qber),
            "alice_knowledge": _fraction_cell(r.knowledge_alice),
            "bob_knowledge": _fraction_cell(r.knowledge_bob),
            "matches": r.matches_control,
        }
        for r in results
    ]
    return {
        "artifact_version": __version__,
        "catalog_fingerprint": gates.catalog_fingerprint(),
        "config": {
            "protocol": config.protocol,
            "scenario": config.scenario.value,
            "eve": config.eve.value,
            "trials": config.trials,
            "raw_bits": config.raw_bits,
            "seed": config.seed,
            "format": config.fmt,
        },
        "trials": trials,
        "aggregate": {
            "trials": stats.trials,
            "key_size": _round(stats.mean_sifted_len),
            "sift_fraction": _round(stats.mean_sift_fraction),
            "qber": _round(stats.mean_qber),
            "alice_knowledge": _fraction_cell(stats.mean_knowledge_alice),
            "bob_knowledge": _fraction_cell(stats.mean_knowledge_bob),
            "matches": _round(stats.match_rate),
        },
    }


def _percent(value) -> str:
    return "" if value is None else f"{float(value) * 100:.2f}%"


def render_table(doc: dict) -> str:
    cfg = doc["config"]
    agg = doc["aggregate"]
    lines = [
        " ".join(f"{k}={cfg[k]}" for k in ("protocol", "scenario", "eve", "trials", "raw_bits", "seed")),
        f"catalog={doc['catalog_fingerprint'][:16]} version={doc['artifact_version']}",
        "",
        f"{'':12}{'Key Size':>16}{'QBER':>10}{'Alice Know.':>14}{'Bob Know.':>12}{'Matches':>10}",
    ]
    key_size = f"{agg['key_size']:.2f} ({_percent(agg['sift_fraction'])})"
    lines.append(
        f"{'mean':12}{key_size:>16}{_percent(agg['qber']):>10}"
        f"{_percent(agg['alice_knowledge']):>14}{_percent(agg['bob_knowledge']):>12}"
        f"{_percent(agg['matches']):>10}"
    )
    return "\n".join(lines) + "\n"


_CSV_FIELDS = (
    "trial",
    "key_size",
    "sift_fraction",
    "qber",
    "alice_knowledge",
    "bob_knowledge",
    "matches",
)


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return int(value)
    return value


def render_csv(doc: dict) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(_CSV_FIELDS)
    for row in doc["trials"]:
        writer.writerow([_csv_cell(row[field]) for field in _CSV_FIELDS])
    agg = dict(doc["aggregate"])
    agg["trial"] = "mean"
    writer.writerow([_csv_cell(agg[field]) for field in _CSV_FIELDS])
    return buffer.getvalue()


def render_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


_RENDERERS = {"table": render_table, "csv": render_csv, "json": render_json}


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def cmd_run(args: argparse.Namespace) -> int:
    config = RunConfig(
        protocol=args.protocol,
        scenario=protocols.Scenario(args.scenario),
        eve=protocols.EveModel(args.eve),
        trials=args.trials,
        raw_bits=args.raw_bits,
        seed=args.seed if args.seed is not None else _default_seed(),
        fmt=args.format,
    )
    config.validate()
    results = protocols.run_experiment(
        protocols.PROTOCOLS[config.protocol],
        config.scenario,
        config.eve,
        config.trials,
        config.raw_bits,
        config.seed,
    )
    doc = build_document(config, results)
    _emit(_RENDERERS[config.fmt](doc), args.out)
    return EXIT_OK


def cmd_validate_gates(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    rng = RandomSource(seed).stream(0, "gate-suite")
    checks = gates.validate_catalog(rng)
    failures = 0
    lines = []
    for check in checks:
        status = "PASS" if check.passed else "FAIL"
        failures += not check.passed
        detail = f"  ({check.detail})" if check.detail else ""
        lines.append(f"{status} {check.name}{detail}")
    lines.append(f"{len(checks) - failures}/{len(checks)} checks passed")
    _emit("\n".join(lines) + "\n", args.out)
    if args.dump is not None:
        Path(args.dump).write_text(
            json.dumps(gates.catalog_dump(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    return EXIT_OK if failures == 0 else EXIT_VALIDATION


_TABLE_FIELDS = (
    "scenario",
    "key_size",
    "sift_fraction",
    "qber",
    "alice_knowledge",
    "bob_knowledge",
    "matches",
)


def cmd_reproduce_paper(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    qber_rows = []
    written = []
    for name, spec in protocols.PROTOCOLS.items():
        rows = []
        for label, scenario, eve in GRID_ROWS:
            results = protocols.run_experiment(
                spec, scenario, eve, DEFAULT_TRIALS, DEFAULT_RAW_BITS, seed
            )
            stats = analysis.aggregate(results)
            rows.append(
                {
                    "scenario": label,
                    "key_size": _round(stats.mean_sifted_len),
                    "sift_fraction": _round(stats.mean_sift_fraction),
                    "qber": _round(stats.mean_qber),
                    "alice_knowledge": _fraction_cell(stats.mean_knowledge_alice),
                    "bob_knowledge": _fraction_cell(stats.mean_knowledge_bob),
                    "matches": _round(stats.match_rate),
                }
            )
            if eve is not protocols.EveModel.NONE:
                qber_rows.append((name, label, _round(stats.mean_qber)))
        table_path = out_dir / f"results_{name}.csv"
        with table_path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\r\n")
            writer.writerow(_TABLE_FIELDS)
            for row in rows:
                writer.writerow([_csv_cell(row[field]) for field in _TABLE_FIELDS])
        written.append(table_path)
        sys.stdout.write(f"wrote {table_path}\n")
    figure_path = out_dir / "qber_with_eve.csv"
    with figure_path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\r\n")
        writer.writerow(("protocol", "scenario", "qber"))
        writer.writerows(qber_rows)
    written.append(figure_path)
    sys.stdout.write(f"wrote {figure_path}\n")
    return EXIT_OK


def cmd_hypothesis_table(args: argparse.Namespace) -> int:
    lines = [f"{'protocol':10}{'d_ab':>6}{'bases':>7}{'d_e':>5}"]
    for name, spec in protocols.PROTOCOLS.items():
        lines.append(f"{name:10}{spec.d_ab:>6}{spec.basis_count:>7}{spec.d_e:>5}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qkdlab",
        description="Qudit QKD laboratory: protocol runs, gate validation, result tables.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment configuration")
    run.add_argument("--protocol", required=True, choices=sorted(protocols.PROTOCOLS))
    run.add_argument("--scenario", default="control", choices=[s.value for s in protocols.Scenario])
    run.add_argument("--eve", default="none", choices=[e.value for e in protocols.EveModel])
    run.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    run.add_argument("--raw-bits", type=int, default=DEFAULT_RAW_BITS)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--format", default="table", choices=sorted(_RENDERERS))
    run.add_argument("--out", default=None, help="write the document to this path")
    run.set_defaults(func=cmd_run)

    validate = sub.add_parser("validate-gates", help="run the gate property suite")
    validate.add_argument("--seed", type=int, default=None)
    validate.add_argument("--dump", default=None, help="also write the catalog as JSON")
    validate.add_argument("--out", default=None)
    validate.set_defaults(func=cmd_validate_gates)

    reproduce = sub.add_parser(
        "reproduce-paper",
        help="run the full protocol/scenario/eavesdropper grid and write CSV tables",
    )
    reproduce.add_argument("--seed", type=int, default=None)
    reproduce.add_argument("--out-dir", default="results")
    reproduce.set_defaults(func=cmd_reproduce_paper)

    hypothesis = sub.add_parser(
        "hypothesis-table",
        help="print the eavesdropper dimension rule d_e = d_ab * bases per protocol",
    )
    hypothesis.add_argument("--out", default=None)
    hypothesis.set_defaults(func=cmd_hypothesis_table)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except SimulationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
