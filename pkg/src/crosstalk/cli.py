"""Command-line surface: simulate, analyze, verify.

Exit codes are fixed so CI can tell failure classes apart: 2 bad
flags, 3 I/O failure, 4 parse failure, 5 insufficient data, 6 missing
ground truth. The default output directory comes from CROSSTALK_OUT
when --out is not given.
"""

from __future__ import annotations

import dataclasses
import json
import os
import sys
from pathlib import Path

import click

from . import __version__
from .errors import (
    CrosstalkError,
    InfeasibleImpact,
    InvalidConfig,
    InvalidSeries,
    MalformedRow,
    MissingSeries,
    NonUniformTimestep,
    PhaseAbsent,
    UnknownMetricKind,
)
from .ingest import parse_csv, write_csv
from .pipeline import (
    DEFAULT_ALPHA,
    DEFAULT_MAX_LAG,
    analyze_rounds,
    config_digest,
    verify_run,
    write_analysis,
    write_manifest,
)
from .profiles import (
    config_to_dict,
    default_paper_profile,
    dump_ground_truth,
    load_profile,
)
from .simulator import simulate as run_simulation

EXIT_BAD_FLAGS = 2
EXIT_IO = 3
EXIT_PARSE = 4
EXIT_TOO_FEW_ROUNDS = 5
EXIT_NO_GROUND_TRUTH = 6

_PARSE_ERRORS = (
    MalformedRow,
    UnknownMetricKind,
    NonUniformTimestep,
    MissingSeries,
    InvalidSeries,
    PhaseAbsent,
)


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _resolve_out(out: str | None) -> Path:
    if out:
        return Path(out)
    env = os.environ.get("CROSSTALK_OUT")
    if env:
        return Path(env)
    raise click.UsageError("--out is required (or set CROSSTALK_OUT)")


@click.group()
@click.version_option(version=__version__)
def main() -> None:
    """Noisy-neighbor contention analysis and simulation."""


@main.command("simulate")
@click.option("--rounds", type=int, default=None, help="Rounds to generate.")
@click.option("--seed", type=int, default=None, help="Master RNG seed.")
@click.option(
    "--profile",
    default="paper",
    show_default=True,
    help="'paper' or 'custom:<config.json>'.",
)
@click.option("--out", default=None, help="Output directory.")
def cmd_simulate(rounds: int | None, seed: int | None, profile: str, out: str | None) -> None:
    """Generate synthetic rounds with planted ground truth."""
    out_dir = _resolve_out(out)
    if rounds is not None and rounds < 1:
        raise click.UsageError("--rounds must be >= 1")

    if profile == "paper":
        config = default_paper_profile(
            rounds=rounds if rounds is not None else 10,
            seed=seed if seed is not None else 42,
        )
    elif profile.startswith("custom:"):
        profile_path = Path(profile[len("custom:"):])
        try:
            config = load_profile(profile_path)
        except OSError as exc:
            _fail(EXIT_IO, f"cannot read profile: {exc}")
        except InvalidConfig as exc:
            raise click.UsageError(f"bad profile file: {exc}") from exc
        overrides = {}
        if rounds is not None:
            overrides["rounds"] = rounds
        if seed is not None:
            overrides["seed"] = seed
        if overrides:
            config = dataclasses.replace(config, **overrides)
    else:
        raise click.UsageError(
            f"--profile must be 'paper' or 'custom:<file>', got {profile!r}"
        )

    try:
        result = run_simulation(config)
    except (InvalidConfig, InfeasibleImpact) as exc:
        raise click.UsageError(str(exc)) from exc

    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for round_ in result.rounds:
            path = out_dir / f"round_{round_.round_id:02d}.csv"
            write_csv(round_, path)
            written.append(path)
        truth_path = out_dir / "ground_truth.json"
        truth_doc = dump_ground_truth(result.truth, config)
        truth_path.write_text(
            json.dumps(truth_doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        written.append(truth_path)
        write_manifest(
            out_dir,
            command="simulate",
            config_hash=config_digest(config_to_dict(config)),
            seed=config.seed,
            inputs=[],
            outputs=[str(p.relative_to(out_dir)) for p in written],
        )
    except OSError as exc:
        _fail(EXIT_IO, f"cannot write outputs: {exc}")

    click.echo(f"wrote {len(result.rounds)} rounds to {out_dir}")


@main.command("analyze")
@click.option(
    "--input",
    "inputs",
    multiple=True,
    required=True,
    help="Round CSV file or a directory of them; repeatable.",
)
@click.option("--alpha", type=float, default=DEFAULT_ALPHA, show_default=True,
              help="Significance level for causal links.")
@click.option("--adf-alpha", type=click.Choice(["0.01", "0.05", "0.1"]),
              default="0.05", show_default=True,
              help="Stationarity screening level (fixed table levels).")
@click.option("--max-lag", type=int, default=DEFAULT_MAX_LAG, show_default=True)
@click.option("--trim", type=int, default=0, show_default=True,
              help="Leading samples dropped from each phase window.")
@click.option("--workers", type=int, default=None,
              help="Concurrent round analyses (default: one per round, capped by CPUs).")
@click.option("--out", default=None, help="Output directory.")
def cmd_analyze(
    inputs: tuple[str, ...],
    alpha: float,
    adf_alpha: str,
    max_lag: int,
    trim: int,
    workers: int | None,
    out: str | None,
) -> None:
    """Run the full analysis over simulated or ingested rounds."""
    out_dir = _resolve_out(out)
    if not 0.0 < alpha < 1.0:
        raise click.UsageError(f"--alpha must be in (0, 1), got {alpha}")
    if alpha > 0.2:
        click.echo(
            f"warning: alpha={alpha} is far looser than any conventional level",
            err=True,
        )
    if max_lag < 1:
        raise click.UsageError("--max-lag must be >= 1")

    files: list[Path] = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            files.extend(sorted(p.glob("round_*.csv")) or sorted(p.glob("*.csv")))
        elif p.exists():
            files.append(p)
        else:
            _fail(EXIT_IO, f"input not found: {p}")
    if not files:
        _fail(EXIT_TOO_FEW_ROUNDS, "no round files found in the given inputs")

    rounds = []
    for i, path in enumerate(files, start=1):
        try:
            rounds.append(parse_csv(path, round_id=i))
        except _PARSE_ERRORS as exc:
            _fail(EXIT_PARSE, f"{path}: {exc}")
        except OSError as exc:
            _fail(EXIT_IO, f"cannot read {path}: {exc}")
    if not rounds:
        _fail(EXIT_TOO_FEW_ROUNDS, "no valid rounds parsed")

    try:
        analysis = analyze_rounds(
            rounds,
            alpha=alpha,
            max_lag=max_lag,
            trim=trim,
            adf_alpha=float(adf_alpha),
            max_workers=workers,
        )
    except _PARSE_ERRORS as exc:
        _fail(EXIT_PARSE, str(exc))
    except CrosstalkError as exc:
        _fail(EXIT_TOO_FEW_ROUNDS, str(exc))

    if analysis.summary["insufficient_rounds"]:
        click.echo(
            "warning: single round only; cross-round statistics (CV, replication) "
            "are flagged insufficient",
            err=True,
        )

    try:
        write_analysis(analysis, rounds, out_dir, inputs=[str(f) for f in files])
    except OSError as exc:
        _fail(EXIT_IO, f"cannot write outputs: {exc}")

    click.echo(f"analyzed {len(rounds)} rounds into {out_dir}")


@main.command("verify")
@click.option(
    "--analysis",
    "analysis_dir",
    required=True,
    help="Directory produced by analyze.",
)
@click.option(
    "--truth",
    "truth_path",
    default=None,
    help="ground_truth.json from simulate (default: next to the analysis inputs).",
)
@click.option("--tpr-min", type=float, default=0.90, show_default=True)
@click.option("--fpr-max", type=float, default=0.10, show_default=True)
def cmd_verify(
    analysis_dir: str,
    truth_path: str | None,
    tpr_min: float,
    fpr_max: float,
) -> None:
    """Score recovered links against the planted ground truth."""
    analysis = Path(analysis_dir)
    if truth_path:
        candidates = [Path(truth_path)]
    else:
        candidates = [analysis / "ground_truth.json", analysis.parent / "ground_truth.json"]
        manifest = analysis / "manifest.json"
        if manifest.exists():
            try:
                inputs = json.loads(manifest.read_text(encoding="utf-8")).get("inputs", [])
            except (OSError, json.JSONDecodeError):
                inputs = []
            candidates.extend(Path(i).parent / "ground_truth.json" for i in inputs[:1])
    truth_file = next((c for c in candidates if c.exists()), None)
    if truth_file is None:
        _fail(
            EXIT_NO_GROUND_TRUTH,
            f"ground truth not found (looked at: {', '.join(map(str, candidates))})",
        )
    try:
        truth = json.loads(truth_file.read_text(encoding="utf-8"))
    except OSError as exc:
        _fail(EXIT_IO, f"cannot read {truth_file}: {exc}")
    except json.JSONDecodeError as exc:
        _fail(EXIT_PARSE, f"{truth_file}: {exc}")

    try:
        report = verify_run(analysis, truth, tpr_min=tpr_min, fpr_max=fpr_max)
    except FileNotFoundError as exc:
        _fail(EXIT_IO, str(exc))
    except (KeyError, json.JSONDecodeError) as exc:
        _fail(EXIT_PARSE, f"analysis tree is malformed: {exc}")

    for line in report.lines():
        click.echo(line)
    sys.exit(0 if report.passed else 1)


if __name__ == "__main__":
    main()
