"""Shared fixtures.

The expensive piece is one full simulate/analyze/verify pass of the
default profile (10 rounds, seed 42), exercised through the CLI and
shared session-wide; wall times for each stage are recorded so the
acceptance tests can check runtime budgets without re-running it.
"""

from __future__ import annotations

import json
import pathlib
import time
from dataclasses import dataclass

import pytest
from click.testing import CliRunner

from crosstalk.cli import main as cli_main
from crosstalk.pipeline import VerifyReport, verify_run
from crosstalk.profiles import config_from_dict

FIXTURE_DIR = pathlib.Path(__file__).parent / "fixtures"


def load_fixture(name: str):
    with open(FIXTURE_DIR / name) as fh:
        return json.load(fh)


@dataclass(frozen=True)
class PaperRun:
    sim_dir: pathlib.Path
    analysis_dir: pathlib.Path
    truth: dict
    config: object
    report: VerifyReport
    sim_seconds: float
    analyze_seconds: float
    verify_seconds: float

    @property
    def total_seconds(self) -> float:
        return self.sim_seconds + self.analyze_seconds + self.verify_seconds

    def round_graph(self, round_id: int, phase: str) -> dict:
        path = self.analysis_dir / "rounds" / f"round_{round_id:02d}" / f"graph_{phase}.json"
        with open(path) as fh:
            return json.load(fh)

    @property
    def summary(self) -> dict:
        with open(self.analysis_dir / "summary.json") as fh:
            return json.load(fh)


@pytest.fixture(scope="session")
def paper_run(tmp_path_factory) -> PaperRun:
    base = tmp_path_factory.mktemp("paper_run")
    sim_dir = base / "sim"
    analysis_dir = base / "analysis"
    runner = CliRunner()

    t0 = time.perf_counter()
    res = runner.invoke(
        cli_main,
        ["simulate", "--profile", "paper", "--rounds", "10", "--seed", "42",
         "--out", str(sim_dir)],
        catch_exceptions=False,
    )
    t_sim = time.perf_counter() - t0
    assert res.exit_code == 0, res.output

    t0 = time.perf_counter()
    res = runner.invoke(
        cli_main,
        ["analyze", "--input", str(sim_dir), "--out", str(analysis_dir)],
        catch_exceptions=False,
    )
    t_analyze = time.perf_counter() - t0
    assert res.exit_code == 0, res.output

    with open(sim_dir / "ground_truth.json") as fh:
        truth = json.load(fh)
    config = config_from_dict(truth)

    t0 = time.perf_counter()
    report = verify_run(analysis_dir, truth)
    t_verify = time.perf_counter() - t0

    return PaperRun(
        sim_dir=sim_dir,
        analysis_dir=analysis_dir,
        truth=truth,
        config=config,
        report=report,
        sim_seconds=t_sim,
        analyze_seconds=t_analyze,
        verify_seconds=t_verify,
    )
