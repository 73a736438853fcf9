from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from errors import AnalyzerError
from models import RunConfig, load_run_config
from pipeline import run_pipeline
from reports import write_analysis, write_simulation, write_spectrum
from settings import AnalyzerSettings, configure_logging, get_settings
from sweep import run_sweep

SCENARIO_DIR = Path(__file__).resolve().parent / "scenarios"

# descriptive names for the shipped scenarios
SCENARIO_ALIASES = {
    "cross_inside_t2": "fig4a",
    "cross_inside_t5": "fig4b",
    "cross_inside_t10": "fig4c",
    "cross_unit_t1": "fig5a",
    "cross_unit_t2": "fig5b",
    "cross_unit_t10": "fig5c",
    "cross_outside_t2": "fig6a",
    "cross_outside_t5": "fig6b",
    "cross_outside_t10": "fig6c",
    "equal_near_margin": "fig7a",
    "equal_inside": "fig7b",
    "unequal_inside": "fig7c",
    "long_cross_t2": "fig7d",
    "long_cross_t10": "fig7e",
    "long_intra": "fig7f",
}

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNSTABLE = 2
EXIT_NO_GUARANTEE = 3

VERDICT_EXIT = {
    "ConsensusGuaranteed": EXIT_OK,
    "UnstableGuaranteed": EXIT_UNSTABLE,
    "MarginalBoundary": EXIT_NO_GUARANTEE,
    "OutsideTheory": EXIT_NO_GUARANTEE,
}


def resolve_config_path(raw: str) -> Path:
    """A file path, or the bare name of a shipped scenario (fig7a or its alias equal_near_margin)."""
    path = Path(raw)
    if path.exists():
        return path
    named = SCENARIO_DIR / f"{SCENARIO_ALIASES.get(raw, raw)}.json"
    return named if named.exists() else path


def _out_dir(args: argparse.Namespace, cfg: RunConfig) -> Path:
    return Path(args.out) if args.out else Path(cfg.output_dir)


def cmd_analyze(args: argparse.Namespace, cfg: RunConfig, settings: AnalyzerSettings) -> int:
    out = _out_dir(args, cfg)
    state = run_pipeline(
        cfg,
        settings,
        oracle=args.oracle or cfg.oracle,
        sim=args.sim or cfg.simulate,
        dump_scans=args.oracle,
        seed=args.seed,
    )
    path = write_analysis(out, state)
    report = state.report
    tau_max = f"{report.tau_max:.7g}" if report.tau_max is not None else "n/a"
    line = f"analyze: {report.verdict} ({report.justification}) tau_max={tau_max}"
    if state.oracle_verdict:
        line += f" oracle={state.oracle_verdict}"
    print(f"{line} -> {path}")
    return VERDICT_EXIT[report.verdict]


def cmd_simulate(args: argparse.Namespace, cfg: RunConfig, settings: AnalyzerSettings) -> int:
    out = _out_dir(args, cfg)
    state = run_pipeline(cfg, settings, oracle=args.oracle, sim=True, seed=args.seed, theory="optional")
    path = write_simulation(out, state)
    summary = state.sim_summary
    print(
        f"simulate: {summary['classification']} final_disagreement={summary['final_disagreement']:.3g} "
        f"drift={summary['conservation_drift']:.3g} -> {path}"
    )
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, cfg: RunConfig, settings: AnalyzerSettings) -> int:
    out = _out_dir(args, cfg)
    path = out / "sweep.csv"
    rows = run_sweep(
        cfg,
        settings,
        path,
        oracle=args.oracle or cfg.oracle,
        sim=args.sim or cfg.simulate,
        seed=args.seed,
    )
    consensus = sum(1 for row in rows if row["theory"] == "ConsensusGuaranteed")
    print(f"sweep: {len(rows)} points, {consensus} ConsensusGuaranteed -> {path}")
    return EXIT_OK


def cmd_spectrum(args: argparse.Namespace, cfg: RunConfig, settings: AnalyzerSettings) -> int:
    out = _out_dir(args, cfg)
    state = run_pipeline(cfg, settings, theory="off")
    path = write_spectrum(out, state)
    s = state.pattern_spectrum
    print(
        f"spectrum: lambda_max={state.laplacian.lambda_max:.7g} max|mu|={s.mu_max_abs:.7g} "
        f"zeta_max={s.zeta_max:.7g} -> {path}"
    )
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "spectrum": cmd_spectrum,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="analyzer",
        description="Delay margins, root oracle and simulation for delayed multilayer consensus networks.",
        epilog="Exit codes: 0 ok/ConsensusGuaranteed, 1 error, 2 UnstableGuaranteed, 3 MarginalBoundary/OutsideTheory.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="Run document (JSON) or shipped scenario name.")
    parser.add_argument("--out", default=None, help="Output directory (overrides output_dir).")
    parser.add_argument("--oracle", action="store_true", help="Cross-check with the characteristic-root oracle.")
    parser.add_argument("--sim", action="store_true", help="Also simulate (analyze, sweep).")
    parser.add_argument("--seed", type=int, default=None, help="Seed for random initial states.")
    parser.add_argument("--log-level", default=None, help="Overrides ANALYZER_LOG_LEVEL.")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        cfg = load_run_config(resolve_config_path(args.config))
        settings = cfg.settings(get_settings())
        if args.command in ("analyze", "simulate"):
            cfg.delay_pair()
        return COMMANDS[args.command](args, cfg, settings)
    except AnalyzerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
