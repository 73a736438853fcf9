"""
Regenerate the named scenario documents under analyzer/scenarios/ (idempotent).

Every scenario runs on the 4-agent cycle with a seeded random initial state.
Horizons grow with the cross-layer delay: with tau1 = 0 the slowest mode
decays (or grows) like ln|mu| / tau2, so long delays need long runs.

Only files whose content would change are rewritten.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

_HERE = os.path.dirname(__file__)
sys.path.insert(0, os.path.dirname(_HERE))  # allow `import models`

from models import RunConfig  # noqa: E402

SCENARIO_DIR = Path(_HERE).parent / "scenarios"
SEED = 7

A1 = [[1.0, 1.0], [0.5, 1.0]]
A2 = [[1.0, 2.0], [0.5, 1.0]]
A3 = [[1.0, 2.0], [1.0, 1.0]]

# name -> (pattern, tau1, tau2, horizon, step, description)
_TABLE = {
    "fig4a": (A1, 0.0, 2.0, 150.0, 0.01, "cross-layer delay only, |mu| < 1: consensus"),
    "fig4b": (A1, 0.0, 5.0, 300.0, 0.02, "cross-layer delay only, |mu| < 1: consensus"),
    "fig4c": (A1, 0.0, 10.0, 600.0, 0.02, "cross-layer delay only, |mu| < 1: consensus"),
    "fig5a": (A2, 0.0, 1.0, 50.0, 0.01, "cross-layer delay only, |mu| = 1: perturbed, not destabilized"),
    "fig5b": (A2, 0.0, 2.0, 50.0, 0.01, "cross-layer delay only, |mu| = 1: perturbed, not destabilized"),
    "fig5c": (A2, 0.0, 10.0, 50.0, 0.01, "cross-layer delay only, |mu| = 1: perturbed, not destabilized"),
    "fig6a": (A3, 0.0, 2.0, 150.0, 0.02, "cross-layer delay only, |mu| > 1: divergence"),
    "fig6b": (A3, 0.0, 5.0, 300.0, 0.02, "cross-layer delay only, |mu| > 1: divergence"),
    "fig6c": (A3, 0.0, 10.0, 600.0, 0.02, "cross-layer delay only, |mu| > 1: divergence"),
    "fig7a": (A1, 0.23, 0.23, 60.0, 0.005, "equal delays just below the margin: sustained oscillation"),
    "fig7b": (A1, 0.2, 0.2, 60.0, 0.01, "equal delays inside the margin: consensus"),
    "fig7c": (A1, 0.2, 0.23, 100.0, 0.01, "unequal delays inside the two-delay bound: consensus"),
    "fig7d": (A1, 0.23, 2.0, 100.0, 0.01, "long cross-layer delay: divergence"),
    "fig7e": (A1, 0.23, 10.0, 400.0, 0.02, "very long cross-layer delay: divergence"),
    "fig7f": (A1, 0.5, 0.23, 100.0, 0.01, "intra-layer delay beyond its margin: divergence"),
}


def build_scenario(name: str) -> Dict[str, Any]:
    pattern, tau1, tau2, horizon, step, description = _TABLE[name]
    doc = {
        "name": name,
        "description": description,
        "graph": {"family": "cycle", "n": 4},
        "pattern": pattern,
        "delays": {"tau1": tau1, "tau2": tau2},
        "simulation": {"horizon": horizon, "step": step, "seed": SEED, "history": "constant", "record_stride": 10},
        "output_dir": f"out/{name}",
    }
    RunConfig.model_validate(doc)
    return doc


def render(doc: Dict[str, Any]) -> str:
    return json.dumps(doc, indent=2) + "\n"


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(description="Regenerate shipped scenario documents (idempotent).")
    parser.add_argument("--dry-run", action="store_true", help="Report changes without writing.")
    parser.add_argument("--only", action="append", default=None, help="Limit to one scenario (repeatable).")
    args = parser.parse_args(argv)

    names = args.only or sorted(_TABLE)
    written = 0
    unchanged = 0
    for name in names:
        if name not in _TABLE:
            print(f"unknown scenario: {name}", file=sys.stderr)
            return 1
        path = SCENARIO_DIR / f"{name}.json"
        text = render(build_scenario(name))
        if path.exists() and path.read_text(encoding="utf-8") == text:
            unchanged += 1
            continue
        if args.dry_run:
            print(f"[DRY RUN] would write {path}")
        else:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
        written += 1

    print(f"Done. written={written} unchanged={unchanged}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
