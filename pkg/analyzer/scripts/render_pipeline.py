from __future__ import annotations

import argparse
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))

from pipeline import build_analysis_graph  # noqa: E402


def main() -> None:
    parser = argparse.ArgumentParser(description="Write the analysis pipeline as Mermaid text.")
    parser.add_argument("--out", default="analysis_pipeline.mmd")
    args = parser.parse_args()

    out_path = Path(args.out)
    graph = build_analysis_graph().get_graph()
    out_path.write_text(graph.draw_mermaid(with_styles=False), encoding="utf-8")
    print(f"Wrote {out_path}")


if __name__ == "__main__":
    main()
