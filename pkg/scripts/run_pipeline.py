"""Run every CLI stage in order on one config.

    python scripts/run_pipeline.py --config scripts/synthetic_500.cfg
"""

import argparse
import sys

from icahoc.cli import main as cli

STAGES = [
    ["ingest"], ["whiten"], ["ica"], ["hoc"], ["top-words"],
    ["contributors", "--pair", "0,1"], ["freq-corr"], ["hoc-hist"], ["intrusion"],
    ["mst"], ["cluster"], ["subtree"], ["eval-sim"], ["reduce-bench"],
    ["judge-build"], ["judge-aggregate"], ["export-heatmap-data"],
    ["export-scatter-data", "--axes", "0,1"],
]


def run(config, extra=()):
    for stage in STAGES:
        code = cli([stage[0], "--config", config, *stage[1:], *extra])
        if code:
            print(f"stage {stage[0]} failed with exit code {code}", file=sys.stderr)
            return code
    return 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", required=True)
    args, rest = ap.parse_known_args()
    sys.exit(run(args.config, rest))
