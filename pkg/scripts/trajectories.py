"""Project H-row trajectories of every algorithm onto shared principal components.

    python scripts/trajectories.py --iters 2000 --snapshot-every 50 --out-dir traj_out
"""

import sys

from nnmfgame.cli import main

if __name__ == "__main__":
    sys.exit(main(["traj"] + sys.argv[1:]))
