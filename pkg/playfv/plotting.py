"""
Figures from a run directory (needs the optional matplotlib extra).

One PNG per output time with u and w panels; exact Riemann fans and
runs without hysteresis are overlaid when their CSV files exist.
"""

import logging
import re
from pathlib import Path
from typing import List

import numpy as np

logger = logging.getLogger(__name__)

_SNAPSHOT = re.compile(r"snapshot_(t.+)\.csv$")


def _load(path: Path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def plot_run(run_dir: Path, dpi: int = 150) -> List[Path]:
    """
    Render every snapshot in a run directory.

    Returns:
        Paths of the written PNG files

    Raises:
        ImportError: If matplotlib is not installed
        ValueError: If the directory holds no snapshots
    """
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    run_dir = Path(run_dir)
    snapshots = sorted(p for p in run_dir.glob("snapshot_t*.csv"))
    if not snapshots:
        raise ValueError(f"No snapshot files in {run_dir}")

    written = []
    for snap_path in snapshots:
        tag = _SNAPSHOT.search(snap_path.name).group(1)
        data = _load(snap_path)
        fig, (ax_u, ax_w) = plt.subplots(nrows=2, sharex=True, figsize=(10, 6))
        ax_u.plot(data[:, 0], data[:, 1], label="u")
        ax_w.plot(data[:, 0], data[:, 2], label="w")

        exact = run_dir / f"exact_{tag}.csv"
        if exact.exists():
            ref = _load(exact)
            ax_u.plot(ref[:, 0], ref[:, 1], "k--", linewidth=1, label="u exact")
            ax_w.plot(ref[:, 0], ref[:, 2], "k--", linewidth=1, label="w exact")
        for label in ("full", "half"):
            comp = run_dir / f"comparison_{label}_{tag}.csv"
            if comp.exists():
                ref = _load(comp)
                ax_u.plot(ref[:, 0], ref[:, 1], ":", label=f"no hysteresis ({label} flux)")

        ax_u.set_ylabel("u")
        ax_w.set_ylabel("w")
        ax_w.set_xlabel("x")
        ax_u.set_title(f"{run_dir.name}, {tag.replace('t', 't = ', 1)}")
        ax_u.legend(loc="best", fontsize="small")
        ax_w.legend(loc="best", fontsize="small")

        out = run_dir / f"plot_{tag}.png"
        fig.savefig(out, dpi=dpi, bbox_inches="tight")
        plt.close(fig)
        written.append(out)
        logger.info(f"Wrote {out}")
    return written
