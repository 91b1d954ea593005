import logging
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

logger = logging.getLogger(__name__)

# fixed ids and no timestamp, so the SVG is byte-stable
matplotlib.rcParams["svg.hashsalt"] = "jointmaj"


def clean_ax(ax):
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)


def save_error_curve(path: str, resolutions: Sequence[int], errors: Sequence[Sequence[float]], bounds: Sequence[float]):
    """
    Per-member local-form error against r, with the C/r bound dashed.
    errors[k][i] is the error of member i at resolutions[k].
    """
    fig, ax = plt.subplots(figsize=(6, 4))
    members = len(errors[0]) if errors else 0
    for i in range(members):
        ax.plot(resolutions, [row[i] for row in errors], marker="o", label=f"member {i + 1}")
    ax.plot(resolutions, bounds, linestyle="--", color="#888", label="bound")
    ax.set_xlabel("resolution r")
    ax.set_ylabel("||T(b_i) - rho(b_i)||")
    ax.set_yscale("symlog", linthresh=1e-12)
    ax.legend(frameon=False)
    clean_ax(ax)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info("wrote %s", path)
