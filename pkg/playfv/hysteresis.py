"""
Play hysteresis operator.

Scalar Play operator with its rate-independent extension to jump inputs,
plus a discrete verifier for the weak hysteresis relation
(u - w) dw >= a |dw| on sampled trajectories.

Usage:
    from playfv.hysteresis import PlayConfig, play_project, play_trajectory

    cfg = PlayConfig(a=1.0)
    w = play_trajectory([0.0, 2.0, 0.0], w0=0.0, cfg=cfg)   # [0.0, 1.0, 1.0]
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence

logger = logging.getLogger(__name__)

# Absolute tolerance for membership in the strip |u - w| <= a
STRIP_TOLERANCE = 1e-12


@dataclass(frozen=True)
class PlayConfig:
    """Half-width of the hysteresis strip."""
    a: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"Hysteresis half-width must be positive, got a={self.a}")

    def to_dict(self) -> Dict[str, Any]:
        return {"a": self.a}


@dataclass(frozen=True)
class PlayState:
    """A pair (u, w) of input and output values."""
    u: float
    w: float

    def in_strip(self, a: float, tol: float = STRIP_TOLERANCE) -> bool:
        """Check |u - w| <= a up to tol."""
        return abs(self.u - self.w) <= a + tol

    def to_dict(self) -> Dict[str, float]:
        return {"u": self.u, "w": self.w}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PlayState":
        return cls(u=float(data["u"]), w=float(data["w"]))


def play_project(w_prev: float, u_next: float, cfg: PlayConfig) -> float:
    """
    Output of the Play operator after the input moves to u_next.

    The monotone fill of any jump ends with w clamped into
    [u_next - a, u_next + a], so the update is the median of
    (w_prev, u_next - a, u_next + a).

    Args:
        w_prev: Output before the input change (may lie outside the strip)
        u_next: New input value
        cfg: Play configuration

    Returns:
        New output value
    """
    return min(max(w_prev, u_next - cfg.a), u_next + cfg.a)


def play_trajectory(
    u_samples: Sequence[float],
    w0: float,
    cfg: PlayConfig,
) -> List[float]:
    """
    Run the Play operator over a sampled input.

    An incompatible start (|u_0 - w0| > a) is clamped onto the strip with a
    warning rather than rejected.

    Args:
        u_samples: Input values in time order
        w0: Initial output
        cfg: Play configuration

    Returns:
        Output values, one per input sample
    """
    if len(u_samples) == 0:
        return []

    u_first = float(u_samples[0])
    if abs(u_first - w0) > cfg.a + STRIP_TOLERANCE:
        logger.warning(
            f"Initial state (u={u_first}, w={w0}) outside strip a={cfg.a}; clamping w"
        )

    w = play_project(float(w0), u_first, cfg)
    outputs = [w]
    for u in u_samples[1:]:
        w = play_project(w, float(u), cfg)
        outputs.append(w)
    return outputs


def verify_weak_play(
    u_samples: Sequence[float],
    w_samples: Sequence[float],
    cfg: PlayConfig,
    tol: float = STRIP_TOLERANCE,
) -> bool:
    """
    Check a sampled pair of trajectories against the weak Play relation.

    Two conditions must hold: every pair lies in the strip, and
    sum_j (u_{j+1} - w_{j+1})(w_{j+1} - w_j) >= a * sum_j |w_{j+1} - w_j|.
    The second is the right-continuous discrete form of the variational
    inequality; it is exact for piecewise-monotone sampling.

    Raises:
        ValueError: If lengths differ or fewer than two samples are given
    """
    if len(u_samples) != len(w_samples):
        raise ValueError(
            f"Length mismatch: {len(u_samples)} inputs vs {len(w_samples)} outputs"
        )
    if len(u_samples) < 2:
        raise ValueError("Need at least two samples to verify a trajectory")

    for j, (u, w) in enumerate(zip(u_samples, w_samples)):
        if abs(u - w) > cfg.a + tol:
            logger.debug(f"Sample {j} leaves the strip: u={u}, w={w}")
            return False

    work = 0.0
    variation = 0.0
    for j in range(len(u_samples) - 1):
        dw = w_samples[j + 1] - w_samples[j]
        work += (u_samples[j + 1] - w_samples[j + 1]) * dw
        variation += abs(dw)

    return work >= cfg.a * variation - tol
