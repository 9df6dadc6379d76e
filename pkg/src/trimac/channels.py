"""Three-user discrete memoryless channels used throughout the package.

Outputs with several coordinates are carried as a single axis with a fixed
binary encoding, most significant coordinate first: the additive-pair output
(y1, y2) is 2*y1 + y2, the parallel feedback output (y1, y21, y22) is
4*y1 + 2*y21 + y22.  Likewise the per-user input of the parallel feedback
channel is the pair (x_first, x_second) encoded as 2*x_first + x_second.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .probcore import ConditionalPMF, JointPMF, chain
from .rng import stream

__all__ = [
    "DMChannel",
    "build_additive_pair_channel",
    "build_quaternary_channel",
    "build_fb_parallel_channel",
    "quaternary_noise_law",
    "transmit",
    "output_distribution",
    "channel_to_json",
    "channel_from_json",
]

INPUT_NAMES = ("X1", "X2", "X3")


@dataclass(frozen=True)
class DMChannel:
    """Memoryless transition law P(Y | X1, X2, X3) with named input axes."""

    kind: str
    transition: ConditionalPMF
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.transition.given_names != INPUT_NAMES:
            raise ValueError(f"channel inputs must be {INPUT_NAMES}")
        if self.transition.target_names != ("Y",):
            raise ValueError("channel output must be the single axis Y")

    @property
    def input_sizes(self) -> tuple[int, int, int]:
        return tuple(a.size for _, a in self.transition.given_axes)

    @property
    def output_size(self) -> int:
        return self.transition.target_axes[0][1].size


def build_additive_pair_channel(delta: float) -> DMChannel:
    """Binary inputs; clean state only when x3 = x1 xor x2.

    In the clean state the output pair is (x1 + noise, x2 + noise') with two
    independent BSC(delta) noises; otherwise the pair is uniform on {0,1}^2.
    """
    if not 0.0 <= delta <= 0.5:
        raise ValueError("delta must lie in [0, 1/2]")
    table = np.zeros((2, 2, 2, 4))
    for x1 in range(2):
        for x2 in range(2):
            for x3 in range(2):
                for y1 in range(2):
                    for y2 in range(2):
                        if x3 == x1 ^ x2:
                            p1 = delta if y1 != x1 else 1.0 - delta
                            p2 = delta if y2 != x2 else 1.0 - delta
                            table[x1, x2, x3, 2 * y1 + y2] = p1 * p2
                        else:
                            table[x1, x2, x3, 2 * y1 + y2] = 0.25
    cond = ConditionalPMF(list(zip(INPUT_NAMES, (2, 2, 2))), [("Y", 4)], table)
    return DMChannel("additive-pair", cond, {"delta": delta})


def quaternary_noise_law(delta: float) -> np.ndarray:
    """The Z_4 noise law (1/2 - delta, 1/2, delta, 0)."""
    if not 0.0 < delta <= 0.25:
        raise ValueError("delta must lie in (0, 1/4]")
    return np.array([0.5 - delta, 0.5, delta, 0.0])


def build_quaternary_channel(delta: float) -> DMChannel:
    """Binary inputs, Z_4 output: Y = (x1 xor x2) + x3 + N mod 4."""
    noise = quaternary_noise_law(delta)
    table = np.zeros((2, 2, 2, 4))
    for x1 in range(2):
        for x2 in range(2):
            for x3 in range(2):
                for nv in range(4):
                    y = ((x1 ^ x2) + x3 + nv) % 4
                    table[x1, x2, x3, y] += noise[nv]
    cond = ConditionalPMF(list(zip(INPUT_NAMES, (2, 2, 2))), [("Y", 4)], table)
    return DMChannel("quaternary", cond, {"delta": delta})


def build_fb_parallel_channel(delta: float) -> DMChannel:
    """Two parallel components; per-user input is the encoded pair 2*a + b.

    First component: y1 = x11 + x21 + x31 + noise mod 2.  Second component
    is the additive-pair channel on the second coordinates.  The three
    noises are independent BSC(delta) flips; delta = 0 gives the noiseless
    limit, handy for sanity runs.
    """
    if not 0.0 <= delta < 0.5:
        raise ValueError("delta must lie in [0, 1/2)")
    table = np.zeros((4, 4, 4, 8))
    for c1 in range(4):
        x11, x12 = divmod(c1, 2)
        for c2 in range(4):
            x21, x22 = divmod(c2, 2)
            for c3 in range(4):
                x31, x32 = divmod(c3, 2)
                for y1 in range(2):
                    p_first = delta if y1 != x11 ^ x21 ^ x31 else 1.0 - delta
                    for y21 in range(2):
                        for y22 in range(2):
                            if x32 == x12 ^ x22:
                                p1 = delta if y21 != x12 else 1.0 - delta
                                p2 = delta if y22 != x22 else 1.0 - delta
                                p_second = p1 * p2
                            else:
                                p_second = 0.25
                            table[c1, c2, c3, 4 * y1 + 2 * y21 + y22] = p_first * p_second
    cond = ConditionalPMF(list(zip(INPUT_NAMES, (4, 4, 4))), [("Y", 8)], table)
    return DMChannel("fb-parallel", cond, {"delta": delta})


def transmit(channel: DMChannel, blocks, seed: int) -> np.ndarray:
    """Pass the three input blocks through n independent channel uses."""
    x1, x2, x3 = (np.asarray(b, dtype=np.int64) for b in blocks)
    if not (x1.shape == x2.shape == x3.shape) or x1.ndim != 1:
        raise ValueError("blocks must be three equal-length 1-D arrays")
    sizes = channel.input_sizes
    for x, m in zip((x1, x2, x3), sizes):
        if x.size and (x.min() < 0 or x.max() >= m):
            raise ValueError("input symbol out of range")
    cdf = np.cumsum(channel.transition.table, axis=-1)
    rows = cdf[x1, x2, x3]
    u = stream(seed).random(x1.shape[0])
    return (rows < u[:, None]).sum(axis=-1).astype(np.int64)


def output_distribution(channel: DMChannel, input_joint: JointPMF) -> JointPMF:
    """Joint law over (X1, X2, X3, Y) from an input law over (X1, X2, X3)."""
    if set(INPUT_NAMES) - set(input_joint.names):
        raise ValueError(f"input joint must carry axes {INPUT_NAMES}")
    return chain(input_joint, channel.transition)


def channel_to_json(channel: DMChannel) -> dict:
    if channel.kind in ("additive-pair", "quaternary", "fb-parallel"):
        return {"kind": channel.kind, "delta": channel.params["delta"]}
    return {
        "kind": "generic",
        "input_sizes": list(channel.input_sizes),
        "output_size": channel.output_size,
        "table": [float(v) for v in channel.transition.table.ravel()],
    }


def channel_from_json(obj: dict) -> DMChannel:
    kind = obj["kind"]
    if kind == "additive-pair":
        return build_additive_pair_channel(float(obj["delta"]))
    if kind == "quaternary":
        return build_quaternary_channel(float(obj["delta"]))
    if kind == "fb-parallel":
        return build_fb_parallel_channel(float(obj["delta"]))
    if kind == "generic":
        sizes = [int(s) for s in obj["input_sizes"]]
        out = int(obj["output_size"])
        table = np.array(obj["table"], dtype=np.float64).reshape(*sizes, out)
        cond = ConditionalPMF(list(zip(INPUT_NAMES, sizes)), [("Y", out)], table)
        return DMChannel("generic", cond, {})
    raise ValueError(f"unknown channel kind {kind!r}")
