"""Channel law tests, including the noise-entropy identity used by the
region evaluators: H(N) = 1 + h_b(2 delta)/2 for the quaternary noise."""

import numpy as np
import pytest
import scipy.stats

from trimac.channels import (
    build_additive_pair_channel,
    build_fb_parallel_channel,
    build_quaternary_channel,
    channel_from_json,
    channel_to_json,
    output_distribution,
    quaternary_noise_law,
    transmit,
)
from trimac.probcore import JointPMF, binary_entropy, entropy, mutual_information


def test_additive_pair_states():
    delta = 0.1
    ch = build_additive_pair_channel(delta)
    t = ch.transition.table
    # clean state x3 = x1 xor x2: independent BSC pair
    assert t[1, 0, 1, 2 * 1 + 0] == pytest.approx((1 - delta) ** 2)
    assert t[1, 0, 1, 2 * 0 + 1] == pytest.approx(delta**2)
    # corrupted state: uniform on four outputs
    assert np.allclose(t[1, 0, 0], 0.25)


def test_quaternary_noise_entropy_identity():
    for delta in np.linspace(0.01, 0.25, 25):
        law = quaternary_noise_law(delta)
        h = scipy.stats.entropy(law[law > 0], base=2)
        assert h == pytest.approx(1 + 0.5 * binary_entropy(2 * delta), abs=1e-12)


def test_quaternary_structured_input_hits_noise_bound():
    delta = 0.17
    ch = build_quaternary_channel(delta)
    probs = np.zeros((2, 2, 2))
    for x1 in range(2):
        for x2 in range(2):
            probs[x1, x2, x1 ^ x2] = 0.25
    joint = JointPMF([("X1", 2), ("X2", 2), ("X3", 2)], probs)
    out = output_distribution(ch, joint)
    want = 2 - (1 + 0.5 * binary_entropy(2 * delta))
    got = mutual_information(out, ("X1", "X2", "X3"), "Y")
    assert got == pytest.approx(want, abs=1e-12)
    # output itself is uniform in that case
    assert np.allclose(out.marginal_array("Y"), 0.25, atol=1e-12)


def test_quaternary_rejects_out_of_range_delta():
    with pytest.raises(ValueError):
        build_quaternary_channel(0.3)
    with pytest.raises(ValueError):
        build_quaternary_channel(0.0)


def test_fb_parallel_component_laws():
    delta = 0.2
    ch = build_fb_parallel_channel(delta)
    t = ch.transition.table
    # inputs: user pairs (x11,x12)=(1,0) -> 2, (x21,x22)=(0,1) -> 1, (x31,x32)=(1,1) -> 3
    row = t[2, 1, 3]
    # first coordinate: x11^x21^x31 = 0, so y1=1 with prob delta
    p_y1 = sum(row[4 * 1 + 2 * a + b] for a in range(2) for b in range(2))
    assert p_y1 == pytest.approx(delta)
    # second component state: x32=1 == x12^x22=1, clean pair around (0, 1)
    p_clean = row[4 * 0 + 2 * 0 + 1] + row[4 * 1 + 2 * 0 + 1]
    assert p_clean == pytest.approx((1 - delta) ** 2)


def test_fb_parallel_corrupted_second_component():
    delta = 0.2
    ch = build_fb_parallel_channel(delta)
    row = ch.transition.table[2, 1, 2]  # x32=0 != x12^x22=1
    pair = np.zeros((2, 2))
    for y1 in range(2):
        for a in range(2):
            for b in range(2):
                pair[a, b] += row[4 * y1 + 2 * a + b]
    assert np.allclose(pair, 0.25)


def test_transmit_frequencies_and_determinism():
    ch = build_quaternary_channel(0.25)
    n = 60_000
    x1 = np.zeros(n, dtype=int)
    x2 = np.ones(n, dtype=int)
    x3 = np.zeros(n, dtype=int)
    y = transmit(ch, (x1, x2, x3), seed=4)
    emp = np.bincount(y, minlength=4) / n
    want = ch.transition.table[0, 1, 0]
    stat = n * ((emp[want > 0] - want[want > 0]) ** 2 / want[want > 0]).sum()
    assert stat < scipy.stats.chi2.ppf(0.9999, df=(want > 0).sum() - 1)
    assert np.array_equal(y, transmit(ch, (x1, x2, x3), seed=4))
    assert not np.array_equal(y, transmit(ch, (x1, x2, x3), seed=5))


def test_json_roundtrip():
    for ch in [
        build_additive_pair_channel(0.12),
        build_quaternary_channel(0.2),
        build_fb_parallel_channel(0.07),
    ]:
        back = channel_from_json(channel_to_json(ch))
        assert back.kind == ch.kind
        assert np.allclose(back.transition.table, ch.transition.table, atol=1e-15)
    generic = channel_from_json(
        {
            "kind": "generic",
            "input_sizes": [2, 2, 2],
            "output_size": 2,
            "table": list(np.tile([0.5, 0.5], 8)),
        }
    )
    assert generic.output_size == 2


def test_output_distribution_requires_input_axes():
    ch = build_quaternary_channel(0.1)
    bad = JointPMF([("A", 2), ("B", 2), ("C", 2)], np.full((2, 2, 2), 0.125))
    with pytest.raises(ValueError):
        output_distribution(ch, bad)
