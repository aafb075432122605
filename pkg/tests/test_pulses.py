import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pulsevqe.device import ring_device
from pulsevqe.pulses import (
    GaussianComponent,
    GaussianPulse,
    PulseError,
    PulseSet,
    SquarePulse,
    amplitude_at,
    pack,
    parse_pulse_set,
    serialize_pulse_set,
    split_largest_segment,
    square_template,
    unpack,
    unpack_ex,
)


def square(amps, switches, T=9.0, freq=4.8, bound=0.02):
    return SquarePulse(
        amps=tuple(amps), switch_times=tuple(switches), freq=freq,
        total_time=T, amp_bound=bound,
    )


DEV2 = ring_device([4.808, 4.8333], [0.3102, 0.2916], 0.01831)


def test_single_segment_amplitude():
    p = square([0.01], [])
    for t in (0.0, 3.3, 9.0):
        assert amplitude_at(p, t) == 0.01


def test_switch_boundary_right_continuous():
    p = square([0.01, -0.02], [4.0])
    assert amplitude_at(p, 3.9) == 0.01
    assert amplitude_at(p, 4.0) == -0.02
    assert amplitude_at(p, 9.0) == -0.02


def test_amplitude_outside_range():
    p = square([0.01], [])
    with pytest.raises(PulseError):
        amplitude_at(p, -0.1)
    with pytest.raises(PulseError):
        amplitude_at(p, 9.1)


def test_gaussian_amplitude_closed_form():
    p = GaussianPulse(
        components=(GaussianComponent(amp=0.02, center=5.0, width=1.0),),
        freq=4.8, total_time=9.0,
    )
    assert amplitude_at(p, 5.0) == pytest.approx(0.02)
    assert amplitude_at(p, 8.0) == pytest.approx(0.02 * np.exp(-4.5))


def test_square_invariants():
    with pytest.raises(PulseError):
        square([0.01, 0.02], [9.5])  # switch beyond T
    with pytest.raises(PulseError):
        square([0.01, 0.02], [0.0])  # switch at 0
    with pytest.raises(PulseError):
        square([0.03], [], bound=0.02)  # amplitude over bound
    with pytest.raises(PulseError):
        square([0.01, 0.02, 0.01], [5.0, 4.0])  # not increasing


def test_pack_full_mode_length():
    ps = square_template(DEV2, 2, 9.0)
    params = pack(ps, "full")
    assert len(params) == 2 * (2 + 1 + 1)


def test_pack_adaptive_mode_length():
    dev4 = ring_device([4.808, 4.8333, 4.94, 4.796],
                       [0.3102, 0.2916, 0.3302, 0.2616],
                       [0.01831, 0.02131, 0.01931, 0.02031])
    ps = square_template(dev4, 5, 40.0, amp_bound=0.04, freq_window=1.5)
    params = pack(ps, "adaptive")
    assert len(params) == 4 * (5 + 1)


def test_pack_unpack_roundtrip():
    ps = square_template(DEV2, 3, 9.0)
    for mode in ("full", "adaptive"):
        params = pack(ps, mode)
        again, repairs = unpack_ex(params, ps)
        assert repairs == 0
        assert again == ps


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_pack_unpack_roundtrip_random(data):
    rng_seed = data.draw(st.integers(0, 2**31 - 1))
    rng = np.random.default_rng(rng_seed)
    n_seg = data.draw(st.integers(1, 5))
    T = data.draw(st.floats(2.0, 40.0))
    switches = np.sort(rng.uniform(0.15, T - 0.15, n_seg - 1))
    # enforce strict ordering for validity
    switches = np.unique(switches)
    amps = rng.uniform(-0.02, 0.02, len(switches) + 1)
    pulses = tuple(
        SquarePulse(
            amps=tuple(amps), switch_times=tuple(switches),
            freq=4.8 + k * 0.03, total_time=T,
        )
        for k in range(2)
    )
    ps = PulseSet(pulses=pulses, total_time=T)
    for mode in ("full", "adaptive"):
        again = unpack(pack(ps, mode), ps)
        assert again == ps


def test_unpack_sorts_crossed_switch_times():
    ps = square_template(DEV2, 3, 9.0)
    params = pack(ps, "full")
    values = list(params.values)
    # switch entries for transmon 0 are at positions 3, 4 (after 3 amps)
    idx = params.entries("switch_time")[:2]
    values[idx[0]], values[idx[1]] = 6.0, 4.0
    repaired, repairs = unpack_ex(params.with_values(values), ps)
    assert repaired.pulses[0].switch_times == (4.0, 6.0)
    assert repairs >= 1


def test_unpack_clamps_amp_and_counts():
    ps = square_template(DEV2, 1, 9.0, amp_bound=0.04)
    params = pack(ps, "adaptive")
    values = list(params.values)
    values[0] = 0.05
    repaired, repairs = unpack_ex(params.with_values(values), ps)
    assert repaired.pulses[0].amps[0] == pytest.approx(0.04)
    assert repairs == 1


def test_split_preserves_envelope():
    rng = np.random.default_rng(1)
    p = square([0.01], [], T=9.0)
    p2 = split_largest_segment(p, rng)
    assert p2.n_segments == 2
    grid = np.linspace(0.0, 9.0, 1000)
    for t in grid:
        assert amplitude_at(p2, float(t)) == amplitude_at(p, float(t))


def test_split_picks_largest():
    rng = np.random.default_rng(2)
    p = square([0.01, -0.01], [2.0], T=9.0)
    p2 = split_largest_segment(p, rng)
    new = set(p2.switch_times) - {2.0}
    cut = new.pop()
    assert 2.0 + 0.1 <= cut <= 9.0 - 0.1


def test_split_midpoint_fallback():
    rng = np.random.default_rng(3)
    p = square([0.01, 0.02], [0.15], T=0.3)
    p2 = split_largest_segment(p, rng)
    assert p2.n_segments == 3


def test_split_seed42_regression():
    # recorded from the first implementation run; regression guard only
    rng = np.random.default_rng(42)
    p = SquarePulse(amps=(0.01,), switch_times=(), freq=4.808,
                    total_time=40.0, amp_bound=0.04)
    p2 = split_largest_segment(p, rng)
    assert p2.switch_times == pytest.approx((30.90345073252734,))
    p3 = split_largest_segment(p2, rng)
    assert p3.switch_times == pytest.approx((13.575082552495605, 30.90345073252734))


def test_split_reproducible_across_runs():
    a = split_largest_segment(square([0.01], []), np.random.default_rng(7))
    b = split_largest_segment(square([0.01], []), np.random.default_rng(7))
    assert a == b


def test_gaussian_bound_checked_on_grid():
    with pytest.raises(PulseError, match="bound"):
        GaussianPulse(
            components=(
                GaussianComponent(0.015, 4.0, 1.0),
                GaussianComponent(0.015, 4.2, 1.0),
            ),
            freq=4.8, total_time=9.0, amp_bound=0.02,
        )


def test_gaussian_pack_roundtrip():
    p = GaussianPulse(
        components=(
            GaussianComponent(0.01, 3.0, 1.0),
            GaussianComponent(-0.005, 6.0, 0.8),
        ),
        freq=4.8, total_time=9.0,
    )
    ps = PulseSet(pulses=(p, p), total_time=9.0)
    params = pack(ps, "full")
    assert len(params) == 2 * (2 * 3 + 1)
    assert unpack(params, ps) == ps
    with pytest.raises(PulseError):
        pack(ps, "adaptive")


def test_pulse_file_roundtrip(golden_pulse):
    assert parse_pulse_set(serialize_pulse_set(golden_pulse)) == golden_pulse


def test_amplitudes_within_bounds_after_packed_roundtrip():
    rng = np.random.default_rng(12)
    ps = square_template(DEV2, 2, 9.0)
    params = pack(ps, "full")
    for _ in range(100):
        values = [rng.uniform(lo, hi) for lo, hi in params.bounds]
        rebuilt = unpack(params.with_values(values), ps)
        for pulse in rebuilt.pulses:
            for t in np.linspace(0, 9.0, 50):
                assert abs(amplitude_at(pulse, float(t))) <= pulse.amp_bound + 1e-12
