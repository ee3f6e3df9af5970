"""Shared test fixtures: toy search spaces small enough to enumerate, plus
the hardware points the search tests run against."""

from dataclasses import replace

import pytest

from edgesplit.hwmodel import HardwareConfig
from edgesplit.splitspace import PhaseSpec, SearchSpace

# Toy spaces: every one is exhaustively enumerable (<= 2000 descriptors) and
# sized so the sensor-memory hard constraint genuinely binds under TOY_HW.
TOY_SPACE_A = SearchSpace(
    input_resolutions=(32, 48), stem_channels=(8,),
    phases=(
        PhaseSpec((16, 24), (2, 4), (1, 2), (1,), (2, 4)),
        PhaseSpec((32, 48), (4,), (1, 2), (1, 2), (4, 8)),
    ),
    head_channels=(64,), num_classes=10)

TOY_SPACE_B = SearchSpace(
    input_resolutions=(48,), stem_channels=(8, 12),
    phases=(
        PhaseSpec((16,), (2, 4), (1, 2), (1,), (2, 4)),
        PhaseSpec((24, 32), (4,), (1,), (1, 2), (4,)),
        PhaseSpec((48, 64), (4, 6), (1, 2), (1,), (8,)),
    ),
    head_channels=(96,), num_classes=10)

TOY_SPACE_C = SearchSpace(
    input_resolutions=(32, 48, 64), stem_channels=(8,),
    phases=(
        PhaseSpec((16, 24), (4,), (1, 2, 3), (1,), (4,)),
        PhaseSpec((32, 48, 64), (4,), (1, 2), (1, 2), (4, 8)),
    ),
    head_channels=(64,), num_classes=10)

# (space, sensor memory budget, surrogate log-OPs midpoint, accuracy floor)
TOY_SEARCH_CASES = {
    "toy_a": (TOY_SPACE_A, 20_000, 13.4, 0.55),
    "toy_b": (TOY_SPACE_B, 55_000, 13.9, 0.60),
    "toy_c": (TOY_SPACE_C, 30_000, 14.1, 0.50),
}


def toy_hw(mem_sen: float) -> HardwareConfig:
    return HardwareConfig(comp_sen=125e9, comp_agg=1.25e12, bw_total=1.2e9 / 8,
                          num_sensors=4, mem_sen=mem_sen)


# Slow sensor + narrow bus: the latency optimum moves between split phases
# when the sensor gets faster, which the adaptability tests rely on.
ADAPT_HW = HardwareConfig(comp_sen=2e9, comp_agg=1.25e12, bw_total=0.08e9 / 8,
                          num_sensors=4, mem_sen=20_000)


@pytest.fixture
def tmp_out(tmp_path):
    return tmp_path / "out"
