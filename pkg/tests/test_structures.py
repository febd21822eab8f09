"""Grouping layout laws checked by explicit enumeration."""

import numpy as np
import pytest

from aflearn.errors import ConfigError
from aflearn.structures import DependencyStructure


def test_group_counts():
    assert DependencyStructure.diagonal().group_count(16) == 16
    assert DependencyStructure.block(4).group_count(16) == 4
    assert DependencyStructure.banded(4).group_count(16) == 8
    assert DependencyStructure.banded(8).group_count(64) == 16


def test_bins_for_groups_inverts_group_count():
    for s in (
        DependencyStructure.diagonal(),
        DependencyStructure.block(8),
        DependencyStructure.banded(4),
    ):
        for k in (16, 32, 64):
            assert s.bins_for_groups(s.group_count(k)) == k


def test_diagonal_and_block_windows_partition_bins():
    for s in (DependencyStructure.diagonal(), DependencyStructure.block(4)):
        bins = s.window_bins(16)
        assert sorted(bins.ravel().tolist()) == list(range(16))
        assert np.array_equal(s.coverage(16), np.ones(16, dtype=int))


def test_banded_windows_cover_each_bin_twice():
    s = DependencyStructure.banded(4)
    bins = s.window_bins(16)
    assert bins.shape == (8, 4)
    assert np.array_equal(s.coverage(16), np.full(16, 2))
    # windows hop by width/2 and wrap circularly
    assert bins[0].tolist() == [0, 1, 2, 3]
    assert bins[1].tolist() == [2, 3, 4, 5]
    assert bins[-1].tolist() == [14, 15, 0, 1]


def test_validation_errors():
    with pytest.raises(ConfigError):
        DependencyStructure("banded", 3)
    with pytest.raises(ConfigError):
        DependencyStructure("diagonal", 2)
    with pytest.raises(ConfigError):
        DependencyStructure("block", 1)
    with pytest.raises(ConfigError):
        DependencyStructure("triangular", 4)
    with pytest.raises(ConfigError):
        DependencyStructure.block(3).group_count(16)
    with pytest.raises(ConfigError):
        DependencyStructure.block(32).group_count(16)


def test_parse_round_trips():
    for text in ("diagonal", "block:4", "banded:8"):
        s = DependencyStructure.parse(text)
        assert s.label == text
    with pytest.raises(ConfigError):
        DependencyStructure.parse("block")
    with pytest.raises(ConfigError):
        DependencyStructure.parse("banded:x")
    with pytest.raises(ConfigError):
        DependencyStructure.parse("diagonal:2")
