"""Core data model: descriptors, error bounds, block tiling."""

import numpy as np
import pytest

from vlz.errors import ConfigError, DegenerateRangeError
from vlz.model import (
    ArrayDescriptor,
    CompressionConfig,
    ErrorBound,
    PaddingPolicy,
    build_block_grid,
    resolve_error_bound,
)

from conftest import oracle_tile_blocks


class TestArrayDescriptor:
    def test_from_array(self):
        desc = ArrayDescriptor.from_array(np.zeros((3, 4, 5), dtype=np.float32))
        assert desc.ndims == 3
        assert desc.dims == (3, 4, 5)
        assert desc.element_count == 60

    def test_rejects_non_f32(self):
        with pytest.raises(ConfigError):
            ArrayDescriptor.from_array(np.zeros(3, dtype=np.float64))

    def test_rejects_bad_ndims(self):
        with pytest.raises(ConfigError):
            ArrayDescriptor(ndims=4, dims=(1, 2, 3, 4))
        with pytest.raises(ConfigError):
            ArrayDescriptor(ndims=2, dims=(4,))

    def test_rejects_zero_extent(self):
        with pytest.raises(ConfigError):
            ArrayDescriptor(ndims=1, dims=(0,))


class TestBlockGrid:
    def test_cesm_dims(self):
        # 1800x3600 at block 16: ceil gives 113 x 225
        desc = ArrayDescriptor(ndims=2, dims=(1800, 3600))
        grid = build_block_grid(desc, 16)
        assert grid.blocks_per_dim == (113, 225)
        assert grid.block_count == 25425

    def test_exact_1d(self):
        grid = build_block_grid(ArrayDescriptor(ndims=1, dims=(8,)), 8)
        assert grid.block_count == 1
        assert grid.block_extents(0) == (8,)

    def test_hurricane_dims(self):
        desc = ArrayDescriptor(ndims=3, dims=(100, 500, 500))
        grid = build_block_grid(desc, 64)
        assert grid.blocks_per_dim == (2, 8, 8)
        assert grid.block_count == 128

    def test_invalid_edge(self):
        desc = ArrayDescriptor(ndims=1, dims=(10,))
        for bad in (4, 7, 128, 0):
            with pytest.raises(ConfigError):
                build_block_grid(desc, bad)

    @pytest.mark.parametrize("dims", [(7,), (17, 9), (5, 16, 33), (65, 1, 3)])
    @pytest.mark.parametrize("b", [8, 16, 32, 64])
    def test_tiling_completeness(self, dims, b):
        # every element belongs to exactly one block, and the extents agree
        # with a brute-force tiler
        desc = ArrayDescriptor(ndims=len(dims), dims=dims)
        grid = build_block_grid(desc, b)
        owners, oracle_blocks = oracle_tile_blocks(dims, b)
        assert grid.block_count == len(oracle_blocks)
        seen = 0
        for bi in range(grid.block_count):
            coords = grid.block_coords(bi)
            assert coords == oracle_blocks[bi]
            extents = grid.block_extents(bi)
            origin = grid.block_origin(bi)
            assert all(e >= 1 for e in extents)
            seen += int(np.prod(extents))
            for d in range(len(dims)):
                assert origin[d] + extents[d] <= dims[d] or extents[d] == dims[d] - origin[d]
        assert seen == desc.element_count

    def test_partial_boundary_extents(self):
        grid = build_block_grid(ArrayDescriptor(ndims=2, dims=(17, 9)), 8)
        assert grid.block_extents(grid.block_count - 1) == (1, 1)


class TestErrorBound:
    def test_absolute_passthrough(self):
        eb = ErrorBound.absolute(1e-4)
        assert resolve_error_bound(eb, np.zeros(4, dtype=np.float32)) == 1e-4

    def test_relative_scales_by_range(self):
        data = np.array([0.0, 25.0, 100.0], dtype=np.float32)
        got = resolve_error_bound(ErrorBound.relative(1e-3), data)
        assert got == pytest.approx(0.1, rel=0, abs=0)

    def test_relative_constant_data_errors(self):
        data = np.full(16, 3.5, dtype=np.float32)
        with pytest.raises(DegenerateRangeError):
            resolve_error_bound(ErrorBound.relative(1e-3), data)

    def test_relative_permutation_invariant(self):
        rng = np.random.default_rng(1)
        data = rng.uniform(-5, 9, 257).astype(np.float32)
        eb = ErrorBound.relative(1e-2)
        base = resolve_error_bound(eb, data)
        for _ in range(5):
            assert resolve_error_bound(eb, rng.permutation(data)) == base

    def test_nonpositive_value_rejected(self):
        with pytest.raises(ConfigError):
            ErrorBound.absolute(0.0)
        with pytest.raises(ConfigError):
            ErrorBound.relative(-1e-3)


class TestCompressionConfig:
    def test_effective_lanes_respects_block(self):
        cfg = CompressionConfig(ErrorBound.absolute(1e-4), block_edge=8, lane_width=16)
        assert cfg.effective_lanes == 8

    def test_validation(self):
        eb = ErrorBound.absolute(1e-4)
        with pytest.raises(ConfigError):
            CompressionConfig(eb, block_edge=12)
        with pytest.raises(ConfigError):
            CompressionConfig(eb, lane_width=3)
        with pytest.raises(ConfigError):
            CompressionConfig(eb, radius=1)
        with pytest.raises(ConfigError):
            CompressionConfig(eb, thread_count=0)


class TestPaddingPolicyParse:
    def test_parse_forms(self):
        p = PaddingPolicy.parse("mean:global")
        assert str(p) == "mean:global"
        assert PaddingPolicy.parse("zero").value_kind.value == "zero"
        assert PaddingPolicy.parse("min:edge").granularity.value == "edge"

    def test_parse_rejects_garbage(self):
        for bad in ("median:global", "mean:galaxy", "a:b:c"):
            with pytest.raises(ConfigError):
                PaddingPolicy.parse(bad)
