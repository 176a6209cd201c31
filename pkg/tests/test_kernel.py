"""Scalar kernel: pre-quantization, Lorenzo prediction, post-quantization."""

import numpy as np
import pytest

from vlz.errors import BoundTooSmallError, ConfigError
from vlz.kernel import (
    KernelCounters,
    PaddedBlock,
    dualquant_scalar,
    lorenzo_predict,
    postquantize,
)
from vlz.model import CompressionConfig, ErrorBound, PaddingPolicy
from vlz.quantize import prequantize, reconstruct_array

from conftest import oracle_quantize


class TestPrequantize:
    def test_zero(self):
        g = prequantize(np.zeros(4, dtype=np.float32), 1e-4)
        assert (g.values == 0).all()

    def test_hand_case(self):
        # 3.2 at eb 0.5: 3.2 / 1.0 rounds to 3, reconstruction 3.0, error 0.2
        g = prequantize(np.array([3.2], dtype=np.float32), 0.5)
        assert g.values[0] == 3
        assert abs(3.2 - 2.0 * 3 * 0.5) <= 0.5

    def test_negative_tie_rounds_away(self):
        # -0.00015 / 2e-4 = -0.75 -> -1; reconstruction error 5e-5 <= eb
        g = prequantize(np.array([-0.00015], dtype=np.float32), 1e-4)
        assert g.values[0] == -1

    def test_matches_scalar_oracle(self):
        rng = np.random.default_rng(3)
        data = rng.uniform(-1e3, 1e3, 4096).astype(np.float32)
        for eb in (1e-2, 1e-4, 1e-5):
            g = prequantize(data, eb)
            sample = rng.choice(data.size, 200, replace=False)
            for i in sample:
                assert g.values[i] == oracle_quantize(float(data[i]), eb)

    @pytest.mark.parametrize("eb", [1e-2, 1e-4, 1e-5])
    def test_bound_holds_in_float64(self, eb):
        # brute-force bound check over the array, pre-narrowing; the float64
        # evaluation itself costs a couple of ulps at quantization ties, so
        # allow that epsilon here (the narrowed fp32 bound is enforced
        # exactly by the pipeline via verbatim outliers)
        rng = np.random.default_rng(7)
        data = rng.uniform(-1e3, 1e3, 20000).astype(np.float32)
        g = prequantize(data, eb)
        recon64 = (2.0 * g.values.astype(np.float64)) * eb
        assert np.max(np.abs(recon64 - data.astype(np.float64))) <= eb * (1 + 1e-7)

    def test_requantizing_reconstruction_is_fixed_point(self):
        rng = np.random.default_rng(9)
        data = rng.uniform(-1e3, 1e3, 50000).astype(np.float32)
        for eb in (1e-2, 1e-4, 1e-5):
            g = prequantize(data, eb)
            again = prequantize(reconstruct_array(g.values, eb), eb)
            assert np.array_equal(g.values, again.values)

    def test_overflow_guard_names_index(self):
        data = np.array([1.0, 3e5, 1.0], dtype=np.float32)
        with pytest.raises(BoundTooSmallError) as err:
            prequantize(data, 1e-5)
        assert err.value.index == 1

    def test_non_finite_rejected(self):
        data = np.array([1.0, np.nan], dtype=np.float32)
        with pytest.raises(ConfigError):
            prequantize(data, 1e-4)


class TestLorenzoPredict:
    def test_2d_formula(self):
        # w=5, n=7, nw=4 -> 5 + 7 - 4 = 8
        blk = PaddedBlock(
            (2, 2), (0, 0), np.array([[4, 7], [5, 0]], dtype=np.int64)
        )
        assert lorenzo_predict(blk, (1, 1)) == 8

    @pytest.mark.parametrize("nd", [1, 2, 3])
    def test_constant_field_fixed_point(self, nd):
        v = 37
        blk = PaddedBlock((3,) * nd, (v,) * nd, np.full((3,) * nd, v, dtype=np.int64))
        for index in np.ndindex(*(3,) * nd):
            assert lorenzo_predict(blk, index) == v

    @pytest.mark.parametrize("nd", [1, 2, 3])
    def test_first_element_zero_padding(self, nd):
        blk = PaddedBlock((2,) * nd, (0,) * nd, np.ones((2,) * nd, dtype=np.int64))
        assert lorenzo_predict(blk, (0,) * nd) == 0

    def test_halo_corner_uses_highest_dim_scalar(self):
        # the (-1,-1) corner neighbor reads the dim-1 face scalar
        blk = PaddedBlock((1, 1), (10, 20), np.array([[5]], dtype=np.int64))
        # p = w + n - nw = 20 + 10 - 20
        assert lorenzo_predict(blk, (0, 0)) == 10


class TestPostquantize:
    def test_delta_to_code(self):
        # d=12, p=10 (west neighbor), delta 2 -> code radius + 2
        blk = PaddedBlock((2,), (0,), np.array([10, 12], dtype=np.int64))
        codes, outliers = postquantize(blk, 32768)
        assert codes[1] == 32770
        assert codes[0] == 32778  # delta 10 against the zero halo, in range
        assert outliers == []

    def test_zero_delta_gives_radius(self):
        blk = PaddedBlock((2,), (5,), np.array([5, 5], dtype=np.int64))
        codes, outliers = postquantize(blk, 32768)
        assert (codes == 32768).all()
        assert outliers == []

    def test_delta_at_radius_is_outlier(self):
        r = 16
        blk = PaddedBlock((2,), (0,), np.array([0, r], dtype=np.int64))
        codes, outliers = postquantize(blk, r)
        assert codes[1] == 0
        assert outliers == [r]

    def test_boundary_in_range(self):
        r = 16
        blk = PaddedBlock((2,), (0,), np.array([0, r - 1], dtype=np.int64))
        codes, outliers = postquantize(blk, r)
        assert codes[1] == r + (r - 1)
        assert outliers == []


class TestDualquantScalar:
    def test_constant_array_mean_padding_no_outliers(self):
        data = np.full((4, 12), 100.0, dtype=np.float32)
        cfg = CompressionConfig(ErrorBound.absolute(1e-4), block_edge=8, lane_width=1)
        stream = dualquant_scalar(data, cfg)
        assert stream.outlier_values.size == 0
        assert (stream.codes == cfg.radius).all()

    def test_constant_array_zero_padding_one_outlier_per_block(self):
        # value 100 quantizes to 500000 > radius-1, so every block origin
        # misses its prediction under zero padding; 1D N=64, b=8 -> 8 blocks
        data = np.full(64, 100.0, dtype=np.float32)
        cfg = CompressionConfig(
            ErrorBound.absolute(1e-4),
            block_edge=8,
            lane_width=1,
            padding=PaddingPolicy.parse("zero"),
        )
        stream = dualquant_scalar(data, cfg)
        assert stream.outlier_values.size == 8
        assert (stream.outlier_counts == 1).all()
        # sentinel sits at each block's first element
        assert (stream.codes.reshape(8, 8)[:, 0] == 0).all()
        assert (stream.outlier_values == 100.0).all()

    def test_counters_match_op_table(self):
        from vlz.metrics import (
            CONSERVATIVE_OPS_PER_ELEMENT,
            LENIENT_CASTS_PER_ELEMENT,
            LENIENT_COMPARISONS_PER_ELEMENT,
            LENIENT_ROUNDS_PER_ELEMENT,
        )

        rng = np.random.default_rng(2)
        data = rng.uniform(-10, 10, (9, 17)).astype(np.float32)
        counters = KernelCounters()
        cfg = CompressionConfig(ErrorBound.absolute(1e-3), block_edge=8, lane_width=1)
        dualquant_scalar(data, cfg, counters=counters)
        n = data.size
        assert counters.arith == n * CONSERVATIVE_OPS_PER_ELEMENT
        assert counters.rounds == n * LENIENT_ROUNDS_PER_ELEMENT
        assert counters.casts == n * LENIENT_CASTS_PER_ELEMENT
        assert counters.comparisons == n * LENIENT_COMPARISONS_PER_ELEMENT

    def test_outlier_positions_match_independent_oracle(self):
        from conftest import oracle_dualquant_outliers

        rng = np.random.default_rng(4)
        data = (rng.uniform(-200, 200, (11, 13))).astype(np.float32)
        cfg = CompressionConfig(
            ErrorBound.absolute(0.5),
            block_edge=8,
            lane_width=1,
            padding=PaddingPolicy.parse("mean:global"),
        )
        stream = dualquant_scalar(data, cfg)
        expected = oracle_dualquant_outliers(data, 0.5, 8, cfg.radius, "gmean")
        # recover outlier positions from the canonical stream
        got = set()
        pos = 0
        grid = stream.grid
        for bi in range(grid.block_count):
            origin = grid.block_origin(bi)
            extents = grid.block_extents(bi)
            for local in np.ndindex(*extents):
                if stream.codes[pos] == 0:
                    got.add(tuple(o + l for o, l in zip(origin, local)))
                pos += 1
        assert got == expected
