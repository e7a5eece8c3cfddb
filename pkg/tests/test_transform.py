import numpy as np
import pytest

from roiskip.transform import (QuantParams, TRANSFORM_SIZES, dct_matrix,
                               dequantize, forward_dct, inverse_dct, quantize,
                               reconstruct_residual, transform_quantize,
                               zigzag_order)


def test_qstep_law():
    assert QuantParams(4).qstep == pytest.approx(1.0)
    assert QuantParams(10).qstep == pytest.approx(2.0)
    assert QuantParams(22).qstep == pytest.approx(8.0)
    # monotone
    steps = [QuantParams(q).qstep for q in range(0, 52)]
    assert all(a < b for a, b in zip(steps, steps[1:]))


def test_zero_residual_zero_coefficients():
    for n in TRANSFORM_SIZES:
        levels = transform_quantize(np.zeros((n, n), dtype=np.int64),
                                    QuantParams(30))
        assert not levels.any()


def test_constant_block_dc_only():
    q = QuantParams(4)  # qstep 1
    levels = transform_quantize(np.full((4, 4), 10, dtype=np.int64), q)
    assert levels[0, 0] != 0
    assert np.count_nonzero(levels) == 1
    recon = reconstruct_residual(levels, q)
    assert np.abs(recon - 10).max() <= 1


def test_parseval_energy():
    rng = np.random.default_rng(0)
    for n in TRANSFORM_SIZES:
        block = rng.integers(-128, 128, (n, n)).astype(np.int64)
        coeffs = forward_dct(block)
        e_res = float(np.sum(block.astype(np.float64) ** 2))
        e_coef = float(np.sum(coeffs ** 2))
        assert abs(e_coef - e_res) <= 0.01 * e_res


def test_forward_inverse_roundtrip():
    rng = np.random.default_rng(1)
    for n in TRANSFORM_SIZES:
        block = rng.integers(-255, 256, (n, n)).astype(np.int64)
        back = inverse_dct(forward_dct(block))
        assert np.abs(back - block).max() < 0.5


def test_dead_zone_quantizer():
    q = QuantParams(10)  # qstep 2
    c = np.array([0.0, 0.5, 1.3, 1.4, -1.4, 4.0, -4.0])
    # floor(|c|/2 + 1/3) with sign
    expected = np.array([0, 0, 0, 1, -1, 2, -2])
    assert np.array_equal(quantize(c, q), expected)
    assert np.allclose(dequantize(quantize(c, q), q), expected * 2.0)


def test_matrix_is_integer_and_near_orthonormal():
    for n in TRANSFORM_SIZES:
        m = dct_matrix(n)
        assert m.dtype == np.int64
        norms = np.sqrt(np.sum(m.astype(np.float64) ** 2, axis=1))
        nm = m / norms[:, None]
        gram = nm @ nm.T
        assert np.abs(np.diag(gram) - 1.0).max() < 1e-12
        assert np.abs(gram - np.eye(n)).max() < 0.002


def test_zigzag_4x4_oracle():
    # hand-derived diagonal scan for n=4 (row-major flat indices)
    expected = [0, 1, 4, 8, 5, 2, 3, 6, 9, 12, 13, 10, 7, 11, 14, 15]
    assert list(zigzag_order(4)) == expected


def test_zigzag_is_permutation():
    for n in TRANSFORM_SIZES:
        order = zigzag_order(n)
        assert sorted(order) == list(range(n * n))


def test_quantization_error_bounded():
    rng = np.random.default_rng(2)
    for qp in (22, 28, 34):
        q = QuantParams(qp)
        block = rng.integers(-100, 100, (8, 8)).astype(np.int64)
        recon = reconstruct_residual(transform_quantize(block, q), q)
        # worst-case per-coefficient error ~ qstep; spatial error similar
        assert np.abs(recon - block).max() <= 2.0 * q.qstep
