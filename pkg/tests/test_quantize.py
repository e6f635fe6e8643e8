import math

import numpy as np
import pytest

from chankey.quantize import (
    Evidence,
    Quantizer,
    bit_planes,
    combine_planes,
    confusion_matrix,
    hard_evidence,
    quantize,
    soft_evidence,
)
from chankey.rng import make_rng

Q2 = Quantizer.equiprobable(2)
Q4 = Quantizer.equiprobable(4)

GAUSS_QUARTILE = 0.6744897501960817  # Phi^{-1}(0.75)


def test_equiprobable_thresholds():
    assert Q2.thresholds == (0.0,)
    np.testing.assert_allclose(Q4.thresholds,
                               [-GAUSS_QUARTILE, 0.0, GAUSS_QUARTILE],
                               atol=1e-12)


def test_quantizer_validation():
    with pytest.raises(ValueError):
        Quantizer(levels=3, thresholds=(0.0, 1.0))
    with pytest.raises(ValueError):
        Quantizer(levels=4, thresholds=(0.0, 0.0, 1.0))
    with pytest.raises(ValueError):
        Quantizer(levels=2, thresholds=())


def test_quantize_sign():
    block = quantize(np.array([-1.3, 0.2]), Q2)
    np.testing.assert_array_equal(block.symbols, [0, 1])
    assert block.plane_m is None


def test_quantize_four_level_quartiles():
    x = np.array([-2.0, -0.1, 0.1, 2.0])
    block = quantize(x, Q4)
    np.testing.assert_array_equal(block.symbols, [0, 1, 2, 3])
    np.testing.assert_array_equal(block.plane_m, [0, 0, 1, 1])
    np.testing.assert_array_equal(block.plane_l, [0, 1, 0, 1])


def test_quantize_boundary_goes_up():
    assert quantize(np.array([0.0]), Q2).symbols[0] == 1
    assert quantize(np.array([0.0]), Q4).symbols[0] == 2
    assert quantize(np.array([-GAUSS_QUARTILE]), Q4).symbols[0] == 1


def test_quantize_respects_scale():
    # thresholds are in source-sigma units; scale stretches them, so the
    # same raw value can land in different cells for different sigmas
    x = np.array([1.0, 1.0])
    block = quantize(x, Q4, scale=np.array([1.0, 10.0]))
    np.testing.assert_array_equal(block.symbols, [3, 2])


def test_quantize_rejects_nonfinite():
    with pytest.raises(ValueError):
        quantize(np.array([np.nan]), Q2)


def test_bit_planes_examples():
    m, l = bit_planes(np.array([3]))
    assert (m[0], l[0]) == (1, 1)
    m, l = bit_planes(np.array([2]))
    assert (m[0], l[0]) == (1, 0)


def test_bit_planes_roundtrip_exhaustive():
    symbols = np.array([0, 1, 2, 3])
    m, l = bit_planes(symbols)
    np.testing.assert_array_equal(combine_planes(m, l), symbols)


def test_bit_planes_rejects_out_of_range():
    with pytest.raises(ValueError):
        bit_planes(np.array([4]))


def test_quantize_equiprobable_cells():
    rng = make_rng(1)
    x = rng.standard_normal(100_000)
    for q in (Q2, Q4):
        block = quantize(x, q)
        counts = np.bincount(block.symbols, minlength=q.levels)
        se = math.sqrt(0.25 / x.size)  # binomial se per cell
        np.testing.assert_allclose(counts / x.size, 1.0 / q.levels,
                                   atol=3.5 * se)


# ---------------------------------------------------------------------------
# soft evidence


def test_soft_evidence_independent_is_uniform():
    ev = soft_evidence(np.array([-3.0, 0.2, 5.0]), rho=0.0, sigma=2.0,
                       quantizer=Q4)
    np.testing.assert_allclose(ev.posteriors, 0.25, atol=1e-12)


def test_soft_evidence_confident_tail():
    sigma = 2.0
    ev = soft_evidence(np.array([3.0 * sigma]), rho=0.99, sigma=sigma,
                       quantizer=Q2)
    assert ev.posteriors[0, 1] > 0.999


def test_soft_evidence_symmetric_at_zero():
    ev = soft_evidence(np.array([0.0]), rho=0.9, sigma=1.0, quantizer=Q4)
    g = ev.posteriors[0]
    assert g[1] == pytest.approx(g[2], abs=1e-9)
    assert g[0] == pytest.approx(g[3], abs=1e-9)


def test_soft_evidence_rows_normalized():
    rng = make_rng(2)
    y = rng.standard_normal(500)
    ev = soft_evidence(y, rho=0.7, sigma=1.3, quantizer=Q4)
    np.testing.assert_allclose(ev.posteriors.sum(axis=1), 1.0, atol=1e-9)
    assert np.all(ev.posteriors >= 0)
    assert ev.mode == "soft"


def test_soft_evidence_vector_rho_sigma():
    y = np.array([0.5, 0.5])
    ev = soft_evidence(y, rho=np.array([0.1, 0.95]), sigma=np.array([1.0, 1.0]),
                       quantizer=Q2)
    # stronger correlation concentrates the posterior
    assert ev.posteriors[1, 1] > ev.posteriors[0, 1]


def test_soft_evidence_rejects_bad_params():
    with pytest.raises(ValueError):
        soft_evidence(np.zeros(3), rho=1.0, sigma=1.0, quantizer=Q2)
    with pytest.raises(ValueError):
        soft_evidence(np.zeros(3), rho=0.5, sigma=0.0, quantizer=Q2)


# ---------------------------------------------------------------------------
# hard evidence


def test_hard_evidence_independent_uniform():
    ev = hard_evidence(np.array([0, 1, 2, 3]), rho=0.0, quantizer=Q4)
    np.testing.assert_allclose(ev.posteriors, 0.25, atol=1e-7)


def test_binary_crossover_identity():
    # P[levels differ] = arccos(rho) / pi for the sign quantizer
    rho = 0.99
    joint = confusion_matrix(rho, Q2)
    eps = joint[0, 1] + joint[1, 0]
    assert eps == pytest.approx(math.acos(rho) / math.pi, abs=1e-6)
    assert eps == pytest.approx(0.04505341364441213, abs=1e-6)
    # Monte-Carlo cross-check of the quadrature
    rng = make_rng(3)
    n = 1_000_000
    x = rng.standard_normal(n)
    y = rho * x + math.sqrt(1 - rho * rho) * rng.standard_normal(n)
    emp = np.mean((x >= 0) != (y >= 0))
    assert emp == pytest.approx(eps, abs=3 * math.sqrt(eps * (1 - eps) / n))


def test_confusion_matrix_double_symmetry():
    for q in (Q2, Q4):
        joint = confusion_matrix(0.8, q)
        np.testing.assert_allclose(joint, joint[::-1, ::-1], atol=1e-7)
        np.testing.assert_allclose(joint, joint.T, atol=1e-7)
        assert joint.sum() == pytest.approx(1.0, abs=1e-9)


def test_hard_evidence_rows_normalized_and_cached():
    rng = make_rng(4)
    symbols = rng.integers(0, 4, size=300)
    ev = hard_evidence(symbols, rho=0.9, quantizer=Q4)
    np.testing.assert_allclose(ev.posteriors.sum(axis=1), 1.0, atol=1e-9)
    assert ev.mode == "hard"
    # repeated call hits the cache and agrees exactly
    ev2 = hard_evidence(symbols, rho=0.9, quantizer=Q4)
    np.testing.assert_array_equal(ev.posteriors, ev2.posteriors)


def test_hard_evidence_rejects_out_of_range():
    with pytest.raises(ValueError):
        hard_evidence(np.array([2]), rho=0.5, quantizer=Q2)


# ---------------------------------------------------------------------------
# information ordering (data-processing check)


def _discrete_mi_bits(ix, iy, kx, ky):
    n = ix.size
    joint = np.bincount(ix * ky + iy, minlength=kx * ky).astype(float)
    joint /= n
    px = joint.reshape(kx, ky).sum(axis=1)
    py = joint.reshape(kx, ky).sum(axis=0)

    def h(p):
        p = p[p > 0]
        return -(p * np.log2(p)).sum()

    return h(px) + h(py) - h(joint)


def test_soft_input_carries_more_information_than_quantized():
    rho = 0.8
    rng = make_rng(5)
    n = 100_000
    x = rng.standard_normal(n)
    y = rho * x + math.sqrt(1 - rho * rho) * rng.standard_normal(n)
    xa = quantize(x, Q4).symbols.astype(int)
    yq = quantize(y, Q4).symbols.astype(int)
    # bin Bob's raw value finely to approximate the continuous observation
    edges = np.quantile(y, np.linspace(0, 1, 65)[1:-1])
    ybins = np.searchsorted(edges, y, side="right")
    i_soft = _discrete_mi_bits(xa, ybins, 4, 64)
    i_hard = _discrete_mi_bits(xa, yq, 4, 4)
    assert i_soft >= i_hard


def test_evidence_validation():
    with pytest.raises(ValueError):
        Evidence(posteriors=np.array([[0.5, 0.6]]), mode="soft")
    with pytest.raises(ValueError):
        Evidence(posteriors=np.array([[0.5, 0.5]]), mode="fuzzy")
