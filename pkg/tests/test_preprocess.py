"""Normalization and diffusion-fit tests."""

import numpy as np
import pytest

from voxrad.errors import InsufficientBValuesError, InvalidArgumentError
from voxrad.preprocess import (
    NormalizationStats,
    compute_stats,
    dual_reference_normalize,
    fit_adc,
    gaussian_normalize,
    synthesize_high_bvalue,
)
from voxrad.volume import Mask3D, Volume3D

RNG = np.random.default_rng(13)


def vol(arr, spacing=(1, 1, 1)):
    return Volume3D(np.asarray(arr, dtype=float), spacing)


def test_dual_reference_midpoint_and_anchors():
    v = vol(np.array([600.0, 200.0, 1000.0, 1200.0]).reshape(4, 1, 1))
    out = dual_reference_normalize(v, 200.0, 1000.0)
    assert out.values[0, 0, 0] == 0.5
    assert out.values[1, 0, 0] == 0.0
    assert out.values[2, 0, 0] == 1.0
    assert out.values[3, 0, 0] == 1.25  # no clipping


def test_dual_reference_affine_commutes_with_mixing():
    a = RNG.uniform(0, 1500, (4, 4, 2))
    b = RNG.uniform(0, 1500, (4, 4, 2))
    t = 0.3
    na = dual_reference_normalize(vol(a), 200, 1000).values
    nb = dual_reference_normalize(vol(b), 200, 1000).values
    mixed = dual_reference_normalize(vol(t * a + (1 - t) * b), 200, 1000).values
    assert np.allclose(mixed, t * na + (1 - t) * nb, atol=1e-12)


def test_dual_reference_rejects_bad_refs():
    with pytest.raises(InvalidArgumentError):
        dual_reference_normalize(vol(np.zeros((2, 2, 2))), 1000.0, 1000.0)


# ---------------------------------------------------------------------------
# ADC fitting

def series(bs, adc, s0=1000.0, shape=(3, 3, 2)):
    return [(b, vol(np.full(shape, s0 * np.exp(-b * adc)))) for b in bs]


def test_fit_recovers_noiseless_exponential():
    for adc in (0.5e-3, 1.0e-3, 2.0e-3):
        fit = fit_adc(series([50.0, 400.0, 800.0], adc))
        assert np.allclose(fit.adc.values, adc, rtol=1e-9)
        assert np.allclose(fit.s0.values, 1000.0, rtol=1e-9)
        assert fit.valid.num_set == fit.valid.values.size


def test_fit_constant_signal():
    fit = fit_adc([(b, vol(np.full((2, 2, 2), 500.0))) for b in (50.0, 400.0, 800.0)])
    assert np.all(fit.adc.values == 0.0)
    assert np.allclose(fit.s0.values, 500.0, rtol=1e-12)


def test_fit_matches_log_linear_oracle():
    bs = np.array([50.0, 400.0, 800.0])
    sig = np.array([951.229, 670.320, 449.329])
    fit = fit_adc([(b, vol(np.full((1, 1, 1), s))) for b, s in zip(bs, sig)])
    # independent least squares on (b, ln S)
    slope, icept = np.polyfit(bs, np.log(sig), 1)
    assert fit.adc.values[0, 0, 0] == pytest.approx(-slope, rel=1e-12)
    assert fit.s0.values[0, 0, 0] == pytest.approx(np.exp(icept), rel=1e-12)
    assert fit.adc.values[0, 0, 0] == pytest.approx(1.0e-3, rel=1e-5)


def test_fit_filters_b_range_and_errors():
    with pytest.raises(InsufficientBValuesError):
        fit_adc(series([0.0, 1000.0], 1e-3))  # both outside [50, 800]
    # b=0 ignored, the rest fit fine
    fit = fit_adc(series([0.0, 50.0, 400.0, 800.0], 1e-3))
    assert np.allclose(fit.adc.values, 1e-3, rtol=1e-9)


def test_fit_invalid_voxels():
    a = vol(np.array([[[1000.0, 0.0]]]))
    b = vol(np.array([[[670.32, 0.0]]]))
    fit = fit_adc([(50.0, a), (400.0, b)])
    assert fit.valid.values[0, 0, 1] == 0
    assert fit.adc.values[0, 0, 1] == 0.0 and fit.s0.values[0, 0, 1] == 0.0


def test_negative_slope_clamped():
    # rising signal would fit a negative decay rate; clamp to 0
    fit = fit_adc([(50.0, vol(np.full((1, 1, 1), 100.0))),
                   (800.0, vol(np.full((1, 1, 1), 200.0)))])
    assert fit.adc.values[0, 0, 0] == 0.0


# ---------------------------------------------------------------------------
# high-b synthesis

def test_synthesize_reference_value():
    fit = fit_adc(series([50.0, 400.0, 800.0], 1e-3))
    hb = synthesize_high_bvalue(fit, 1400.0)
    assert np.allclose(hb.values, 1000.0 * np.exp(-1.4), rtol=1e-9)


def test_synthesize_zero_decay_and_invalid():
    from voxrad.preprocess import AdcFitResult
    fit = AdcFitResult(
        adc=vol(np.zeros((1, 1, 2))),
        s0=vol(np.full((1, 1, 2), 500.0)),
        valid=Mask3D(np.ones((1, 1, 2), np.uint8), (1, 1, 1)),
    )
    hb = synthesize_high_bvalue(fit, 1400.0)
    assert np.all(hb.values == 500.0)

    a = vol(np.array([[[1000.0, 0.0]]]))
    b = vol(np.array([[[800.0, 0.0]]]))
    hb = synthesize_high_bvalue(fit_adc([(50.0, a), (400.0, b)]), 1400.0)
    assert hb.values[0, 0, 1] == 0.0


def test_forward_model_consistency():
    # synthesize(fit(S), b) reproduces S(b) at any b for noiseless input
    for adc in (0.4e-3, 1.3e-3, 2.9e-3):
        fit = fit_adc(series([50.0, 400.0, 800.0], adc, s0=1234.0))
        for b in (900.0, 1400.0, 1500.0):
            hb = synthesize_high_bvalue(fit, b)
            assert np.allclose(hb.values, 1234.0 * np.exp(-b * adc), rtol=1e-9)


# ---------------------------------------------------------------------------
# Gaussian normalization & stats

def test_gaussian_normalize_values():
    stats = NormalizationStats(1.2e-3, 0.3e-3, "patient", "adc")
    v = vol(np.array([[[1.2e-3, 0.9e-3]]]))
    out = gaussian_normalize(v, stats)
    assert out.values[0, 0, 0] == 0.0
    assert out.values[0, 0, 1] == pytest.approx(-1.0, rel=1e-12)


def test_patient_scope_gives_unit_std():
    v = vol(RNG.normal(3.0, 2.0, size=(8, 8, 4)))
    m = Mask3D((RNG.random((8, 8, 4)) > 0.4).astype(np.uint8), (1, 1, 1))
    stats = compute_stats([v], [m], "patient", "adc")
    z = gaussian_normalize(v, stats, m)
    sel = z.values[m.values > 0]
    assert abs(sel.std() - 1.0) < 1e-9
    assert abs(sel.mean()) < 1e-9


def test_gaussian_round_trip():
    stats = NormalizationStats(700.0, 150.0, "global", "hbv")
    v = vol(RNG.uniform(100, 2000, (5, 5, 3)))
    z = gaussian_normalize(v, stats)
    back = z.values * stats.std + stats.mean
    assert np.allclose(back, v.values, rtol=1e-7)


def test_compute_stats_examples():
    v = vol(np.array([1.0, 2.0, 3.0]).reshape(3, 1, 1))
    m = Mask3D(np.ones((3, 1, 1), np.uint8), (1, 1, 1))
    s = compute_stats([v], [m], "patient", "t2w")
    assert s.mean == 2.0
    assert s.std == pytest.approx(0.816496580927726, rel=1e-12)

    v1 = vol(np.array([1.0, 2.0]).reshape(2, 1, 1))
    v2 = vol(np.array([3.0, 4.0]).reshape(2, 1, 1))
    m2 = Mask3D(np.ones((2, 1, 1), np.uint8), (1, 1, 1))
    g = compute_stats([v1, v2], [m2, m2], "global", "t2w")
    assert g.mean == 2.5


def test_global_mean_is_count_weighted():
    vols, masks, tot, cnt = [], [], 0.0, 0
    for _ in range(5):
        v = RNG.normal(size=(6, 6, 2))
        m = (RNG.random((6, 6, 2)) > 0.5).astype(np.uint8)
        m[0, 0, 0] = 1
        vols.append(vol(v))
        masks.append(Mask3D(m, (1, 1, 1)))
        tot += v[m > 0].sum()
        cnt += int(m.sum())
    g = compute_stats(vols, masks, "global", "adc")
    assert g.mean == pytest.approx(tot / cnt, rel=1e-12)


def test_stats_validation():
    with pytest.raises(InvalidArgumentError):
        NormalizationStats(0.0, 0.0, "global", "adc")
    with pytest.raises(InvalidArgumentError):
        NormalizationStats(0.0, 1.0, "cohort", "adc")
