import pathlib

import numpy as np
import pytest

import convgemm as cg

MODELS = pathlib.Path(__file__).resolve().parents[2] / "models"


def random_case(rng, cap=6):
    while True:
        k_n, k_h, k_w, c_i = (int(rng.integers(1, cap + 1)) for _ in range(4))
        h_i, w_i = (int(rng.integers(1, cap + 1)) for _ in range(2))
        s = int(rng.integers(1, 3))
        p = int(rng.integers(0, 2))
        b = int(rng.integers(1, 3))
        if h_i - k_h + 2 * p >= 0 and w_i - k_w + 2 * p >= 0:
            break
    cp = cg.ConvParams(k_n=k_n, k_h=k_h, k_w=k_w, c_i=c_i, h_i=h_i, w_i=w_i, b=b, s=s, p=p)
    filters = rng.uniform(-1, 1, size=(k_n, k_h, k_w, c_i)).astype(np.float32, order="F")
    image = rng.uniform(-1, 1, size=(h_i, w_i, c_i, b)).astype(np.float32, order="F")
    return cp, np.asfortranarray(filters), np.asfortranarray(image)


def test_dims_functions():
    cp = cg.ConvParams(k_n=64, k_h=11, k_w=11, c_i=3, h_i=224, w_i=224, b=2, s=4, p=0)
    assert cg.output_dims(cp) == (54, 54)
    assert cg.gemm_dims(cp) == (64, 2916 * 2, 363)
    with pytest.raises(cg.InvalidGeometry):
        cg.output_dims(cg.ConvParams(k_n=1, k_h=9, k_w=1, c_i=1, h_i=4, w_i=4))


def test_conv_backends_agree():
    rng = np.random.default_rng(7)
    for _ in range(10):
        cp, filters, image = random_case(rng)
        ref = cg.conv_direct(filters, image, cp)
        fused = cg.conv_gemm(filters, image, cp, threads=2)
        two_stage = cg.conv_im2col_gemm(filters, image, cp)
        assert ref.shape == fused.shape
        np.testing.assert_allclose(fused, ref, rtol=0, atol=1e-5 * max(1.0, np.abs(ref).max()))
        assert np.array_equal(fused, two_stage)  # same engine, bit-identical


def test_double_precision_is_exact():
    rng = np.random.default_rng(11)
    cp, filters, image = random_case(rng)
    f64, i64 = filters.astype(np.float64), image.astype(np.float64)
    ref = cg.conv_direct(f64, i64, cp)
    fused = cg.conv_gemm(f64, i64, cp)
    assert fused.dtype == np.float64
    assert np.array_equal(fused, ref)


def test_gemm_against_numpy():
    rng = np.random.default_rng(13)
    a = np.asfortranarray(rng.uniform(-1, 1, size=(17, 29)))
    b = np.asfortranarray(rng.uniform(-1, 1, size=(29, 23)))
    c = cg.gemm(a, b, threads=2)
    np.testing.assert_allclose(c, a @ b, rtol=1e-12, atol=1e-12)


def test_im2col_shape_and_values():
    rng = np.random.default_rng(17)
    cp, _, image = random_case(rng)
    lowered = cg.im2col(image, cp)
    m, n, k = cg.gemm_dims(cp)
    assert lowered.shape == (k, n)
    assert cg.im2col_workspace_bytes(cp) == 4 * k * n


def test_model_parsing_and_workspace():
    model = cg.parse_model(str(MODELS / "alexnet.model"))
    assert len(model.layers) == 11
    kinds = [layer.kind for layer in model.layers]
    assert kinds.count("conv") == 5 and kinds.count("fc") == 3 and kinds.count("pool") == 3
    assert cg.model_workspace_bytes(model, 1) == 16646400
    vgg = cg.parse_model(str(MODELS / "vgg16.model"))
    assert cg.model_workspace_bytes(vgg, 1) == 115605504


def test_run_inference_smoke():
    model = cg.parse_model(str(MODELS / "alexnet.model"))
    results = cg.run_inference(model, batch=1, algo="convgemm", threads=2, min_time=0.0)
    conv_rows = [r for r in results if r.kind == "conv"]
    assert [(r.m, r.n, r.k) for r in conv_rows] == [
        (64, 2916, 363),
        (192, 2601, 1600),
        (384, 625, 1728),
        (384, 121, 3456),
        (256, 121, 3456),
    ]
    assert all(r.time_s > 0 for r in results)


def test_fused_scratch_stays_within_the_panels():
    rng = np.random.default_rng(19)
    cp, filters, image = random_case(rng)
    bp = cg.BlockingParams()
    cg.scratch_reset_peak()
    cg.conv_gemm(filters, image, cp, blocking=bp)
    assert cg.scratch_peak_bytes() <= cg.convgemm_scratch_bytes(bp)
