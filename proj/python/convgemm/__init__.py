"""Blocked gemm and gemm-backed convolution kernels.

Tensors follow the library's native layout: rank-4 numpy arrays in Fortran
order with axes (k_n, k_h, k_w, c_i) for filters, (h_i, w_i, c_i, b) for
inputs and (k_n, h_o, w_o, b) for outputs. float32 is the performance path;
float64 inputs select the double-precision variants.
"""

from ._core import (
    AllocationFailure,
    BlockingParams,
    ConvParams,
    DimensionMismatch,
    InvalidGeometry,
    IoError,
    LayerResult,
    LayerSpec,
    ModelSpec,
    ParseError,
    conv_direct,
    conv_gemm,
    conv_im2col_gemm,
    convgemm_scratch_bytes,
    gemm,
    gemm_dims,
    im2col,
    im2col_workspace_bytes,
    model_workspace_bytes,
    output_dims,
    parse_model,
    run_inference,
    scratch_peak_bytes,
    scratch_reset_peak,
)

__all__ = [
    "AllocationFailure",
    "BlockingParams",
    "ConvParams",
    "DimensionMismatch",
    "InvalidGeometry",
    "IoError",
    "LayerResult",
    "LayerSpec",
    "ModelSpec",
    "ParseError",
    "conv_direct",
    "conv_gemm",
    "conv_im2col_gemm",
    "convgemm_scratch_bytes",
    "gemm",
    "gemm_dims",
    "im2col",
    "im2col_workspace_bytes",
    "model_workspace_bytes",
    "output_dims",
    "parse_model",
    "run_inference",
    "scratch_peak_bytes",
    "scratch_reset_peak",
]
