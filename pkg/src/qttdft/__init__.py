"""Closed-form quantized tensor-train (MPO) construction of the discrete
Fourier transform, its approximate-QFT counterpart, and QTT vector tools."""

from .aqft_mpo import aqft_entry, aqft_error_bound, aqft_params, assemble_aqft_mpo, build_aqft_core
from .cheb_interp import (
    ChebGrid,
    cardinal_eval,
    ek_bound,
    empirical_ek,
    interpolate,
    lebesgue_bound,
    lebesgue_constant,
    make_grid,
)
from .dft_oracle import block_identity_check, dense_dft, fft
from .qft_mpo import (
    Mpo,
    UnfoldingFactors,
    assemble_qft_mpo,
    build_internal_core,
    build_left_core,
    build_unfolding_factors,
    dft_entry,
    entrywise_error,
    mpo_entry,
    theorem_error_bound,
)
from .qtt_engine import (
    BitString,
    Mps,
    Order,
    apply_mpo,
    bit_reverse,
    dense_to_mps,
    digits_to_index,
    index_to_digits,
    mps_to_dense,
)
from .tensor_core import contract, fold, max_abs, svd_truncate, unfold

__version__ = "0.1.0"
