"""Soft-output GRAND: list decoding with calibrated soft output, and iterative
decoding of product and GLDPC codes built from short components."""

from ._backend import NAME as BACKEND
from .channel import AwgnSpec, FadingSpec, awgn_bpsk_llr, es_n0_from_eb_n0, rician_qpsk_llr
from .codes import (CodeConstructionError, GldpcCode, LinearCode, ProductCode, build_crc_code,
                    build_ebch, encode, export_code, extend_even, gldpc_build, import_code,
                    is_codeword, product_encode)
from .grand import DecodeList, LlrFrame, QueryState, decode_list, pattern_probability
from .iterative import IterationTrace, TurboConfig, gldpc_decode, turbo_decode_product
from .softout import (BlockApp, SisoOutput, approx_block_app, bitwise_llr, exact_block_app,
                      forney_app, pyndiah_llr)

__version__ = "0.1.0"
