"""CRC-aided polar codes: construction, list decoding, and simulation."""

from .channel import ChannelConfig, demodulate_llr, modulate, transmit
from .code_spec import (CodeSpec, CrcPolynomial, beta_expansion_weights,
                        build_code_spec, crc_compute, crc_verify, encode,
                        polar_transform, spec_for_rate)
from .cost_models import LatencyModel, OpCounter, charge_ops, complexity_ratio
from .enhance import EnhanceConfig, classify_agreement, enhanced_decode
from .fixedpoint import (FixedPointFormat, QuantizationProfile, profile_for,
                         quantize, saturating_add)
from .gpscl import GpsclEngine, PartitionPlan, gpscl_decode, memory_bits
from .ida import IdaConfig, expected_average_list, select_list_size, \
    small_list_probability
from .presets import ArmConfig, preset
from .scl_core import AttemptTrace, DecodeOptions, ListEngine, scl_decode
from .sim import SimConfig, SimRecord, emit_results, run_sweep

__version__ = "0.1.0"
