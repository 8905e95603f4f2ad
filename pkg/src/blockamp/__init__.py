"""Seeded and two-source randomness extraction with Bell-test block amplification."""

from .bits import BitString, ConditionalSource, Distribution, min_entropy, statistical_distance
from .design import WeakDesign, build_weak_design, validate_weak_design
from .devices import DeviceBehavior, honest_ghz_device, honest_hardy_device
from .eat import EatConfig, accumulation_g, certificate, per_round_entropy
from .estimators import (BellBlockTest, SomewhereRandomTransformer, TrevisanExtractor,
                         TwoSourceExtractor)
from .exceptions import (BlockampError, DomainError, InfeasibleConfigError, ParameterError,
                         ResourceError, ValidationError)
from .games import lhv_max_mdl_ghz, lhv_max_mdl_hardy, mdl_ghz_score, mdl_hardy_score, mermin_score
from .protocol import ProtocolConfig, SecurityReport, Transcript, run_protocol
from .srs import SomewhereRandomSource, build_srs, certify_srs
from .trevisan import RSHadamardCode, TrevisanParams, params_for_regime, trevisan_extract
from .two_source import ExtractorMode, RazParams, two_source_extract

__version__ = "0.1.0"
