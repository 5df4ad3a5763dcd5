"""Ergodic interference alignment on K-user interference channels.

Finite-field protocol simulation, exact finite-field capacity regions and
Monte Carlo evaluation of Gaussian achievable rates and outer bounds.
"""
from .analysis import (RateRegion, equivalent_form, gauss_achievable, gauss_outer_bound,
                       region_contains, sweep_figure, timeshare_split)
from .channels import (ChannelState, FiniteFieldNoiseModel, GaussianChannelConfig,
                       noise_entropy, stream)
from .codec import LinearCode, ProtocolConfig, ProtocolReport, run_protocol
from .finite_field import FieldElement, FieldMatrix, complement_matrix, diagonal_pair
from .scheduler import PairingPlan, Quantizer, build_pairing, effective_snr, quantize
from .typicality import count_types, is_delta_typical, lemma1_bound

__version__ = "0.1.0"
