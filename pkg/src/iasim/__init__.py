"""Link-level simulator for null-space downlink precoding in a two-cell OFDM network."""

from .channel import ChannelProfile, MultipathChannel, NoiseModel
from .config import SimConfig, load_config, parse_config
from .harness import CampaignSummary, TrialRecord, mix_seed, run_campaign, run_trial, sweep
from .ia_core import Candidate, Selection, SystemConfig, UeLink, schedule, symbol_oracle

__version__ = "0.1.0"

__all__ = [
    "CampaignSummary",
    "Candidate",
    "ChannelProfile",
    "MultipathChannel",
    "NoiseModel",
    "Selection",
    "SimConfig",
    "SystemConfig",
    "TrialRecord",
    "UeLink",
    "load_config",
    "mix_seed",
    "parse_config",
    "run_campaign",
    "run_trial",
    "schedule",
    "sweep",
    "symbol_oracle",
]
