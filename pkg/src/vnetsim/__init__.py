"""vnetsim: joint driving/network-selection simulator on a two-lane corridor.

Autonomous vehicles circulate on a ring corridor served by sub-6GHz and THz
base stations. Tabular Q-learning and a from-scratch deep Q-network jointly
pick driving maneuvers and network-selection modes against transportation
and telecommunication rewards.
"""

__version__ = "0.1.0"

from .channel import (
    RfParams,
    ThzParams,
    LinkGeometry,
    ChannelDraw,
    rf_constant,
    thz_constant,
    rf_sinr,
    thz_sinr,
    thz_noise,
    antenna_gain,
    sample_alignment,
    sample_fading,
    link_rate,
)
from .road import RoadConfig, DrivingAction, World, deploy
from .env import (
    VNetEnv,
    TelecomAction,
    ActionPair,
    Observation,
    DiscreteState,
    RewardWeights,
    AssociationState,
    discretize,
    weighted_rate,
    handoff_penalty,
    rank_bs,
    select_bs,
    reward_tran,
    reward_tele,
    N_STATES,
    N_ACTIONS,
)
