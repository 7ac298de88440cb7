"""Group-level Taylor-TD agent: networks, replay, state assembly, action normalization."""

from .checkpoint import load_checkpoint, save_checkpoint
from .mlp import Adam, Mlp, Sgd, make_optimizer, mlp_forward, mlp_gradient
from .replay import PrioritizedReplay, SumTree, Transition, replay_push, replay_sample
from .state import ACTION_DIM, FEATURES, STATE_DIM, GroupSummary, NormalizationRanges, normalize_action, observe_state
from .taylor_td import AgentConfig, TaylorTdAgent, UpdateStats, select_action, sync_targets, taylor_update, td_error

__all__ = [
    "ACTION_DIM", "Adam", "AgentConfig", "FEATURES", "GroupSummary", "Mlp", "NormalizationRanges",
    "PrioritizedReplay", "STATE_DIM", "Sgd", "SumTree", "TaylorTdAgent", "Transition", "UpdateStats",
    "load_checkpoint", "make_optimizer", "mlp_forward", "mlp_gradient", "normalize_action", "observe_state",
    "replay_push", "replay_sample", "save_checkpoint", "select_action", "sync_targets", "taylor_update",
    "td_error",
]
