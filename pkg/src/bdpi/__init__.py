"""Bootstrapped Dual Policy Iteration: an actor trained by conservative imitation
of an ensemble of off-policy clipped-Q critics."""

from .actor import Actor, cpi_update, lambda_from_delta, policy_entropy
from .agent import Agent, AgentConfig, EpisodeRecord, run_episode
from .approx import AdamState, MlpFn, TabularFn
from .critic import CriticEnsemble, CriticPair, clipped_value, greedy_distribution
from .env import FrozenLakeEnv, GaussianBandit, TableEnv, make_env
from .harness import run_campaign, sensitivity_score, value_iteration_oracle
from .replay import Experience, ReplayBuffer

__all__ = [
    "Actor", "AdamState", "Agent", "AgentConfig", "CriticEnsemble", "CriticPair",
    "EpisodeRecord", "Experience", "FrozenLakeEnv", "GaussianBandit", "MlpFn",
    "ReplayBuffer", "TableEnv", "TabularFn", "clipped_value", "cpi_update",
    "greedy_distribution", "lambda_from_delta", "make_env", "policy_entropy",
    "run_campaign", "run_episode", "sensitivity_score", "value_iteration_oracle",
]
