"""Diffusion-policy learner and deterministic actor baseline for the power split."""
from ssacc.gdm_rl.agent import (Actor, Critic, EnvSource, ReplayBuffer, TrainConfig, TrainResult,
                                TrainingDiverged, actor_update, baseline_train, critic_update,
                                deterministic_action, load_checkpoint, policy_update, save_checkpoint,
                                state_features, train)
from ssacc.gdm_rl.diffusion import (DiffusionPolicy, NoiseSchedule, forward_diffuse, generate_action,
                                    squash, step_embedding)
from ssacc.gdm_rl.nn import Adam, Mlp, MlpSpec

__all__ = [
    "Actor", "Adam", "Critic", "DiffusionPolicy", "EnvSource", "Mlp", "MlpSpec", "NoiseSchedule",
    "ReplayBuffer", "TrainConfig", "TrainResult", "TrainingDiverged", "actor_update", "baseline_train",
    "critic_update", "deterministic_action", "forward_diffuse", "generate_action", "load_checkpoint",
    "policy_update", "save_checkpoint", "squash", "state_features", "step_embedding", "train",
]
