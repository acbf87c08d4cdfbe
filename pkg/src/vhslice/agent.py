"""Soft actor-critic over a one-dimensional inter-slice split action.

The actor outputs a squashed-Gaussian policy: a tanh of a reparametrised
normal whose log-density includes the exact change-of-variables correction.
Twin critics with Polyak-averaged targets bootstrap the soft value; the
entropy coefficient is either fixed or auto-tuned toward a target entropy.
All gradients are assembled by hand on top of :class:`vhslice.nn.Mlp`.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass

import numpy as np

from .config import SacConfig
from .nn import Adam, Mlp, load_mlp, polyak_update, save_mlp

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class SlicingAction:
    """A policy sample plus its resource-block realisation."""

    raw: float
    haptic_rbs: int
    video_rbs: int


def map_action(raw: float, num_rbs: int, min_rbs: int = 1) -> tuple[int, int]:
    """Map a squashed action in [-1, 1] to an RB split.

    The haptic slice receives ``round((raw + 1) / 2 * num_rbs)`` clamped to
    ``[min_rbs, num_rbs - min_rbs]``; the video slice gets the rest, so the
    full band is always assigned.
    """
    if num_rbs < 2 * min_rbs:
        raise ValueError("num_rbs must allow min_rbs per slice")
    haptic = int(np.rint((raw + 1.0) / 2.0 * num_rbs))
    haptic = max(min_rbs, min(num_rbs - min_rbs, haptic))
    return haptic, num_rbs - haptic


@dataclass(frozen=True)
class LossReport:
    critic1_loss: float
    critic2_loss: float
    actor_loss: float
    entropy_coeff: float
    policy_entropy: float


class ReplayBuffer:
    """Fixed-capacity ring of transitions with uniform resampling."""

    def __init__(self, capacity: int, obs_dim: int, action_dim: int = 1):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_dim))
        self.action = np.zeros((capacity, action_dim))
        self.reward = np.zeros(capacity)
        self.next_obs = np.zeros((capacity, obs_dim))
        self.done = np.zeros(capacity)
        self.size = 0
        self.pos = 0

    def store(self, obs, action, reward, next_obs, done) -> None:
        i = self.pos
        self.obs[i] = obs
        self.action[i] = action
        self.reward[i] = reward
        self.next_obs[i] = next_obs
        self.done[i] = float(done)
        self.pos = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, rng: np.random.Generator, batch_size: int) -> dict:
        """Uniform sample with replacement; needs at least a batch stored."""
        if self.size < batch_size:
            raise ValueError(
                f"buffer holds {self.size} transitions, need {batch_size}")
        idx = rng.integers(0, self.size, size=batch_size)
        return {
            "obs": self.obs[idx],
            "action": self.action[idx],
            "reward": self.reward[idx],
            "next_obs": self.next_obs[idx],
            "done": self.done[idx],
        }


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def _tanh_log_jacobian(u: np.ndarray) -> np.ndarray:
    """log(1 - tanh(u)^2), evaluated stably."""
    return 2.0 * (np.log(2.0) - u - _softplus(-2.0 * u))


class SacAgent:
    """SAC over observations of the slice KPIs, acting on the RB split."""

    def __init__(self, cfg: SacConfig, obs_dim: int, num_rbs: int,
                 min_rbs: int = 1, seed=0, action_dim: int = 1):
        self.cfg = cfg
        self.obs_dim = obs_dim
        self.action_dim = action_dim
        self.num_rbs = num_rbs
        self.min_rbs = min_rbs

        seeds = np.random.SeedSequence(seed).spawn(5)
        self.actor = Mlp((obs_dim, *cfg.hidden, 2 * action_dim), seed=seeds[0])
        self.q1 = Mlp((obs_dim + action_dim, *cfg.hidden, 1), seed=seeds[1])
        self.q2 = Mlp((obs_dim + action_dim, *cfg.hidden, 1), seed=seeds[2])
        self.q1_target = self.q1.copy()
        self.q2_target = self.q2.copy()
        self._act_rng = np.random.default_rng(seeds[3])
        self._update_rng = np.random.default_rng(seeds[4])

        adam = dict(beta1=cfg.adam_beta1, beta2=cfg.adam_beta2, eps=cfg.adam_eps)
        self._actor_opt = Adam(self.actor.parameters(), cfg.learning_rate, **adam)
        self._q1_opt = Adam(self.q1.parameters(), cfg.learning_rate, **adam)
        self._q2_opt = Adam(self.q2.parameters(), cfg.learning_rate, **adam)

        self._auto_entropy = cfg.entropy_coeff is None
        if self._auto_entropy:
            self._log_ec = np.array([cfg.init_log_entropy_coeff])
            self._ec_opt = Adam([self._log_ec], cfg.learning_rate, **adam)
        else:
            self._log_ec = None

        self.buffer = ReplayBuffer(cfg.buffer_capacity, obs_dim, action_dim)
        self.updates_done = 0

    @property
    def entropy_coeff(self) -> float:
        if self._auto_entropy:
            return float(np.exp(self._log_ec[0]))
        return float(self.cfg.entropy_coeff)

    def set_target_entropy(self, value: float) -> None:
        """Retarget the entropy dual mid-training (anneal schedules)."""
        if not self._auto_entropy:
            raise ValueError("entropy coefficient is fixed, not auto-tuned")
        self.cfg = dataclasses.replace(self.cfg, target_entropy=float(value))

    def _policy(self, obs: np.ndarray):
        """Forward the actor; returns (mean, log_std, raw_log_std)."""
        out = self.actor.forward(obs)
        mean = out[..., :self.action_dim]
        raw = out[..., self.action_dim:]
        log_std = np.clip(raw, self.cfg.log_std_min, self.cfg.log_std_max)
        return mean, log_std, raw

    def act(self, obs, deterministic: bool = False) -> SlicingAction:
        obs = np.asarray(obs, dtype=np.float64)
        mean, log_std, _ = self._policy(obs[None, :])
        if deterministic:
            u = mean
        else:
            eps = self._act_rng.standard_normal((1, self.action_dim))
            u = mean + np.exp(log_std) * eps
        raw = float(np.tanh(u)[0, 0])
        haptic, video = map_action(raw, self.num_rbs, self.min_rbs)
        return SlicingAction(raw=raw, haptic_rbs=haptic, video_rbs=video)

    def store(self, obs, raw_action, reward, next_obs, done=False) -> None:
        self.buffer.store(obs, np.atleast_1d(raw_action), reward, next_obs, done)

    def _sample_squashed(self, obs: np.ndarray, rng: np.random.Generator):
        """Reparametrised policy sample with log-probability and internals."""
        mean, log_std, raw = self._policy(obs)
        std = np.exp(log_std)
        eps = rng.standard_normal(mean.shape)
        u = mean + std * eps
        action = np.tanh(u)
        logp = (-log_std - 0.5 * eps * eps - 0.5 * LOG_2PI
                - _tanh_log_jacobian(u)).sum(axis=1)
        return action, logp, mean, log_std, raw, std, eps

    def critic_target(self, batch: dict) -> np.ndarray:
        """Soft one-step target: r + gamma * (1-done) * (minQ' - ec * logp')."""
        a2, logp2, *_ = self._sample_squashed(batch["next_obs"],
                                              self._update_rng)
        x2 = np.concatenate([batch["next_obs"], a2], axis=1)
        q1t = self.q1_target.forward(x2)[:, 0]
        q2t = self.q2_target.forward(x2)[:, 0]
        soft_value = np.minimum(q1t, q2t) - self.entropy_coeff * logp2
        return batch["reward"] + self.cfg.gamma * (1.0 - batch["done"]) * soft_value

    def _critic_step(self, critic: Mlp, opt: Adam, x: np.ndarray,
                     y: np.ndarray) -> float:
        pred = critic.forward(x)[:, 0]
        err = pred - y
        loss = float(np.mean(err * err))
        upstream = (2.0 * err / err.shape[0])[:, None]
        grads, _ = critic.backward(upstream)
        opt.step(critic.parameters(), grads)
        return loss

    def update(self) -> LossReport:
        """One gradient step on critics, actor, and entropy coefficient."""
        cfg = self.cfg
        batch = self.buffer.sample(self._update_rng, cfg.batch_size)
        y = self.critic_target(batch)

        x = np.concatenate([batch["obs"], batch["action"]], axis=1)
        c1 = self._critic_step(self.q1, self._q1_opt, x, y)
        c2 = self._critic_step(self.q2, self._q2_opt, x, y)

        # Actor: minimise E[ec * logp - min_i Qi(s, a)] with a reparametrised.
        obs = batch["obs"]
        n = obs.shape[0]
        action, logp, mean, log_std, raw, std, eps = self._sample_squashed(
            obs, self._update_rng)
        xa = np.concatenate([obs, action], axis=1)
        q1 = self.q1.forward(xa)[:, 0]
        q2 = self.q2.forward(xa)[:, 0]
        use_q1 = q1 <= q2
        qmin = np.where(use_q1, q1, q2)
        ec = self.entropy_coeff
        actor_loss = float(np.mean(ec * logp - qmin))

        up1 = (-use_q1.astype(np.float64) / n)[:, None]
        up2 = (-(~use_q1).astype(np.float64) / n)[:, None]
        _, gin1 = self.q1.backward(up1)
        _, gin2 = self.q2.backward(up2)
        # d(actor_loss)/d(action), already averaged over the batch.
        g_action = gin1[:, self.obs_dim:] + gin2[:, self.obs_dim:]

        one_m_a2 = 1.0 - action * action
        dlogp_dmean = 2.0 * action
        dlogp_dlogstd = -1.0 + 2.0 * action * std * eps
        g_mean = (ec / n) * dlogp_dmean + g_action * one_m_a2
        g_logstd = (ec / n) * dlogp_dlogstd + g_action * one_m_a2 * std * eps
        # Gradient through the log-std clamp is zero outside its range.
        in_range = (raw > cfg.log_std_min) & (raw < cfg.log_std_max)
        g_logstd = g_logstd * in_range
        upstream = np.concatenate([g_mean, g_logstd], axis=1)
        grads, _ = self.actor.backward(upstream)
        self._actor_opt.step(self.actor.parameters(), grads)

        if self._auto_entropy:
            g_log_ec = np.array([-float(np.mean(logp + cfg.target_entropy))])
            self._ec_opt.step([self._log_ec], [g_log_ec])

        polyak_update(self.q1_target, self.q1, cfg.polyak)
        polyak_update(self.q2_target, self.q2, cfg.polyak)
        self.updates_done += 1
        return LossReport(
            critic1_loss=c1,
            critic2_loss=c2,
            actor_loss=actor_loss,
            entropy_coeff=ec,
            policy_entropy=float(-np.mean(logp)),
        )

    def ready_to_update(self) -> bool:
        start = self.cfg.update_start
        if start is None:
            start = self.cfg.batch_size
        return self.buffer.size >= max(start, self.cfg.batch_size)

    # -- checkpointing -------------------------------------------------

    def save(self, directory: str) -> None:
        """Write networks, optimiser state, and buffer metadata."""
        os.makedirs(directory, exist_ok=True)
        save_mlp(os.path.join(directory, "actor.npz"), self.actor)
        save_mlp(os.path.join(directory, "q1.npz"), self.q1)
        save_mlp(os.path.join(directory, "q2.npz"), self.q2)
        save_mlp(os.path.join(directory, "q1_target.npz"), self.q1_target)
        save_mlp(os.path.join(directory, "q2_target.npz"), self.q2_target)
        extras = {}
        if self._auto_entropy:
            extras["log_ec"] = self._log_ec
        for name, opt in self._optimizers().items():
            extras[f"{name}_t"] = np.array([opt.t], dtype=np.int64)
            for j, arr in enumerate(opt.state_arrays()):
                extras[f"{name}_s{j}"] = arr
        np.savez(os.path.join(directory, "extras.npz"), **extras)
        meta = {
            "obs_dim": self.obs_dim,
            "action_dim": self.action_dim,
            "num_rbs": self.num_rbs,
            "min_rbs": self.min_rbs,
            "updates_done": self.updates_done,
            "buffer_size": self.buffer.size,
            "buffer_pos": self.buffer.pos,
            "sac": _sac_config_dict(self.cfg),
        }
        with open(os.path.join(directory, "meta.json"), "w",
                  encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)

    def _optimizers(self) -> dict[str, Adam]:
        opts = {"actor": self._actor_opt, "q1": self._q1_opt, "q2": self._q2_opt}
        if self._auto_entropy:
            opts["ec"] = self._ec_opt
        return opts

    @classmethod
    def load(cls, directory: str, seed=0) -> "SacAgent":
        with open(os.path.join(directory, "meta.json"), encoding="utf-8") as fh:
            meta = json.load(fh)
        cfg_data = dict(meta["sac"])
        cfg_data["hidden"] = tuple(cfg_data["hidden"])
        cfg = SacConfig(**cfg_data)
        agent = cls(cfg, meta["obs_dim"], meta["num_rbs"], meta["min_rbs"],
                    seed=seed, action_dim=meta["action_dim"])
        agent.actor = load_mlp(os.path.join(directory, "actor.npz"))
        agent.q1 = load_mlp(os.path.join(directory, "q1.npz"))
        agent.q2 = load_mlp(os.path.join(directory, "q2.npz"))
        agent.q1_target = load_mlp(os.path.join(directory, "q1_target.npz"))
        agent.q2_target = load_mlp(os.path.join(directory, "q2_target.npz"))
        with np.load(os.path.join(directory, "extras.npz")) as extras:
            if agent._auto_entropy and "log_ec" in extras:
                agent._log_ec[:] = extras["log_ec"]
            # Re-bind optimisers to the loaded parameter arrays.
            adam = dict(beta1=cfg.adam_beta1, beta2=cfg.adam_beta2,
                        eps=cfg.adam_eps)
            agent._actor_opt = Adam(agent.actor.parameters(),
                                    cfg.learning_rate, **adam)
            agent._q1_opt = Adam(agent.q1.parameters(), cfg.learning_rate, **adam)
            agent._q2_opt = Adam(agent.q2.parameters(), cfg.learning_rate, **adam)
            if agent._auto_entropy:
                agent._ec_opt = Adam([agent._log_ec], cfg.learning_rate, **adam)
            for name, opt in agent._optimizers().items():
                key = f"{name}_t"
                if key in extras:
                    opt.t = int(extras[key][0])
                    state = opt.state_arrays()
                    for j, arr in enumerate(state):
                        arr[:] = extras[f"{name}_s{j}"].reshape(arr.shape)
        agent.updates_done = int(meta["updates_done"])
        return agent


def _sac_config_dict(cfg: SacConfig) -> dict:
    data = dataclasses.asdict(cfg)
    data["hidden"] = list(cfg.hidden)
    return data
