"""Lock-step episodic task interface and episode runner."""
from __future__ import annotations

from typing import Any, Callable

from ..model_core import ValidationError


class EpisodeFinished(ValidationError):
    """``step`` was called on a finished episode without ``reset``."""


class EpisodicTask:
    """Base class: subclasses implement ``_reset`` and ``_step``.

    The task waits for one action per step and answers with
    ``(observation, reward, done)``; the accumulated reward is
    ``episode_score``.
    """

    def __init__(self):
        self.episode_score = 0.0
        self.done = True

    def reset(self) -> Any:
        self.episode_score = 0.0
        self.done = False
        return self._reset()

    def step(self, action) -> tuple[Any, float, bool]:
        if self.done:
            raise EpisodeFinished("episode is over; call reset() first")
        obs, reward, done = self._step(action)
        self.episode_score += float(reward)
        self.done = bool(done)
        return obs, float(reward), self.done

    def _reset(self):
        raise NotImplementedError

    def _step(self, action):
        raise NotImplementedError


class ConstantRewardTask(EpisodicTask):
    """Fixed-length episode paying the same reward every step."""

    def __init__(self, length: int = 1, reward: float = 1.0):
        super().__init__()
        self.length, self.reward = length, reward
        self._t = 0

    def _reset(self):
        self._t = 0
        return 0

    def _step(self, action):
        self._t += 1
        return self._t, self.reward, self._t >= self.length


def run_episode(task: EpisodicTask, policy: Callable[[Any], Any]) -> float:
    obs = task.reset()
    done = False
    while not done:
        obs, _, done = task.step(policy(obs))
    return task.episode_score
