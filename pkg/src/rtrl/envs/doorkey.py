"""Grid world split by a locked door: fetch the key, open the door, reach the goal.

The observation is an egocentric (2*size-3) x (2*size-3) window, one-hot
over six cell types plus a carrying bit, with the agent at the bottom
centre of the window facing up.  Cells outside the grid read as wall and
there is no occlusion, so the window is a plain rigid-transform crop.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..numerics.rng import RngStream
from .core import Discrete, Env, EnvSpec

import numpy as np

__all__ = ["Layout", "sample_layout", "DoorKeyEnv"]

# 0 east, 1 south, 2 west, 3 north; y grows downward.
DIR_VEC = ((1, 0), (0, 1), (-1, 0), (0, -1))
CELL_TYPES = ("empty", "wall", "key", "door_closed", "door_open", "goal")
TYPE_INDEX = {name: i for i, name in enumerate(CELL_TYPES)}
ACTIONS = ("left", "right", "forward", "pickup", "toggle")


@dataclass(frozen=True)
class Layout:
    size: int
    wall_x: int
    door_y: int
    key_pos: tuple[int, int]
    agent_pos: tuple[int, int]
    agent_dir: int


def sample_layout(rng: RngStream, size: int) -> Layout:
    wall_x = int(rng.integers(2, size - 2)) if size > 5 else 2
    door_y = int(rng.integers(1, size - 1))
    left_cells = [(x, y) for x in range(1, wall_x) for y in range(1, size - 1)]
    ki = int(rng.integers(len(left_cells)))
    key_pos = left_cells[ki]
    rest = [c for c in left_cells if c != key_pos]
    agent_pos = rest[int(rng.integers(len(rest)))]
    return Layout(size, wall_x, door_y, key_pos, agent_pos, int(rng.integers(4)))


class DoorKeyEnv(Env):
    def __init__(self, size: int = 5, max_steps: int | None = None, seed: int = 0):
        if size < 5:
            raise ValueError("size must be >= 5 to fit wall, key and goal")
        self.size = size
        self.view = 2 * size - 3
        obs_dim = self.view * self.view * len(CELL_TYPES) + 1
        self.spec = EnvSpec(
            obs_dim=obs_dim,
            action_space=Discrete(len(ACTIONS)),
            max_steps=max_steps if max_steps is not None else 10 * size * size,
        )
        self._seed = seed
        self._rng = RngStream(seed).substream("doorkey")
        self.layout: Layout | None = None
        self._done = True
        # window coordinate offsets per facing direction, padded by V so any
        # window cell indexes inside the wall margin
        V, c = self.view, self.view // 2
        vy, vx = np.mgrid[0:V, 0:V]
        self._off = []
        for d in range(4):
            f, r = DIR_VEC[d], DIR_VEC[(d + 1) % 4]
            self._off.append((f[1] * (V - 1 - vy) + r[1] * (vx - c) + V,
                              f[0] * (V - 1 - vy) + r[0] * (vx - c) + V))
        self._eye = np.eye(len(CELL_TYPES))
        self._pad_base: np.ndarray | None = None

    # -- state ---------------------------------------------------------------

    def reset(self, seed: int | None = None) -> np.ndarray:
        if seed is not None:
            self._seed = seed
            self._rng = RngStream(seed).substream("doorkey")
        return self.reset_to(sample_layout(self._rng.substream("layout"), self.size))

    def reset_to(self, layout: Layout) -> np.ndarray:
        """Start an episode from an explicit layout (used by the trajectory oracle)."""
        self.layout = layout
        self.agent_pos = layout.agent_pos
        self.agent_dir = layout.agent_dir
        self.carrying = False
        self.door_open = False
        self.key_present = True
        self._steps = 0
        self._done = False
        n, V = self.size, self.view
        pad = np.full((n + 2 * V, n + 2 * V), TYPE_INDEX["wall"], dtype=np.intp)
        inner = np.full((n, n), TYPE_INDEX["empty"], dtype=np.intp)
        inner[:, 0] = inner[:, -1] = inner[0, :] = inner[-1, :] = TYPE_INDEX["wall"]
        inner[:, layout.wall_x] = TYPE_INDEX["wall"]
        inner[n - 2, n - 2] = TYPE_INDEX["goal"]
        pad[V:V + n, V:V + n] = inner
        self._pad_base = pad
        return self._obs()

    def _cell(self, x: int, y: int) -> str:
        n, lay = self.size, self.layout
        if not (0 <= x < n and 0 <= y < n):
            return "wall"
        if x == 0 or y == 0 or x == n - 1 or y == n - 1:
            return "wall"
        if (x, y) == (lay.wall_x, lay.door_y):
            return "door_open" if self.door_open else "door_closed"
        if x == lay.wall_x:
            return "wall"
        if self.key_present and (x, y) == lay.key_pos:
            return "key"
        if (x, y) == (n - 2, n - 2):
            return "goal"
        return "empty"

    def _obs(self) -> np.ndarray:
        V, lay = self.view, self.layout
        pad = self._pad_base.copy()
        pad[V + lay.door_y, V + lay.wall_x] = TYPE_INDEX["door_open" if self.door_open else "door_closed"]
        if self.key_present:
            pad[V + lay.key_pos[1], V + lay.key_pos[0]] = TYPE_INDEX["key"]
        oy, ox = self._off[self.agent_dir]
        grid = self._eye[pad[self.agent_pos[1] + oy, self.agent_pos[0] + ox]]
        return np.concatenate([grid.reshape(-1), [1.0 if self.carrying else 0.0]])

    # -- dynamics ------------------------------------------------------------

    def step(self, action):
        self._guard_not_done(self._done)
        a = int(action)
        if not 0 <= a < len(ACTIONS):
            raise ValueError(f"action {a} outside 0..{len(ACTIONS) - 1}")
        self._steps += 1
        reward = 0.0
        name = ACTIONS[a]
        fx = self.agent_pos[0] + DIR_VEC[self.agent_dir][0]
        fy = self.agent_pos[1] + DIR_VEC[self.agent_dir][1]
        if name == "left":
            self.agent_dir = (self.agent_dir - 1) % 4
        elif name == "right":
            self.agent_dir = (self.agent_dir + 1) % 4
        elif name == "forward":
            cell = self._cell(fx, fy)
            if cell in ("empty", "door_open", "goal"):
                self.agent_pos = (fx, fy)
            if cell == "goal":
                reward = 1.0 - 0.9 * self._steps / self.spec.max_steps
                self._done = True
        elif name == "pickup":
            if self._cell(fx, fy) == "key" and not self.carrying:
                self.carrying = True
                self.key_present = False
        elif name == "toggle":
            # A door only responds while the key is held.
            if self._cell(fx, fy) in ("door_closed", "door_open") and self.carrying:
                self.door_open = not self.door_open
        if self._steps >= self.spec.max_steps:
            self._done = True
        info = {
            "state": None,
            "agent_pos": self.agent_pos,
            "agent_dir": self.agent_dir,
            "carrying": self.carrying,
            "door_open": self.door_open,
        }
        return self._obs(), reward, self._done, info
