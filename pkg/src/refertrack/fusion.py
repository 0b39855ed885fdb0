"""Early cross-modal fusion on dense matrices, at toy scale.

The kernel projects visual tokens (plus positions) to queries and text
tokens to keys/values, scores every visual-text pair with a scaled dot
product, mixes the text values by those scores, and adds the result back
onto the visual tokens:

    fused = (Q @ K.T / sqrt(d)) @ V + visual

The similarity matrix is deliberately NOT normalized: ``softmax=True``
switches on a softmax over the text axis as a clearly non-canonical
variant for experiments. Projections are bias-free.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class FusionInput:
    """Visual tokens (HW, d), text tokens (L, d), their position embeddings,
    and the three projection matrices (d, d), applied row-wise (x @ W)."""

    visual: np.ndarray
    linguistic: np.ndarray
    pos_visual: np.ndarray
    pos_linguistic: np.ndarray
    w_q: np.ndarray
    w_k: np.ndarray
    w_v: np.ndarray

    def __post_init__(self) -> None:
        v, s = self.visual, self.linguistic
        if v.ndim != 2 or s.ndim != 2:
            raise ValueError("visual and linguistic features must be 2-D")
        d = v.shape[1]
        if d < 1:
            raise ValueError("feature dimension must be positive")
        if s.shape[1] != d:
            raise ValueError(f"text feature dim {s.shape[1]} != visual dim {d}")
        if self.pos_visual.shape != v.shape:
            raise ValueError(f"pos_visual shape {self.pos_visual.shape} != {v.shape}")
        if self.pos_linguistic.shape != s.shape:
            raise ValueError(f"pos_linguistic shape {self.pos_linguistic.shape} != {s.shape}")
        for name in ("w_q", "w_k", "w_v"):
            w = getattr(self, name)
            if w.shape != (d, d):
                raise ValueError(f"{name} shape {w.shape} != ({d}, {d})")

    @property
    def dim(self) -> int:
        return self.visual.shape[1]


def early_fuse(inputs: FusionInput, softmax: bool = False) -> np.ndarray:
    """Vision-conditioned text features added residually onto the visual tokens.

    Output shape equals ``inputs.visual``. With a zero text projection the
    attention term vanishes and the visual input passes through unchanged.
    """
    q = (inputs.visual + inputs.pos_visual) @ inputs.w_q
    k = (inputs.linguistic + inputs.pos_linguistic) @ inputs.w_k
    v = inputs.linguistic @ inputs.w_v
    sim = (q @ k.T) / np.sqrt(float(inputs.dim))
    if softmax:
        sim = sim - sim.max(axis=1, keepdims=True)
        sim = np.exp(sim)
        sim /= sim.sum(axis=1, keepdims=True)
    return sim @ v + inputs.visual


def sinusoidal_pos(shape: int | tuple[int, int], d: int) -> np.ndarray:
    """Deterministic sine/cosine position embedding, values in [-1, 1].

    For an integer length L the result is (L, d) with interleaved
    sin/cos pairs at geometrically spaced frequencies; d must be even.
    For a (H, W) grid the result is (H*W, d) with the first half of the
    channels encoding the row and the second half the column; d must be
    divisible by 4.
    """
    if d <= 0 or d % 2 != 0:
        raise ValueError(f"embedding dim must be even and positive, got {d}")
    if isinstance(shape, tuple):
        h, w = shape
        if d % 4 != 0:
            raise ValueError(f"2-D embedding needs d divisible by 4, got {d}")
        half = d // 2
        rows = sinusoidal_pos(h, half)  # (H, half)
        cols = sinusoidal_pos(w, half)  # (W, half)
        out = np.empty((h * w, d))
        for i in range(h):
            for j in range(w):
                out[i * w + j, :half] = rows[i]
                out[i * w + j, half:] = cols[j]
        return out
    length = int(shape)
    positions = np.arange(length, dtype=float)[:, None]
    freq = np.power(10000.0, -np.arange(0, d, 2, dtype=float) / d)[None, :]
    angles = positions * freq
    out = np.empty((length, d))
    out[:, 0::2] = np.sin(angles)
    out[:, 1::2] = np.cos(angles)
    return out


def numeric_grad(
    f: Callable[[np.ndarray], float], x: np.ndarray, step: float = 1e-5
) -> np.ndarray:
    """Central-difference gradient of a scalar function, entry by entry."""
    grad = np.empty_like(x, dtype=float)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        bumped = x.astype(float, copy=True)
        bumped[idx] += step
        hi = f(bumped)
        bumped[idx] -= 2.0 * step
        lo = f(bumped)
        if not np.isfinite(hi) or not np.isfinite(lo):
            raise ValueError(f"function not finite near entry {idx}")
        grad[idx] = (hi - lo) / (2.0 * step)
    return grad
