"""Minimal float64 MLP with manual backprop, Adam, and Polyak averaging.

Forward caches activations on the instance; ``backward`` consumes the cache
and returns both parameter gradients and the gradient with respect to the
input batch (the latter is what lets a policy update flow through a critic).
Checkpoints round-trip exactly: parameters are stored as raw float64 arrays.
"""

from __future__ import annotations

import numpy as np


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


class Mlp:
    """Fully connected net, ReLU hidden activations, linear output.

    Hidden weights use He initialisation; the output layer uses a
    1/sqrt(fan_in) scale.  All math is float64.
    """

    def __init__(self, layer_sizes, seed=0, init: bool = True):
        sizes = tuple(int(s) for s in layer_sizes)
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ValueError("layer_sizes needs >= 2 entries, all >= 1")
        self.sizes = sizes
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        rng = np.random.default_rng(seed)
        for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            if init:
                last = i == len(sizes) - 2
                scale = np.sqrt(1.0 / fan_in) if last else np.sqrt(2.0 / fan_in)
                w = rng.normal(0.0, scale, size=(fan_in, fan_out))
            else:
                w = np.zeros((fan_in, fan_out))
            self.weights.append(w)
            self.biases.append(np.zeros(fan_out))
        self._cache: tuple | None = None

    @property
    def num_layers(self) -> int:
        return len(self.weights)

    def parameters(self) -> list[np.ndarray]:
        """Flat parameter list [W0, b0, W1, b1, ...] (live views)."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 1
        if squeeze:
            x = x[None, :]
        if x.shape[1] != self.sizes[0]:
            raise ValueError(f"input dim {x.shape[1]} != {self.sizes[0]}")
        activations = [x]
        h = x
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            h = z if i == self.num_layers - 1 else relu(z)
            activations.append(h)
        self._cache = tuple(activations)
        return h[0] if squeeze else h

    def backward(self, grad_output: np.ndarray):
        """Backprop the cached forward pass.

        Returns ``(param_grads, grad_input)`` with ``param_grads`` matching
        :meth:`parameters` order.
        """
        if self._cache is None:
            raise RuntimeError("backward called before forward")
        activations = self._cache
        g = np.asarray(grad_output, dtype=np.float64)
        if g.ndim == 1:
            g = g[None, :]
        if g.shape != activations[-1].shape:
            raise ValueError(
                f"grad_output shape {g.shape} != output shape "
                f"{activations[-1].shape}")
        param_grads: list[np.ndarray | None] = [None] * (2 * self.num_layers)
        for i in range(self.num_layers - 1, -1, -1):
            if i != self.num_layers - 1:
                # ReLU mask: activations[i + 1] is the post-ReLU output.
                g = g * (activations[i + 1] > 0)
            param_grads[2 * i] = activations[i].T @ g
            param_grads[2 * i + 1] = g.sum(axis=0)
            g = g @ self.weights[i].T
        return param_grads, g

    def copy(self) -> "Mlp":
        clone = Mlp(self.sizes, init=False)
        for i in range(self.num_layers):
            clone.weights[i] = self.weights[i].copy()
            clone.biases[i] = self.biases[i].copy()
        return clone


class Adam:
    """Adam with bias correction, updating a fixed list of arrays in place."""

    def __init__(self, params: list[np.ndarray], learning_rate: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m = [np.zeros_like(p) for p in params]
        self._v = [np.zeros_like(p) for p in params]

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        if len(params) != len(self._m) or len(grads) != len(self._m):
            raise ValueError("params/grads length mismatch")
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self._m, self._v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * np.square(g)
            p -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)

    def state_arrays(self) -> list[np.ndarray]:
        return self._m + self._v


def polyak_update(target: Mlp, online: Mlp, rate: float) -> None:
    """target <- (1 - rate) * target + rate * online, elementwise."""
    if target.sizes != online.sizes:
        raise ValueError("target and online architectures differ")
    if not 0.0 <= rate <= 1.0:
        raise ValueError("rate must be in [0, 1]")
    for tp, op in zip(target.parameters(), online.parameters()):
        tp *= 1.0 - rate
        tp += rate * op


def save_mlp(path: str, net: Mlp) -> None:
    arrays = {"sizes": np.asarray(net.sizes, dtype=np.int64)}
    for i in range(net.num_layers):
        arrays[f"w{i}"] = net.weights[i]
        arrays[f"b{i}"] = net.biases[i]
    np.savez(path, **arrays)


def load_mlp(path: str) -> Mlp:
    with np.load(path) as data:
        sizes = tuple(int(s) for s in data["sizes"])
        net = Mlp(sizes, init=False)
        for i in range(net.num_layers):
            net.weights[i] = data[f"w{i}"].astype(np.float64)
            net.biases[i] = data[f"b{i}"].astype(np.float64)
    return net
