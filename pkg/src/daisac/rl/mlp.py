"""Fully connected rectifier networks with hand-written reverse-mode gradients."""

from __future__ import annotations

import numpy as np


class Mlp:
    """Affine layers with ReLU between them; the output is linear or sigmoid.

    Weights are stored as ``(fan_in, fan_out)`` so a batch ``x`` of shape
    ``(N, fan_in)`` maps to ``x @ W + b``.
    """

    def __init__(self, sizes, output="linear", rng=None, final_scale=3e-3):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        if output not in ("linear", "sigmoid"):
            raise ValueError(f"unknown output activation {output!r}")
        self.sizes = [int(s) for s in sizes]
        self.output = output
        rng = rng if rng is not None else np.random.default_rng(0)
        self.weights, self.biases = [], []
        n_layers = len(self.sizes) - 1
        for i, (fi, fo) in enumerate(zip(self.sizes[:-1], self.sizes[1:])):
            if i == n_layers - 1:
                w = rng.uniform(-final_scale, final_scale, (fi, fo))
            else:
                w = rng.normal(0.0, np.sqrt(2.0 / fi), (fi, fo))
            self.weights.append(w)
            self.biases.append(np.zeros(fo))

    @property
    def params(self):
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def n_params(self):
        return sum(p.size for p in self.params)

    def get_flat(self):
        return np.concatenate([p.ravel() for p in self.params])

    def set_flat(self, flat):
        flat = np.asarray(flat, dtype=float)
        if flat.size != self.n_params():
            raise ValueError("flat parameter vector has the wrong length")
        i = 0
        for p in self.params:
            p[...] = flat[i:i + p.size].reshape(p.shape)
            i += p.size

    def copy_from(self, other: "Mlp"):
        if other.sizes != self.sizes:
            raise ValueError("architectures differ")
        for dst, src in zip(self.params, other.params):
            dst[...] = src

    def clone(self) -> "Mlp":
        twin = Mlp.__new__(Mlp)
        twin.sizes = list(self.sizes)
        twin.output = self.output
        twin.weights = [w.copy() for w in self.weights]
        twin.biases = [b.copy() for b in self.biases]
        return twin

    def forward(self, x, keep=False):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        h = np.atleast_2d(x)
        if h.shape[1] != self.sizes[0]:
            raise ValueError(f"expected input width {self.sizes[0]}, got {h.shape[1]}")
        acts = [h]
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            h = np.maximum(z, 0.0) if i < last else z
            acts.append(h)
        if self.output == "sigmoid":
            h = 1.0 / (1.0 + np.exp(-h))
            acts.append(h)
        out = h[0] if single else h
        return (out, acts) if keep else out

    def backward(self, acts, upstream):
        """Gradients of ``sum(upstream * output)``: (parameter grads in ``params`` order, input grad)."""
        g = np.atleast_2d(np.asarray(upstream, dtype=float))
        if self.output == "sigmoid":
            y = acts[-1]
            g = g * y * (1.0 - y)
            acts = acts[:-1]
        if g.shape != acts[-1].shape:
            raise ValueError("upstream gradient shape does not match the output")
        grads = []
        for i in range(len(self.weights) - 1, -1, -1):
            h_in = acts[i]
            grads.append(g.sum(axis=0))           # bias
            grads.append(h_in.T @ g)              # weight
            g = g @ self.weights[i].T
            if i > 0:
                g = g * (acts[i] > 0)
        grads.reverse()
        return grads, g


def mlp_forward(net: Mlp, x):
    return net.forward(x)


def mlp_gradient(net: Mlp, x, upstream):
    _, acts = net.forward(x, keep=True)
    return net.backward(acts, upstream)


class Sgd:
    def __init__(self, lr=1e-4):
        self.lr = lr

    def step(self, params, grads):
        """Descent step ``p -= lr * g`` in place."""
        for p, g in zip(params, grads):
            p -= self.lr * g


class Adam:
    def __init__(self, lr=1e-4, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = self.v = None
        self.t = 0

    def step(self, params, grads):
        if self.m is None:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def make_optimizer(name, lr):
    if name == "sgd":
        return Sgd(lr)
    if name == "adam":
        return Adam(lr)
    raise ValueError(f"unknown optimizer {name!r}")
