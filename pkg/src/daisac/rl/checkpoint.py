"""Plain-text agent checkpoints: a versioned header, then each network's shapes and weights."""

from __future__ import annotations

import numpy as np

from .taylor_td import TaylorTdAgent

MAGIC = "daisac-checkpoint"
VERSION = 1
_NETS = ("actor", "critic", "actor_target", "critic_target")


def save_checkpoint(path, agent: TaylorTdAgent):
    with open(path, "w") as fh:
        fh.write(f"{MAGIC} v{VERSION}\n")
        for name in _NETS:
            net = getattr(agent, name)
            fh.write(f"net {name} {net.output} {' '.join(map(str, net.sizes))}\n")
            for p in net.params:
                fh.write(f"param {' '.join(map(str, p.shape))}\n")
                fh.write(" ".join(f"{v:.17g}" for v in p.ravel()) + "\n")


def load_checkpoint(path, agent: TaylorTdAgent):
    """Overwrite ``agent``'s network weights in place; shapes must match."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    header = lines[0].split()
    if len(header) != 2 or header[0] != MAGIC:
        raise ValueError("not a checkpoint file")
    if header[1] != f"v{VERSION}":
        raise ValueError(f"unsupported checkpoint version {header[1]}")
    i = 1
    for name in _NETS:
        tag, got, output, *sizes = lines[i].split()
        if tag != "net" or got != name:
            raise ValueError(f"expected network {name}, found {lines[i]!r}")
        net = getattr(agent, name)
        if [int(v) for v in sizes] != net.sizes or output != net.output:
            raise ValueError(f"architecture mismatch for {name}")
        i += 1
        for p in net.params:
            shape = tuple(int(v) for v in lines[i].split()[1:])
            if shape != p.shape:
                raise ValueError(f"parameter shape mismatch in {name}")
            values = np.array(lines[i + 1].split(), dtype=float)
            p[...] = values.reshape(shape)
            i += 2
    return agent
