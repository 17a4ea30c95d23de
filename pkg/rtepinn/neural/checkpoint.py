"""
Network checkpoints: a commented text header followed by one parameter per line.

    # rtepinn-network 1
    # layer_widths = 2 50 50 1
    # output_activation = scaled-sigmoid
    # c_a = 5.0
    # seed = 7
    # <extra metadata key> = <value>
    <parameters, %.17g>
"""

from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np

from .mlp import MlpNetwork, MlpSpec
from ..utils.errors import ConfigError

MAGIC = "rtepinn-network"
VERSION = 1


def save_network(path, network: MlpNetwork, seed: Optional[int] = None,
                 metadata: Optional[Dict[str, object]] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    spec = network.spec
    header = [
        f"{MAGIC} {VERSION}",
        "layer_widths = " + " ".join(str(w) for w in spec.layer_widths),
        f"output_activation = {spec.output_activation}",
        f"c_a = {spec.c_a!r}",
        f"seed = {'' if seed is None else seed}",
    ]
    for key, value in (metadata or {}).items():
        if isinstance(value, (list, tuple, np.ndarray)):
            value = " ".join(repr(float(v)) for v in value)
        elif isinstance(value, float):
            value = repr(value)
        header.append(f"{key} = {value}")
    params = np.asarray(getattr(network.params, "data", network.params), dtype=float)
    np.savetxt(path, params, fmt="%.17g", header="\n".join(header), comments="# ")
    return path


def load_network(path) -> Tuple[MlpNetwork, Dict[str, str]]:
    """Returns the network and the raw metadata strings (including seed)."""
    path = Path(path)
    meta: Dict[str, str] = {}
    with open(path) as f:
        first = f.readline().lstrip("# ").split()
        if len(first) != 2 or first[0] != MAGIC or int(first[1]) != VERSION:
            raise ConfigError(f"{path} is not a version {VERSION} network checkpoint")
        for line in f:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].partition("=")
            meta[key.strip()] = value.strip()
    spec = MlpSpec(tuple(int(w) for w in meta.pop("layer_widths").split()),
                   meta.pop("output_activation"), float(meta.pop("c_a")))
    params = np.atleast_1d(np.loadtxt(path, comments="#", dtype=float))
    if params.size != spec.n_params:
        raise ConfigError(f"{path}: expected {spec.n_params} parameters, found {params.size}")
    return MlpNetwork(spec, params), meta
