"""Training configuration with a plain key=value file format.

Defaults follow the full-scale recipe (256 crops, 3e5 iterations, Adam at
4e-4 with betas 0.9/0.99); toy runs override via file, e.g.::

    iterations=500
    batch_size=4
    crop=32
    pairs=64
    pair_size=64
    base_channels=8
    lf_blocks=1,1,1
    hf_blocks=1,1,1
    state_dim=4

Lines starting with '#' are comments.
"""

from dataclasses import dataclass, field, replace

from .schema import NetConfig


@dataclass(frozen=True)
class TrainConfig:
    iterations: int = 300_000
    batch_size: int = 8
    crop: int = 256
    learning_rate: float = 4.0e-4
    betas: tuple = (0.9, 0.99)
    weights: tuple = (1.0, 0.3, 0.2, 0.01, 0.01)  # l2, ssim, per, causal, semantic
    seed: int = 0
    pairs: int = 64
    pair_size: int = 64
    network: NetConfig = field(default_factory=NetConfig)


_INT_KEYS = {"iterations", "batch_size", "crop", "seed", "pairs", "pair_size"}
_FLOAT_KEYS = {"learning_rate"}
_NET_INT_KEYS = {"base_channels", "state_dim", "wt_levels", "wt_kernel"}
_NET_TUPLE_KEYS = {"lf_blocks", "hf_blocks"}


def parse_config(path):
    cfg = TrainConfig()
    net_kwargs = {}
    betas = list(cfg.betas)
    weights = list(cfg.weights)
    with open(path) as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{line_no}: expected key=value")
            key, value = (part.strip() for part in line.split("=", 1))
            if key in _INT_KEYS:
                cfg = replace(cfg, **{key: int(value)})
            elif key in _FLOAT_KEYS:
                cfg = replace(cfg, **{key: float(value)})
            elif key in ("beta1", "beta2"):
                betas[0 if key == "beta1" else 1] = float(value)
            elif key.startswith("lambda"):
                idx = int(key.removeprefix("lambda")) - 1
                if not 0 <= idx < 5:
                    raise ValueError(f"{path}:{line_no}: lambda index out of range")
                weights[idx] = float(value)
            elif key in _NET_INT_KEYS:
                net_kwargs[key] = int(value)
            elif key in _NET_TUPLE_KEYS:
                net_kwargs[key] = tuple(int(v) for v in value.split(","))
            else:
                raise ValueError(f"{path}:{line_no}: unknown key {key!r}")
    return replace(cfg, betas=tuple(betas), weights=tuple(weights),
                   network=NetConfig(**net_kwargs) if net_kwargs else cfg.network)
