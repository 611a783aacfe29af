"""Run configuration and derived parameter resolution.

One RunConfig drives every CLI entry point. Unset fields resolve to the
standard defaults once the dataset size is known:

    k = ceil(r * log_base(n)),  t = k trees,  l = k leaf size,
    search_k = t * k,  m = max(2, floor(sqrt(n)/2)) partitions,
    alpha = 2.0, beta = 1.0, m_fact = 1000, eps = 0.10.

Each pipeline phase draws its randomness from a SeedSequence labeled with
the master seed and a fixed phase tag, so phases are independently
reproducible and adding more draws to one phase never shifts another.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .ann import compute_k
from .errors import UsageError
from .partitioner import compute_m

PHASE_FOREST = 1
PHASE_PARTITION = 2
PHASE_MERGE = 3
PHASE_SYNTH = 4
PHASE_SWEEP = 5

SWEEP_R = (1, 2, 4, 8)
SWEEP_BASES = ("e", "10", "2")


def phase_seed(master: int, phase: int) -> np.random.SeedSequence:
    """Deterministic per-phase seed stream derived from the master seed."""
    return np.random.SeedSequence(entropy=(int(master), int(phase)))


@dataclass
class RunConfig:
    data: str
    label_column: int | str | None = None
    normalize: str = "none"
    r: int = 2
    base: str = "2"
    k: int | None = None
    t: int | None = None
    l: int | None = None
    search_k: int | None = None
    m: int | None = None
    eps: float = 0.10
    alpha: float = 2.0
    beta: float = 1.0
    m_fact: float = 1000.0
    seed: int = 0
    mode: str = "eval"          # "eval" picks the best-metric stage, "cut" a fixed K
    K: int | None = None        # cluster count for cut mode
    metric: str = "acc"
    output: str = "run"

    def __post_init__(self):
        if self.mode not in ("eval", "cut"):
            raise UsageError(f"mode must be 'eval' or 'cut', got {self.mode!r}")
        if self.metric not in ("nmi", "acc"):
            raise UsageError(f"metric must be 'nmi' or 'acc', got {self.metric!r}")
        if self.mode == "cut" and self.K is None:
            raise UsageError("cut mode needs K")


@dataclass
class ResolvedParams:
    n: int
    d: int
    k: int
    t: int
    l: int
    search_k: int
    m: int
    r: int
    base: str
    eps: float
    alpha: float
    beta: float
    m_fact: float
    normalize: str
    seed: int

    def to_dict(self) -> dict:
        return asdict(self)


def resolve(cfg: RunConfig, n: int, d: int) -> ResolvedParams:
    """Fill every derived parameter for a dataset of ``n`` points."""
    k = cfg.k if cfg.k is not None else compute_k(n, cfg.r, cfg.base)
    k = min(k, n - 1) if n > 1 else 1
    t = cfg.t if cfg.t is not None else k
    l = cfg.l if cfg.l is not None else k
    search_k = cfg.search_k if cfg.search_k is not None else t * k
    m = cfg.m if cfg.m is not None else compute_m(n)
    m = min(m, n)
    return ResolvedParams(
        n=n, d=d, k=k, t=t, l=l, search_k=search_k, m=m,
        r=cfg.r, base=cfg.base, eps=cfg.eps, alpha=cfg.alpha, beta=cfg.beta,
        m_fact=cfg.m_fact, normalize=cfg.normalize, seed=cfg.seed,
    )
