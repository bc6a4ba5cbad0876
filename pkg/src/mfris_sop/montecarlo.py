"""Trial-level Monte Carlo estimation of secrecy outage.

Trials are grouped in fixed-size blocks and block ``b`` always draws from
``SeedSequence(seed, spawn_key=(b,))``. Partitions only decide which worker
handles which block, so the estimate does not depend on the partition count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import linkmodel as lm
from .channels import sample_rician, sample_user_distance
from .linkmodel import LinkRealization, ScenarioSpec, SystemConfig

BLOCK_TRIALS = 1 << 14
MIN_REPORTED_TRIALS = 10_000


@dataclass(frozen=True)
class McConfig:
    trials: int = 1_000_000
    seed: int = 20240601
    partitions: int = 1

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if self.partitions < 1:
            raise ValueError("partitions must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class McEstimate:
    p_hat: float
    stderr: float
    trials: int
    seed: int

    @classmethod
    def from_count(cls, count: int, trials: int, seed: int) -> "McEstimate":
        p = count / trials
        return cls(p, math.sqrt(p * (1.0 - p) / trials), trials, seed)


@dataclass(frozen=True)
class ThroughputEstimate:
    value: float
    stderr: float
    trials: int


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def _rician_vector(kappa: float, rng: np.random.Generator, n: int, m: int) -> np.ndarray:
    # one LoS phase per channel vector; magnitudes are unaffected by it
    phase = rng.uniform(0.0, 2.0 * np.pi, size=(n, 1))
    return sample_rician(kappa, rng, size=(n, m), los_phase=phase)


def draw_links(cfg: SystemConfig, rng: np.random.Generator, n: int) -> LinkRealization:
    """Draw ``n`` independent network realizations."""
    m = cfg.elements_per_side
    h_b_r = _rician_vector(cfg.kappa_b, rng, n, m)
    if cfg.architecture == "active_ris":
        h_b_t = _rician_vector(cfg.kappa_b, rng, n, m)
    else:
        h_b_t = h_b_r
    h_r = _rician_vector(cfg.kappa_r, rng, n, m)
    h_t = _rician_vector(cfg.kappa_t, rng, n, m)
    h_e = _rician_vector(cfg.kappa_e, rng, n, m)
    # the surface phases follow the users, so the eavesdropper sees uniform phase offsets
    theta = rng.uniform(0.0, 2.0 * np.pi, size=(n, m))
    abs_b_r = np.abs(h_b_r)
    return LinkRealization(
        g_legit_r=np.sum(np.abs(h_r) * abs_b_r, axis=1),
        g_legit_t=np.sum(np.abs(h_t) * np.abs(h_b_t), axis=1),
        g_eve=np.sum(np.abs(h_e) * abs_b_r * np.exp(1j * theta), axis=1),
        d_r=sample_user_distance(cfg.R_d, rng, n),
        d_t=sample_user_distance(cfg.R_d, rng, n),
        t_r=np.abs(np.sum(h_r, axis=1)) ** 2,
        t_t=np.abs(np.sum(h_t, axis=1)) ** 2,
        t_e=np.abs(np.sum(h_e, axis=1)) ** 2,
        v_r=rng.exponential(cfg.omega_ip_r, n),
        v_er=rng.exponential(cfg.omega_ip_er, n),
        v_t=rng.exponential(cfg.omega_ip_t, n),
        v_rt=rng.exponential(cfg.omega_ip_rt, n),
    )


def outage_indicators(scenario: str, cfg: SystemConfig, real: LinkRealization) -> dict:
    """Secrecy-outage booleans for every user / SIC combination of ``scenario``.

    Keys: ``r_perfect``, ``r_imperfect``, ``t`` (external) or ``t_perfect``,
    ``t_imperfect`` (internal).
    """
    cap = lm.secrecy_capacity
    if scenario == "external":
        out = {}
        for sic in lm.SIC_MODES:
            c = cap(lm.sinr_r_own(real, cfg, sic), lm.sinr_eve_r(real, cfg, sic))
            out[f"r_{sic}"] = c < cfg.R_r
        out["t"] = cap(lm.sinr_t_own(real, cfg), lm.sinr_eve_t(real, cfg)) < cfg.R_t
        return out
    if scenario == "internal":
        return {
            f"t_{sic}": cap(lm.sinr_t_own_internal(real, cfg, sic), lm.sinr_ieve_t(real, cfg, sic))
            < cfg.R_t
            for sic in lm.SIC_MODES
        }
    raise lm.ConfigError(f"unknown scenario {scenario!r}")


def outage_key(spec: ScenarioSpec, user: str | None = None) -> str:
    user = user or ("r" if spec.scenario == "external" else "t")
    if spec.scenario == "external" and user == "t":
        return "t"
    if spec.scenario == "internal" and user != "t":
        raise lm.ConfigError("the internal scenario only protects the refraction user")
    return f"{user}_{spec.sic}"


def simulate_trial(spec: ScenarioSpec, cfg: SystemConfig, rng: np.random.Generator) -> dict:
    """One network realization; returns ``{key: bool}`` outage indicators."""
    cfg = lm.map_architecture(spec, cfg)
    lm.check_ordering(cfg, spec.scenario)
    ind = outage_indicators(spec.scenario, cfg, draw_links(cfg, rng, 1))
    return {k: bool(v[0]) for k, v in ind.items()}


def _block_sizes(trials: int) -> list[int]:
    full, rest = divmod(trials, BLOCK_TRIALS)
    return [BLOCK_TRIALS] * full + ([rest] if rest else [])


def count_outages(scenario: str, cfg: SystemConfig, mc: McConfig) -> dict:
    """Outage counts per indicator key over ``mc.trials`` trials."""
    sizes = _block_sizes(mc.trials)

    def run(part: int) -> dict:
        totals: dict = {}
        for b in range(part, len(sizes), mc.partitions):
            ind = outage_indicators(scenario, cfg, draw_links(cfg, block_rng(mc.seed, b), sizes[b]))
            for k, v in ind.items():
                totals[k] = totals.get(k, 0) + int(np.count_nonzero(v))
        return totals

    if mc.partitions == 1:
        parts = [run(0)]
    else:
        with ThreadPoolExecutor(max_workers=mc.partitions) as pool:
            parts = list(pool.map(run, range(mc.partitions)))
    merged: dict = {}
    for part in parts:
        for k, v in part.items():
            merged[k] = merged.get(k, 0) + v
    return merged


def estimate_all(scenario: str, cfg: SystemConfig, mc: McConfig, architecture: str | None = None) -> dict:
    """Every outage estimate of a scenario from a single set of trials."""
    if architecture is not None:
        cfg = lm.map_architecture(architecture, cfg)
    lm.check_ordering(cfg, scenario)
    counts = count_outages(scenario, cfg, mc)
    return {k: McEstimate.from_count(v, mc.trials, mc.seed) for k, v in counts.items()}


def estimate_sop(spec: ScenarioSpec, cfg: SystemConfig, mc: McConfig, user: str | None = None) -> McEstimate:
    return estimate_all(spec.scenario, cfg, mc, spec.architecture)[outage_key(spec, user)]


def estimate_throughput(
    spec: ScenarioSpec, cfg: SystemConfig, mc: McConfig, user: str | None = None
) -> ThroughputEstimate:
    key = outage_key(spec, user)
    est = estimate_sop(spec, cfg, mc, user)
    rate = cfg.R_r if key.startswith("r") else cfg.R_t
    return ThroughputEstimate((1.0 - est.p_hat) * rate, est.stderr * rate, est.trials)
