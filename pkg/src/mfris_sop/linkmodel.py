"""System configuration, per-link SINRs and the architecture mapping.

All powers are linear watts and all gains linear. The ``*_dbm`` / ``*_db``
helpers exist only for the configuration boundary.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

ARCHITECTURES = ("mf_ris", "star_ris", "active_ris")
SCENARIOS = ("external", "internal")
SIC_MODES = ("perfect", "imperfect")

_SUM_TOL = 1e-9


class ConfigError(ValueError):
    """A configuration violates one of the model constraints."""


class InfeasibleBudget(ConfigError):
    """The power budget does not leave positive transmit power at the BS."""


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watt_to_dbm(watt: float) -> float:
    return 10.0 * math.log10(watt) + 30.0


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class ScenarioSpec:
    scenario: str = "external"
    sic: str = "perfect"
    architecture: str = "mf_ris"

    def __post_init__(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if self.sic not in SIC_MODES:
            raise ConfigError(f"sic must be one of {SIC_MODES}, got {self.sic!r}")
        if self.architecture not in ARCHITECTURES:
            raise ConfigError(
                f"architecture must be one of {ARCHITECTURES}, got {self.architecture!r}"
            )


@dataclass(frozen=True)
class SystemConfig:
    """Every physical parameter of the network.

    Defaults reproduce the evaluation setup of the reference system; the
    Rician factors, SIC residual level ``varpi`` and per-element amplifier
    power ``P_r`` are not fixed there and use the values below.

    ``rho_e`` pins the eavesdropper SNR used by the external-scenario
    asymptotic expressions; ``None`` means ``P_b / sigma_e2``.
    """

    alpha: float = 2.2
    chi: float = 1e-3
    d_b: float = 200.0
    d_e: float = 15.0
    R_d: float = 20.0
    kappa_b: float = 3.0
    kappa_r: float = 3.0
    kappa_t: float = 3.0
    kappa_e: float = 0.0
    a_r: float = 0.25
    a_t: float = 0.75
    e_r: float = 0.8
    e_t: float = 0.2
    beta_r: float = 10.0
    beta_t: float = 10.0
    beta_max: float = 100.0
    M: int = 12
    sigma_n2: float = 1e-12
    sigma_e2: float = 1e-12
    sigma_s2: float = 1e-11
    varpi: float = 1.0
    omega_ip_r: float = field(default_factory=lambda: db_to_linear(-126.13))
    omega_ip_er: float = field(default_factory=lambda: db_to_linear(-130.26))
    omega_ip_t: float = field(default_factory=lambda: db_to_linear(-125.04))
    omega_ip_rt: float = field(default_factory=lambda: db_to_linear(-129.17))
    R_r: float = 0.1
    R_t: float = 0.05
    P_b: float = 1.0
    P_r: float = field(default_factory=lambda: dbm_to_watt(-10.0))
    P_ps: float = field(default_factory=lambda: dbm_to_watt(-10.0))
    P_dc: float = field(default_factory=lambda: dbm_to_watt(-5.0))
    architecture: str = "mf_ris"
    rho_e: Optional[float] = None

    def __post_init__(self) -> None:
        if self.architecture not in ARCHITECTURES:
            raise ConfigError(
                f"architecture must be one of {ARCHITECTURES}, got {self.architecture!r}"
            )
        if not isinstance(self.M, (int, np.integer)) or self.M < 1:
            raise ConfigError(f"M must be a positive integer, got {self.M!r}")
        if self.architecture == "active_ris" and self.M % 2:
            raise ConfigError(f"active_ris needs an even element count, got M = {self.M}")
        if abs(self.a_r + self.a_t - 1.0) > _SUM_TOL:
            raise ConfigError("a_r + a_t must equal 1")
        if not (0 <= self.a_r <= 1 and 0 <= self.a_t <= 1):
            raise ConfigError("a_r and a_t must lie in [0, 1]")
        if self.architecture == "active_ris":
            if self.e_r != 1.0 or self.e_t != 1.0:
                raise ConfigError("active_ris elements are dedicated: e_r = e_t = 1")
        else:
            if abs(self.e_r + self.e_t - 1.0) > _SUM_TOL:
                raise ConfigError("e_r + e_t must equal 1")
            if not (0 <= self.e_r <= 1 and 0 <= self.e_t <= 1):
                raise ConfigError("e_r and e_t must lie in [0, 1]")
        if not 0 <= self.varpi <= 1:
            raise ConfigError("varpi must lie in [0, 1]")
        for name in ("beta_r", "beta_t"):
            val = getattr(self, name)
            if not 0 < val <= self.beta_max:
                raise ConfigError(f"{name} must lie in (0, beta_max = {self.beta_max}]")
        for name in ("alpha", "chi", "d_b", "d_e", "R_d", "sigma_n2", "sigma_e2"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.sigma_s2 < 0:
            raise ConfigError("sigma_s2 must be >= 0")
        for name in ("kappa_b", "kappa_r", "kappa_t", "kappa_e"):
            if not getattr(self, name) >= 0:
                raise ConfigError(f"{name} must be >= 0")
        for name in ("omega_ip_r", "omega_ip_er", "omega_ip_t", "omega_ip_rt"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("R_r", "R_t"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive (rate 0 is not a valid target)")
        for name in ("P_b", "P_r", "P_ps", "P_dc"):
            if not getattr(self, name) >= 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.rho_e is not None and not self.rho_e > 0:
            raise ConfigError("rho_e must be positive when given")

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)

    @property
    def elements_per_side(self) -> int:
        return self.M // 2 if self.architecture == "active_ris" else self.M

    @property
    def eve_snr(self) -> float:
        return self.P_b / self.sigma_e2 if self.rho_e is None else self.rho_e

    def side_gain(self, side: str) -> float:
        """Power gain beta * e applied by the surface towards ``side``."""
        if side == "r":
            return self.beta_r * self.e_r
        if side == "t":
            return self.beta_t * self.e_t
        raise ValueError(f"side must be 'r' or 't', got {side!r}")

    def kappa(self, side: str) -> float:
        return {"r": self.kappa_r, "t": self.kappa_t, "e": self.kappa_e}[side]


def check_ordering(cfg: SystemConfig, scenario: str) -> None:
    """Enforce the NOMA decoding order each wiretap scenario relies on."""
    if scenario == "external":
        if not cfg.a_t > cfg.a_r:
            raise ConfigError("external scenario requires a_t > a_r")
    elif scenario == "internal":
        if not cfg.a_r > cfg.a_t:
            raise ConfigError("internal scenario requires a_r > a_t")
        if cfg.architecture != "active_ris" and not cfg.e_t >= cfg.e_r:
            raise ConfigError("internal scenario requires e_t >= e_r")
    else:
        raise ConfigError(f"unknown scenario {scenario!r}")


@dataclass(frozen=True)
class LinkRealization:
    """One (or a batch of) channel draws.

    ``g_legit_*`` are coherent cascade sums sum_m |h_phi,m h_b,m| and
    ``g_eve`` the phase-bearing eavesdropper sum, all before path loss.
    ``t_*`` are thermal-noise gains |sum_m h_m|^2 of the RIS-to-node hop and
    ``v_*`` residual-interference powers.
    """

    g_legit_r: np.ndarray
    g_legit_t: np.ndarray
    g_eve: np.ndarray
    d_r: np.ndarray
    d_t: np.ndarray
    t_r: np.ndarray = 0.0
    t_t: np.ndarray = 0.0
    t_e: np.ndarray = 0.0
    v_r: np.ndarray = 0.0
    v_er: np.ndarray = 0.0
    v_t: np.ndarray = 0.0
    v_rt: np.ndarray = 0.0


def _legit_gain(cfg: SystemConfig, g, d):
    return cfg.chi ** 2 * cfg.d_b ** -cfg.alpha * np.asarray(d, float) ** -cfg.alpha * np.square(g)


def _thermal(cfg: SystemConfig, t, d):
    return cfg.chi * np.asarray(d, float) ** -cfg.alpha * cfg.sigma_s2 * np.asarray(t, float)


def _eve_gain(cfg: SystemConfig, g_eve):
    return cfg.chi ** 2 * cfg.d_b ** -cfg.alpha * cfg.d_e ** -cfg.alpha * np.abs(g_eve) ** 2


def _residual(cfg: SystemConfig, v, sic: str):
    if sic == "perfect":
        return 0.0
    if sic != "imperfect":
        raise ConfigError(f"sic must be one of {SIC_MODES}, got {sic!r}")
    return cfg.varpi * cfg.P_b * np.asarray(v, float)


def sinr_r_decodes_t(real: LinkRealization, cfg: SystemConfig):
    """SINR at the reflection user when it decodes the refraction user's symbol."""
    b = cfg.side_gain("r")
    G = _legit_gain(cfg, real.g_legit_r, real.d_r)
    T = _thermal(cfg, real.t_r, real.d_r)
    return cfg.P_b * cfg.a_t * b * G / (cfg.P_b * cfg.a_r * b * G + b * T + cfg.sigma_n2)


def sinr_r_own(real: LinkRealization, cfg: SystemConfig, sic: str = "imperfect"):
    b = cfg.side_gain("r")
    G = _legit_gain(cfg, real.g_legit_r, real.d_r)
    T = _thermal(cfg, real.t_r, real.d_r)
    return cfg.P_b * cfg.a_r * b * G / (b * T + _residual(cfg, real.v_r, sic) + cfg.sigma_n2)


def sinr_t_own(real: LinkRealization, cfg: SystemConfig):
    """Refraction user decoding its own symbol first (external scenario, no SIC)."""
    b = cfg.side_gain("t")
    G = _legit_gain(cfg, real.g_legit_t, real.d_t)
    T = _thermal(cfg, real.t_t, real.d_t)
    return cfg.P_b * cfg.a_t * b * G / (cfg.P_b * cfg.a_r * b * G + b * T + cfg.sigma_n2)


def sinr_eve_t(real: LinkRealization, cfg: SystemConfig):
    b = cfg.side_gain("r")
    G = _eve_gain(cfg, real.g_eve)
    T = _thermal(cfg, real.t_e, cfg.d_e)
    return cfg.P_b * cfg.a_t * b * G / (cfg.P_b * cfg.a_r * b * G + b * T + cfg.sigma_e2)


def sinr_eve_r(real: LinkRealization, cfg: SystemConfig, sic: str = "imperfect"):
    b = cfg.side_gain("r")
    G = _eve_gain(cfg, real.g_eve)
    T = _thermal(cfg, real.t_e, cfg.d_e)
    return cfg.P_b * cfg.a_r * b * G / (b * T + _residual(cfg, real.v_er, sic) + cfg.sigma_e2)


def sinr_t_own_internal(real: LinkRealization, cfg: SystemConfig, sic: str = "imperfect"):
    """Refraction user decoding its own symbol last, after SIC (internal scenario)."""
    b = cfg.side_gain("t")
    G = _legit_gain(cfg, real.g_legit_t, real.d_t)
    T = _thermal(cfg, real.t_t, real.d_t)
    return cfg.P_b * cfg.a_t * b * G / (_residual(cfg, real.v_t, sic) + b * T + cfg.sigma_n2)


def sinr_ieve_t(real: LinkRealization, cfg: SystemConfig, sic: str = "imperfect"):
    """Reflection user (internal eavesdropper) intercepting the refraction user's symbol."""
    b = cfg.side_gain("r")
    G = _legit_gain(cfg, real.g_legit_r, real.d_r)
    T = _thermal(cfg, real.t_r, real.d_r)
    return cfg.P_b * cfg.a_t * b * G / (b * T + _residual(cfg, real.v_rt, sic) + cfg.sigma_e2)


def secrecy_capacity(g_leg, g_eve):
    """[log2(1 + g_leg) - log2(1 + g_eve)]^+ in bits per channel use."""
    c = (np.log1p(g_leg) - np.log1p(g_eve)) / math.log(2.0)
    out = np.maximum(c, 0.0)
    return float(out) if np.ndim(out) == 0 else out


def _overhead(cfg: SystemConfig) -> float:
    circuits = 2 * cfg.M * (cfg.P_ps + cfg.P_dc)
    if cfg.architecture == "star_ris":
        return circuits
    return cfg.M * cfg.P_r + circuits


def total_power(cfg: SystemConfig) -> float:
    """BS transmit power plus amplifier and circuit consumption of the surface."""
    return cfg.P_b + _overhead(cfg)


def solve_p_b(cfg: SystemConfig, p_tot: float) -> float:
    """BS transmit power left from a total budget ``p_tot`` (watts)."""
    p_b = p_tot - _overhead(cfg)
    if not p_b > 0:
        raise InfeasibleBudget(
            f"budget {p_tot:.6g} W leaves no transmit power "
            f"(surface consumes {_overhead(cfg):.6g} W)"
        )
    return p_b


def with_budget(cfg: SystemConfig, p_tot: float) -> SystemConfig:
    return cfg.replace(P_b=solve_p_b(cfg, p_tot))


def map_architecture(spec, cfg: SystemConfig) -> SystemConfig:
    """Turn an MF-RIS configuration into the requested benchmark surface.

    ``spec`` is a :class:`ScenarioSpec` or an architecture name. Mapping is
    idempotent; remapping a benchmark to a different architecture is refused.
    """
    arch = spec.architecture if isinstance(spec, ScenarioSpec) else spec
    if arch not in ARCHITECTURES:
        raise ConfigError(f"architecture must be one of {ARCHITECTURES}, got {arch!r}")
    if cfg.architecture == arch:
        return cfg
    if cfg.architecture != "mf_ris":
        raise ConfigError(f"cannot map a {cfg.architecture} configuration to {arch}")
    if arch == "mf_ris":
        return cfg
    if arch == "active_ris":
        if cfg.M % 2:
            raise ConfigError(f"active_ris needs an even element count, got M = {cfg.M}")
        return cfg.replace(architecture=arch, e_r=1.0, e_t=1.0)
    # passive surface: unit amplitude, no amplifier and no amplifier noise
    return cfg.replace(architecture=arch, beta_r=1.0, beta_t=1.0, sigma_s2=0.0)
