"""Closed-form secrecy outage probability, diversity order and throughput.

The exact expressions average the Gamma-model CDF of the legitimate cascade
over the eavesdropper cascade and residual interference (Gauss-Laguerre)
and over the user positions (Gauss-Chebyshev). The asymptotic expressions
replace that CDF by its small-argument power law.

Coefficient naming follows the usual ``mu`` (legitimate user) and ``eps``
(eavesdropper) split; every coefficient is in absolute units, so legitimate
terms scale with ``P_b`` and external-eavesdropper terms with the
eavesdropper SNR ``cfg.eve_snr``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from . import channels as ch
from .linkmodel import ConfigError, SystemConfig, check_ordering
from .numerics import (
    DEFAULT_2F1_DELTA,
    chebyshev_nodes,
    gauss_2f1_near_one,
    laguerre_rule,
    hurwitz_zeta_half,
    log_factorial,
    regularized_lower_gamma,
)

FLAG_2F1 = "asymptotic_2F1_limit_convention"
FLAG_CLAMPED = "clamped_to_one"
FLAG_CERTAIN = "certain_outage_nodes"
_TAIL_MASS = 1e-18


@dataclass(frozen=True)
class QuadOrders:
    """Quadrature orders: Chebyshev W, N, I; Laguerre S, D; X for self-tests."""

    W: int = 100
    S: int = 300
    D: int = 300
    N: int = 100
    I: int = 100
    X: int = 300
    delta_2f1: float = DEFAULT_2F1_DELTA
    endpoint_correction: bool = True

    def __post_init__(self) -> None:
        for name in ("W", "S", "D", "N", "I", "X"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"quadrature order {name} must be >= 1")

    def doubled(self) -> "QuadOrders":
        return QuadOrders(
            2 * self.W, 2 * self.S, 2 * self.D, 2 * self.N, 2 * self.I, 2 * self.X,
            self.delta_2f1, self.endpoint_correction,
        )

    def label(self) -> str:
        return f"{self.W},{self.S},{self.D},{self.N},{self.I},{self.X}"

    @classmethod
    def parse(cls, text: str) -> "QuadOrders":
        parts = [int(p) for p in text.split(",")]
        if len(parts) != 6:
            raise ConfigError("--orders expects six integers W,S,D,N,I,X")
        return cls(*parts)


DEFAULT_ORDERS = QuadOrders()


@dataclass(frozen=True)
class SopResult:
    value: float
    method: str
    orders_used: QuadOrders
    flags: frozenset = field(default_factory=frozenset)
    raw: float | None = None

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class CoefficientSet:
    """Named coefficients of one expression; see the builders below."""

    values: dict

    def __getattr__(self, name: str) -> float:
        try:
            return self.values[name]
        except KeyError:
            raise AttributeError(name) from None


def secrecy_throughput(sop: float, R: float) -> float:
    """Delay-limited secrecy throughput (1 - SOP) R."""
    if not 0.0 <= sop <= 1.0:
        raise ValueError(f"sop must lie in [0, 1], got {sop}")
    if R < 0:
        raise ValueError(f"rate must be >= 0, got {R}")
    return (1.0 - sop) * R


# ---------------------------------------------------------------- quadrature helpers


def _laguerre(order: int, tail_mass: float | None = _TAIL_MASS):
    """Laguerre nodes/weights; for bounded integrands the far tail is dropped."""
    nodes, weights = laguerre_rule(int(order)).trimmed()
    if tail_mass is not None:
        tail = np.cumsum(weights[::-1])[::-1]
        keep = tail > tail_mass
        nodes, weights = nodes[keep], weights[keep]
    return nodes, weights


# Gauss-Chebyshev on a non-periodic integrand is the midpoint rule in the angle
# variable and only converges like 1/W^2. With ``corrected`` the leading
# Euler-Maclaurin endpoint terms are appended as extra nodes (possibly with
# negative weights), which makes the error O(W^-4) at the regular end and
# O(W^-(3 + 4/alpha)) at the d^alpha singularity. Both terms vanish as W grows.


def _distance_rule(cfg: SystemConfig, order: int, corrected: bool = False):
    """Chebyshev nodes mapped to distances q in (0, R_d) with their disc weights."""
    z = chebyshev_nodes(int(order)).nodes
    q = 0.5 * (z + 1.0) * cfg.R_d
    w = math.pi / (order * cfg.R_d) * q * np.sqrt(1.0 - z * z)
    if corrected:
        # the integrand vanishes at q = 0, so only the outer rim contributes
        q = np.append(q, cfg.R_d)
        w = np.append(w, -((math.pi / order) ** 2) / 24.0)
    return q, w


def _pathloss_power_rule(cfg: SystemConfig, order: int, corrected: bool = False):
    """Chebyshev nodes h = d^alpha over (0, R_d^alpha) with the density of d^alpha."""
    z = chebyshev_nodes(int(order)).nodes
    a = cfg.alpha
    h = 0.5 * (z + 1.0) * cfg.R_d ** a
    w = math.pi * cfg.R_d ** (a - 2.0) / (order * a) * h ** (2.0 / a - 1.0) * np.sqrt(1.0 - z * z)
    if corrected:
        step = math.pi / order
        beta = 4.0 / a - 1.0  # angle-space integrand ~ u^beta near d = 0
        rim = -step * step / (24.0 * a)
        hub = -hurwitz_zeta_half(-beta) * 4.0 ** (1.0 - 2.0 / a) / a * step ** (1.0 + beta)
        h = np.append(h, [cfg.R_d ** a, 0.0])
        w = np.append(w, [rim, hub])
    return h, w


def _finish(value: float, method: str, orders: QuadOrders, flags=()) -> SopResult:
    flags = set(flags)
    raw = value
    if value > 1.0:
        if method == "exact_quadrature" and value < 1.0 + 1e-9:
            value = 1.0
        else:
            flags.add(FLAG_CLAMPED)
            value = 1.0
    return SopResult(float(max(value, 0.0)), method, orders, frozenset(flags), float(raw))


def _certain(method: str, orders: QuadOrders, *flags) -> SopResult:
    return SopResult(1.0, method, orders, frozenset(flags), 1.0)


# ---------------------------------------------------------------- coefficients


def _common(cfg: SystemConfig):
    m = cfg.elements_per_side
    hop = cfg.chi ** 2 * cfg.d_b ** -cfg.alpha
    eve_thermal = cfg.side_gain("r") * cfg.sigma_s2 * cfg.chi * cfg.d_e ** -cfg.alpha * ch.thermal_gain(m, cfg.kappa_e)
    return m, hop, eve_thermal


def coefficients_ext_r(cfg: SystemConfig, sic: str = "imperfect") -> CoefficientSet:
    m, hop, eve_thermal = _common(cfg)
    br = cfg.side_gain("r")
    rho = cfg.eve_snr
    varpi = cfg.varpi if sic == "imperfect" else 0.0
    return CoefficientSet(dict(
        mu_rr1=cfg.P_b * cfg.a_r * br * hop,
        mu_rr2=varpi * cfg.P_b,
        mu_rr3=br * cfg.chi * cfg.sigma_s2 * ch.thermal_gain(m, cfg.kappa_r),
        eps_er1=rho * cfg.a_r * br * hop * cfg.d_e ** -cfg.alpha,
        eps_er2=varpi * rho * cfg.omega_ip_er,
        eps_er3=eve_thermal / cfg.sigma_e2 + 1.0,
        hat_mu_rr1=cfg.a_r * br * hop,
        hat_eps_er1=cfg.a_r * br * hop * cfg.d_e ** -cfg.alpha,
        hat_eps_er2=varpi * cfg.omega_ip_er,
    ))


def coefficients_ext_t(cfg: SystemConfig) -> CoefficientSet:
    m, hop, eve_thermal = _common(cfg)
    bt = cfg.side_gain("t")
    br = cfg.side_gain("r")
    rho = cfg.eve_snr
    return CoefficientSet(dict(
        mu_tt1=cfg.P_b * cfg.a_t * bt * hop,
        mu_tt2=cfg.P_b * cfg.a_r * bt * hop,
        mu_tt3=bt * cfg.chi * cfg.sigma_s2 * ch.thermal_gain(m, cfg.kappa_t),
        eps_et1=rho * cfg.a_t * br * hop * cfg.d_e ** -cfg.alpha,
        eps_et2=rho * cfg.a_r * br * hop * cfg.d_e ** -cfg.alpha,
        eps_et3=eve_thermal / cfg.sigma_e2 + 1.0,
    ))


def coefficients_int_t(cfg: SystemConfig, sic: str = "imperfect") -> CoefficientSet:
    m, hop, _ = _common(cfg)
    bt = cfg.side_gain("t")
    br = cfg.side_gain("r")
    varpi = cfg.varpi if sic == "imperfect" else 0.0
    return CoefficientSet(dict(
        mu_rt1=cfg.P_b * cfg.a_t * bt * hop,
        mu_rt2=varpi * cfg.P_b * cfg.omega_ip_t,
        mu_rt3=bt * cfg.chi * cfg.sigma_s2 * ch.thermal_gain(m, cfg.kappa_t),
        eps_rt1=cfg.P_b * cfg.a_t * br * hop,
        eps_rt2=varpi * cfg.P_b * cfg.omega_ip_rt,
        eps_rt3=br * cfg.chi * cfg.sigma_s2 * ch.thermal_gain(m, cfg.kappa_r),
        hat_mu_rt1=cfg.a_t * bt * hop,
        hat_mu_rt2=varpi * cfg.omega_ip_t,
        hat_eps_rt1=cfg.a_t * br * hop,
        hat_eps_rt2=varpi * cfg.omega_ip_rt,
        omega_br=ch.omega_br(m, cfg.kappa_b, cfg.kappa_r),
    ))


def _fit(cfg: SystemConfig, side: str) -> ch.GammaFit:
    return ch.fit_gamma(cfg.elements_per_side, cfg.kappa_b, cfg.kappa(side))


def _require(cfg: SystemConfig, scenario: str) -> None:
    check_ordering(cfg, scenario)


# ---------------------------------------------------------------- external, reflection user


def sop_ext_r(cfg: SystemConfig, orders: QuadOrders = DEFAULT_ORDERS, sic: str = "imperfect") -> SopResult:
    """Reflection-user SOP against the external eavesdropper (triple quadrature)."""
    _require(cfg, "external")
    c = coefficients_ext_r(cfg, sic)
    if c.mu_rr1 <= 0:
        return _certain("exact_quadrature", orders)
    fit = _fit(cfg, "r")
    m = cfg.elements_per_side
    q, wq = _distance_rule(cfg, orders.W, orders.endpoint_correction)
    tau_d, g_d = _laguerre(orders.D)
    lam = 2.0 ** cfg.R_r * (1.0 + c.eps_er1 * m * tau_d / (c.eps_er2 + c.eps_er3)) - 1.0
    q_alpha = q ** cfg.alpha
    if c.mu_rr2 > 0:
        tau_s, g_s = _laguerre(orders.S)
        resid = c.mu_rr2 * cfg.omega_ip_r * tau_s
    else:
        g_s, resid = np.ones(1), np.zeros(1)
    total = 0.0
    for gs, rs in zip(g_s, resid):
        noise = (rs + cfg.sigma_n2) * q_alpha + c.mu_rr3  # over distance nodes
        arg = np.sqrt(np.outer(lam, noise) / c.mu_rr1) / fit.l
        inner = regularized_lower_gamma(fit.k, arg) @ wq
        total += gs * float(g_d @ inner)
    return _finish(total, "exact_quadrature", orders)


def sop_ext_r_ipsic(cfg: SystemConfig, orders: QuadOrders = DEFAULT_ORDERS) -> SopResult:
    return sop_ext_r(cfg, orders, "imperfect")


def sop_ext_r_psic(cfg: SystemConfig, orders: QuadOrders = DEFAULT_ORDERS) -> SopResult:
    return sop_ext_r(cfg, orders, "perfect")


# ---------------------------------------------------------------- external, refraction user


def sop_ext_t(cfg: SystemConfig, orders: QuadOrders = DEFAULT_ORDERS) -> SopResult:
    """Refraction-user SOP against the external eavesdropper.

    Where ``mu_tt1 - mu_tt2 * Lambda_t <= 0`` the intra-pair interference
    alone prevents the target rate and the node counts as certain outage.
    """
    _require(cfg, "external")
    c = coefficients_ext_t(cfg)
    if c.mu_tt1 <= 0:
        return _certain("exact_quadrature", orders)
    fit = _fit(cfg, "t")
    m = cfg.elements_per_side
    q, wq = _distance_rule(cfg, orders.W, orders.endpoint_correction)
    tau_d, g_d = _laguerre(orders.D)
    tail = 0.0
    tau_star = _certain_outage_threshold(cfg, c, m)
    if tau_star == 0.0:
        return _certain("exact_quadrature", orders, FLAG_CERTAIN)
    if tau_star is not None:
        # past tau_star the conditional outage is exactly 1; Laguerre across that
        # kink converges slowly, so the body is integrated on [0, tau_star]
        x, w = np.polynomial.legendre.leggauss(int(orders.D))
        tau_d = 0.5 * tau_star * (x + 1.0)
        g_d = 0.5 * tau_star * w * np.exp(-tau_d)
        tail = math.exp(-tau_star)
    y = m * tau_d
    lam = 2.0 ** cfg.R_t * (1.0 + c.eps_et1 * y / (c.eps_et2 * y + c.eps_et3)) - 1.0
    den = c.mu_tt1 - c.mu_tt2 * lam
    ok = den > 0
    noise = c.mu_tt3 + cfg.sigma_n2 * q ** cfg.alpha
    inner = np.ones_like(lam) * wq.sum()
    if np.any(ok):
        arg = np.sqrt(np.outer(lam[ok] / den[ok], noise)) / fit.l
        inner[ok] = regularized_lower_gamma(fit.k, arg) @ wq
    flags = () if np.all(ok) and tau_star is None else (FLAG_CERTAIN,)
    return _finish(float(g_d @ inner) + tail, "exact_quadrature", orders, flags)


def _certain_outage_threshold(cfg: SystemConfig, c: CoefficientSet, m: int) -> float | None:
    """Laguerre variable beyond which ``mu_tt1 <= mu_tt2 * Lambda_t`` (None if never)."""
    # Lambda_t(y) increases towards 2^R (1 + eps1/eps2) - 1; solve Lambda_t(y) = mu1/mu2
    target = c.mu_tt1 / c.mu_tt2 if c.mu_tt2 > 0 else math.inf
    r = (target + 1.0) / 2.0 ** cfg.R_t - 1.0  # required eps1 y / (eps2 y + eps3)
    if r <= 0:
        return 0.0
    if c.eps_et1 - r * c.eps_et2 <= 0:
        return None
    return r * c.eps_et3 / (c.eps_et1 - r * c.eps_et2) / m


# ---------------------------------------------------------------- internal, refraction user


def sop_int_t(cfg: SystemConfig, orders: QuadOrders = DEFAULT_ORDERS, sic: str = "imperfect") -> SopResult:
    """Refraction-user SOP against the internal eavesdropper (double Chebyshev sum).

    The eavesdropper's coherent cascade power is replaced by its mean.
    """
    _require(cfg, "internal")
    c = coefficients_int_t(cfg, sic)
    if c.mu_rt1 <= 0:
        return _certain("exact_quadrature", orders)
    fit = _fit(cfg, "t")
    h_t, w_t = _pathloss_power_rule(cfg, orders.N, orders.endpoint_correction)  # legitimate user, d_t^alpha
    h_r, w_r = _pathloss_power_rule(cfg, orders.I, orders.endpoint_correction)  # eavesdropper, d_r^alpha
    with np.errstate(divide="ignore", invalid="ignore"):
        # an eavesdropper on the surface (d_r = 0, passive surface) has infinite SNR
        psi = 2.0 ** cfg.R_t * (1.0 + c.eps_rt1 * c.omega_br / ((c.eps_rt2 + cfg.sigma_e2) * h_r + c.eps_rt3)) - 1.0
        legit = (c.mu_rt2 + cfg.sigma_n2) * h_t + c.mu_rt3
        arg = np.sqrt(np.outer(psi, legit) / c.mu_rt1) / fit.l
    arg = np.where(np.isnan(arg), np.inf, arg)
    total = float(w_r @ regularized_lower_gamma(fit.k, arg) @ w_t)
    return _finish(total, "exact_quadrature", orders)


# ---------------------------------------------------------------- asymptotic forms


def _log_powerlaw_prefactor(cfg: SystemConfig, side: str, M: int, delta: float) -> float:
    """log of (Xi_inf * 2F1)^M / (2M)!, the small-argument CDF constant of the cascade power."""
    xi = ch.highsnr_coeff(cfg.kappa_b, cfg.kappa(side))
    f21 = gauss_2f1_near_one(2.0, 0.5, 2.5, delta)
    return M * math.log(xi * f21) - log_factorial(2 * M)


def sop_ext_r_ipsic_asym(cfg: SystemConfig, orders: QuadOrders = DEFAULT_ORDERS) -> SopResult:
    """High-power limit of the imperfect-SIC reflection-user SOP (an error floor)."""
    _require(cfg, "external")
    if cfg.varpi <= 0:
        raise ConfigError("the imperfect-SIC floor requires varpi > 0")
    c = coefficients_ext_r(cfg, "imperfect")
    fit = _fit(cfg, "r")
    m = cfg.elements_per_side
    q, wq = _distance_rule(cfg, orders.W)
    tau_d, g_d = _laguerre(orders.D)
    tau_s, g_s = _laguerre(orders.S)
    lam = 2.0 ** cfg.R_r * (1.0 + c.hat_eps_er1 * m * tau_d / c.hat_eps_er2) - 1.0
    q_alpha = q ** cfg.alpha
    total = 0.0
    for gs, ts in zip(g_s, tau_s):
        resid = cfg.varpi * cfg.omega_ip_r * ts * q_alpha
        arg = np.sqrt(np.outer(lam, resid) / c.hat_mu_rr1) / fit.l
        total += gs * float(g_d @ (regularized_lower_gamma(fit.k, arg) @ wq))
    return _finish(total, "asymptotic", orders)


def sop_ext_r_psic_asym(cfg: SystemConfig, orders: QuadOrders = DEFAULT_ORDERS) -> SopResult:
    """High-SNR power law of the perfect-SIC reflection-user SOP."""
    _require(cfg, "external")
    c = coefficients_ext_r(cfg, "perfect")
    m = cfg.elements_per_side
    q, wq = _distance_rule(cfg, orders.W)
    tau_d, g_d = _laguerre(orders.D, tail_mass=None)
    lam = 2.0 ** cfg.R_r * (1.0 + c.eps_er1 * m * tau_d / c.eps_er3) - 1.0
    noise = c.mu_rr3 + cfg.sigma_n2 * q ** cfg.alpha
    log_terms = (
        np.log(g_d)[:, None] + np.log(wq)[None, :]
        + m * (np.log(lam)[:, None] + np.log(noise)[None, :])
    )
    log_val = (
        _log_powerlaw_prefactor(cfg, "r", m, orders.delta_2f1)
        - m * math.log(c.mu_rr1) + float(logsumexp(log_terms))
    )
    return _finish(math.exp(log_val), "asymptotic", orders, (FLAG_2F1,))


def sop_ext_t_asym(cfg: SystemConfig, orders: QuadOrders = DEFAULT_ORDERS) -> SopResult:
    """High-SNR refraction-user SOP; nodes with ``a_t <= Lambda_t a_r`` are certain outage."""
    _require(cfg, "external")
    c = coefficients_ext_t(cfg)
    m = cfg.elements_per_side
    q, wq = _distance_rule(cfg, orders.W)
    tau_d, g_d = _laguerre(orders.D, tail_mass=None)
    y = m * tau_d
    lam = 2.0 ** cfg.R_t * (1.0 + c.eps_et1 * y / (c.eps_et2 * y + c.eps_et3)) - 1.0
    ok = cfg.a_t > lam * cfg.a_r
    if not np.any(ok):
        return _certain("asymptotic", orders, FLAG_CERTAIN)
    noise = c.mu_tt3 + cfg.sigma_n2 * q ** cfg.alpha
    ratio = lam[ok] / (c.mu_tt1 - c.mu_tt2 * lam[ok])
    log_terms = (
        np.log(g_d[ok])[:, None] + np.log(wq)[None, :]
        + m * (np.log(ratio)[:, None] + np.log(noise)[None, :])
    )
    log_val = _log_powerlaw_prefactor(cfg, "t", m, orders.delta_2f1) + float(logsumexp(log_terms))
    certain = float(g_d[~ok].sum()) * float(wq.sum())
    flags = [FLAG_2F1] + ([FLAG_CERTAIN] if certain > 0 else [])
    return _finish(math.exp(log_val) + certain, "asymptotic", orders, flags)


def sop_int_t_ipsic_asym(cfg: SystemConfig, orders: QuadOrders = DEFAULT_ORDERS) -> SopResult:
    """High-power limit of the internal-scenario imperfect-SIC SOP; free of ``P_b``."""
    _require(cfg, "internal")
    if cfg.varpi <= 0:
        raise ConfigError("the imperfect-SIC floor requires varpi > 0")
    c = coefficients_int_t(cfg, "imperfect")
    fit = _fit(cfg, "t")
    h_t, w_t = _pathloss_power_rule(cfg, orders.N)
    h_r, w_r = _pathloss_power_rule(cfg, orders.I)
    upsilon = 2.0 ** cfg.R_t * (1.0 + c.hat_eps_rt1 * c.omega_br / (c.hat_eps_rt2 * h_r)) - 1.0
    arg = np.sqrt(np.outer(upsilon, c.hat_mu_rt2 * h_t) / c.hat_mu_rt1) / fit.l
    total = float(w_r @ regularized_lower_gamma(fit.k, arg) @ w_t)
    return _finish(total, "asymptotic", orders)


def sop_int_t_psic_asym(cfg: SystemConfig, orders: QuadOrders = DEFAULT_ORDERS) -> SopResult:
    """High-SNR internal-scenario perfect-SIC SOP; free of ``P_b``.

    The eavesdropper threshold keeps only its leading high-SNR term so that
    the transmit power cancels between the two links.
    """
    _require(cfg, "internal")
    c = coefficients_int_t(cfg, "perfect")
    m = cfg.elements_per_side
    h_t, w_t = _pathloss_power_rule(cfg, orders.N)
    h_r, w_r = _pathloss_power_rule(cfg, orders.I)
    psi = 2.0 ** cfg.R_t * c.hat_eps_rt1 * c.omega_br / (cfg.sigma_e2 * h_r + c.eps_rt3)
    delta = np.outer(psi, cfg.sigma_n2 * h_t + c.mu_rt3) / c.hat_mu_rt1
    log_terms = np.log(w_r)[:, None] + np.log(w_t)[None, :] + m * np.log(delta)
    log_val = _log_powerlaw_prefactor(cfg, "t", m, orders.delta_2f1) + float(logsumexp(log_terms))
    return _finish(math.exp(log_val), "asymptotic", orders, (FLAG_2F1,))


# ---------------------------------------------------------------- diversity order


def diversity_order(asym_fn, cfg: SystemConfig, p_lo: float = 1e3, p_hi: float = 1e4,
                    orders: QuadOrders = DEFAULT_ORDERS) -> float:
    """Negative log-log slope of an asymptotic SOP between two transmit powers (watts).

    The external eavesdropper SNR is held at its value for ``cfg`` while the
    BS power varies, which is how the diversity order isolates the
    legitimate link.
    """
    if not p_hi > p_lo > 0:
        raise ValueError("need p_hi > p_lo > 0")
    pinned = cfg.replace(rho_e=cfg.eve_snr)
    vals = []
    for p in (p_lo, p_hi):
        res = asym_fn(pinned.replace(P_b=p), orders)
        raw = res.raw if res.raw is not None else res.value
        if not raw > 1e-300:
            raise FloatingPointError(
                f"asymptotic SOP underflows at P_b = {p:g} W; lower M or the powers"
            )
        vals.append(raw)
    return -(math.log(vals[1]) - math.log(vals[0])) / (math.log(p_hi) - math.log(p_lo))


# ---------------------------------------------------------------- dispatch


def sop_exact(scenario: str, sic: str, cfg: SystemConfig, orders: QuadOrders = DEFAULT_ORDERS,
              user: str | None = None) -> SopResult:
    user = user or ("r" if scenario == "external" else "t")
    if scenario == "external":
        return sop_ext_r(cfg, orders, sic) if user == "r" else sop_ext_t(cfg, orders)
    if user != "t":
        raise ConfigError("the internal scenario only protects the refraction user")
    return sop_int_t(cfg, orders, sic)


def sop_asymptotic(scenario: str, sic: str, cfg: SystemConfig, orders: QuadOrders = DEFAULT_ORDERS,
                   user: str | None = None) -> SopResult:
    user = user or ("r" if scenario == "external" else "t")
    if scenario == "external":
        if user == "t":
            return sop_ext_t_asym(cfg, orders)
        fn = sop_ext_r_ipsic_asym if sic == "imperfect" else sop_ext_r_psic_asym
        return fn(cfg, orders)
    if user != "t":
        raise ConfigError("the internal scenario only protects the refraction user")
    fn = sop_int_t_ipsic_asym if sic == "imperfect" else sop_int_t_psic_asym
    return fn(cfg, orders)
