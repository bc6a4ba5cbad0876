import math
import re

import numpy as np
import pytest

from mfris_sop import linkmodel as lm
from mfris_sop.linkmodel import ConfigError, LinkRealization, ScenarioSpec, SystemConfig

CFG = SystemConfig()


def unit_link(**over):
    base = dict(g_legit_r=1.0, g_legit_t=1.0, g_eve=1.0 + 0j, d_r=10.0, d_t=10.0,
                t_r=1.0, t_t=1.0, t_e=1.0, v_r=1.0, v_er=1.0, v_t=1.0, v_rt=1.0)
    base.update(over)
    return LinkRealization(**base)


# Hand arithmetic at the default configuration, d = 10 m, unit channel draws.
# G = chi^2 (d_b d)^-alpha, T = chi d^-alpha sigma_s2, side gain b = beta e.
G_LEG = 1e-6 * (200.0 * 10.0) ** -2.2
G_EVE = 1e-6 * (200.0 * 15.0) ** -2.2
T_LEG = 1e-3 * 10.0 ** -2.2 * 1e-11
T_EVE = 1e-3 * 15.0 ** -2.2 * 1e-11
B_R, B_T = 10.0 * 0.8, 10.0 * 0.2


def test_db_conversions():
    assert lm.dbm_to_watt(30.0) == pytest.approx(1.0)
    assert lm.dbm_to_watt(-10.0) == pytest.approx(1e-4)
    assert lm.watt_to_dbm(1e-3) == pytest.approx(0.0, abs=1e-12)
    assert lm.db_to_linear(-126.13) == pytest.approx(2.4378e-13, rel=1e-4)


def test_defaults_match_evaluation_setup():
    assert CFG.alpha == 2.2 and CFG.M == 12 and CFG.R_d == 20.0
    assert 10 * math.log10(CFG.omega_ip_r) == pytest.approx(-126.13)
    assert 10 * math.log10(CFG.omega_ip_er) == pytest.approx(-130.26)
    assert CFG.P_ps == pytest.approx(1e-4) and CFG.P_dc == pytest.approx(10 ** -0.5 * 1e-3)


@pytest.mark.parametrize("changes, message", [
    (dict(a_r=0.6, a_t=0.5), "a_r + a_t must equal 1"),
    (dict(e_r=0.5, e_t=0.6), "e_r + e_t must equal 1"),
    (dict(varpi=1.5), "varpi"),
    (dict(beta_r=0.0), "beta_r"),
    (dict(beta_t=101.0), "beta_t"),
    (dict(d_b=0.0), "d_b"),
    (dict(sigma_n2=-1.0), "sigma_n2"),
    (dict(kappa_r=-0.1), "kappa_r"),
    (dict(R_r=0.0), "R_r"),
    (dict(M=0), "M"),
    (dict(architecture="ris9"), "architecture"),
    (dict(rho_e=0.0), "rho_e"),
])
def test_config_validation(changes, message):
    with pytest.raises(ConfigError, match=re.escape(message)):
        CFG.replace(**changes)


def test_scenario_spec_validation():
    ScenarioSpec("internal", "imperfect", "star_ris")
    for bad in (dict(scenario="x"), dict(sic="half"), dict(architecture="y")):
        with pytest.raises(ConfigError):
            ScenarioSpec(**bad)


def test_ordering_checks():
    lm.check_ordering(CFG, "external")
    with pytest.raises(ConfigError, match="a_t > a_r"):
        lm.check_ordering(CFG.replace(a_r=0.6, a_t=0.4), "external")
    with pytest.raises(ConfigError, match="a_r > a_t"):
        lm.check_ordering(CFG, "internal")
    with pytest.raises(ConfigError, match="e_t >= e_r"):
        lm.check_ordering(CFG.replace(a_r=0.9, a_t=0.1), "internal")
    lm.check_ordering(CFG.replace(a_r=0.9, a_t=0.1, e_r=0.2, e_t=0.8), "internal")


def test_eve_snr_default_and_pinned():
    assert CFG.eve_snr == pytest.approx(CFG.P_b / CFG.sigma_e2)
    assert CFG.replace(rho_e=5.0).eve_snr == 5.0


# --- SINR formulas ---------------------------------------------------------

def test_sinr_r_decodes_t_hand_value():
    expected = 1.0 * 0.75 * B_R * G_LEG / (1.0 * 0.25 * B_R * G_LEG + B_R * T_LEG + 1e-12)
    assert lm.sinr_r_decodes_t(unit_link(), CFG) == pytest.approx(expected, rel=1e-13)


def test_sinr_r_decodes_t_limits():
    cfg = CFG.replace(a_r=0.0, a_t=1.0)
    real = unit_link()
    assert lm.sinr_r_decodes_t(real, cfg) == pytest.approx(
        B_R * G_LEG / (B_R * T_LEG + 1e-12), rel=1e-13)
    assert lm.sinr_r_decodes_t(unit_link(g_legit_r=0.0), CFG) == 0.0


def test_sinr_r_own_hand_value():
    ip = 1.0 * 1.0 * CFG.omega_ip_r
    real = unit_link(v_r=CFG.omega_ip_r)
    expected = 0.25 * B_R * G_LEG / (B_R * T_LEG + ip + 1e-12)
    assert lm.sinr_r_own(real, CFG, "imperfect") == pytest.approx(expected, rel=1e-13)
    expected_p = 0.25 * B_R * G_LEG / (B_R * T_LEG + 1e-12)
    assert lm.sinr_r_own(real, CFG, "perfect") == pytest.approx(expected_p, rel=1e-13)


def test_sinr_r_own_limits():
    cfg = CFG.replace(sigma_s2=0.0, varpi=0.0)
    assert lm.sinr_r_own(unit_link(), cfg) == pytest.approx(0.25 * B_R * G_LEG / 1e-12, rel=1e-13)
    assert lm.sinr_r_own(unit_link(v_r=1e300), CFG.replace(varpi=1.0)) < 1e-250
    assert lm.sinr_r_own(unit_link(g_legit_r=0.0), CFG) == 0.0


def test_sinr_t_own_hand_value_and_limits():
    expected = 0.75 * B_T * G_LEG / (0.25 * B_T * G_LEG + B_T * T_LEG + 1e-12)
    assert lm.sinr_t_own(unit_link(), CFG) == pytest.approx(expected, rel=1e-13)
    cfg = CFG.replace(a_r=0.0, a_t=1.0)
    assert lm.sinr_t_own(unit_link(), cfg) == pytest.approx(B_T * G_LEG / (B_T * T_LEG + 1e-12), rel=1e-13)
    assert lm.sinr_t_own(unit_link(g_legit_t=0.0), CFG) == 0.0


def test_sinr_eve_t_hand_value_and_limits():
    expected = 0.75 * B_R * G_EVE / (0.25 * B_R * G_EVE + B_R * T_EVE + 1e-12)
    assert lm.sinr_eve_t(unit_link(), CFG) == pytest.approx(expected, rel=1e-13)
    assert lm.sinr_eve_t(unit_link(g_eve=0j), CFG) == 0.0
    cfg = CFG.replace(a_r=0.0, a_t=1.0, sigma_s2=0.0)
    assert lm.sinr_eve_t(unit_link(), cfg) == pytest.approx(B_R * G_EVE / 1e-12, rel=1e-13)


def test_sinr_eve_r_hand_value_and_limits():
    real = unit_link(g_eve=(0.6 + 0.8j), v_er=CFG.omega_ip_er)
    expected = 0.25 * B_R * G_EVE / (B_R * T_EVE + CFG.omega_ip_er + 1e-12)
    assert lm.sinr_eve_r(real, CFG) == pytest.approx(expected, rel=1e-13)
    assert lm.sinr_eve_r(unit_link(g_eve=0j), CFG) == 0.0
    assert lm.sinr_eve_r(real, CFG, "perfect") == pytest.approx(
        0.25 * B_R * G_EVE / (B_R * T_EVE + 1e-12), rel=1e-13)


def test_internal_sinrs_hand_values():
    cfg = CFG.replace(a_r=0.9, a_t=0.1, e_r=0.2, e_t=0.8)
    b_t, b_r = 10 * 0.8, 10 * 0.2
    real = unit_link(v_t=CFG.omega_ip_t, v_rt=CFG.omega_ip_rt)
    own = 0.1 * b_t * G_LEG / (CFG.omega_ip_t + b_t * T_LEG + 1e-12)
    ieve = 0.1 * b_r * G_LEG / (b_r * T_LEG + CFG.omega_ip_rt + 1e-12)
    assert lm.sinr_t_own_internal(real, cfg) == pytest.approx(own, rel=1e-13)
    assert lm.sinr_ieve_t(real, cfg) == pytest.approx(ieve, rel=1e-13)
    # perfect SIC drops the residual term entirely
    assert lm.sinr_t_own_internal(real, cfg, "perfect") == pytest.approx(
        0.1 * b_t * G_LEG / (b_t * T_LEG + 1e-12), rel=1e-13)
    assert lm.sinr_t_own_internal(real, cfg.replace(varpi=0.0)) == lm.sinr_t_own_internal(real, cfg, "perfect")
    assert lm.sinr_ieve_t(unit_link(g_legit_r=0.0), cfg) == 0.0


def test_sinr_vectorized():
    real = unit_link(g_legit_r=np.array([0.0, 1.0, 2.0]), d_r=np.array([5.0, 10.0, 15.0]),
                     t_r=np.ones(3), v_r=np.ones(3))
    out = lm.sinr_r_own(real, CFG)
    assert out.shape == (3,) and out[0] == 0.0 and np.all(np.diff(out) > 0)


def test_unknown_sic_mode():
    with pytest.raises(ConfigError):
        lm.sinr_r_own(unit_link(), CFG, "partial")


@pytest.mark.parametrize("leg, eve, expected", [(3.0, 1.0, 1.0), (1.0, 3.0, 0.0), (2.5, 2.5, 0.0)])
def test_secrecy_capacity(leg, eve, expected):
    assert lm.secrecy_capacity(leg, eve) == pytest.approx(expected, abs=1e-15)


def test_secrecy_capacity_vectorized():
    out = lm.secrecy_capacity(np.array([3.0, 1.0]), np.array([1.0, 3.0]))
    np.testing.assert_allclose(out, [1.0, 0.0])


# --- power budget ----------------------------------------------------------

def test_total_power_bs_only():
    cfg = CFG.replace(P_b=1.0, P_r=0.0, P_ps=0.0, P_dc=0.0)
    assert lm.total_power(cfg) == 1.0


def test_total_power_default_components():
    cfg = CFG.replace(P_b=0.5, P_r=0.01)
    expected = 0.5 + 12 * 0.01 + 24 * (1e-4 + 10 ** -0.5 * 1e-3)
    assert lm.total_power(cfg) == pytest.approx(expected, rel=1e-14)
    assert lm.total_power(cfg) == pytest.approx(0.630, abs=1e-3)


def test_solve_p_b_round_trip():
    p_b = lm.solve_p_b(CFG, 2.0)
    assert lm.total_power(CFG.replace(P_b=p_b)) == pytest.approx(2.0, rel=1e-14)
    assert lm.with_budget(CFG, 2.0).P_b == p_b


def test_solve_p_b_infeasible():
    with pytest.raises(lm.InfeasibleBudget):
        lm.solve_p_b(CFG, lm.dbm_to_watt(10.0))
    assert issubclass(lm.InfeasibleBudget, ConfigError)


def test_star_ris_has_no_amplifier_power():
    star = lm.map_architecture("star_ris", CFG)
    assert lm.total_power(star) == pytest.approx(CFG.P_b + 24 * (CFG.P_ps + CFG.P_dc), rel=1e-14)


# --- architectures ---------------------------------------------------------

def test_map_mf_ris_identity():
    assert lm.map_architecture(ScenarioSpec(), CFG) is CFG


def test_map_active_ris():
    act = lm.map_architecture(ScenarioSpec(architecture="active_ris"), CFG)
    assert act.elements_per_side == 6
    assert act.e_r == act.e_t == 1.0
    assert act.beta_r == CFG.beta_r and act.beta_t == CFG.beta_t
    assert act.side_gain("t") == 10.0
    with pytest.raises(ConfigError, match="even"):
        lm.map_architecture("active_ris", CFG.replace(M=5))


def test_map_star_ris():
    star = lm.map_architecture("star_ris", CFG)
    assert star.beta_r == star.beta_t == 1.0
    assert (star.e_r, star.e_t) == (0.8, 0.2)
    assert star.sigma_s2 == 0.0
    assert star.elements_per_side == 12


def test_map_is_idempotent_and_refuses_cross_mapping():
    star = lm.map_architecture("star_ris", CFG)
    assert lm.map_architecture("star_ris", star) is star
    with pytest.raises(ConfigError):
        lm.map_architecture("active_ris", star)


def test_side_gain_rejects_unknown_side():
    with pytest.raises(ValueError):
        CFG.side_gain("e")
