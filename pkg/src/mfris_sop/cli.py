"""Command line front end: configuration files, sweeps and CSV output.

Configuration files are flat ``key = value`` documents with ``#`` comments.
Keys are :class:`SystemConfig` field names; a ``_db`` or ``_dbm`` suffix
marks a value given in decibels (converted to linear units / watts). The
remaining keys describe the scenario and the sweep::

    scenario = external          # or internal
    sic = perfect                # default SIC mode for analyze/validate
    architecture = mf_ris
    p_tot_dbm = 30               # optional: derive P_b from a total budget
    sweep_variable = p_tot_dbm   # p_tot_dbm | elements | e_r | power_allocation | rate
    sweep_values = 10, 20, 30
    architectures = mf_ris, active_ris, star_ris
    sic_modes = perfect, imperfect
    outputs = sop_exact, sop_asymptotic, sop_mc, throughput_exact
    user = r
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np

from . import analysis as an
from . import linkmodel as lm
from . import montecarlo as mc
from .linkmodel import ConfigError, ScenarioSpec, SystemConfig

log = logging.getLogger("mfris_sop")

CSV_COLUMNS = (
    "value", "architecture", "sic", "sop_exact", "sop_asym", "sop_mc", "mc_stderr", "throughput",
)
SWEEP_VARIABLES = ("p_tot_dbm", "elements", "e_r", "power_allocation", "rate")
OUTPUTS = ("sop_exact", "sop_asymptotic", "sop_mc", "throughput_exact", "throughput_mc")
DEFAULT_OUTPUTS = ("sop_exact", "sop_asymptotic", "sop_mc", "throughput_exact")

EXIT_OK, EXIT_ERROR, EXIT_VALIDATION = 0, 1, 2

_FIELDS = {f.name: f for f in dataclasses.fields(SystemConfig)}
_STR_KEYS = {"scenario", "sic", "architecture", "sweep_variable", "user"}
_LIST_KEYS = {"sweep_values", "architectures", "sic_modes", "outputs"}


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    values: tuple
    scenario: str = "external"
    architectures: tuple = ("mf_ris",)
    sic_modes: tuple = ("perfect",)
    outputs: tuple = DEFAULT_OUTPUTS
    user: Optional[str] = None
    p_tot_dbm: Optional[float] = None

    def __post_init__(self) -> None:
        if self.variable not in SWEEP_VARIABLES:
            raise ConfigError(f"sweep variable must be one of {SWEEP_VARIABLES}, got {self.variable!r}")
        if not self.values:
            raise ConfigError("sweep values must be nonempty")
        diffs = np.diff(np.asarray(self.values, dtype=float))
        if not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ConfigError("sweep values must be strictly monotone")
        for arch in self.architectures:
            ScenarioSpec(self.scenario, "perfect", arch)
        for sic in self.sic_modes:
            ScenarioSpec(self.scenario, sic)
        bad = [o for o in self.outputs if o not in OUTPUTS]
        if bad:
            raise ConfigError(f"unknown outputs {bad}; choose from {OUTPUTS}")
        if self.user not in (None, "r", "t"):
            raise ConfigError("user must be 'r' or 't'")
        if self.scenario == "internal" and self.user == "r":
            raise ConfigError("the internal scenario only protects the refraction user")

    @property
    def target_user(self) -> str:
        return self.user or ("r" if self.scenario == "external" else "t")


class LoadedConfig(NamedTuple):
    system: SystemConfig
    scenario: ScenarioSpec
    sweep: Optional[SweepSpec]
    p_tot_dbm: Optional[float]


# ---------------------------------------------------------------- configuration


def _parse_number(key: str, text: str, lineno: int):
    try:
        if key == "M":
            return int(text)
        return float(text)
    except ValueError:
        raise ConfigError(f"line {lineno}: {key} expects a number, got {text!r}") from None


def _resolve_key(key: str) -> tuple[str, Optional[str]]:
    if key in _FIELDS:
        return key, None
    for suffix in ("_dbm", "_db"):
        if key.endswith(suffix) and key[: -len(suffix)] in _FIELDS:
            return key[: -len(suffix)], suffix[1:]
    return key, None


def parse_config_text(text: str) -> LoadedConfig:
    system: dict = {}
    extra: dict = {}
    seen: set = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value")
        field_name, unit = _resolve_key(key)
        if field_name in seen:
            raise ConfigError(f"line {lineno}: duplicate key {field_name!r}")
        seen.add(field_name)
        if key == "p_tot_dbm":
            extra[key] = _parse_number(key, value, lineno)
        elif key in _STR_KEYS:
            extra[key] = value
        elif key in _LIST_KEYS:
            extra[key] = tuple(v.strip() for v in value.split(",") if v.strip())
        elif field_name in _FIELDS:
            number = _parse_number(field_name, value, lineno)
            if unit == "dbm":
                number = lm.dbm_to_watt(number)
            elif unit == "db":
                number = lm.db_to_linear(number)
            system[field_name] = number
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")

    arch = extra.get("architecture", "mf_ris")
    cfg = SystemConfig(**system)  # kept as the MF-RIS base; benchmarks are mapped per point
    scenario = ScenarioSpec(extra.get("scenario", "external"), extra.get("sic", "perfect"), arch)
    lm.check_ordering(lm.map_architecture(arch, cfg), scenario.scenario)

    sweep = None
    if "sweep_variable" in extra or "sweep_values" in extra:
        if "sweep_variable" not in extra or "sweep_values" not in extra:
            raise ConfigError("a sweep needs both sweep_variable and sweep_values")
        try:
            values = tuple(float(v) for v in extra["sweep_values"])
        except ValueError:
            raise ConfigError("sweep_values must be numbers") from None
        sweep = SweepSpec(
            variable=extra["sweep_variable"],
            values=values,
            scenario=scenario.scenario,
            architectures=extra.get("architectures", (arch,)),
            sic_modes=extra.get("sic_modes", (scenario.sic,)),
            outputs=extra.get("outputs", DEFAULT_OUTPUTS),
            user=extra.get("user"),
            p_tot_dbm=extra.get("p_tot_dbm"),
        )
    return LoadedConfig(cfg, scenario, sweep, extra.get("p_tot_dbm"))


def load_config(path) -> LoadedConfig:
    """Read and validate a configuration file."""
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"configuration file not found: {p}")
    return parse_config_text(p.read_text())


# ---------------------------------------------------------------- sweeps


def _point_config(base: SystemConfig, spec: SweepSpec, value: float, arch: str) -> SystemConfig:
    """Configuration of one sweep point before the power budget is applied."""
    cfg = base
    if spec.variable == "elements":
        if not float(value).is_integer():
            raise ConfigError(f"element count must be an integer, got {value}")
        cfg = cfg.replace(M=int(value))
    elif spec.variable == "e_r":
        cfg = cfg.replace(e_r=value, e_t=1.0 - value)
    elif spec.variable == "power_allocation":
        cfg = cfg.replace(a_r=value, a_t=1.0 - value)
    elif spec.variable == "rate":
        cfg = cfg.replace(**{"R_r" if spec.target_user == "r" else "R_t": value})
    return lm.map_architecture(arch, cfg)


def _budget(spec: SweepSpec, value: float) -> Optional[float]:
    if spec.variable == "p_tot_dbm":
        return lm.dbm_to_watt(value)
    return None if spec.p_tot_dbm is None else lm.dbm_to_watt(spec.p_tot_dbm)


def _rate(cfg: SystemConfig, user: str) -> float:
    return cfg.R_r if user == "r" else cfg.R_t


def run_sweep(spec: SweepSpec, base: SystemConfig, mc_cfg: mc.McConfig,
              orders: an.QuadOrders = an.DEFAULT_ORDERS) -> list[dict]:
    """One row per (value, architecture, SIC mode), in that nesting order."""
    user = spec.target_user
    want = set(spec.outputs)
    rows = []
    for value in spec.values:
        for arch in spec.architectures:
            cfg = _point_config(base, spec, value, arch)
            budget = _budget(spec, value)
            if budget is not None:
                try:
                    cfg = lm.with_budget(cfg, budget)
                except lm.InfeasibleBudget as exc:
                    log.warning("%s at %s = %g: %s; reporting certain outage", arch, spec.variable, value, exc)
                    for sic in spec.sic_modes:
                        rows.append(_infeasible_row(value, arch, sic, want))
                    continue
            lm.check_ordering(cfg, spec.scenario)
            estimates = None
            if want & {"sop_mc", "throughput_mc"}:
                estimates = mc.estimate_all(spec.scenario, cfg, mc_cfg)
            for sic in spec.sic_modes:
                rows.append(_row(spec, cfg, value, arch, sic, user, want, estimates, mc_cfg, orders))
    return rows


def _infeasible_row(value, arch, sic, want) -> dict:
    row = dict.fromkeys(CSV_COLUMNS)
    row.update(value=value, architecture=arch, sic=sic)
    if "sop_exact" in want:
        row["sop_exact"] = 1.0
    if "sop_asymptotic" in want:
        row["sop_asym"] = 1.0
    if "sop_mc" in want:
        row["sop_mc"], row["mc_stderr"] = 1.0, 0.0
    if want & {"throughput_exact", "throughput_mc"}:
        row["throughput"] = 0.0
    return row


def _row(spec, cfg, value, arch, sic, user, want, estimates, mc_cfg, orders) -> dict:
    row = dict.fromkeys(CSV_COLUMNS)
    row.update(value=value, architecture=arch, sic=sic)
    exact = None
    if want & {"sop_exact", "throughput_exact"}:
        exact = an.sop_exact(spec.scenario, sic, cfg, orders, user).value
        if "sop_exact" in want:
            row["sop_exact"] = exact
    if "sop_asymptotic" in want:
        row["sop_asym"] = an.sop_asymptotic(spec.scenario, sic, cfg, orders, user).value
    est = None
    if estimates is not None:
        est = estimates[mc.outage_key(ScenarioSpec(spec.scenario, sic, arch), user)]
        if "sop_mc" in want:
            row["sop_mc"], row["mc_stderr"] = est.p_hat, est.stderr
    if "throughput_exact" in want:
        row["throughput"] = an.secrecy_throughput(exact, _rate(cfg, user))
    elif "throughput_mc" in want:
        row["throughput"] = an.secrecy_throughput(est.p_hat, _rate(cfg, user))
    return row


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return f"{float(x):.8g}"


def emit_csv(table: list[dict], path) -> None:
    """Write ``table`` with the fixed column order; ``path == '-'`` means stdout."""
    def write(handle):
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in table:
            writer.writerow([_fmt(row.get(c)) for c in CSV_COLUMNS])

    if str(path) == "-":
        write(sys.stdout)
        return
    try:
        with open(path, "w", newline="") as handle:
            write(handle)
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc.strerror or exc}") from exc


def read_csv(path) -> list[dict]:
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


# ---------------------------------------------------------------- validation and self-test


def mc_tolerance(p_mc: float, stderr: float) -> float:
    return max(4.0 * stderr, 0.10 * p_mc)


def compare(exact: float, p_mc: float, stderr: float) -> Optional[bool]:
    """Tolerance check of an analytic value against MC; ``None`` outside [1e-3, 0.9]."""
    if not 1e-3 <= p_mc <= 0.9:
        return None
    return abs(exact - p_mc) <= mc_tolerance(p_mc, stderr)


def _single_point_spec(loaded: LoadedConfig, outputs) -> tuple[SweepSpec, SystemConfig]:
    cfg = loaded.system
    p_tot = loaded.p_tot_dbm
    if p_tot is None:
        p_tot = lm.watt_to_dbm(lm.total_power(lm.map_architecture(loaded.scenario.architecture, cfg)))
    spec = SweepSpec(
        variable="p_tot_dbm", values=(p_tot,), scenario=loaded.scenario.scenario,
        architectures=(loaded.scenario.architecture,), sic_modes=(loaded.scenario.sic,),
        outputs=tuple(outputs),
    )
    return spec, cfg


def run_validate(loaded: LoadedConfig, mc_cfg: mc.McConfig, orders: an.QuadOrders) -> tuple[list[dict], bool]:
    if loaded.sweep is not None:
        spec = dataclasses.replace(loaded.sweep, outputs=("sop_exact", "sop_mc"))
    else:
        spec, _ = _single_point_spec(loaded, ("sop_exact", "sop_mc"))
        spec = dataclasses.replace(spec, sic_modes=lm.SIC_MODES)
    rows = run_sweep(spec, loaded.system, mc_cfg, orders)
    ok = True
    for row in rows:
        verdict = compare(row["sop_exact"], row["sop_mc"], row["mc_stderr"])
        label = {None: "SKIP", True: "PASS", False: "FAIL"}[verdict]
        print(
            f"{label} value={_fmt(row['value'])} arch={row['architecture']} sic={row['sic']} "
            f"exact={_fmt(row['sop_exact'])} mc={_fmt(row['sop_mc'])} stderr={_fmt(row['mc_stderr'])}",
            file=sys.stderr,
        )
        ok &= verdict is not False
    return rows, ok


def run_selftest(orders: an.QuadOrders) -> bool:
    """Special-function and quadrature checks plus the order-doubling convergence test."""
    from . import numerics as nm

    checks = []

    def check(name, cond):
        checks.append((name, bool(cond)))

    check("gamma(5) = 24", abs(nm.gamma_fn(5.0) - 24.0) < 1e-12)
    check("gamma(1/2) = sqrt(pi)", abs(nm.gamma_fn(0.5) - math.sqrt(math.pi)) < 1e-14)
    check("lower gamma(1, 1)", abs(nm.lower_incomplete_gamma(1.0, 1.0) - (1 - math.exp(-1))) < 1e-14)
    check("1F1(1; 1; 0.7) = e^0.7", abs(nm.kummer_1f1(1.0, 1.0, 0.7) - math.exp(0.7)) < 1e-12)
    check("2F1(1, 1; 2; 1/2) = 2 ln 2", abs(nm.gauss_2f1(1, 1, 2, 0.5) - 2 * math.log(2)) < 1e-12)
    check("2F1(1, 1/2; 5/2; 1) = 3/2", abs(nm.gauss_2f1(1, 0.5, 2.5, 1.0) - 1.5) < 1e-12)
    check("I0(0) = 1", nm.bessel_i(0, 0.0) == 1.0)
    rule = nm.laguerre_rule(orders.X)
    check(f"Laguerre({orders.X}) log-weights finite", np.all(np.isfinite(rule.log_weights)))
    w, x = rule.weights, rule.nodes
    check(f"Laguerre({orders.X}) sum of weights = 1", abs(w.sum() - 1.0) < 1e-10)
    check(f"Laguerre({orders.X}) first moment = 1", abs((w * x).sum() - 1.0) < 1e-8)
    check("Laguerre nodes increasing", np.all(np.diff(x) > 0))

    ext = SystemConfig()
    internal = SystemConfig(a_r=0.9, a_t=0.1, e_r=0.2, e_t=0.8)
    doubled = orders.doubled()
    for name, fn, cfg in (
        ("reflection user, imperfect SIC", an.sop_ext_r_ipsic, ext),
        ("refraction user, external", an.sop_ext_t, ext),
        ("refraction user, internal", lambda c, o: an.sop_int_t(c, o, "imperfect"), internal),
    ):
        a, b = fn(cfg, orders).value, fn(cfg, doubled).value
        rel = abs(a - b) / max(abs(a), 1e-300)
        print(f"  convergence {name}: {a:.10g} -> {b:.10g} (rel {rel:.2e})", file=sys.stderr)
        check(f"order doubling, {name}", rel < 1e-4)
    for name, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}", file=sys.stderr)
    return all(ok for _, ok in checks)


# ---------------------------------------------------------------- entry point


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--seed", type=int, default=mc.McConfig.seed, help="Monte Carlo seed (u64)")
    common.add_argument("--trials", type=int, default=mc.McConfig.trials, help="Monte Carlo trials per point")
    common.add_argument("--partitions", type=int, default=1, help="Monte Carlo worker partitions")
    common.add_argument("--out", default="-", help="CSV output path ('-' for stdout)")
    common.add_argument("--orders", default=None, help="quadrature orders W,S,D,N,I,X")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="mfris-sop", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)
    sub.add_parser("analyze", parents=[common], help="evaluate a single operating point")
    sub.add_parser("sweep", parents=[common], help="run the sweep described in the config")
    sub.add_parser("validate", parents=[common], help="analytic-vs-Monte Carlo comparison")
    sub.add_parser("selftest", parents=[common], help="quadrature and special-function checks")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        orders = an.QuadOrders.parse(args.orders) if args.orders else an.DEFAULT_ORDERS
        if args.verb == "selftest":
            return EXIT_OK if run_selftest(orders) else EXIT_VALIDATION

        mc_cfg = mc.McConfig(trials=args.trials, seed=args.seed, partitions=args.partitions)
        if args.trials < mc.MIN_REPORTED_TRIALS:
            log.warning("fewer than %d trials; Monte Carlo columns are indicative only",
                        mc.MIN_REPORTED_TRIALS)
        loaded = load_config(args.config) if args.config else LoadedConfig(
            SystemConfig(), ScenarioSpec(), None, None)

        if args.verb == "analyze":
            spec, cfg = _single_point_spec(loaded, DEFAULT_OUTPUTS)
            emit_csv(run_sweep(spec, cfg, mc_cfg, orders), args.out)
            return EXIT_OK
        if args.verb == "sweep":
            if loaded.sweep is None:
                raise ConfigError("the configuration does not describe a sweep (sweep_variable, sweep_values)")
            emit_csv(run_sweep(loaded.sweep, loaded.system, mc_cfg, orders), args.out)
            return EXIT_OK
        rows, ok = run_validate(loaded, mc_cfg, orders)
        emit_csv(rows, args.out)
        return EXIT_OK if ok else EXIT_VALIDATION
    except (ConfigError, FileNotFoundError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
