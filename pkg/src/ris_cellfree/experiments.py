"""Figure sweeps, CSV export, and the closed-form-vs-simulation validator.

Every sweep point carries both engine values (closed form and Monte Carlo
with a standard error), so a plotted pair of curves doubles as an oracle
check. Drops re-draw the network at a fixed sweep value; the point value
averages over drops and its standard error is the spread across drops.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

from . import scenario as sc

CSV_HEADER = ("sweep_param", "value", "scheme", "metric_name", "closed_form",
              "monte_carlo", "mc_stderr", "trials", "drops", "seed")

FIG1_GRID = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)   # pilot power, dBm
FIG2_GRID = (10, 20, 30, 40, 50, 60)                   # number of APs
FIG3_GRID = tuple(range(1, 16))                        # number of panels


@dataclass(frozen=True)
class SweepPoint:
    sweep_param: str
    value: float
    scheme: str
    metric_name: str
    closed_form: float
    monte_carlo: float
    mc_stderr: float
    trials: int
    drops: int
    seed: int


def _drop_seeds(seed: int, drops: int) -> np.ndarray:
    return np.random.SeedSequence(seed).generate_state(drops)


def _point_metrics(config: sc.ScenarioConfig, scheme: str, metric: str,
                   trials: int, drop_seed: int) -> tuple:
    scen = sc.build_scenario(replace(config, seed=int(drop_seed)))
    if metric == "nmse":
        closed = sc.nmse_closed(scen, scheme)
        mc, _ = sc.nmse_monte_carlo(scen, scheme, trials, seed=[drop_seed, 1])
    elif metric == "sum_se":
        closed = sc.se_closed(scen, scheme).sum_se
        mc = sc.se_monte_carlo(scen, scheme, trials, seed=[drop_seed, 1]).sum_se
    else:
        raise ValueError(f"unknown metric {metric!r}")
    return closed, mc


def run_sweep(config: sc.ScenarioConfig, param: str, values, metric: str,
              schemes, trials: int = 500, drops: int = 20,
              seed: int = 0) -> list:
    """Evaluate one metric over a parameter grid for several schemes."""
    points = []
    drop_seeds = _drop_seeds(seed, drops)
    for value in values:
        cfg = replace(config, **{param: value})
        for scheme in schemes:
            closed = np.empty(drops)
            mc = np.empty(drops)
            for d, ds in enumerate(drop_seeds):
                closed[d], mc[d] = _point_metrics(cfg, scheme, metric,
                                                  trials, ds)
            stderr = (mc.std(ddof=1) / np.sqrt(drops)) if drops > 1 else np.inf
            points.append(SweepPoint(
                sweep_param=param, value=float(value), scheme=scheme,
                metric_name=metric, closed_form=float(closed.mean()),
                monte_carlo=float(mc.mean()), mc_stderr=float(stderr),
                trials=trials, drops=drops, seed=seed))
    return points


def run_fig1(config: sc.ScenarioConfig, trials: int = 500, drops: int = 20,
             seed: int = 0, schemes=("two_phase", "benchmark",
                                     "two_phase_no_emi", "benchmark_no_emi"),
             grid=FIG1_GRID) -> list:
    """NMSE against pilot power."""
    return run_sweep(config, "p_p_dbm", grid, "nmse", schemes, trials, drops,
                     seed)


def run_fig2(config: sc.ScenarioConfig, trials: int = 500, drops: int = 20,
             seed: int = 0, schemes=("two_phase", "benchmark",
                                     "two_phase_no_emi", "benchmark_no_emi"),
             grid=FIG2_GRID) -> list:
    """Sum spectral efficiency against the number of APs."""
    return run_sweep(config, "m_aps", grid, "sum_se", schemes, trials, drops,
                     seed)


def run_fig3(config: sc.ScenarioConfig, trials: int = 500, drops: int = 20,
             seed: int = 0, schemes=("two_phase", "benchmark"),
             grid=FIG3_GRID) -> list:
    """Sum spectral efficiency against the number of panels."""
    return run_sweep(config, "j_ris", grid, "sum_se", schemes, trials, drops,
                     seed)


def run_single(config: sc.ScenarioConfig, trials: int = 500, drops: int = 20,
               seed: int = 0, schemes=None) -> list:
    """Both metrics for the configured scenario, no parameter sweep."""
    schemes = schemes or (config.scheme,)
    points = []
    points += run_sweep(config, "seed", (config.seed,), "nmse", schemes,
                        trials, drops, seed)
    points += run_sweep(config, "seed", (config.seed,), "sum_se", schemes,
                        trials, drops, seed)
    return points


def write_csv(points, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for p in points:
            writer.writerow((p.sweep_param, repr(p.value), p.scheme,
                             p.metric_name, repr(p.closed_form),
                             repr(p.monte_carlo), repr(p.mc_stderr),
                             p.trials, p.drops, p.seed))
    return None


def read_csv(path) -> list:
    points = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            points.append(SweepPoint(
                sweep_param=row["sweep_param"], value=float(row["value"]),
                scheme=row["scheme"], metric_name=row["metric_name"],
                closed_form=float(row["closed_form"]),
                monte_carlo=float(row["monte_carlo"]),
                mc_stderr=float(row["mc_stderr"]), trials=int(row["trials"]),
                drops=int(row["drops"]), seed=int(row["seed"])))
    return points


def resolvable(gap: float, stderr_a: float, stderr_b: float) -> bool:
    """Is a gap between two Monte Carlo values at least 3x its noise?

    Points whose standard errors exceed a third of the gap they are asked
    to resolve count as under-sampled.
    """
    return abs(gap) >= 3.0 * max(stderr_a, stderr_b)


# ---------------------------------------------------------------------------
# validation: every closed form against its Monte Carlo oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ValidationCheck:
    name: str
    value: float          # worst observed deviation, in units of the limit
    limit: float
    passed: bool

    def line(self) -> str:
        tag = "pass" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: {self.value:.4g} (limit {self.limit:g})"


@dataclass(frozen=True)
class ValidationReport:
    checks: list
    trials: int
    seed: int

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list:
        out = [c.line() for c in self.checks]
        verdict = "all checks passed" if self.passed else "VALIDATION FAILED"
        out.append(f"{len(self.checks)} checks, {verdict}")
        return out


def nmse_oracle_check(view: sc.SchemeView, n_antennas: int, trials: int,
                      seed, label: str) -> ValidationCheck:
    """Closed-form NMSE against simulation, judged at statistical power.

    The tolerance is four batch-means standard errors with a 0.5% relative
    floor, so the check is as sharp as the trial budget allows; a
    mis-scaled estimation coefficient shifts the simulated NMSE by an
    amount far outside that band while leaving the closed form unchanged.
    """
    from .estimation import nmse_closed_form, nmse_empirical

    closed = nmse_closed_form(view.state)
    mc, stderr = nmse_empirical(view.fading, view.panels, n_antennas,
                                view.state, trials, seed, view.subtraction)
    tol = max(4.0 * stderr, 0.005 * closed)
    dev = abs(mc - closed)
    return ValidationCheck(f"nmse closed vs monte carlo ({label})",
                           float(dev / closed), float(tol / closed),
                           bool(dev <= tol))


def _interference_excess(view: sc.SchemeView, eta: np.ndarray,
                         rho_d: float, n_antennas: int) -> np.ndarray:
    """Per-user sum over beams of the product-channel interference excess."""
    from .downlink import ui_product_excess

    k_users = view.fading.k_users
    return np.array([sum(ui_product_excess(k, kp, eta, view.state, rho_d,
                                           n_antennas, view.fading,
                                           view.panels)
                         for kp in range(k_users)) for k in range(k_users)])


def validate(trials: int = 40000, seed: int = 2) -> ValidationReport:
    """Run every estimation/downlink closed form against simulation.

    Uses the synthetic desk scenario so that direct, cascaded, EMI and
    noise contributions are all numerically visible. The interference
    check adds the exact product-channel fourth-moment excess to the
    Gaussian-equivalent closed form, so it holds at full statistical
    precision; the per-user SINR check compares the plain closed form at
    its documented tolerance.
    """
    from .channel import sample_realization
    from .downlink import power_coefficients
    from .estimation import simulate_estimates

    scen = sc.desk_scenario(seed=seed)
    checks = []
    n = scen.n_antennas

    # channel second moment, per link
    rng = np.random.default_rng([seed, 1])
    view = sc.scheme_view(scen, "two_phase")
    power = np.zeros((scen.m_aps, scen.k_users))
    est_power = np.zeros((scen.m_aps, scen.k_users))
    ortho = np.zeros((), dtype=complex)
    ortho_sq = 0.0
    done = 0
    batch = 256
    while done < trials:
        t = min(batch, trials - done)
        real = sample_realization(view.fading, view.panels, n, rng, trials=t)
        g_hat = simulate_estimates(real, view.state, view.panels, rng,
                                   view.subtraction)
        power += np.sum(np.abs(real.aggregate) ** 2, axis=(0, 3))
        est_power += np.sum(np.abs(g_hat) ** 2, axis=(0, 3))
        err_inner = np.sum(np.conj(g_hat) * (real.aggregate - g_hat),
                           axis=(1, 2, 3))
        ortho += err_inner.sum()
        ortho_sq += np.sum(np.abs(err_inner) ** 2)
        done += t
    power /= trials
    est_power /= trials
    dev = np.abs(power / (n * view.state.power_total) - 1.0).max()
    checks.append(ValidationCheck("aggregate channel power vs N delta",
                                  float(dev), 0.02, bool(dev <= 0.02)))
    dev = np.abs(est_power / (n * view.state.est) - 1.0).max()
    checks.append(ValidationCheck("estimate power vs N lambda",
                                  float(dev), 0.03, bool(dev <= 0.03)))
    # orthogonality: estimate-error inner product should be zero-mean
    mean = ortho / trials
    var = ortho_sq / trials - np.abs(mean) ** 2
    z = np.abs(mean) / np.sqrt(max(var.real, 1e-300) / trials)
    checks.append(ValidationCheck("estimate-error orthogonality (sigmas)",
                                  float(z), 4.0, bool(z <= 4.0)))

    for scheme in ("two_phase", "benchmark"):
        checks.append(nmse_oracle_check(sc.scheme_view(scen, scheme), n,
                                        trials, [seed, 2], scheme))

    for scheme in ("two_phase", "benchmark"):
        view = sc.scheme_view(scen, scheme)
        closed = sc.se_closed(scen, scheme)
        mc = sc.se_monte_carlo(scen, scheme, trials, seed=[seed, 3])
        dev = np.abs(mc.sinr / closed.sinr - 1.0).max()
        checks.append(ValidationCheck(f"per-user sinr closed vs mc ({scheme})",
                                      float(dev), 0.05, bool(dev <= 0.05)))
        eta = power_coefficients(view.state, n)
        exact = closed.interference + _interference_excess(view, eta,
                                                           scen.rho_d, n)
        dev = np.abs(mc.interference / exact - 1.0).max()
        checks.append(ValidationCheck(
            f"interference with product excess ({scheme})",
            float(dev), 0.025, bool(dev <= 0.025)))
        dev = np.abs(mc.emi / closed.emi - 1.0).max()
        checks.append(ValidationCheck(f"received emi closed vs mc ({scheme})",
                                      float(dev), 0.05, bool(dev <= 0.05)))
        dev = np.abs(mc.power_ratio - 1.0).max()
        checks.append(ValidationCheck(f"per-ap radiated power ({scheme})",
                                      float(dev), 0.01, bool(dev <= 0.01)))

    return ValidationReport(checks=checks, trials=trials, seed=seed)
