"""Downlink spectral efficiency: closed form against Monte Carlo.

Conjugate beamforming from the channel estimates, full per-AP power, and
a use-and-forget rate bound. The closed form treats the beamforming
uncertainty terms at their Gaussian-equivalent values; a correction for
the heavier tails of the cascaded (product) channel is available and
demonstrated on a panel-dominated toy network where it matters.
"""

import numpy as np

from ris_cellfree import downlink as dl
from ris_cellfree import scenario as sc
from ris_cellfree.geometry import LargeScaleFading
from ris_cellfree.ris import build_panel

scen = sc.build_scenario(sc.ScenarioConfig())
print(f"network: {scen.m_aps} APs, {scen.k_users} users, "
      f"{len(scen.panels)} panels, N = {scen.n_antennas}")

print()
print("== sum spectral efficiency by scheme ==")
trials = 3000
print(f"{'scheme':>20} {'closed':>8} {'monte carlo':>12} {'power ratio':>12}")
for scheme in sc.SCHEMES:
    closed = sc.se_closed(scen, scheme)
    mc = sc.se_monte_carlo(scen, scheme, trials, seed=[1, 50])
    dev = np.abs(mc.power_ratio - 1.0).max()
    print(f"{scheme:>20} {closed.sum_se:8.4f} {mc.sum_se:9.4f} "
        f"+- {mc.sum_se_stderr:.4f} {dev:12.2e}")
print("power ratio column: worst per-AP deviation of the sampled E||x_m||^2")
print("from the downlink budget; it shrinks as 1/sqrt(trials)")

print()
print("== per-user SINR, two-phase scheme ==")
closed = sc.se_closed(scen, "two_phase")
mc = sc.se_monte_carlo(scen, "two_phase", 10000, seed=[1, 51])
print(f"{'user':>5} {'closed':>9} {'monte carlo':>12} {'rel dev':>9}")
for k in range(scen.k_users):
    rel = mc.sinr[k] / closed.sinr[k] - 1.0
    print(f"{k:>5} {closed.sinr[k]:9.4f} {mc.sinr[k]:12.4f} {rel:+9.4f}")

print()
print("== product-channel correction on a panel-dominated toy network ==")
# reflected hops as strong as the direct paths and only 4 elements per
# panel: the Gaussian-equivalent interference moment visibly undershoots
rng = np.random.default_rng([11, 0])
logu = lambda lo, hi, size: np.exp(rng.uniform(np.log(lo), np.log(hi), size))
toy = sc.Scenario(
    fading=LargeScaleFading(direct=logu(0.3, 3.0, (4, 3)),
                            ap_ris=logu(0.3, 3.0, (4, 2)),
                            user_ris=logu(0.3, 3.0, (3, 2))),
    panels=[build_panel(2, 2, wavelength_m=2.0, emi_power=e)
            for e in (0.25, 0.4)],
    n_antennas=2, tau_p=2, tau_c=200, rho_p=6.0, rho_d=2.0)
view = sc.scheme_view(toy, "benchmark")
closed = sc.se_closed(toy, "benchmark")
mc = sc.se_monte_carlo(toy, "benchmark", 50000, seed=[11, 1])
eta = dl.power_coefficients(view.state, toy.n_antennas)
excess = np.array([
    sum(dl.ui_product_excess(k, kp, eta, view.state, toy.rho_d,
                             toy.n_antennas, view.fading, view.panels)
        for kp in range(toy.k_users)) for k in range(toy.k_users)])
print(f"{'user':>5} {'gaussian':>9} {'with excess':>12} {'mc':>9}")
for k in range(toy.k_users):
    print(f"{k:>5} {closed.interference[k]:9.4f} "
          f"{closed.interference[k] + excess[k]:12.4f} "
          f"{mc.interference[k]:9.4f}")
print("the fourth moment of a product channel exceeds the Gaussian value")
print("by terms proportional to tr(t^2); adding them restores agreement.")
print("on physical layouts the cascaded power is tiny and the plain")
print("closed form is already inside Monte Carlo error")
