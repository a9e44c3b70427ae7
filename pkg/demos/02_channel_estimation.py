"""Compare the two-phase estimator against the single-phase benchmark.

The two-phase scheme estimates direct channels with the panels switched
off, subtracts that estimate, then estimates the cascaded part with the
panels on. Splitting the problem keeps panel EMI out of the direct
sub-phase and lets each sub-phase spend its pilot energy on one channel
component. The single-phase benchmark estimates the aggregate channel in
one shot and absorbs EMI into every estimate.

Everything here is closed form; the Monte Carlo column is an independent
check from simulated pilot signals.
"""

from dataclasses import replace

from ris_cellfree import scenario as sc

scen = sc.build_scenario(sc.ScenarioConfig())
print(f"network: {scen.m_aps} APs, {scen.k_users} users, "
      f"{len(scen.panels)} panels, tau_p = {scen.tau_p}")

print()
print("== pilot assignment ==")
view = sc.scheme_view(scen, "two_phase")
plan = view.state.plan
print(f"direct sub-phase pilots:   {plan.direct.pilots}")
print(f"cascaded sub-phase pilots: {plan.cascaded.pilots}")
print("greedy reassignment keys each sub-phase to its own channel"
      " strengths, so the two maps can differ")

print()
print("== NMSE, closed form vs Monte Carlo ==")
trials = 4000
print(f"{'scheme':>20} {'closed':>9} {'monte carlo':>12}")
for scheme in ("two_phase", "benchmark", "two_phase_no_emi",
               "benchmark_no_emi"):
    closed = sc.nmse_closed(scen, scheme)
    mc, stderr = sc.nmse_monte_carlo(scen, scheme, trials, seed=[1, 40])
    print(f"{scheme:>20} {closed:9.4f} {mc:9.4f} +- {stderr:.4f}")
print("EMI enters the benchmark at every link but only touches the")
print("cascaded sub-phase of the two-phase scheme; at these defaults the")
print("penalty is small but one-sided")

print()
print("== NMSE vs pilot power ==")
print(f"{'p_p [dBm]':>10} {'two_phase':>10} {'benchmark':>10} {'gap':>8}")
for p_p in (0, 10, 20, 30):
    s = sc.build_scenario(replace(sc.ScenarioConfig(), p_p_dbm=p_p))
    tp = sc.nmse_closed(s, "two_phase")
    bm = sc.nmse_closed(s, "benchmark")
    print(f"{p_p:>10} {tp:10.4f} {bm:10.4f} {bm - tp:8.4f}")
print("more pilot power helps both schemes; the ordering is stable")
