"""Pilot plans and LMMSE channel estimation.

Two schemes are covered.

Two-phase: a first pilot sub-phase with all panels dark estimates the
direct channels; a second sub-phase with panels active (and therefore EMI
re-radiated into the pilots) estimates the cascaded part after the known
direct contribution has been subtracted. Each sub-phase has its own
fractional pilot power control and greedy pilot assignment.

Benchmark: a single pilot phase with panels active estimates the aggregate
channel directly, with equal pilot power.

Per-antenna second moments: ``power_*`` holds the channel powers (direct
beta, cascaded sum_j beta_mj beta_kj tr(t_j)), ``est_*`` the estimate
powers; the LMMSE structure guarantees est <= power elementwise, and the
network NMSE is sum(power - est) / sum(power).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, _cn
from .geometry import LargeScaleFading


@dataclass(frozen=True)
class PilotAssignment:
    """Pilot indices and transmit powers for one pilot (sub-)phase."""

    tau_p: int
    pilots: np.ndarray   # (K,) in [0, tau_p)
    snr: np.ndarray      # (K,) noise-normalised pilot powers

    @property
    def k_users(self) -> int:
        return self.pilots.size

    @property
    def same_pilot(self) -> np.ndarray:
        """(K, K) boolean co-pilot matrix (diagonal True)."""
        return self.pilots[:, None] == self.pilots[None, :]


@dataclass(frozen=True)
class TwoPhasePlan:
    direct: PilotAssignment
    cascaded: PilotAssignment

    @property
    def tau_p(self) -> int:
        return self.direct.tau_p


def fractional_pilot_power(delta: np.ndarray, p_p: float) -> np.ndarray:
    """Split the budget K p_p across users proportionally to sum_m delta_mk.

    Returns one power per user, conserving the total budget exactly.
    """
    delta = np.asarray(delta, dtype=float)
    if p_p <= 0:
        raise ValueError(f"p_p must be positive, got {p_p}")
    if np.any(delta < 0):
        raise ValueError("channel powers must be non-negative")
    col = delta.sum(axis=0)
    if np.any(col == 0):
        raise ValueError("a user has zero channel power in every AP")
    k = col.size
    return col / col.sum() * k * p_p


def assign_pilots(delta: np.ndarray, snr: np.ndarray, tau_p: int) -> np.ndarray:
    """Greedy pilot assignment against the strongest-AP interference.

    Users 0..tau_p-1 take pilots 0..tau_p-1. Each later user k picks the
    pilot whose already-assigned users inject the least weighted power
    snr_i * delta_mi at k's strongest AP. Ties resolve to the lowest index.
    """
    delta = np.asarray(delta, dtype=float)
    snr = np.asarray(snr, dtype=float)
    m_aps, k_users = delta.shape
    if tau_p < 1:
        raise ValueError(f"tau_p must be at least 1, got {tau_p}")
    if snr.shape != (k_users,):
        raise ValueError("snr must hold one power per user")
    prime_ap = np.argmax(delta, axis=0)
    pilots = np.empty(k_users, dtype=int)
    head = min(tau_p, k_users)
    pilots[:head] = np.arange(head)
    for k in range(head, k_users):
        load = np.zeros(tau_p)
        for i in range(k):
            load[pilots[i]] += snr[i] * delta[prime_ap[k], i]
        pilots[k] = int(np.argmin(load))
    return pilots


def _lmmse_gain(power: np.ndarray, assignment: PilotAssignment,
                extra: np.ndarray) -> np.ndarray:
    """(M, K) LMMSE scaling sqrt(tau rho_k) p_mk / (tau sum_copilot rho p + extra + 1)."""
    tau = assignment.tau_p
    weighted = assignment.same_pilot * assignment.snr[None, :]  # (K, K) over co-pilots a
    denom = tau * np.einsum("ma,ka->mk", power, weighted) + extra[:, None] + 1.0
    return np.sqrt(tau * assignment.snr)[None, :] * power / denom


def cascaded_power(fading: LargeScaleFading, panels: list) -> np.ndarray:
    """(M, K) per-antenna cascaded channel power sum_j beta_mj beta_kj tr(t_j)."""
    out = np.zeros((fading.m_aps, fading.k_users))
    for j, panel in enumerate(panels):
        out += panel.reflect_trace * np.outer(fading.ap_ris[:, j],
                                              fading.user_ris[:, j])
    return out


def emi_at_aps(fading: LargeScaleFading, panels: list) -> np.ndarray:
    """(M,) per-antenna EMI power reaching each AP, sum_j beta_mj sigma_j^2 tr(t_j)."""
    out = np.zeros(fading.m_aps)
    for j, panel in enumerate(panels):
        out += fading.ap_ris[:, j] * panel.emi_power * panel.reflect_trace
    return out


def _pilot_powers(delta: np.ndarray, rho_p: float, power_control: str) -> np.ndarray:
    k = delta.shape[1]
    if power_control == "equal":
        return np.full(k, rho_p)
    if power_control != "fractional":
        raise ValueError(f"unknown power_control {power_control!r}")
    if delta.sum() == 0.0:
        # degenerate sub-phase (e.g. no panels): nothing to estimate, any
        # split works; keep the uncontrolled power for determinism
        return np.full(k, rho_p)
    return fractional_pilot_power(delta, rho_p)


@dataclass(frozen=True)
class TwoPhaseState:
    """Closed-form second-order quantities of the two-phase estimator."""

    plan: TwoPhasePlan
    gain_d: np.ndarray           # (M, K) direct sub-phase LMMSE scaling
    gain_c: np.ndarray           # (M, K) cascaded sub-phase LMMSE scaling
    power_direct: np.ndarray     # (M, K)
    power_cascaded: np.ndarray   # (M, K)
    est_direct: np.ndarray       # (M, K)
    est_cascaded: np.ndarray     # (M, K)
    emi_ap: np.ndarray           # (M,)

    @property
    def power_total(self) -> np.ndarray:
        return self.power_direct + self.power_cascaded

    @property
    def est(self) -> np.ndarray:
        return self.est_direct + self.est_cascaded


@dataclass(frozen=True)
class BenchmarkState:
    """Closed-form second-order quantities of the single-phase estimator."""

    assignment: PilotAssignment
    gain: np.ndarray             # (M, K)
    power_direct: np.ndarray
    power_cascaded: np.ndarray
    emi_ap: np.ndarray

    @property
    def power_total(self) -> np.ndarray:
        return self.power_direct + self.power_cascaded

    @property
    def est(self) -> np.ndarray:
        tau = self.assignment.tau_p
        return np.sqrt(tau * self.assignment.snr)[None, :] * self.gain * self.power_total


def two_phase_state(fading: LargeScaleFading, panels: list, tau_p: int,
                    rho_p: float, power_control: str = "fractional") -> TwoPhaseState:
    """Power control, pilot assignment and LMMSE coefficients per sub-phase."""
    power_d = fading.direct
    power_c = cascaded_power(fading, panels)
    emi = emi_at_aps(fading, panels)
    snr_d = _pilot_powers(power_d, rho_p, power_control)
    snr_c = _pilot_powers(power_c, rho_p, power_control)
    plan = TwoPhasePlan(
        direct=PilotAssignment(tau_p, assign_pilots(power_d, snr_d, tau_p), snr_d),
        cascaded=PilotAssignment(tau_p, assign_pilots(power_c, snr_c, tau_p), snr_c),
    )
    gain_d = _lmmse_gain(power_d, plan.direct, np.zeros(fading.m_aps))
    gain_c = _lmmse_gain(power_c, plan.cascaded, emi)
    est_d = np.sqrt(tau_p * snr_d)[None, :] * gain_d * power_d
    est_c = np.sqrt(tau_p * snr_c)[None, :] * gain_c * power_c
    return TwoPhaseState(plan=plan, gain_d=gain_d, gain_c=gain_c,
                         power_direct=power_d, power_cascaded=power_c,
                         est_direct=est_d, est_cascaded=est_c, emi_ap=emi)


def benchmark_state(fading: LargeScaleFading, panels: list, tau_p: int,
                    rho_p: float) -> BenchmarkState:
    """Single-phase LMMSE on the aggregate channel, equal pilot powers."""
    power_d = fading.direct
    power_c = cascaded_power(fading, panels)
    total = power_d + power_c
    emi = emi_at_aps(fading, panels)
    snr = np.full(fading.k_users, rho_p)
    assignment = PilotAssignment(tau_p, assign_pilots(total, snr, tau_p), snr)
    gain = _lmmse_gain(total, assignment, emi)
    return BenchmarkState(assignment=assignment, gain=gain,
                          power_direct=power_d, power_cascaded=power_c, emi_ap=emi)


def lmmse_coefficients(state) -> tuple:
    """LMMSE scalings of a state: (gain_d, gain_c) or a single aggregate gain."""
    if isinstance(state, TwoPhaseState):
        return state.gain_d, state.gain_c
    return (state.gain,)


def nmse_closed_form(state) -> float:
    """Network NMSE sum(power - est) / sum(power) from the closed forms."""
    power = state.power_total
    est = state.est
    if np.any(est > power * (1.0 + 1e-9) + 1e-300):
        raise ValueError("estimate power exceeds channel power; state is inconsistent")
    return float((power - est).sum() / power.sum())


# ---------------------------------------------------------------------------
# pilot-phase simulation
# ---------------------------------------------------------------------------

def _pilot_block(per_user: np.ndarray, assignment: PilotAssignment) -> np.ndarray:
    """Noiseless received pilot block: scatter sqrt(tau rho_k) ch_k on pilots.

    per_user: (*T, M, K, N) channel of each user. Returns (*T, M, N, tau_p).
    """
    lead = per_user.shape[:-3]
    m, k_users, n = per_user.shape[-3:]
    block = np.zeros(lead + (m, n, assignment.tau_p), dtype=complex)
    amp = np.sqrt(assignment.tau_p * assignment.snr)
    for k in range(k_users):
        block[..., assignment.pilots[k]] += amp[k] * per_user[..., :, k, :]
    return block


def _project(block: np.ndarray, assignment: PilotAssignment) -> np.ndarray:
    """Per-user pilot projections, (*T, M, N, tau_p) -> (*T, M, K, N)."""
    return np.swapaxes(block[..., assignment.pilots], -1, -2)


def _emi_into_block(real: ChannelRealization, panels: list, tau_p: int,
                    rng: np.random.Generator) -> np.ndarray:
    """EMI re-radiated through every panel during tau_p pilot symbols."""
    from .ris import sample_emi

    lead = real.direct.shape[:-3]
    m, _, n = real.direct.shape[-3:]
    out = np.zeros(lead + (m, n, tau_p), dtype=complex)
    for g_ap, panel in zip(real.ap_ris, panels):
        if panel.emi_power == 0.0:
            continue
        noise = sample_emi(panel, rng, lead + (tau_p,))  # (*T, tau_p, L)
        out += np.einsum("...mnl,...pl->...mnp", g_ap * panel.theta, noise)
    return out


def estimate_two_phase(real: ChannelRealization, state: TwoPhaseState,
                       panels: list, rng: np.random.Generator,
                       subtraction: str = "ideal") -> np.ndarray:
    """Simulate both pilot sub-phases and return the channel estimates.

    First sub-phase: panels dark, direct channels only, unit AWGN per
    antenna. Second sub-phase: panels active, EMI enters through them, and
    the direct-channel contribution is removed before projection --
    exactly ("ideal") or using the first sub-phase estimates ("estimated").
    """
    if subtraction not in ("ideal", "estimated"):
        raise ValueError(f"unknown subtraction mode {subtraction!r}")
    plan = state.plan
    block_d = _pilot_block(real.direct, plan.direct)
    block_d += _cn(rng, block_d.shape)
    proj_d = _project(block_d, plan.direct)
    est_d = state.gain_d[:, :, None] * proj_d

    block_c = _pilot_block(real.cascaded, plan.cascaded)
    if subtraction == "estimated":
        block_c += _pilot_block(real.direct - est_d, plan.cascaded)
    block_c += _emi_into_block(real, panels, plan.tau_p, rng)
    block_c += _cn(rng, block_c.shape)
    proj_c = _project(block_c, plan.cascaded)
    return est_d + state.gain_c[:, :, None] * proj_c


def estimate_benchmark(real: ChannelRealization, state: BenchmarkState,
                       panels: list, rng: np.random.Generator) -> np.ndarray:
    """Simulate the single aggregate pilot phase and return the estimates."""
    block = _pilot_block(real.aggregate, state.assignment)
    block += _emi_into_block(real, panels, state.assignment.tau_p, rng)
    block += _cn(rng, block.shape)
    return state.gain[:, :, None] * _project(block, state.assignment)


def simulate_estimates(real: ChannelRealization, state, panels: list,
                       rng: np.random.Generator,
                       subtraction: str = "ideal") -> np.ndarray:
    if isinstance(state, TwoPhaseState):
        return estimate_two_phase(real, state, panels, rng, subtraction)
    return estimate_benchmark(real, state, panels, rng)


def nmse_empirical(fading: LargeScaleFading, panels: list, n_antennas: int,
                   state, trials: int, seed, subtraction: str = "ideal",
                   batch: int = 256) -> tuple:
    """Monte Carlo NMSE (ratio of sample means) with a batch-means stderr."""
    from .channel import sample_realization

    rng = np.random.default_rng(seed)
    err_sum = 0.0
    pow_sum = 0.0
    ratios = []
    done = 0
    while done < trials:
        t = min(batch, trials - done)
        real = sample_realization(fading, panels, n_antennas, rng, trials=t)
        g_hat = simulate_estimates(real, state, panels, rng, subtraction)
        err = np.sum(np.abs(real.aggregate - g_hat) ** 2)
        tot = np.sum(np.abs(real.aggregate) ** 2)
        err_sum += err
        pow_sum += tot
        ratios.append(err / tot)
        done += t
    ratios = np.asarray(ratios)
    stderr = ratios.std(ddof=1) / np.sqrt(ratios.size) if ratios.size > 1 else np.inf
    return err_sum / pow_sum, float(stderr)
