"""Small-scale channel sampling and aggregate channel assembly.

Uplink channel of user k at AP m:

    g_mk = g_mk^dir + sum_j G_mj Theta_j g_kj

with iid Rayleigh direct paths, an AP-panel matrix whose rows share the
panel's element correlation, and a correlated user-panel vector. Complex
normals are (randn + 1j randn) / sqrt(2), unit variance per entry.

All samplers accept ``trials`` to prepend a batch axis; the Monte Carlo
engines rely on that to amortise Python overhead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import LargeScaleFading
from .ris import RisPanel


def _cn(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _batch(trials) -> tuple:
    return () if trials is None else (int(trials),)


def sample_direct(beta_direct: np.ndarray, n_antennas: int,
                  rng: np.random.Generator, trials=None) -> np.ndarray:
    """Direct AP-user channels, shape (*T, M, K, N), variance beta per antenna."""
    beta = np.asarray(beta_direct, dtype=float)
    if np.any(beta < 0):
        raise ValueError("large-scale gains must be non-negative")
    shape = _batch(trials) + beta.shape + (n_antennas,)
    return np.sqrt(beta)[..., :, :, None] * _cn(rng, shape)


def sample_ap_ris(beta_col: np.ndarray, panel: RisPanel, n_antennas: int,
                  rng: np.random.Generator, trials=None) -> np.ndarray:
    """AP-panel channel matrices, shape (*T, M, N, L).

    Rows are iid with covariance a beta R, i.e. G = sqrt(beta a) V R^(1/2).
    """
    beta = np.asarray(beta_col, dtype=float)
    shape = _batch(trials) + (beta.size, n_antennas, panel.n_elements)
    v = _cn(rng, shape)
    scale = np.sqrt(beta * panel.area)[..., :, None, None]
    return scale * (v @ panel.corr_sqrt)


def sample_user_ris(beta_col: np.ndarray, panel: RisPanel,
                    rng: np.random.Generator, trials=None) -> np.ndarray:
    """User-panel channel vectors, shape (*T, K, L), covariance a beta R."""
    beta = np.asarray(beta_col, dtype=float)
    shape = _batch(trials) + (beta.size, panel.n_elements)
    v = _cn(rng, shape)
    return np.sqrt(beta * panel.area)[..., :, None] * (v @ panel.corr_sqrt)


@dataclass(frozen=True)
class ChannelRealization:
    """One draw (or a batch of draws) of every channel in the network."""

    direct: np.ndarray           # (*T, M, K, N)
    ap_ris: list                 # per panel: (*T, M, N, L_j)
    user_ris: list               # per panel: (*T, K, L_j)
    cascaded: np.ndarray         # (*T, M, K, N)

    @property
    def aggregate(self) -> np.ndarray:
        return self.direct + self.cascaded


def assemble_aggregate(direct: np.ndarray, ap_ris: list, user_ris: list,
                       panels: list) -> ChannelRealization:
    """Combine the per-link draws into cascaded and aggregate channels."""
    if not (len(ap_ris) == len(user_ris) == len(panels)):
        raise ValueError("per-panel channel lists and panels disagree in length")
    cascaded = np.zeros_like(direct)
    for g_ap, g_user, panel in zip(ap_ris, user_ris, panels):
        reflected = g_user * panel.theta  # (*T, K, L)
        # g_mj,k = G_mj Theta g_kj for every AP/user pair
        cascaded += np.einsum("...mnl,...kl->...mkn", g_ap, reflected)
    return ChannelRealization(direct=direct, ap_ris=list(ap_ris),
                              user_ris=list(user_ris), cascaded=cascaded)


def sample_realization(fading: LargeScaleFading, panels: list, n_antennas: int,
                       rng: np.random.Generator, trials=None) -> ChannelRealization:
    """Draw all direct, AP-panel and user-panel channels for one network."""
    direct = sample_direct(fading.direct, n_antennas, rng, trials)
    ap_ris = [sample_ap_ris(fading.ap_ris[:, j], p, n_antennas, rng, trials)
              for j, p in enumerate(panels)]
    user_ris = [sample_user_ris(fading.user_ris[:, j], p, rng, trials)
                for j, p in enumerate(panels)]
    return assemble_aggregate(direct, ap_ris, user_ris, panels)
