"""Network geometry and large-scale propagation.

A square service area of side d_km is split along its main diagonal:
access points (APs) are dropped uniformly in the quadrant
[-d/2, 0] x [-d/2, 0] km, users and reflecting panels in [0, d/2] x [0, d/2].
Heights are fixed per node class (AP 15 m, user 1.65 m, panel 30 m).

Large-scale gains follow a three-slope path-loss law with a COST-231-Hata
constant and log-normal shadowing applied only beyond the second breakpoint.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0

AP_HEIGHT_M = 15.0
USER_HEIGHT_M = 1.65
RIS_HEIGHT_M = 30.0


@dataclass(frozen=True)
class RadioConstants:
    """Carrier, noise and path-loss breakpoints shared by all links."""

    carrier_mhz: float = 1900.0
    noise_dbm: float = -91.0
    d0_m: float = 10.0
    d1_m: float = 50.0
    shadow_db: float = 8.0
    tau_c: int = 200

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / (self.carrier_mhz * 1e6)

    @property
    def noise_w(self) -> float:
        return dbm_to_watt(self.noise_dbm)


@dataclass(frozen=True)
class NetworkLayout:
    """Node positions; x/y in km, z in metres."""

    ap_xy: np.ndarray    # (M, 2)
    user_xy: np.ndarray  # (K, 2)
    ris_xy: np.ndarray   # (J, 2)
    d_km: float

    @property
    def m_aps(self) -> int:
        return self.ap_xy.shape[0]

    @property
    def k_users(self) -> int:
        return self.user_xy.shape[0]

    @property
    def j_ris(self) -> int:
        return self.ris_xy.shape[0]


@dataclass(frozen=True)
class LargeScaleFading:
    """Linear large-scale gains for every link class."""

    direct: np.ndarray     # (M, K) AP-user
    ap_ris: np.ndarray     # (M, J)
    user_ris: np.ndarray   # (K, J)

    @property
    def m_aps(self) -> int:
        return self.direct.shape[0]

    @property
    def k_users(self) -> int:
        return self.direct.shape[1]

    @property
    def j_ris(self) -> int:
        return self.ap_ris.shape[1]


def dbm_to_watt(x_dbm: float) -> float:
    return 10.0 ** ((x_dbm - 30.0) / 10.0)


def db_to_linear(x_db) -> float:
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def generate_layout(m_aps: int, k_users: int, j_ris: int, d_km: float,
                    seed) -> NetworkLayout:
    """Drop APs in the lower-left quadrant, users and panels in the upper-right.

    Deterministic for a fixed seed. Draws are redone in the (measure-zero)
    event that two nodes of the same class coincide.
    """
    if m_aps < 1 or k_users < 1 or j_ris < 0:
        raise ValueError("need at least one AP and one user, and j_ris >= 0")
    if d_km <= 0:
        raise ValueError(f"d_km must be positive, got {d_km}")
    rng = np.random.default_rng(seed)
    half = d_km / 2.0

    def draw(count, lo, hi):
        for _ in range(100):
            xy = rng.uniform(lo, hi, size=(count, 2))
            if count < 2:
                return xy
            diff = xy[:, None, :] - xy[None, :, :]
            dist = np.sqrt((diff ** 2).sum(-1))
            np.fill_diagonal(dist, np.inf)
            if dist.min() > 0.0:
                return xy
        raise RuntimeError("could not draw distinct node positions")

    ap_xy = draw(m_aps, -half, 0.0)
    user_xy = draw(k_users, 0.0, half)
    ris_xy = draw(j_ris, 0.0, half) if j_ris else np.zeros((0, 2))
    return NetworkLayout(ap_xy=ap_xy, user_xy=user_xy, ris_xy=ris_xy, d_km=d_km)


def link_distances(xy_a: np.ndarray, z_a_m: float,
                   xy_b: np.ndarray, z_b_m: float) -> np.ndarray:
    """3-D distances in km between two node sets, (len(a), len(b))."""
    dxy = xy_a[:, None, :] - xy_b[None, :, :]
    dz_km = (z_a_m - z_b_m) / 1000.0
    return np.sqrt((dxy ** 2).sum(-1) + dz_km ** 2)


def cost231_constant(carrier_mhz: float, h_base_m: float, h_rx_m: float) -> float:
    """Fixed COST-231-Hata loss term L (dB); f in MHz, heights in m."""
    lf = np.log10(carrier_mhz)
    return (46.3 + 33.9 * lf - 13.82 * np.log10(h_base_m)
            - (1.1 * lf - 0.7) * h_rx_m + (1.56 * lf - 0.8))


def path_loss(distance_km, constants: RadioConstants,
              h_base_m: float = AP_HEIGHT_M,
              h_rx_m: float = USER_HEIGHT_M) -> np.ndarray:
    """Median three-slope path loss in dB (negative gain), vectorised.

    35 dB/decade beyond d1, 20 dB/decade between d0 and d1, constant
    inside d0. Continuous at d1 by construction.
    """
    d = np.asarray(distance_km, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distances must be positive")
    L = cost231_constant(constants.carrier_mhz, h_base_m, h_rx_m)
    d0 = constants.d0_m / 1000.0
    d1 = constants.d1_m / 1000.0
    far = -L - 35.0 * np.log10(d)
    mid = -L - 15.0 * np.log10(d1) - 20.0 * np.log10(d)
    near = -L - 15.0 * np.log10(d1) - 20.0 * np.log10(d0)
    return np.where(d > d1, far, np.where(d > d0, mid, near))


def _gains(dist_km, constants, h_base_m, h_rx_m, rng) -> np.ndarray:
    """Linear gains: median path loss plus shadowing beyond d1 only."""
    pl_db = path_loss(dist_km, constants, h_base_m, h_rx_m)
    shadow = rng.normal(0.0, constants.shadow_db, size=pl_db.shape)
    shadow = np.where(dist_km > constants.d1_m / 1000.0, shadow, 0.0)
    return db_to_linear(pl_db + shadow)


def large_scale_fading(layout: NetworkLayout, constants: RadioConstants,
                       seed) -> LargeScaleFading:
    """Draw shadowed large-scale gains for all three link classes.

    The COST-231 constant takes the AP height as base height on
    AP-terminated links and the panel height on the user-panel link;
    the receiving end is the user (or the panel for AP-panel links).
    """
    rng = np.random.default_rng(seed)
    d_au = link_distances(layout.ap_xy, AP_HEIGHT_M, layout.user_xy, USER_HEIGHT_M)
    direct = _gains(d_au, constants, AP_HEIGHT_M, USER_HEIGHT_M, rng)
    if layout.j_ris:
        d_ar = link_distances(layout.ap_xy, AP_HEIGHT_M, layout.ris_xy, RIS_HEIGHT_M)
        ap_ris = _gains(d_ar, constants, AP_HEIGHT_M, RIS_HEIGHT_M, rng)
        d_ur = link_distances(layout.user_xy, USER_HEIGHT_M, layout.ris_xy, RIS_HEIGHT_M)
        user_ris = _gains(d_ur, constants, RIS_HEIGHT_M, USER_HEIGHT_M, rng)
    else:
        ap_ris = np.zeros((layout.m_aps, 0))
        user_ris = np.zeros((layout.k_users, 0))
    return LargeScaleFading(direct=direct, ap_ris=ap_ris, user_ris=user_ris)


def layout_to_csv(layout: NetworkLayout, path) -> None:
    """Export node positions as node_type,index,x_km,y_km,z_m rows."""
    rows = []
    for i, (x, y) in enumerate(layout.ap_xy):
        rows.append(("ap", i, x, y, AP_HEIGHT_M))
    for i, (x, y) in enumerate(layout.user_xy):
        rows.append(("user", i, x, y, USER_HEIGHT_M))
    for i, (x, y) in enumerate(layout.ris_xy):
        rows.append(("ris", i, x, y, RIS_HEIGHT_M))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("node_type", "index", "x_km", "y_km", "z_m"))
        writer.writerows(rows)
