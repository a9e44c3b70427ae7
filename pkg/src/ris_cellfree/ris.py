"""Reflecting panels: spatial correlation, phase pattern and EMI statistics.

A panel is an l_v x l_h grid of passive elements with spacing d_h, d_v.
Element x (1-based, row-major over rows of l_h) sits at
u_x = [0, mod(x-1, l_h) d_h, floor((x-1)/l_h) d_v]. Correlation between
elements n, m is sinc(2 ||u_n - u_m|| / wavelength) with
sinc(y) = sin(pi y) / (pi y), and every element-side covariance carries
the element area a = d_h d_v as a scale factor.

The matrix t = a^2 R^(1/2) Theta^H R Theta R^(1/2) collects the effect of
one reflection; its trace is the per-panel power transfer of the cascaded
link and of the re-radiated interference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def element_positions(l_v: int, l_h: int, d_h: float, d_v: float) -> np.ndarray:
    """(L, 3) element coordinates in metres, row-major grid order."""
    idx = np.arange(l_v * l_h)
    pos = np.zeros((idx.size, 3))
    pos[:, 1] = (idx % l_h) * d_h
    pos[:, 2] = (idx // l_h) * d_v
    return pos


def correlation_matrix(l_v: int, l_h: int, d_h: float, d_v: float,
                       wavelength_m: float) -> np.ndarray:
    """Real symmetric sinc correlation of the element grid, unit diagonal."""
    if l_v < 1 or l_h < 1:
        raise ValueError("grid dimensions must be at least 1")
    if d_h <= 0 or d_v <= 0 or wavelength_m <= 0:
        raise ValueError("spacings and wavelength must be positive")
    pos = element_positions(l_v, l_h, d_h, d_v)
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt((diff ** 2).sum(-1))
    return np.sinc(2.0 * dist / wavelength_m)


def matrix_sqrt_psd(mat: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition.

    Eigenvalues in [-tol * max_eig, 0) are clamped to zero; anything more
    negative means the input is not a correlation matrix and raises.
    """
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("expected a square matrix")
    vals, vecs = np.linalg.eigh(mat)
    floor = -tol * max(vals.max(), 0.0)
    if vals.min() < floor:
        raise ValueError(f"matrix is not PSD: min eigenvalue {vals.min():.3e}")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


@dataclass(frozen=True)
class RisPanel:
    """One reflecting panel with its precomputed second-order quantities."""

    l_v: int
    l_h: int
    d_h: float                # m
    d_v: float                # m
    phases: np.ndarray        # (L,) rad
    amplitudes: np.ndarray    # (L,) in [0, 1]
    emi_power: float          # EMI-to-noise ratio sigma_j^2 (linear)
    corr: np.ndarray          # (L, L)
    corr_sqrt: np.ndarray     # (L, L)

    @property
    def n_elements(self) -> int:
        return self.l_v * self.l_h

    @property
    def area(self) -> float:
        """Element area d_h * d_v in m^2."""
        return self.d_h * self.d_v

    @property
    def theta(self) -> np.ndarray:
        """Diagonal of the reflection matrix, amplitude * exp(i phase)."""
        return self.amplitudes * np.exp(1j * self.phases)

    @property
    def reflection_matrix(self) -> np.ndarray:
        """a^2 R^(1/2) Theta^H R Theta R^(1/2), Hermitian PSD (L, L)."""
        th = self.theta
        inner = np.conj(th)[:, None] * self.corr * th[None, :]
        return self.area ** 2 * (self.corr_sqrt @ inner @ self.corr_sqrt)

    @property
    def reflect_trace(self) -> float:
        """Power transfer factor tr(t) of one reflection (real, >= 0)."""
        th = self.theta
        # tr(R^(1/2) Theta^H R Theta R^(1/2)) = tr(Theta^H R Theta R)
        val = np.einsum("l,lm,m,ml->", np.conj(th), self.corr, th, self.corr)
        return float(self.area ** 2 * val.real)

    @property
    def reflect_trace_sq(self) -> float:
        """tr(t^2), the squared Frobenius norm of the reflection matrix.

        Governs the fourth-moment spread of one reflected hop; the ratio
        tr(t^2)/tr(t)^2 decays like 1/L, which is the rate at which a
        cascaded hop approaches a Gaussian channel of the same power.
        """
        t = self.reflection_matrix
        return float(np.sum(np.abs(t) ** 2))


def build_panel(l_v: int, l_h: int, wavelength_m: float,
                spacing_over_lambda: float = 0.5,
                phase_rad: float = np.pi / 4, amplitude: float = 1.0,
                emi_power: float = 0.0) -> RisPanel:
    """Uniform-pattern panel with spacing given as a fraction of wavelength."""
    if not 0.0 <= amplitude <= 1.0:
        raise ValueError(f"amplitude must lie in [0, 1], got {amplitude}")
    if emi_power < 0:
        raise ValueError("emi_power must be non-negative")
    d = spacing_over_lambda * wavelength_m
    corr = correlation_matrix(l_v, l_h, d, d, wavelength_m)
    n = l_v * l_h
    return RisPanel(
        l_v=l_v, l_h=l_h, d_h=d, d_v=d,
        phases=np.full(n, float(phase_rad)),
        amplitudes=np.full(n, float(amplitude)),
        emi_power=float(emi_power),
        corr=corr, corr_sqrt=matrix_sqrt_psd(corr),
    )


def emi_power(beta_ap_ris_col: np.ndarray, p_p_w: float, rho_linear: float,
              noise_w: float) -> float:
    """EMI-to-noise power at one panel.

    sigma_j^2 = p_p sum_m beta_mj / (rho M noise), where rho is the ratio
    of received pilot signal power to EMI power at the panel.
    """
    beta = np.asarray(beta_ap_ris_col, dtype=float)
    if p_p_w <= 0 or rho_linear <= 0 or noise_w <= 0:
        raise ValueError("powers and rho must be positive")
    m = beta.size
    if m == 0:
        raise ValueError("need at least one AP gain")
    return float(p_p_w * beta.sum() / (rho_linear * m * noise_w))


def sample_emi(panel: RisPanel, rng: np.random.Generator,
               count: int | tuple = ()) -> np.ndarray:
    """Draw EMI vectors with covariance a sigma_j^2 R, shape (*count, L)."""
    shape = (count,) if isinstance(count, int) else tuple(count)
    l = panel.n_elements
    w = (rng.standard_normal(shape + (l,)) + 1j * rng.standard_normal(shape + (l,)))
    w /= np.sqrt(2.0)
    scale = np.sqrt(panel.area * panel.emi_power)
    return scale * (w @ panel.corr_sqrt)
