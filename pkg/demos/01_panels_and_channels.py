"""Walk through the channel model: panel correlation, reflection, EMI.

Builds a reflecting panel, inspects its spatial correlation and the
reflection operator it induces, then draws channel realizations and
checks the second moments against the model parameters.
"""

import numpy as np

from ris_cellfree import channel as ch
from ris_cellfree import ris

rng = np.random.default_rng(0)

print("== panel geometry and correlation ==")
wavelength = 0.158  # 1.9 GHz carrier, meters
panel = ris.build_panel(l_v=8, l_h=8, wavelength_m=wavelength,
                        spacing_over_lambda=0.5, phase_rad=np.pi / 4,
                        emi_power=0.05)
corr = ris.correlation_matrix(8, 8, wavelength, 0.5 * wavelength,
                              0.5 * wavelength)
eig = np.linalg.eigvalsh(corr)
print(f"elements: {panel.theta.size}, element area: {panel.area:.5f} m^2")
print(f"correlation eigenvalues: min {eig.min():.3e}, max {eig.max():.3f}")
print(f"effective rank (eigenvalues > 1% of max): "
      f"{int(np.sum(eig > 0.01 * eig.max()))} of {eig.size}")

# half-wavelength neighbours along a row are uncorrelated (sinc zero),
# diagonal neighbours are not
print(f"corr along row: {corr[0, 1].real:+.4f}, "
      f"diagonal: {corr[0, 9].real:+.4f}")

print()
print("== reflection operator ==")
t = panel.reflection_matrix
print(f"tr(t) = {panel.reflect_trace:.3e} (power transferred per unit gain)")
print(f"tr(t^2) = {panel.reflect_trace_sq:.3e}")
ratio = panel.reflect_trace_sq / panel.reflect_trace ** 2
print(f"tr(t^2)/tr(t)^2 = {ratio:.4f} "
      f"(1/L = {1 / panel.theta.size:.4f} would be an uncorrelated panel)")
print("the closer this ratio is to 1/L, the more Gaussian the cascaded hop")

print()
print("== channel second moments ==")
beta = np.array([[1.2, 0.4], [0.7, 2.0]])  # 2 APs x 2 users
trials = 20000
h = ch.sample_direct(beta, n_antennas=4, rng=rng, trials=trials)
emp = np.mean(np.abs(h) ** 2, axis=(0, 3))
print("direct channel, per-antenna power vs beta:")
print(np.round(emp / beta, 4))

z = ris.sample_emi(panel, rng, count=trials)
cov = np.einsum("ti,tj->ij", z, np.conj(z)) / trials
target = panel.area * panel.emi_power * corr
err = np.abs(cov - target).max() / np.abs(target).max()
print(f"EMI covariance error (max abs, relative): {err:.4f} at {trials} draws")

print()
print("== cascaded link through the panel ==")
beta_ap = np.array([0.8, 1.5])    # per AP
beta_user = np.array([0.6, 1.1])  # per user
g_ap = ch.sample_ap_ris(beta_ap, panel, n_antennas=4, rng=rng, trials=trials)
g_user = ch.sample_user_ris(beta_user, panel, rng, trials=trials)
real = ch.assemble_aggregate(np.zeros((trials, 2, 2, 4), complex),
                             [g_ap], [g_user], [panel])
# cascaded power per AP-user pair should be beta_ap * beta_user * tr(t)
emp = np.mean(np.abs(real.cascaded) ** 2, axis=(0, 3))
model = np.outer(beta_ap, beta_user) * panel.reflect_trace
print("cascaded power vs beta_ap * beta_user * tr(t):")
print(np.round(emp / model, 4))
