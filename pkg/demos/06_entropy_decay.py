#!/usr/bin/env python3
"""Entropy decay of the weighted fast-diffusion flow.

A perturbed stationary state is evolved with the conservative finite-volume
scheme; the run tracks the free energy F, the Fisher information I, and the
weighted mass.  Along the flow dF/dt = -I holds to discretization accuracy,
F decays under the exponential envelope exp(-(2-gamma)^2 t), and the fitted
asymptotic exponent matches the radial spectral gap of the linearization
(5 at d=3, m=3/4; strictly above the envelope rate 4, which is attained
only by translation modes the radial flow cannot carry).
"""

import numpy as np

from cknlab.flow import fit_decay_rate, run_decay, stationary_profile

for gamma in (0.0, 0.5):
    m = 0.75
    stat = stationary_profile(m, gamma, 3, 50.0)
    print(f"== gamma = {gamma}, m = {m} ==")
    print(f"  stationary constant C = {stat.C:.8f}")

    def datum(r):
        return stat(r) * (1.0 + 0.1 * np.cos(np.log(np.maximum(r, 1e-12))))

    series = run_decay(datum, m, gamma, T=3.0, n_cells=400, r_out=25.0,
                       record_every=10)
    rate_bound = (2.0 - gamma) ** 2
    res = series.identity_residuals()
    drift = np.max(np.abs(series.mass - series.mass[0])) / series.mass[0]
    print(f"  records: {series.t.size}, final time {series.t[-1]:.2f}")
    print(f"  weighted-mass drift: {drift:.1e}")
    print(f"  energy identity |dF/dt + I| / I, worst: {np.max(res):.1e}")
    print(f"  F(0) = {series.F[0]:.4e}, F(T) = {series.F[-1]:.4e}")
    envelope = bool(np.all(series.F <= series.F[0]
                           * np.exp(-rate_bound * series.t) * 1.01))
    print(f"  below exp(-{rate_bound} t) envelope throughout: {envelope}")
    print(f"  min I/F along the run: "
          f"{np.min(series.I / np.maximum(series.F, 1e-300)):.4f} "
          f">= {rate_bound}")
    print(f"  fitted asymptotic exponent: {fit_decay_rate(series):.3f}")
    print()

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    stat = stationary_profile(0.75, 0.0, 3, 50.0)
    series = run_decay(lambda r: stat(r) * (1 + 0.1 * np.cos(np.log(np.maximum(r, 1e-12)))),
                       0.75, 0.0, T=3.0, n_cells=400, record_every=10)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(series.t, series.F / series.F[0], label="F(t)/F(0)")
    ax.semilogy(series.t, np.exp(-4.0 * series.t), "--",
                label="envelope exp(-4t)")
    ax.semilogy(series.t, np.exp(-5.0 * series.t), ":",
                label="radial gap exp(-5t)")
    ax.set_xlabel("t")
    ax.legend()
    fig.tight_layout()
    fig.savefig("demos_decay.png", dpi=120)
    print("wrote demos_decay.png")
except ImportError:
    pass
