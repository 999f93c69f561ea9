"""Static figures for reports.  Everything renders off-screen to files."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (6.4, 4.2),
    "figure.dpi": 100,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 10,
    "legend.frameon": False,
    # stable bytes for identical inputs
    "svg.hashsalt": "hittime",
    "path.simplify": False,
}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None} if str(path).endswith(".png") else None)
    plt.close(fig)
    return path


def exponential_law(report, path):
    """Survival of ``tau/T`` with the envelope band, and the deviation itself."""
    with plt.rc_context(STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
        t = report.t
        e = np.exp(-t)
        lower, upper = report.params.bounds(t)
        ax1.fill_between(t, np.clip(lower, 1e-300, None), upper, color="C0", alpha=0.2,
                         label="envelope")
        ax1.semilogy(t, e, "k--", lw=1, label=r"$e^{-t}$")
        ax1.semilogy(t, report.survival, "C1", lw=1.5, label=r"$P(\tau > tT)$")
        ax1.set_xlabel("t")
        ax1.set_ylim(max(float(report.survival[report.survival > 0].min(initial=1.0)) / 10, 1e-12), 1.5)
        ax1.legend()
        ax2.semilogy(t, np.maximum(report.measured, 1e-300), "C1", label="measured")
        ax2.semilogy(t, report.envelope, "C0", label="envelope")
        ax2.set_xlabel("t")
        ax2.set_ylabel(r"$|P(\tau > tT) - e^{-t}|$")
        ax2.set_ylim(bottom=max(float(report.measured[report.measured > 0].min(initial=1e-12)) / 10, 1e-16))
        ax2.legend()
        return _save(fig, path)


def density_profile(profile, path):
    """Cell masses over the cell width against the geometric approximation."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        k = profile["k"]
        ax.bar(k, profile["density"], width=0.9, color="C0", alpha=0.5, label="exact cell density")
        ax.plot(k, profile["geometric_density"], "k.-", lw=1, label="geometric")
        ax.set_xlabel("cell k")
        ax.set_ylabel("mass / (S/T)")
        ax.legend()
        return _save(fig, path)


def sweep(sweep_result, keys, path):
    """Log-log plot of tracked quantities along a sweep with their fitted lines."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        x = np.asarray(sweep_result.grid, dtype=float)
        for i, key in enumerate(keys):
            y = np.array([p.quantities()[key] for p in sweep_result.points], dtype=float)
            if np.any(y <= 0):
                continue
            f = sweep_result.fits[key]
            ax.loglog(x, y, "o", color=f"C{i % 10}",
                      label=f"{key} (slope {f.slope:.3f})")
            ax.loglog(x, np.exp(f.intercept) * x**f.slope, "-", color=f"C{i % 10}", lw=1)
        ax.set_xlabel(sweep_result.param_name)
        ax.legend(fontsize=7)
        return _save(fig, path)


def samples_vs_exact(samples, curve, mean, path, band=None):
    """Empirical against exact survival, and a histogram of ``tau/T``."""
    with plt.rc_context(STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
        t = np.arange(curve.horizon + 1)
        emp = samples.survival(t)
        ax1.plot(t / mean, curve.values, "k", lw=1, label="exact")
        ax1.plot(t / mean, emp, "C1", lw=1, label="empirical")
        if band is not None:
            ax1.fill_between(t / mean, np.clip(curve.values - band, 0, 1),
                             np.clip(curve.values + band, 0, 1), color="C0", alpha=0.2,
                             label="DKW band")
        ax1.set_xlabel(r"$t / E\tau$")
        ax1.set_ylabel(r"$P(\tau > t)$")
        ax1.legend()
        scaled = samples.times / mean
        top = float(np.quantile(scaled, 0.999)) if scaled.size else 1.0
        ax2.hist(scaled, bins=60, range=(0, max(top, 1e-9)), density=True, color="C0", alpha=0.6)
        u = np.linspace(0, max(top, 1e-9), 200)
        ax2.plot(u, np.exp(-u), "k--", lw=1, label=r"$e^{-u}$")
        ax2.set_xlabel(r"$\tau / E\tau$")
        ax2.legend()
        return _save(fig, path)
