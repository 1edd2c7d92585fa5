"""Render a FigureSpec to a PNG or SVG file.

Rendering never alters the data: every plotted array is a column read
verbatim from the input CSV (the pulse overlay derives its time axis as
storage_time_us + t_us, from two such columns). SVG output is made
reproducible by pinning the hash salt and dropping the date stamp.
"""

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .figspec import FigureSpec  # noqa: E402

plt.rcParams["svg.hashsalt"] = "zmfigs"


def _fit_decay(t, y):
    """Log-linear least squares against a * exp(-t/tau) and a * exp(-(t/tau)^2).

    Returns (model, tau, amplitude, r_squared) of the better model in
    log space; only points above a small floor participate.
    """
    floor = float(np.max(y)) * 1e-3
    mask = y > floor
    if mask.sum() < 3:
        return None
    tm, ylog = t[mask], np.log(y[mask])

    def score(x):
        slope, icept = np.polyfit(x, ylog, 1)
        if slope >= 0:
            return None
        fit = slope * x + icept
        ss_res = float(np.sum((ylog - fit) ** 2))
        ss_tot = float(np.sum((ylog - ylog.mean()) ** 2))
        r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
        return slope, icept, r2

    results = {}
    lin = score(tm)
    if lin:
        results["exponential"] = (-1.0 / lin[0], np.exp(lin[1]), lin[2])
    quad = score(tm**2)
    if quad:
        results["gaussian"] = ((-1.0 / quad[0]) ** 0.5, np.exp(quad[1]), quad[2])
    if not results:
        return None
    model = max(results, key=lambda k: results[k][2])
    tau, amp, r2 = results[model]
    return model, tau, amp, r2


def _decay_curve(model, tau, amp, t):
    if model == "exponential":
        return amp * np.exp(-t / tau)
    return amp * np.exp(-((t / tau) ** 2))


def _render_traces_overlay(spec: FigureSpec, ax):
    data = spec.data[spec.inputs[0]]
    storage, t, intensity = data["storage_time_us"], data["t_us"], data["intensity"]
    boundaries = np.nonzero(np.diff(storage) != 0)[0] + 1
    chunks = zip(np.split(storage, boundaries), np.split(t, boundaries), np.split(intensity, boundaries))
    cmap = plt.get_cmap("viridis")
    groups = list(chunks)
    for i, (s_chunk, t_chunk, y_chunk) in enumerate(groups):
        color = cmap(i / max(len(groups) - 1, 1))
        # each pulse sits at its absolute origin: storage offset + read-local time
        ax.plot(s_chunk + t_chunk, y_chunk, color=color, linewidth=0.9)
    ax.set_title(f"{len(groups)} retrieved pulses")


def _envelope_panel(ax, data, label):
    t, y = data["storage_time_us"], data["peak_intensity"]
    ax.plot(t, y, "o", markersize=3.5, label=label or "peaks")
    fit = _fit_decay(t, y)
    if fit is not None:
        model, tau, amp, _ = fit
        dense = np.linspace(float(t.min()), float(t.max()), 400)
        ax.plot(dense, _decay_curve(model, tau, amp, dense), "-", linewidth=1.0,
                label=f"{model} fit, tau = {tau:.2f} us")
    ax.legend(frameon=False, fontsize=8)


def _render_sweep_line(spec: FigureSpec, ax):
    data = spec.data[spec.inputs[0]]
    b, f = data["b_gauss"], data["freq_hz"]
    slope, intercept = np.polyfit(b, f, 1)
    dense = np.linspace(float(b.min()), float(b.max()), 2)
    ax.plot(dense, slope * dense + intercept, "-", linewidth=1.0, color="0.4")
    ax.plot(b, f, "o", markersize=5)
    ax.annotate(f"slope {slope / 1e6:.4f} MHz/G", xy=(0.05, 0.92), xycoords="axes fraction")


def _render_classical(spec: FigureSpec, ax_pair):
    ax_time, ax_plane = ax_pair
    styles = ["-", "--", ":", "-."]
    for i, path in enumerate(spec.inputs):
        data = spec.data[path]
        tag = os.path.splitext(os.path.basename(path))[0]
        style = styles[i % len(styles)]
        for comp, color in (("Mx", "tab:blue"), ("My", "tab:orange"), ("Mz", "tab:green")):
            label = f"{tag} {comp}" if len(spec.inputs) > 1 else comp
            ax_time.plot(data["t_us"], data[comp], style, color=color, linewidth=0.9, label=label)
        ax_plane.plot(data["Mx"], data["My"], style, color="0.3", linewidth=0.9)
    ax_time.legend(frameon=False, fontsize=7, ncol=max(1, len(spec.inputs)))
    ax_plane.set_xlabel("Mx")
    ax_plane.set_ylabel("My")
    ax_plane.set_aspect("equal", adjustable="datalim")


def render(spec: FigureSpec) -> str:
    """Draw the figure and write spec.output; returns the output path."""
    if not spec.output:
        raise ValueError("spec.output must be set to render")

    if spec.kind == "classical":
        fig, (ax_time, ax_plane) = plt.subplots(
            1, 2, figsize=(9.0, 3.6), gridspec_kw={"width_ratios": [2, 1]}
        )
        _render_classical(spec, (ax_time, ax_plane))
        ax_time.set_xlabel(spec.x_label)
        ax_time.set_ylabel(spec.y_label)
    elif spec.kind == "envelope":
        n_panels = len(spec.inputs)
        fig, axes = plt.subplots(n_panels, 1, figsize=(6.4, 3.2 * n_panels), squeeze=False)
        for ax, path in zip(axes[:, 0], spec.inputs):
            _envelope_panel(ax, spec.data[path], os.path.basename(path) if n_panels > 1 else "")
            ax.set_xlabel(spec.x_label)
            ax.set_ylabel(spec.y_label)
    else:
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        if spec.kind == "traces_overlay":
            _render_traces_overlay(spec, ax)
        else:
            _render_sweep_line(spec, ax)
        ax.set_xlabel(spec.x_label)
        ax.set_ylabel(spec.y_label)

    fig.tight_layout()
    out_dir = os.path.dirname(os.path.abspath(spec.output))
    os.makedirs(out_dir, exist_ok=True)
    kwargs = {"format": spec.fmt}
    if spec.fmt == "svg":
        kwargs["metadata"] = {"Date": None}
    fig.savefig(spec.output, **kwargs)
    plt.close(fig)
    return spec.output
