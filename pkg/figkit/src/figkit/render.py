"""Figure layouts rebuilt from verified output bundles.

Four layouts are supported, keyed fig1..fig4:

fig1  transport efficiency against dephasing rate, one errorbar curve per
      disorder strength
fig2  target-site time traces across the dephasing crossover, with the
      incoherent rate-equation overlay where available
fig3  site-resolved heat maps with light-cone lines, over log-log width
      panels carrying the fitted power law and the finite-chain ceiling
fig4  noise spectral densities with eigenfrequency-difference markers,
      beside per-target efficiencies for each noise model

All axes are dimensionless: times in t * j_max, rates in gamma / j_max,
frequencies in omega / j_max.  Output is vector only (.svg or .pdf) and
byte-stable for identical inputs and style.  Nothing is written unless the
whole figure builds; overlay artists carry stable SVG ids (gid) so their
presence can be checked downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib as mpl
import numpy as np
from matplotlib.figure import Figure

from .manifest import Bundle, ManifestError, load_manifest

__all__ = ["Style", "FigureJob", "render", "FIGURE_IDS"]

FIGURE_IDS = ("fig1", "fig2", "fig3", "fig4")

_VECTOR_SUFFIXES = (".svg", ".pdf")
#: ceiling of the right-side RMS width on a ten-site chain, two figures
_WIDTH_CEILING = 5.3


@dataclass(frozen=True)
class Style:
    font_size: float = 9.0
    cmap: str = "magma"
    line_width: float = 1.3
    panel_width: float = 3.2
    panel_height: float = 2.4


@dataclass(frozen=True)
class FigureJob:
    manifest: Path
    figure: str
    out: Path
    style: Style = field(default_factory=Style)

    def __post_init__(self) -> None:
        if self.figure not in FIGURE_IDS:
            raise ValueError(f"figure must be one of {FIGURE_IDS}, "
                             f"got {self.figure!r}")
        suffix = Path(self.out).suffix.lower()
        if suffix not in _VECTOR_SUFFIXES:
            raise ValueError(f"output must be a vector format "
                             f"{_VECTOR_SUFFIXES}, got {suffix!r}")


def render(job: FigureJob) -> Path:
    """Build the requested layout from the bundle and write the image.

    The bundle is checksum-verified first and the figure is assembled fully
    in memory, so a failing input never leaves a partial image behind.
    """
    bundle = load_manifest(job.manifest)
    builder = _BUILDERS[job.figure]
    with mpl.rc_context({"font.size": job.style.font_size,
                         "svg.hashsalt": "figkit",
                         "lines.linewidth": job.style.line_width}):
        fig = builder(bundle, job.style)
        out = Path(job.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        if out.suffix.lower() == ".svg":
            fig.savefig(out, format="svg", metadata={"Date": None})
        else:
            fig.savefig(out, format="pdf",
                        metadata={"CreationDate": None})
    return out


def _target_site(bundle: Bundle) -> int:
    return bundle.target_sites()[0]


def _efficiency_file(bundle: Bundle) -> str:
    name = bundle.data.get("files", {}).get("efficiency")
    if not name:
        raise ManifestError(f"bundle {bundle.label!r} lists no efficiency "
                            "summary")
    return name


def _pivot_populations(table: dict[str, np.ndarray],
                       value_col: str) -> tuple[np.ndarray, np.ndarray]:
    """(times, grid) with grid[site-1, time] from a long-format table."""
    times = np.unique(table["time_s"])
    sites = np.unique(table["site"]).astype(int)
    grid = np.full((sites.max(), times.shape[0]), np.nan)
    idx_t = np.searchsorted(times, table["time_s"])
    idx_s = table["site"].astype(int) - 1
    grid[idx_s, idx_t] = table[value_col]
    if np.isnan(grid).any():
        raise ManifestError("populations table does not cover every "
                            "site/time pair")
    return times, grid


def _fig1(bundle: Bundle, style: Style) -> Figure:
    site = _target_site(bundle)
    t = bundle.table(_efficiency_file(bundle))
    mask = (t["site"] == site) & np.isfinite(t["gamma_over_jmax"])
    if not mask.any():
        raise ManifestError(f"no dephasing-sweep rows for site {site}")
    fig = Figure(figsize=(1.6 * style.panel_width, 1.5 * style.panel_height))
    ax = fig.subplots()
    b_values = np.unique(t["b_max_over_jmax"][mask])
    nonzero = t["gamma_over_jmax"][mask & (t["gamma_over_jmax"] > 0)]
    linthresh = float(nonzero.min()) if nonzero.size else 1.0
    for b in b_values:
        sel = mask & (t["b_max_over_jmax"] == b)
        order = np.argsort(t["gamma_over_jmax"][sel])
        g = t["gamma_over_jmax"][sel][order]
        eta = t["eta_norm"][sel][order]
        lo = t["ci_lo"][sel][order]
        hi = t["ci_hi"][sel][order]
        container = ax.errorbar(g, eta, yerr=(eta - lo, hi - eta),
                                marker="o", markersize=3.5, capsize=2,
                                label=f"$B_\\mathrm{{max}} = {b:g}\\,j_"
                                      f"\\mathrm{{max}}$")
        container.lines[0].set_gid(f"efficiency-curve-b{b:g}")
    ax.set_xscale("symlog", linthresh=linthresh)
    ax.set_xlabel(r"$\gamma \,/\, j_\mathrm{max}$")
    ax.set_ylabel(rf"$\eta_{{{site}}}$")
    ax.legend(frameon=False)
    fig.tight_layout()
    return fig


def _fig2(bundle: Bundle, style: Style) -> Figure:
    site = _target_site(bundle)
    points = sorted(bundle.points,
                    key=lambda p: (p["gamma_over_jmax"] is None,
                                   p["gamma_over_jmax"]))
    n = len(points)
    ncols = 2 if n > 1 else 1
    nrows = (n + ncols - 1) // ncols
    fig = Figure(figsize=(ncols * style.panel_width,
                          nrows * style.panel_height))
    axes = np.atleast_1d(fig.subplots(nrows, ncols, sharex=True,
                                      sharey=True)).ravel()
    for ax, point in zip(axes, points):
        times, p = bundle.site_series(point["files"]["populations"], site,
                                      "p_mean")
        _, err = bundle.site_series(point["files"]["populations"], site,
                                    "p_stderr")
        x = times * bundle.j_max
        ax.errorbar(x, p, yerr=err, fmt=".", markersize=3, elinewidth=0.7,
                    label="ensemble")
        rate_name = point["files"].get("rate_overlay")
        if rate_name:
            rt, rp = bundle.site_series(rate_name, site, "p_rate")
            line, = ax.plot(rt * bundle.j_max, rp, label="rate equations")
            line.set_gid(f"rate-overlay-{point['label']}")
        gamma = point["gamma_over_jmax"]
        if gamma:
            ax.axvline(1.0 / gamma, linestyle="--", linewidth=0.8,
                       color="0.4", gid=f"crossover-{point['label']}")
        ax.set_title(rf"$\gamma / j_\mathrm{{max}} = {gamma:g}$",
                     fontsize=style.font_size)
    for ax in axes[len(points):]:
        ax.set_visible(False)
    for ax in axes[:len(points)]:
        ax.set_xlabel(r"$t \cdot j_\mathrm{max}$")
        ax.set_ylabel(rf"$p_{{{site}}}$")
    axes[0].legend(frameon=False, fontsize=style.font_size - 1)
    fig.tight_layout()
    return fig


def _fig3(bundle: Bundle, style: Style) -> Figure:
    points = bundle.points
    n = len(points)
    source = int(bundle.config["network"]["source_site"])
    n_sites = int(bundle.config["network"]["n_sites"])
    fig = Figure(figsize=(n * style.panel_width, 2.1 * style.panel_height))
    axes = fig.subplots(2, n, sharey="row", squeeze=False)
    for col, point in enumerate(points):
        label = point["label"]
        times, grid = _pivot_populations(
            bundle.table(point["files"]["populations"]), "p_mean")
        x = times * bundle.j_max
        top = axes[0, col]
        mesh = top.pcolormesh(x, np.arange(1, grid.shape[0] + 1), grid,
                              cmap=style.cmap, vmin=0.0, vmax=grid.max(),
                              shading="nearest", rasterized=False)
        mesh.set_gid(f"heatmap-{label}")
        t_b = point.get("boundary_time_s")
        if t_b:
            # spreading speed implied by the bulk-to-boundary traversal
            v = source / (t_b * bundle.j_max)
            for sign in (+1, -1):
                cone = source + sign * v * x
                inside = (cone >= 1) & (cone <= n_sites)
                top.plot(x[inside], cone[inside], color="w", linestyle="--",
                         linewidth=0.9,
                         gid=f"light-cone-{label}-{'up' if sign > 0 else 'down'}")
        top.set_title(label, fontsize=style.font_size)
        top.set_ylabel("site")
        fig.colorbar(mesh, ax=top, pad=0.02, label=r"$p_i$")

        width_name = point["files"].get("width")
        if not width_name:
            raise ManifestError(f"point {label!r} lists no width series")
        w = bundle.table(width_name)
        bottom = axes[1, col]
        pos = w["sigma_wp"] > 0
        bottom.fill_between(w["time_s"][pos] * bundle.j_max,
                            np.maximum(w["ci_lo"][pos], 1e-3),
                            w["ci_hi"][pos], alpha=0.25, linewidth=0)
        bottom.plot(w["time_s"][pos] * bundle.j_max, w["sigma_wp"][pos],
                    gid=f"width-{label}")
        fit = point.get("width_fit")
        if fit:
            lo, hi = fit["window_s"]
            tt = np.geomspace(lo, hi, 64)
            overlay, = bottom.plot(tt * bundle.j_max,
                                   fit["A"] * tt ** fit["C"],
                                   linestyle="--", color="k")
            overlay.set_gid(f"width-fit-{label}")
            bottom.annotate(rf"$C = {fit['C']:.2f} \pm {fit['sigma_C']:.2f}$",
                            xy=(0.05, 0.9), xycoords="axes fraction",
                            fontsize=style.font_size - 1)
        bottom.axhline(_WIDTH_CEILING, linestyle=":", color="0.3",
                       linewidth=0.9, gid=f"width-ceiling-{label}")
        bottom.set_xscale("log")
        bottom.set_yscale("log")
        bottom.set_xlabel(r"$t \cdot j_\mathrm{max}$")
        bottom.set_ylabel(r"$\sigma_\mathrm{WP}$")
    fig.tight_layout()
    return fig


def _fig4(bundle: Bundle, style: Style) -> Figure:
    targets = bundle.target_sites()
    fig = Figure(figsize=(2.4 * style.panel_width, 1.6 * style.panel_height))
    ax_spec, ax_eta = fig.subplots(1, 2)

    spectral = [p for p in bundle.points if p["files"].get("spectrum")]
    if not spectral:
        raise ManifestError(f"bundle {bundle.label!r} has no spectrum tables")
    x_max = 0.0
    for point in spectral:
        t = bundle.table(point["files"]["spectrum"])
        x = t["omega_rad_s"] / bundle.j_max
        line, = ax_spec.plot(x, t["s_value"] / bundle.j_max,
                             label=point["label"])
        line.set_gid(f"spectrum-{point['label']}")
        peak = x[np.argmax(t["s_value"])]
        x_max = max(x_max, min(2.0 * peak + 5.0, float(x.max())))
    freqs = bundle.data.get("difference_frequencies_rad_s", {})
    for group, values in sorted(freqs.items()):
        for k, omega in enumerate(values):
            w = omega / bundle.j_max
            if w <= x_max:
                ax_spec.axvline(w, color="0.55", linewidth=0.6,
                                linestyle="--", zorder=0,
                                gid=f"difference-frequency-{group}-{k}")
    ax_spec.set_xlim(0.0, x_max)
    ax_spec.set_xlabel(r"$\omega \,/\, j_\mathrm{max}$")
    ax_spec.set_ylabel(r"$S(\omega) \,/\, j_\mathrm{max}$")
    ax_spec.legend(frameon=False, fontsize=style.font_size - 1)

    labels = [p["label"] for p in bundle.points]
    base = np.arange(len(labels), dtype=float)
    bar_w = 0.8 / len(targets)
    for k, site in enumerate(targets):
        eta = np.array([p["eta"][str(site)]["eta_norm"]
                        for p in bundle.points])
        lo = np.array([p["eta"][str(site)]["ci_lo"] for p in bundle.points])
        hi = np.array([p["eta"][str(site)]["ci_hi"] for p in bundle.points])
        bars = ax_eta.bar(base + (k - (len(targets) - 1) / 2) * bar_w, eta,
                          bar_w, yerr=(eta - lo, hi - eta), capsize=2,
                          label=rf"$\eta_{{{site}}}$")
        for patch in bars.patches:
            patch.set_gid(f"eta-bars-site{site}")
    ax_eta.set_xticks(base)
    ax_eta.set_xticklabels(labels, rotation=30, ha="right",
                           fontsize=style.font_size - 1)
    ax_eta.set_ylabel(r"$\eta$")
    ax_eta.legend(frameon=False, fontsize=style.font_size - 1)
    fig.tight_layout()
    return fig


_BUILDERS = {"fig1": _fig1, "fig2": _fig2, "fig3": _fig3, "fig4": _fig4}
