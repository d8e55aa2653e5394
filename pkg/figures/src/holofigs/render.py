"""Figure rendering from primary CSV/JSON artifacts.

Strictly a consumer: every number plotted is read from the input files
(fit overlays are evaluated from the published fit parameters).  Rendering
is deterministic at a fixed matplotlib version: fixed style, fixed SVG
hash salt, no timestamps.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import LogNorm  # noqa: E402

from .spec import (  # noqa: E402
    FIGURE_DECADES,
    FigureError,
    FigureSpec,
    FISHER_R_HEADER,
    PMD_HEADER,
    VIS_LAMBDA_HEADER,
    VIS_R_HEADER,
    read_csv_columns,
    read_meta,
)

matplotlib.rcParams["svg.hashsalt"] = "holofigs"
matplotlib.rcParams["figure.dpi"] = 120

STATE_STYLE = {
    "CS": {"color": "0.3", "marker": "s", "label": "CS"},
    "AS": {"color": "tab:blue", "marker": "o", "label": "AS"},
    "PS": {"color": "tab:red", "marker": "x", "label": "PS"},
}


def _pmd_grid(columns: dict) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    pz = np.asarray(columns["pz"], dtype=float)
    pp = np.asarray(columns["pperp"], dtype=float)
    val = np.asarray(columns["value"], dtype=float)
    pz_axis = np.unique(pz)
    pp_axis = np.unique(pp)
    if pz_axis.size * pp_axis.size != val.size:
        raise FigureError("pmd.csv does not describe a rectangular grid")
    grid = val.reshape(pz_axis.size, pp_axis.size)
    return pz_axis, pp_axis, grid


def _save(fig, spec: FigureSpec, name: str) -> list[str]:
    os.makedirs(os.path.dirname(spec.output_path) or ".", exist_ok=True)
    written = []
    for fmt in spec.formats:
        path = f"{spec.output_path}_{name}.{fmt}" if name else f"{spec.output_path}.{fmt}"
        # no embedded date: re-renders must be byte-identical
        fig.savefig(path, format=fmt, metadata={"Date": None} if fmt == "svg" else None)
        written.append(path)
    plt.close(fig)
    return written


def render_pmd_panels(spec: FigureSpec) -> list[str]:
    """Three log-color momentum maps (CS / AS / PS) with a shared scale."""
    panels = {}
    for key in ("cs", "as", "ps"):
        if key not in spec.inputs:
            raise FigureError(f"pmd_panels needs input {key!r}")
        panels[key] = _pmd_grid(read_csv_columns(spec.inputs[key], PMD_HEADER))
    p_2up = None
    if "meta" in spec.inputs:
        meta = read_meta(spec.inputs["meta"])
        p_2up = meta.get("constants", {}).get("p_2up")

    vmax = max(grid.max() for _, _, grid in panels.values())
    if vmax <= 0:
        raise FigureError("all momentum maps are empty")
    norm = LogNorm(vmin=vmax * 10.0**-FIGURE_DECADES, vmax=vmax)
    fig, axes = plt.subplots(1, 3, figsize=(12.0, 3.6), sharey=True, constrained_layout=True)
    mesh = None
    for ax, (key, (pz, pp, grid)) in zip(axes, panels.items()):
        clipped = np.maximum(grid, vmax * 10.0**-FIGURE_DECADES)
        mesh = ax.pcolormesh(pz, pp, clipped.T, norm=norm, cmap="inferno", shading="auto")
        ax.set_title(key.upper())
        ax.set_xlabel(r"$p_z$ (a.u.)")
        if p_2up is not None:
            for sign in (-1.0, 1.0):
                if pz.min() <= sign * p_2up <= pz.max():
                    ax.axvline(sign * p_2up, color="cyan", ls="--", lw=1.0)
    axes[0].set_ylabel(r"$p_\perp$ (a.u.)")
    fig.colorbar(mesh, ax=axes, label="yield (arb. u.)", shrink=0.9)
    return _save(fig, spec, "")


def _visibility_by_state(columns: dict, x_key: str) -> dict:
    out: dict = {}
    for state, x, v in zip(
        columns["state"], columns[x_key], columns["visibility"]
    ):
        out.setdefault(state, []).append((float(x), float(v)))
    return {k: np.array(sorted(v)) for k, v in out.items()}


def render_scaling_panels(spec: FigureSpec) -> list[str]:
    """Visibility-decay and Fisher-information panels with fit overlays."""
    panels = []
    if "visibility_vs_r" in spec.inputs:
        panels.append("squeeze")
    if "visibility_vs_lambda" in spec.inputs:
        panels.append("wavelength")
    if "fisher_vs_r" in spec.inputs:
        panels.append("fisher")
    if not panels:
        raise FigureError("scaling_panels needs at least one scan input")

    fig, axes = plt.subplots(
        1, len(panels), figsize=(4.2 * len(panels), 3.4), constrained_layout=True
    )
    axes = np.atleast_1d(axes)
    for ax, panel in zip(axes, panels):
        if panel == "squeeze":
            columns = read_csv_columns(spec.inputs["visibility_vs_r"], VIS_R_HEADER)
            data = _visibility_by_state(columns, "r")
            for state, pts in data.items():
                style = STATE_STYLE.get(state, {})
                ax.plot(pts[:, 0], pts[:, 1], ls="", **style)
            if "squeeze_fit" in spec.inputs:
                fit = read_meta(spec.inputs["squeeze_fit"])
                ps = fit.get("PS", {})
                if {"eta", "offset"} <= set(ps):
                    r_axis = data.get("PS", next(iter(data.values())))[:, 0]
                    model = np.exp(-ps["eta"] * np.exp(2.0 * r_axis) + ps["offset"])
                    ax.plot(
                        r_axis, model, "k--",
                        label=rf"$\exp(-\eta e^{{2r}})$, $\eta$={ps['eta']:.3g}",
                    )
            ax.set_yscale("log")
            ax.set_xlabel("squeezing magnitude r")
            ax.set_ylabel("visibility")
            ax.legend(fontsize=8)
        elif panel == "wavelength":
            columns = read_csv_columns(
                spec.inputs["visibility_vs_lambda"], VIS_LAMBDA_HEADER
            )
            data = _visibility_by_state(columns, "lambda_um")
            for state, pts in data.items():
                style = STATE_STYLE.get(state, {})
                ax.plot(pts[:, 0], pts[:, 1], ls="", **style)
            if "wavelength_fit" in spec.inputs:
                fit = read_meta(spec.inputs["wavelength_fit"])
                ps = fit.get("PS", {})
                if {"beta", "offset"} <= set(ps):
                    lam = np.asarray(data.get("PS", next(iter(data.values())))[:, 0])
                    model = np.exp(-ps["beta"] * lam**4 + ps["offset"])
                    ax.plot(
                        lam, model, "k--",
                        label=rf"$\exp(-\beta\lambda^4)$, $\beta$={ps['beta']:.3g}",
                    )
            ax.set_yscale("log")
            ax.set_xlabel(r"wavelength ($\mu$m)")
            ax.set_ylabel("visibility")
            ax.legend(fontsize=8)
        else:
            columns = read_csv_columns(spec.inputs["fisher_vs_r"], FISHER_R_HEADER)
            r = np.asarray(columns["r"], dtype=float)
            cfi = np.asarray(columns["cfi"], dtype=float)
            ratio = np.asarray(columns["cfi_over_sql"], dtype=float)
            sql = cfi[0] / ratio[0] if ratio[0] > 0 else None
            ax.plot(r, cfi, "o", color="tab:blue", label="CFI")
            if sql is not None:
                ax.axhline(sql, color="tab:red", ls=":", label="SQL")
            # e^{4r} asymptote anchored at the largest-r point
            ref = cfi[-1] * np.exp(4.0 * (r - r[-1]))
            ax.plot(r, ref, "k--", lw=1.0, label=r"$\propto e^{4r}$")
            ax.set_yscale("log")
            ax.set_xlabel("squeezing magnitude r")
            ax.set_ylabel("integrated CFI")
            ax.legend(fontsize=8)
    return _save(fig, spec, "")


def render(spec: FigureSpec) -> list[str]:
    if spec.kind == "pmd_panels":
        return render_pmd_panels(spec)
    return render_scaling_panels(spec)
