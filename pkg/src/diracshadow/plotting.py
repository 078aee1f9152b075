"""
PNG figures for experiment results, rendered headlessly with the Agg backend.

Each ``render`` call returns the list of files it wrote.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    # fixed metadata keeps repeated renders byte-stable
    fig.savefig(path, dpi=110, metadata={"Software": None})
    plt.close(fig)
    return path


def _pairing_figures(result, out: Path, prefix: str) -> list[Path]:
    files = []
    cases = result.series.get("cases", [])
    if not cases:
        return files
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(10, 4))
    for c in cases:
        eps = np.asarray(c["epsilons"])
        vals = np.asarray(c["values"])
        line, = ax0.plot(eps, vals, "o-", label=c["key"])
        if "limit" in c:
            ax0.axhline(c["limit"], color=line.get_color(), ls="--", lw=0.8)
            err = np.abs(vals - c["limit"])
            if np.all(err > 0):
                ax1.loglog(eps, err, "o-", color=line.get_color(), label=c["key"])
        else:
            ax1.loglog(eps if result.summary.get("experiment") != "divergence" else 1 / eps, vals, "o-",
                       color=line.get_color(), label=f"{c['key']} slope {c['slope']:.3f}")
    ax0.set_xscale("log")
    ax0.set_xlabel("epsilon")
    ax0.set_ylabel("pairing")
    ax0.legend(fontsize=7)
    exp = result.summary.get("experiment")
    ax1.set_xlabel("1/epsilon" if exp == "divergence" else "epsilon")
    ax1.set_ylabel({"divergence": "pairing", "weak_zero": "|<psi_eps, h>|"}.get(exp, "abs error"))
    ax1.legend(fontsize=7)
    files.append(_save(fig, out / f"{prefix}_sweep.png"))

    coeffs = result.series.get("coefficients")
    if coeffs:
        fig, ax = plt.subplots(figsize=(5, 4))
        xs = np.arange(2)
        for i, c in enumerate(coeffs):
            ax.bar(xs - 0.25, c["closed"], 0.25, label="closed form" if i == 0 else None, color="0.6")
            ax.bar(xs, c["finest"], 0.25, label="finest epsilon" if i == 0 else None, color="tab:orange")
            ax.bar(xs + 0.25, c["measured"], 0.25, label="extrapolated" if i == 0 else None, color="tab:blue")
        ax.set_xticks(xs, ["c_plus", "c_minus"])
        ax.legend(fontsize=8)
        files.append(_save(fig, out / f"{prefix}_coefficients.png"))
    return files


def _evolve_figures(result, out: Path, prefix: str) -> list[Path]:
    g = result.series["grid"]
    snaps = result.series["snapshots"]
    if g["dimension"] == 1:
        x = -g["L"] + 2 * g["L"] / g["N"] * np.arange(g["N"])
        fig, ax = plt.subplots(figsize=(7, 4))
        for s in snaps:
            ax.plot(x, s["density"], label=f"t = {s['t']:g}")
        ax.set_xlabel("x")
        ax.set_ylabel("|psi|^2")
        ax.legend(fontsize=8)
        return [_save(fig, out / f"{prefix}_density.png")]
    fig, axes = plt.subplots(1, len(snaps), figsize=(4 * len(snaps), 3.6), squeeze=False)
    ext = (-g["L"], g["L"], -g["L"], g["L"])
    for ax, s in zip(axes[0], snaps):
        ax.imshow(np.asarray(s["density"]).T, origin="lower", extent=ext)
        ax.set_title(f"z = 0 slice, t = {s['t']:g}", fontsize=9)
    return [_save(fig, out / f"{prefix}_density.png")]


def _extfield_figures(result, out: Path, prefix: str) -> list[Path]:
    files = []
    s = result.series
    if "history" in s:
        fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(10, 4))
        h = s["history"]
        n0 = h["norm"][0]
        ax0.plot(h["t"], np.asarray(h["norm"]) - n0, label="norm - initial")
        ax0.plot(h["t"], np.asarray(h["bound"]) - n0, "--", label="energy bound - initial")
        ax0.set_xlabel("t")
        ax0.legend(fontsize=8)
        r = s["refinement"]
        dts = np.asarray(r["dts"])
        diffs = np.asarray(r["differences"])
        ax1.loglog(dts[:-1], diffs, "o-", label="||psi_dt - psi_dt/2||")
        if "reference" in s:
            ax1.loglog(s["reference"]["dts"], s["reference"]["errors"], "s-", label="error vs exact")
        ax1.set_xlabel("dt")
        ax1.legend(fontsize=8)
        files.append(_save(fig, out / f"{prefix}_splitting.png"))
    if "coulomb" in s:
        c = s["coulomb"]
        fig, ax = plt.subplots(figsize=(5.5, 4))
        ax.loglog(c["log_inv_eps"], c["sup"], "o-", label="sup |A_0|")
        ax.loglog(c["log_inv_eps"], c["defect"], "s-", label="defect (non-skew)")
        ax.set_xlabel("log(1/epsilon)")
        ax.legend(fontsize=8)
        files.append(_save(fig, out / f"{prefix}_coulomb.png"))
    return files


def _algebra_figure(result, out: Path, prefix: str) -> list[Path]:
    names = [r["invariant"] for r in result.rows]
    vals = np.maximum([r["max_residual"] for r in result.rows], 1e-18)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.barh(names, vals)
    ax.set_xscale("log")
    ax.axvline(result.summary["tolerance"], color="k", ls="--", lw=0.8)
    ax.set_xlabel("max residual")
    return [_save(fig, out / f"{prefix}_residuals.png")]


def render(result, kind: str, out: str | Path) -> list[Path]:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    prefix = result.name
    if kind == "algebra-check":
        return _algebra_figure(result, out, prefix)
    if kind in ("sweep", "limit-compare"):
        return _pairing_figures(result, out, prefix)
    if kind == "evolve":
        return _evolve_figures(result, out, prefix)
    if kind == "extfield":
        return _extfield_figures(result, out, prefix)
    raise ValueError(f"no figures for {kind!r}")
