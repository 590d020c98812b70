"""PNG figures for CLI runs (opt-in via ``--figures``)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# no timestamps/versions in the PNG text chunks
_META = {"Software": None}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_META)
    plt.close(fig)
    return path


def pressure_figure(rows, path):
    """``rows``: (B, nu, P, P') tuples."""
    data = np.asarray([r[:4] for r in rows], dtype=float)
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(9, 3.6))
    for B in np.unique(data[:, 0]):
        sel = data[:, 0] == B
        order = np.argsort(data[sel, 1])
        a1.plot(data[sel, 1][order], data[sel, 2][order], label=f"B={B:g}")
        a2.plot(data[sel, 1][order], data[sel, 3][order], label=f"B={B:g}")
    a1.set_xlabel("nu"); a1.set_ylabel("P_B(nu)")
    a2.set_xlabel("nu"); a2.set_ylabel("P'_B(nu)")
    a1.legend(fontsize=7)
    return _save(fig, path)


def tau_figure(rows, path):
    """``rows``: (label, t, tau) tuples."""
    fig, ax = plt.subplots(figsize=(5, 3.6))
    labels = []
    for r in rows:
        if r[0] not in labels:
            labels.append(r[0])
    for lab in labels:
        pts = np.asarray([(r[1], r[2]) for r in rows if r[0] == lab and r[1] > 0 and r[2] > 0])
        if pts.size:
            ax.loglog(pts[:, 0], pts[:, 1], label=lab)
    ax.set_xlabel("t"); ax.set_ylabel("tau(t)")
    ax.legend(fontsize=7)
    return _save(fig, path)


def density_figure(grid, values, path, title=""):
    """Mid-plane slice and the radial scatter of a density."""
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(9, 3.8))
    mid = values.shape[2] // 2
    ext = [-grid.extent[0], grid.extent[0], -grid.extent[1], grid.extent[1]]
    im = a1.imshow(values[:, :, mid].T, origin="lower", extent=ext, cmap="viridis")
    fig.colorbar(im, ax=a1)
    a1.set_xlabel("x"); a1.set_ylabel("y"); a1.set_title("z = 0 slice")
    r = np.sqrt(grid.radius_squared()).ravel()
    a2.plot(r, values.ravel(), ".", ms=1)
    a2.set_xlabel("|x|"); a2.set_ylabel("rho")
    if title:
        fig.suptitle(title)
    return _save(fig, path)


def sweep_figure(betas, energies, path, tf=None, stf=None):
    fig, ax = plt.subplots(figsize=(5, 3.6))
    ax.semilogx(betas, energies, "o-", label="MTF")
    if tf is not None:
        ax.axhline(tf, ls="--", color="C1", label="TF")
    if stf is not None:
        ax.axhline(stf, ls=":", color="C2", label="STF")
    ax.set_xlabel("beta"); ax.set_ylabel("ground-state energy")
    ax.legend(fontsize=7)
    return _save(fig, path)


def weyl_figure(hbars, ratios, path):
    dev = np.abs(np.asarray(ratios, dtype=float) - 1.0)
    fig, ax = plt.subplots(figsize=(5, 3.6))
    ax.loglog(hbars, np.where(dev > 0, dev, np.nan), "o-")
    ax.set_xlabel("hbar"); ax.set_ylabel("|ratio - 1|")
    ax.invert_xaxis()
    return _save(fig, path)
