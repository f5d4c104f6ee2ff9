"""PNG figures from a run directory (history.csv, fields.csv); uses the Agg backend."""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _read(path):
    return np.genfromtxt(path, delimiter=",", names=True, dtype=None, encoding="utf-8")


def plot_history(hist, path):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.semilogy(hist["iter"], hist["loss"], label="loss")
    ax.semilogy(hist["iter"], hist["envelope"], "--", label="envelope")
    ax.set_xlabel("iteration")
    ax.set_ylabel("loss")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_fields(fields, path):
    names = fields.dtype.names
    if len(names) != 4:  # only 2-D domains get a heat map
        return
    x, y = fields[names[0]], fields[names[1]]
    n = int(round(np.sqrt(x.size)))
    shape = (n, n)
    panels = [("prediction", fields["pred"]), ("exact", fields["exact"]),
              ("error", fields["pred"] - fields["exact"])]
    fig, axes = plt.subplots(1, 3, figsize=(11, 3.4))
    for ax, (title, v) in zip(axes, panels):
        im = ax.pcolormesh(x.reshape(shape), y.reshape(shape), v.reshape(shape), shading="auto")
        ax.set_title(title)
        ax.set_xlabel(names[0])
        ax.set_ylabel(names[1])
        fig.colorbar(im, ax=ax)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_toy(hist, path):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.semilogy(hist["step"], hist["ratio_gd"], "o-", label="GD")
    ax.semilogy(hist["step"], hist["ratio_igd"], "s-", label="IGD")
    ax.set_xlabel("step")
    ax.set_ylabel("loss ratio")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_gram_study(hist, path):
    widths = np.unique(hist["m"])
    med = [np.median(hist["dev_frobenius"][hist["m"] == m]) for m in widths]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.loglog(hist["m"], hist["dev_frobenius"], ".", alpha=0.4)
    ax.loglog(widths, med, "o-", label="median")
    ax.loglog(widths, med[0] * np.sqrt(widths[0] / widths), "k--", label="m^-1/2")
    ax.set_xlabel("width m")
    ax.set_ylabel("|G(0) - G_inf|_F")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_scaling(hist, path):
    ok = hist["status"] != "diverged"
    widths = np.unique(hist["width"])
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for col, marker in (("max_i1", "o"), ("max_i2", "s")):
        med = [np.median(hist[col][ok & (hist["width"] == m)]) for m in widths]
        ax.loglog(widths, med, marker + "-", label=col)
    ax.loglog(widths, med[0] * np.sqrt(widths[0] / widths), "k--", label="m^-1/2")
    ax.set_xlabel("width m")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render(command, out):
    """Write the figures that make sense for ``command``; returns the paths written."""
    hist_path = os.path.join(out, "history.csv")
    written = []
    hist = _read(hist_path)
    if command in ("train", "helmholtz"):
        written.append(os.path.join(out, "loss.png"))
        plot_history(hist, written[-1])
        fields_path = os.path.join(out, "fields.csv")
        if os.path.exists(fields_path):
            written.append(os.path.join(out, "fields.png"))
            plot_fields(_read(fields_path), written[-1])
    elif command == "toy":
        written.append(os.path.join(out, "toy.png"))
        plot_toy(hist, written[-1])
    elif command == "gram-study":
        written.append(os.path.join(out, "gram_study.png"))
        plot_gram_study(hist, written[-1])
    elif command == "scaling-study":
        written.append(os.path.join(out, "scaling.png"))
        plot_scaling(hist, written[-1])
    return [p for p in written if os.path.exists(p)]
