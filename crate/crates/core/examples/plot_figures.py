"""Plot CSV files written by the asianpath CLI.

    asianpath propagator-grid ... --grid x=-0.6:0.8:41 --grid y=-0.6:0.2:41 --out surface.csv
    asianpath sweep ... --param s0y --rho-list 0,0.4,0.8 --out sweep.csv
    asianpath histogram ... --out hist.csv
    python plot_figures.py surface.csv sweep.csv hist.csv
"""
import sys

import matplotlib.pyplot as plt
import numpy as np


def surface(path):
    data = np.genfromtxt(path, delimiter=",", names=True)
    cols = data.dtype.names
    u, v = np.unique(data[cols[0]]), np.unique(data[cols[1]])
    z = data["density"].reshape(len(u), len(v))
    ax = plt.figure().add_subplot(projection="3d")
    ax.plot_surface(*np.meshgrid(u, v, indexing="ij"), z, cmap="viridis")
    ax.set_xlabel(cols[0])
    ax.set_ylabel(cols[1])


def sweep(path):
    data = np.genfromtxt(path, delimiter=",", names=True)
    plt.figure()
    for rho in np.unique(data["rho"]):
        rows = data[data["rho"] == rho]
        line = plt.plot(rows["param_value"], rows["analytic_value"], label=f"closed form, rho={rho:g}")
        plt.errorbar(rows["param_value"], rows["mc_value"], 3 * rows["mc_std_error"], fmt="o",
                     color=line[0].get_color(), label=f"MC, rho={rho:g}")
    plt.xlabel("control spot")
    plt.ylabel("price")
    plt.legend()


def histogram(path):
    data = np.genfromtxt(path, delimiter=",", names=True)
    plt.figure()
    width = data["bin_right"] - data["bin_left"]
    plt.stairs(data["exact_mass"] / width, np.append(data["bin_left"], data["bin_right"][-1]), label="exact")
    plt.stairs(data["approx_mass"] / width, np.append(data["bin_left"], data["bin_right"][-1]), label="approximate")
    plt.xlabel("average logreturn")
    plt.legend()


if __name__ == "__main__":
    for path in sys.argv[1:]:
        with open(path) as f:
            header = f.readline()
        if "density" in header:
            surface(path)
        elif "param_value" in header:
            sweep(path)
        else:
            histogram(path)
    plt.show()
