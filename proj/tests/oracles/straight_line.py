"""Independent numpy oracle for F/F* on a straight boundary.

Periodic strip, cell-centred nodes at integer (x, y), markers on y = Y0 with
n per cell starting at x = -0.5 + 0.5/n. Prints the values frozen into
tests/unit/test_analysis.cpp.
"""
import numpy as np

H = 1.5
PERIOD = 16


def weights(dx, dy, alpha):
    rx, ry = np.abs(dx) / H, np.abs(dy) / H
    w = np.exp(-(rx**2 + ry**2) / alpha**2)
    w[(rx > 1) | (ry > 1)] = 0.0
    return w


def shape(x, y, alpha, basis):
    cx, cy = np.floor(x + 0.5), np.floor(y + 0.5)
    nodes = np.array([(cx + i, cy + j) for i in (-1, 0, 1) for j in (-1, 0, 1)])
    dx, dy = nodes[:, 0] - x, nodes[:, 1] - y
    w = weights(dx, dy, alpha)
    if basis == "constant":
        return nodes, w / w.sum()
    P = np.stack([np.ones_like(dx), dx, dy])
    A = (P * w) @ P.T
    phi = np.linalg.solve(A, np.array([1.0, 0.0, 0.0])) @ (P * w)
    return nodes, phi


def ratio(y0, alpha, basis, n):
    xs = -0.5 + (np.arange(PERIOD * n) + 0.5) / n
    f = {}
    for x in xs:
        nodes, phi = shape(x, y0, alpha, basis)
        c = (1.0 / n) / phi.sum()
        for (i, j), p in zip(nodes, phi):
            key = (int(i) % PERIOD, int(j))
            f[key] = f.get(key, 0.0) + c * p
    nodes, phi = shape(xs[0], y0, alpha, basis)
    g = sum(p * f[(int(i) % PERIOD, int(j))] for (i, j), p in zip(nodes, phi))
    return 1.0 / g


if __name__ == "__main__":
    for basis in ("constant", "linear"):
        for y0, a in ((0.0, 2 / 3), (0.3, 2 / 3), (-0.45, 0.5), (0.25, 1.0)):
            print(f"{basis} Y0={y0} alpha={a:.17g} n=64 ratio={ratio(y0, a, basis, 64):.15g}")
    ys = np.linspace(-0.5, 0.5, 41)
    for basis in ("constant", "linear"):
        r = [ratio(y, 2 / 3, basis, 32) for y in ys]
        print(f"{basis} delta alpha=2/3 n=32 41 samples: {max(r) - min(r):.15g}")
    alphas = np.linspace(0.3, 1.2, 19)
    d = [np.ptp([ratio(y, a, "linear", 32) for y in ys]) for a in alphas]
    print("linear sweep argmin:", alphas[int(np.argmin(d))])
