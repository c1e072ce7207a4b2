"""Slow, obviously-correct reference computations used only by the tests.

Nothing here imports from ``clid``; each function recomputes its quantity
from the textbook definition with plain loops.
"""

import itertools
import math

import numpy as np


def brute_knn(x, k, metric="euclidean"):
    """Full sort of all other rows by (distance, index)."""
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    if metric == "cosine":
        x = x / np.sqrt((x**2).sum(axis=1))[:, None]
    idx = np.empty((n, k), dtype=np.int64)
    dist = np.empty((n, k))
    for i in range(n):
        cands = []
        for j in range(n):
            if j == i:
                continue
            d2 = float(np.sum((x[j] - x[i]) ** 2))
            cands.append((d2 if metric == "cosine" else math.sqrt(d2), j))
        cands.sort()
        for c, (d, j) in enumerate(cands[:k]):
            idx[i, c] = j
            dist[i, c] = d
    return idx, dist


def kendall_pairs(x, y):
    """Tau-b by enumerating every pair."""
    c = d = tx = ty = 0
    for i, j in itertools.combinations(range(len(x)), 2):
        dx, dy = x[i] - x[j], y[i] - y[j]
        if dx == 0 and dy == 0:
            continue
        if dx == 0:
            tx += 1
        elif dy == 0:
            ty += 1
        elif (dx > 0) == (dy > 0):
            c += 1
        else:
            d += 1
    return (c - d) / math.sqrt((c + d + tx) * (c + d + ty))


def pearson_textbook(x, y):
    n = len(x)
    mx, my = math.fsum(x) / n, math.fsum(y) / n
    sxy = math.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = math.fsum((a - mx) ** 2 for a in x)
    syy = math.fsum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


def coding_rate_eig(x, eps_sq):
    """1/2 sum log(1 + m/(N eps^2) lambda) over eigenvalues of the N x N Gram."""
    x = np.asarray(x, dtype=np.float64)
    n, m = x.shape
    lam = np.linalg.eigvalsh(x @ x.T)
    return 0.5 * math.fsum(math.log1p(m / (n * eps_sq) * max(v, 0.0)) for v in lam)


def conditional_rate_eig(x, labels, eps_sq):
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    total = 0.0
    for lab in sorted(set(labels.tolist())):
        xj = x[labels == lab]
        total += xj.shape[0] / n * coding_rate_eig(xj, eps_sq)
    return total


def unit(x):
    x = np.asarray(x, dtype=np.float64)
    return x / np.sqrt((x**2).sum(axis=1))[:, None]


def uniformity_loop(x, t):
    z = unit(x)
    n = z.shape[0]
    vals = []
    for i in range(n):
        for j in range(i + 1, n):
            vals.append(math.exp(-t * float(np.sum((z[i] - z[j]) ** 2))))
    return math.log(math.fsum(vals) / len(vals))


def alignment_loop(a, b, alpha):
    za, zb = unit(a), unit(b)
    return math.fsum(float(np.sqrt(np.sum((za[i] - zb[i]) ** 2))) ** alpha for i in range(len(za))) / len(za)


def zero_intercept_slope(xs, ys):
    return math.fsum(a * b for a, b in zip(xs, ys)) / math.fsum(a * a for a in xs)


def adjusted_rand(a, b):
    """ARI from the contingency table."""
    a, b = np.asarray(a), np.asarray(b)
    n = a.size
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)

    def c2(v):
        return float(np.sum(v * (v - 1) / 2))

    index = c2(table)
    ea, eb = c2(table.sum(axis=1)), c2(table.sum(axis=0))
    expected = ea * eb / (n * (n - 1) / 2)
    top = 0.5 * (ea + eb)
    return 1.0 if top == expected else (index - expected) / (top - expected)


def knn_predict_loop(train, train_labels, test, k, metric="cosine"):
    if metric == "cosine":
        train, test = unit(train), unit(test)
    preds = []
    for q in test:
        d = [(float(np.sum((r - q) ** 2)), j) for j, r in enumerate(train)]
        d.sort()
        votes = {}
        for _, j in d[:k]:
            votes[train_labels[j]] = votes.get(train_labels[j], 0) + 1
        best = max(votes.values())
        preds.append(min(lab for lab, v in votes.items() if v == best))
    return np.array(preds)
