"""Independent brute-force oracles, transcribed directly from the defining
formulas with explicit loops. Deliberately kept separate from the package
implementations so each metric has two routes."""

import math


def pearson_oracle(xs, ys):
    n = len(xs)
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    num = 0.0
    ssx = 0.0
    ssy = 0.0
    for x, y in zip(xs, ys):
        num += (x - mean_x) * (y - mean_y)
        ssx += (x - mean_x) ** 2
        ssy += (y - mean_y) ** 2
    return num / math.sqrt(ssx * ssy)


def fisher_ci_oracle(r, n, zcrit=1.959963984540054):
    z = math.atanh(r)
    half = zcrit / math.sqrt(n - 3)
    return math.tanh(z - half), math.tanh(z + half)


def icc21_oracle(table):
    """ICC(2,1) from the two-way ANOVA sums, written out longhand."""
    n = len(table)
    k = len(table[0])
    grand = sum(sum(row) for row in table) / (n * k)
    row_means = [sum(row) / k for row in table]
    col_means = [sum(table[i][j] for i in range(n)) / n for j in range(k)]
    ss_total = sum((table[i][j] - grand) ** 2 for i in range(n) for j in range(k))
    ss_rows = k * sum((rm - grand) ** 2 for rm in row_means)
    ss_cols = n * sum((cm - grand) ** 2 for cm in col_means)
    ss_err = ss_total - ss_rows - ss_cols
    msr = ss_rows / (n - 1)
    msc = ss_cols / (k - 1)
    mse = ss_err / ((n - 1) * (k - 1))
    return (msr - mse) / (msr + (k - 1) * mse + k * (msc - mse) / n)


def r_squared_oracle(pred, actual):
    n = len(actual)
    mean_a = sum(actual) / n
    ss_res = sum((p - a) ** 2 for p, a in zip(pred, actual))
    ss_tot = sum((a - mean_a) ** 2 for a in actual)
    return 1 - ss_res / ss_tot


def mape_oracle(pred, actual):
    return sum(abs(p - a) / abs(a) for p, a in zip(pred, actual)) / len(actual) * 100


def bin_oracle(score, edges, labels):
    """edges = [e0, e1, ..., em] with classes [e_i, e_{i+1}), last closed."""
    for i in range(len(labels) - 1):
        if edges[i] <= score < edges[i + 1]:
            return labels[i]
    if edges[-2] <= score <= edges[-1]:
        return labels[-1]
    raise ValueError(score)


def confusion_oracle(pred, actual, edges, labels):
    size = len(labels)
    counts = [[0] * size for _ in range(size)]
    for p, a in zip(pred, actual):
        i = labels.index(bin_oracle(a, edges, labels))
        j = labels.index(bin_oracle(p, edges, labels))
        counts[i][j] += 1
    return counts


def accuracy_oracle(counts):
    trace = sum(counts[i][i] for i in range(len(counts)))
    total = sum(sum(row) for row in counts)
    return 100.0 * trace / total


SCHEME_EDGES = {
    "M1": ([0, 58, 100], ["Low", "High"]),
    "M2": ([0, 36, 58, 100], ["Low", "Medium", "High"]),
    "M3": ([0, 36, 58, 72, 100], ["Low", "Medium", "MediumHigh", "High"]),
    "M4": ([0, 16, 36, 58, 72, 100], ["VeryLow", "Low", "Medium", "MediumHigh", "High"]),
    "M5": ([0, 16, 36, 58, 72, 90, 100],
           ["VeryLow", "Low", "Medium", "MediumHigh", "High", "VeryHigh"]),
}


def correlated_series(r, n, rng):
    """Two series whose sample Pearson correlation is exactly r (fp-exact
    Gram-Schmidt construction)."""
    import numpy as np

    x = rng.normal(size=n)
    z = rng.normal(size=n)
    x = (x - x.mean()) / x.std()
    z = z - z.mean()
    z = z - (z @ x) / (x @ x) * x  # orthogonalize
    z = z / z.std()
    y = r * x + math.sqrt(1 - r * r) * z
    return x, y
