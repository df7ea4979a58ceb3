"""Independent reference implementations the real code is checked against.

These stay deliberately naive: dense numpy matrices for the associative
algebra, raw-point scans for the query engine, plain tallies for rollups.
"""

from __future__ import annotations

from collections import defaultdict

import numpy as np


# -- dense associative-array oracle ---------------------------------------


def dense_accumulate(triples):
    """Accumulate triples into (row_keys, col_keys, matrix)."""
    rows = sorted({r for r, _, _ in triples})
    cols = sorted({c for _, c, _ in triples})
    ri = {r: i for i, r in enumerate(rows)}
    ci = {c: i for i, c in enumerate(cols)}
    m = np.zeros((len(rows), len(cols)))
    for r, c, v in triples:
        m[ri[r], ci[c]] += v
    return rows, cols, m


def dense_entries(rows, cols, m):
    """Nonzero entries of a dense matrix as a {(row, col): value} dict."""
    out = {}
    for i, r in enumerate(rows):
        for j, c in enumerate(cols):
            if m[i, j] != 0.0:
                out[(r, c)] = m[i, j]
    return out


def dense_add(a_triples, b_triples):
    triples = list(a_triples) + list(b_triples)
    return dense_entries(*dense_accumulate(triples))


def dense_matmul(a_triples, b_triples):
    a_rows, a_cols, a = dense_accumulate(a_triples)
    b_rows, b_cols, b = dense_accumulate(b_triples)
    shared = sorted(set(a_cols) | set(b_rows))
    a_full = np.zeros((len(a_rows), len(shared)))
    b_full = np.zeros((len(shared), len(b_cols)))
    for j, k in enumerate(shared):
        if k in a_cols:
            a_full[:, j] = a[:, a_cols.index(k)]
        if k in b_rows:
            b_full[j, :] = b[b_rows.index(k), :]
    return dense_entries(a_rows, b_cols, a_full @ b_full)


def scan_select(triples, row_sel, col_sel):
    """Linear scan over accumulated entries applying both selectors."""
    entries = dense_entries(*dense_accumulate(triples))

    def ok(key, sel):
        if sel is None:
            return True
        if isinstance(sel, tuple):
            return sel[0] <= key <= sel[1]
        return key in sel

    return {(r, c): v for (r, c), v in entries.items() if ok(r, row_sel) and ok(c, col_sel)}


# -- raw-point query oracle ------------------------------------------------


def dedup_points(points):
    """Replicate store overwrite semantics: last value per (series, ts) wins."""
    final = {}
    for tags, ts, v in points:
        final[(tuple(sorted(tags.items())), ts)] = (tags, ts, v)
    return sorted(final.values(), key=lambda p: (tuple(sorted(p[0].items())), p[1]))


def brute_mean(points, t0, t1, bucket_ns, group_tags):
    """MEAN per (group, epoch-aligned bucket) by scanning every raw point."""
    groups = defaultdict(list)
    for tags, ts, v in dedup_points(points):
        if t0 is not None and ts < t0:
            continue
        if t1 is not None and ts > t1:
            continue
        key = tuple(tags.get(t, "") for t in group_tags)
        if bucket_ns:
            b = ts - ts % bucket_ns
        else:
            b = t0 if t0 is not None else 0
        groups[(key, b)].append(v)
    return {kb: sum(vs) / len(vs) for kb, vs in groups.items()}


def brute_derivative(means, unit_ns):
    """Non-negative derivative over brute_mean output, per group."""
    per_group = defaultdict(list)
    for (key, b), v in means.items():
        per_group[key].append((b, v))
    out = {}
    for key, pts in per_group.items():
        pts.sort()
        for (ta, va), (tb, vb) in zip(pts, pts[1:]):
            rate = (vb - va) * unit_ns / (tb - ta)
            if rate >= 0:
                out[(key, tb)] = rate
    return out


def naive_rollup(statuses):
    """Plain tally over status dicts."""
    states = defaultdict(int)
    alerts = defaultdict(int)
    nodes = defaultdict(list)
    for s in statuses:
        states[s["state"]] += 1
        for kind in s["alerts"]:
            alerts[kind] += 1
            nodes[kind].append(s["node_id"])
    return dict(states), dict(alerts), {k: sorted(v) for k, v in nodes.items()}
