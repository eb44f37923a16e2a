"""Error-versus-size sweeps over a model family, with CSV and SVG output."""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field, fields

import numpy as np

from .bounds import bound_values
from .centrality import (DegenerateGapWarning, avg_l1_error, degree_centrality,
                         eigenvector_centrality, katz_centrality)
from .errors import CapacityError, DomainError
from .expectation import expected_adjacency
from .linalg import spectral_norm, top_two_eigenpairs
from .sampler import sample

VARIANTS = ("weighted", "unweighted")
CSV_COLUMNS = ("n", "trial", "variant", "status", "connected", "gap", "alpha", "delta",
               "norm_error", "degree_error", "eigen_error", "katz_error", "prop_bound")
NAN = math.nan


@dataclass
class SweepRecord:
    n: int
    trial: int
    variant: str
    status: str = "ok"
    connected: bool = False
    gap: float = NAN
    alpha: float = NAN
    delta: float = NAN
    norm_error: float = NAN
    degree_error: float = NAN
    eigen_error: float = NAN
    katz_error: float = NAN
    prop_bound: float = NAN
    # not serialized: sign-aligned distance between the two unit eigenvectors
    v1_distance: float = field(default=NAN, compare=False, repr=False)

    def row(self):
        out = []
        for name in CSV_COLUMNS:
            v = getattr(self, name)
            if isinstance(v, bool):
                out.append(str(int(v)))
            elif isinstance(v, float):
                out.append(repr(v))
            else:
                out.append(str(v))
        return out


def trial_seed(master_seed, n, trial):
    """Independent 64-bit sampler seed for one ``(n, trial)`` cell."""
    ss = np.random.SeedSequence([int(master_seed), int(n), int(trial)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def is_connected(a):
    n = a.shape[0]
    if n == 0:
        return True
    adj = a != 0
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    frontier = seen.copy()
    while frontier.any():
        nxt = adj[frontier].any(axis=0) & ~seen
        seen |= nxt
        frontier = nxt
    return bool(seen.all())


def _aligned_eigen(vec, ref):
    return vec if vec @ ref >= 0 else -vec


@dataclass
class _Reference:
    """Everything derived from the expected matrix of one variant."""
    matrix: np.ndarray
    delta: float
    gap: float = NAN
    lambda1: float = NAN
    alpha: float = NAN
    degree: object = None
    eigen: object = None
    katz: object = None


def _reference(expected, variant, alpha):
    e, delta = expected.for_variant(variant)
    ref = _Reference(e, delta)
    if delta <= 0:
        return ref
    e_bar = e / delta
    ref.matrix = e_bar
    top = top_two_eigenpairs(e_bar)
    ref.gap, ref.lambda1 = top.gap, top.lambda1
    ref.alpha = 1.0 / (2.0 * top.lambda1) if alpha == "auto" else float(alpha)
    ref.degree = degree_centrality(e_bar)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateGapWarning)
        ref.eigen = eigenvector_centrality(e_bar)
    ref.katz = katz_centrality(e_bar, ref.alpha, lambda1=top.lambda1)
    return ref


def _measure(record, a, ref):
    """Fill the error columns of ``record`` for realized matrix ``a``."""
    record.connected = is_connected(a)
    if ref.delta <= 0:
        # empty expected graph: nothing to normalize by
        record.status = "degenerate"
        record.norm_error = float(spectral_norm(a.astype(float)))
        record.degree_error = float(np.abs(a.sum(axis=1)).mean())
        return
    a_bar = a / ref.delta
    record.gap, record.alpha, record.delta = ref.gap, ref.alpha, ref.delta
    record.norm_error = spectral_norm(a_bar - ref.matrix)
    record.degree_error = avg_l1_error(degree_centrality(a_bar), ref.degree)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateGapWarning)
        eig = eigenvector_centrality(a_bar)
    values = _aligned_eigen(eig.values, ref.eigen.values)
    record.eigen_error = float(np.abs(values - ref.eigen.values).mean())
    record.v1_distance = float(np.linalg.norm(values - ref.eigen.values) / math.sqrt(len(values)))
    try:
        record.katz_error = avg_l1_error(katz_centrality(a_bar, ref.alpha), ref.katz)
    except DomainError:
        # realized lambda1 exceeds 1/alpha: the resolvent series diverges
        record.status = "katz_range"


def run_sweep(family, sizes, trials, epsilon=0.05, master_seed=0, alpha="auto", mu=None,
              budget=None):
    """One record per (n, trial, variant), sorted in that order.

    Expectations are computed once per size. ``mu`` defaults to the largest
    ``Delta_w / Delta_u`` over the sizes whose expectation was computable.
    """
    sizes = [int(n) for n in sizes]
    if sizes != sorted(sizes):
        raise DomainError("sizes must be ascending")
    if not 0 < epsilon < 1:
        raise DomainError(f"epsilon={epsilon} must lie in (0, 1)")
    if alpha != "auto" and not float(alpha) > 0:
        raise DomainError(f"alpha={alpha} must be positive")
    if trials <= 0:
        return []
    expectations = {}
    for n in sizes:
        try:
            kw = {} if budget is None else {"budget": budget}
            expectations[n] = expected_adjacency(family.at(n), **kw)
        except CapacityError as exc:
            expectations[n] = exc
    if mu is None:
        ratios = [e.delta_weighted / e.delta_unweighted for e in expectations.values()
                  if not isinstance(e, Exception) and e.delta_unweighted > 0]
        mu = max(ratios, default=1.0)
    m = family.max_size
    records = []
    for n in sizes:
        expected = expectations[n]
        if isinstance(expected, Exception):
            records += [SweepRecord(n, t, v, status="capacity")
                        for t in range(trials) for v in VARIANTS]
            continue
        spec = family.at(n)
        refs = {v: _reference(expected, v, alpha) for v in VARIANTS}
        prop1, prop2, _ = bound_values(n, m, epsilon, expected.delta_weighted,
                                       expected.delta_unweighted, mu)
        for t in range(trials):
            try:
                real = sample(spec, trial_seed(master_seed, n, t))
            except CapacityError:
                records += [SweepRecord(n, t, v, status="capacity") for v in VARIANTS]
                continue
            for v in VARIANTS:
                rec = SweepRecord(n, t, v, prop_bound=prop1 if v == "weighted" else prop2)
                a = real.weighted if v == "weighted" else real.unweighted
                _measure(rec, a.astype(float), refs[v])
                records.append(rec)
    return records


def emit_csv(records, path):
    """Write records under the fixed header; ``path`` may be an open text stream."""
    if hasattr(path, "write"):
        _write_rows(records, path)
        return
    with open(path, "w", newline="") as fh:
        _write_rows(records, fh)


def _write_rows(records, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.row())


def read_csv(path):
    types = {f.name: f.type for f in fields(SweepRecord)}
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise DomainError(f"{path}: unexpected header {reader.fieldnames}")
        for row in reader:
            kw = {}
            for name, raw in row.items():
                kind = types[name]
                if kind == "int":
                    kw[name] = int(raw)
                elif kind == "bool":
                    kw[name] = raw == "1"
                elif kind == "float":
                    kw[name] = float(raw)
                else:
                    kw[name] = raw
            out.append(SweepRecord(**kw))
    return out


ERROR_KINDS = ("norm_error", "degree_error", "eigen_error", "katz_error")
_COLORS = {"norm_error": "#1f77b4", "degree_error": "#2ca02c",
           "eigen_error": "#d62728", "katz_error": "#9467bd"}


def trial_means(records):
    """``{(variant, kind): [(n, mean), ...]}`` over finite, positive values."""
    sums = {}
    for r in records:
        for kind in ERROR_KINDS:
            v = getattr(r, kind)
            if math.isfinite(v) and v > 0:
                s = sums.setdefault((r.variant, kind), {}).setdefault(r.n, [0.0, 0])
                s[0] += v
                s[1] += 1
    return {key: [(n, s / c) for n, (s, c) in sorted(per_n.items())]
            for key, per_n in sorted(sums.items())}


def emit_plot(records, path, width=640, height=480):
    """Static log-log SVG of trial-averaged errors against n."""
    if not records:
        raise DomainError("cannot plot an empty record list")
    series = trial_means(records)
    pts = [p for s in series.values() for p in s]
    if not pts:
        raise DomainError("no positive finite errors to plot")
    lx = [math.log10(n) for n, _ in pts]
    ly = [math.log10(y) for _, y in pts]
    x0, x1 = min(lx), max(lx)
    y0, y1 = min(ly), max(ly)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    left, right, top, bottom = 70, 170, 20, 50
    pw, ph = width - left - right, height - top - bottom

    def sx(n):
        return left + (math.log10(n) - x0) / (x1 - x0) * pw

    def sy(y):
        return top + (y1 - math.log10(y)) / (y1 - y0) * ph

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">',
             '<rect width="100%" height="100%" fill="white"/>',
             f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for e in range(math.ceil(x0), math.floor(x1) + 1):
        x = sx(10.0**e)
        parts.append(f'<text x="{x:.2f}" y="{top + ph + 18}" font-size="11" '
                     f'text-anchor="middle">1e{e}</text>')
    for e in range(math.ceil(y0), math.floor(y1) + 1):
        y = sy(10.0**e)
        parts.append(f'<line x1="{left}" y1="{y:.2f}" x2="{left + pw}" y2="{y:.2f}" '
                     f'stroke="#ddd"/>')
        parts.append(f'<text x="{left - 6}" y="{y + 4:.2f}" font-size="11" '
                     f'text-anchor="end">1e{e}</text>')
    parts.append(f'<text x="{left + pw / 2}" y="{height - 10}" font-size="12" '
                 f'text-anchor="middle">n (log scale)</text>')
    parts.append(f'<text x="15" y="{top + ph / 2}" font-size="12" text-anchor="middle" '
                 f'transform="rotate(-90 15 {top + ph / 2})">mean error (log scale)</text>')
    for i, ((variant, kind), s) in enumerate(series.items()):
        dash = "" if variant == "weighted" else ' stroke-dasharray="5,3"'
        coords = " ".join(f"{sx(n):.2f},{sy(y):.2f}" for n, y in s)
        parts.append(f'<polyline data-variant="{variant}" data-kind="{kind}" fill="none" '
                     f'stroke="{_COLORS[kind]}" stroke-width="1.5"{dash} points="{coords}"/>')
        ly_ = top + 14 * i + 10
        parts.append(f'<line x1="{left + pw + 10}" y1="{ly_}" x2="{left + pw + 30}" y2="{ly_}" '
                     f'stroke="{_COLORS[kind]}"{dash}/>')
        parts.append(f'<text x="{left + pw + 34}" y="{ly_ + 4}" font-size="10">'
                     f'{kind.replace("_error", "")} ({variant[0]})</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
