"""Plain-text emitters and importers for every data file the tools write.

Floats are written with ``repr`` so that ``read(write(x)) == x`` exactly.
Outcomes are bitstrings printed Q_n first.
"""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .errors import ParseError
from .statevec import Counts, ProbDist, format_outcome


def _rows(text):
    reader = csv.reader(io.StringIO(text))
    rows = [r for r in reader if r and not r[0].startswith("#")]
    if not rows:
        raise ParseError("empty file")
    return rows[0], rows[1:]


def _emit(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _read_text(source):
    if isinstance(source, Path):
        return source.read_text()
    return source


def _bitstrings(rows, label):
    try:
        lengths = {len(r[0]) for r in rows}
        ks = [int(r[0], 2) for r in rows]
    except (ValueError, IndexError) as exc:
        raise ParseError(f"{label}: bad outcome column") from exc
    if len(lengths) != 1:
        raise ParseError(f"{label}: outcomes have different lengths")
    return lengths.pop(), ks


# --- distributions ---------------------------------------------------------


def distribution_csv(dist):
    rows = [(format_outcome(k, dist.n_qubits), repr(float(v))) for k, v in enumerate(dist.p)]
    return _emit(["outcome", "probability"], rows)


def read_distribution_csv(source):
    header, rows = _rows(_read_text(source))
    if header[:2] != ["outcome", "probability"]:
        raise ParseError(f"expected header outcome,probability, got {header}")
    n, ks = _bitstrings(rows, "distribution")
    p = np.zeros(1 << n)
    try:
        for k, r in zip(ks, rows):
            p[k] = float(r[1])
    except (ValueError, IndexError) as exc:
        raise ParseError("distribution: bad probability column") from exc
    return ProbDist(n, p)


# --- counts ----------------------------------------------------------------


def counts_csv(counts):
    rows = [(format_outcome(k, counts.n_qubits), int(v)) for k, v in enumerate(counts.counts)
            if v]
    return f"# qubits {counts.n_qubits}\n" + _emit(["outcome", "count"], rows)


def read_counts_csv(source):
    text = _read_text(source)
    n = None
    for line in text.splitlines():
        if line.startswith("# qubits"):
            n = int(line.split()[2])
    header, rows = _rows(text)
    if header[:2] != ["outcome", "count"]:
        raise ParseError(f"expected header outcome,count, got {header}")
    if rows:
        m, ks = _bitstrings(rows, "counts")
        if n is not None and m != n:
            raise ParseError(f"counts: header says {n} qubits, outcomes have {m}")
        n = m
    if n is None:
        raise ParseError("counts: no outcomes and no '# qubits' header")
    c = np.zeros(1 << n, dtype=np.int64)
    try:
        for r in rows:
            c[int(r[0], 2)] += int(r[1])
    except (ValueError, IndexError) as exc:
        raise ParseError("counts: bad count column") from exc
    return Counts(n, c)


def read_outcome_file(source):
    """Counts or a distribution, whichever the header announces."""
    text = _read_text(source)
    header, _ = _rows(text)
    if header[:2] == ["outcome", "count"]:
        return read_counts_csv(text)
    return read_distribution_csv(text)


# --- fluctuation histograms ------------------------------------------------


def histogram_csv(study):
    rows = [(repr(lo), repr(hi), c) for lo, hi, c in study.histogram_rows()]
    return _emit(["bin_lo", "bin_hi", "count"], rows)


def read_histogram_csv(source):
    header, rows = _rows(_read_text(source))
    if header != ["bin_lo", "bin_hi", "count"]:
        raise ParseError(f"unexpected histogram header {header}")
    lo = [float(r[0]) for r in rows]
    hi = [float(r[1]) for r in rows]
    counts = np.array([int(r[2]) for r in rows], dtype=np.int64)
    return np.array(lo + hi[-1:]), counts


# --- generic tables --------------------------------------------------------


def table_csv(header, rows):
    return _emit(header, [[repr(v) if isinstance(v, float) else v for v in r] for r in rows])


def read_table_csv(source):
    """Header and rows; numeric cells come back as int or float."""
    header, rows = _rows(_read_text(source))

    def conv(v):
        for t in (int, float):
            try:
                return t(v)
            except ValueError:
                pass
        return v

    return header, [[conv(v) for v in r] for r in rows]


# --- structured reports ----------------------------------------------------


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def json_text(obj):
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


def read_json(source):
    try:
        return json.loads(_read_text(source))
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc


def write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path
