"""Deterministic CSV emission: comma-separated, '.' decimal, LF endings,
mandatory header, floats at 17 significant digits."""

from __future__ import annotations

import hashlib

import numpy as np


def fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def write_csv(path, header, rows):
    """Write rows (iterables of numbers/strings) under a header list."""
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def sha256_of(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def timeseries_rows(series, observable_names):
    """Rows t, <observables...>, trace, leakage for a dynamics TimeSeries."""
    cols = [series.times] + [series.column(name) for name in observable_names]
    cols += [series.column("trace"), series.leakage]
    for k in range(len(series.times)):
        yield [float(c[k]) for c in cols]


def write_timeseries_csv(series, path, observable_names=None):
    """Emit a dynamics TimeSeries as t,<observables...>,trace,leakage."""
    if observable_names is None:
        observable_names = [k for k in series.records if k != "trace"]
    header = ["t"] + list(observable_names) + ["trace", "leakage"]
    write_csv(path, header, timeseries_rows(series, observable_names))


def write_spectrum_csv(series, path):
    """Emit a SpectrumSeries as omega,re,im (complex) or omega,absorption (real)."""
    if np.iscomplexobj(series.values):
        write_csv(path, ["omega", "re", "im"],
                  ([float(w), float(v.real), float(v.imag)]
                   for w, v in zip(series.omegas, series.values)))
    else:
        write_csv(path, ["omega", "absorption"],
                  ([float(w), float(v)] for w, v in zip(series.omegas, series.values)))
