"""Plain-text file formats: surfaces, current loops, convergence reports.

All floating-point values are written with 17 significant digits so that
load(save(x)) round-trips exactly.  Writers are deterministic: identical
inputs produce byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .geom import FourierSurface
from .kernels import CurrentLoop


class ParseError(ValueError):
    def __init__(self, path, lineno, message):
        super().__init__(f"{path}:{lineno}: {message}")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _data_lines(path):
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield lineno, line


def save_surface(surface: FourierSurface, path):
    lines = [f"nfp {surface.nfp}"]
    for m, n, rc, rs, zc, zs in surface.modes:
        lines.append(
            f"{int(m)} {int(n)} {_fmt(rc)} {_fmt(zs)} {_fmt(rs)} {_fmt(zc)}"
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_surface(path) -> FourierSurface:
    """Parse a surface file: `nfp <int>` then `m n rc zs rs zc` per mode."""
    nfp = None
    modes = []
    for lineno, line in _data_lines(path):
        tok = line.split()
        if nfp is None:
            if tok[0] != "nfp" or len(tok) != 2:
                raise ParseError(path, lineno, "expected header 'nfp <int>'")
            try:
                nfp = int(tok[1])
            except ValueError:
                raise ParseError(path, lineno, f"bad nfp value {tok[1]!r}") from None
            if nfp <= 0:
                raise ParseError(path, lineno, f"nfp must be positive, got {nfp}")
            continue
        if len(tok) != 6:
            raise ParseError(path, lineno, f"expected 6 fields 'm n rc zs rs zc', got {len(tok)}")
        try:
            m, n = int(tok[0]), int(tok[1])
            rc, zs, rs, zc = (float(t) for t in tok[2:])
        except ValueError:
            raise ParseError(path, lineno, f"bad mode line {line!r}") from None
        modes.append((m, n, rc, rs, zc, zs))
    if nfp is None:
        raise ParseError(path, 0, "empty surface file")
    if not modes:
        raise ParseError(path, 0, "surface file has no modes")
    return FourierSurface(nfp, np.array(modes, dtype=float)).oriented()


def save_loop(loop: CurrentLoop, path):
    lines = [f"current {_fmt(loop.current)}"]
    for row in loop.coeffs:
        lines.append(f"{int(row[0])} " + " ".join(_fmt(x) for x in row[1:]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_loop(path) -> CurrentLoop:
    """Parse a loop file: `current <float>` then `k xc xs yc ys zc zs`."""
    current = None
    rows = []
    for lineno, line in _data_lines(path):
        tok = line.split()
        if current is None:
            if tok[0] != "current" or len(tok) != 2:
                raise ParseError(path, lineno, "expected header 'current <float>'")
            try:
                current = float(tok[1])
            except ValueError:
                raise ParseError(path, lineno, f"bad current value {tok[1]!r}") from None
            continue
        if len(tok) != 7:
            raise ParseError(path, lineno, "expected 7 fields 'k xc xs yc ys zc zs'")
        try:
            rows.append([int(tok[0])] + [float(t) for t in tok[1:]])
        except ValueError:
            raise ParseError(path, lineno, f"bad mode line {line!r}") from None
    if current is None:
        raise ParseError(path, 0, "empty loop file")
    if not rows:
        raise ParseError(path, 0, "loop file has no modes")
    return CurrentLoop(np.array(rows, dtype=float), current)


@dataclass
class ConvergenceReport:
    """Rows of (Nu, Nv, tol, iterations, error) plus a fitted order.

    ``fitted_order`` is the least-squares slope of log error against
    log sqrt(N) over the last (up to) four rows, sign-flipped so that
    second-order decay reports ~2.  None when fewer than two rows carry
    positive errors.
    """

    rows: list = field(default_factory=list)  # (Nu, Nv, tol|None, iters|None, error)
    scheme: str = ""
    surface: str = ""
    config: dict = field(default_factory=dict)

    def add_row(self, Nu, Nv, error, tol=None, iterations=None):
        self.rows.append((int(Nu), int(Nv), tol, iterations, float(error)))
        self.rows.sort(key=lambda r: r[0] * r[1])

    @property
    def fitted_order(self):
        rows = [r for r in self.rows if r[4] > 0][-4:]
        if len(rows) < 2:
            return None
        logn = np.log([np.sqrt(r[0] * r[1]) for r in rows])
        loge = np.log([r[4] for r in rows])
        slope = np.polyfit(logn, loge, 1)[0]
        return float(-slope)


def write_report(report: ConvergenceReport, path, fmt: str = "csv"):
    """Write a report as csv, json, or gnuplot `N error` pairs."""
    if fmt == "csv":
        lines = ["Nu,Nv,tol,iters,error"]
        for Nu, Nv, tol, iters, err in report.rows:
            tol_s = _fmt(tol) if tol is not None else ""
            it_s = str(iters) if iters is not None else ""
            lines.append(f"{Nu},{Nv},{tol_s},{it_s},{_fmt(err)}")
        text = "\n".join(lines) + "\n"
    elif fmt == "json":
        obj = {
            "scheme": report.scheme,
            "surface": report.surface,
            "config": report.config,
            "fitted_order": report.fitted_order,
            "rows": [
                {"Nu": Nu, "Nv": Nv, "tol": tol, "iters": iters, "error": err}
                for Nu, Nv, tol, iters, err in report.rows
            ],
        }
        text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    elif fmt == "gnuplot":
        lines = [f"# {report.scheme} {report.surface}".rstrip()]
        for Nu, Nv, _, _, err in report.rows:
            lines.append(f"{Nu * Nv} {_fmt(err)}")
        text = "\n".join(lines) + "\n"
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    with open(path, "w") as fh:
        fh.write(text)


def read_report_json(path) -> ConvergenceReport:
    with open(path) as fh:
        obj = json.load(fh)
    rep = ConvergenceReport(scheme=obj["scheme"], surface=obj["surface"],
                            config=obj["config"])
    for row in obj["rows"]:
        rep.add_row(row["Nu"], row["Nv"], row["error"], row["tol"], row["iters"])
    return rep
