"""CSV writers for the experiment reports."""

import csv
import sys

CONVERGENCE_COLUMNS = ["level", "h", "N", "quad", "formulation", "l2_total", "linf_total", "rate_l2",
                       "wall_seconds"]


def _fmt(x):
    if isinstance(x, float):
        return "nan" if x != x else f"{x:.10g}"
    return str(x)


def _open(path):
    return open(path, "w", newline="") if path else sys.stdout


def convergence_rows(report):
    cfg = report.config
    fields = report.fields()
    header = CONVERGENCE_COLUMNS + [f"l2_{f}" for f in fields] + [f"linf_{f}" for f in fields]
    rows = []
    for lv in report.levels:
        rows.append([lv.level, lv.h, cfg.N, cfg.quad, cfg.formulation, lv.l2_total, lv.linf_total,
                     lv.rate, lv.wall] + [float(x) for x in lv.l2] + [float(x) for x in lv.linf])
    return header, rows


def write_rows(path, header, rows, comments=()):
    fh = _open(path)
    try:
        for c in comments:
            fh.write(f"# {c}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(x) for x in r])
    finally:
        if fh is not sys.stdout:
            fh.close()


def write_convergence(report, path=None):
    header, rows = convergence_rows(report)
    write_rows(path, header, rows)


def write_entropy(results, path=None, seed=None):
    header = ["dim", "N", "quad", "formulation", "entropy", "relative", "wall_seconds"]
    rows = [[r.dim, r.N, r.quad, r.formulation, r.entropy, r.relative, r.wall] for r in results]
    write_rows(path, header, rows, comments=[f"seed={seed}"])


def write_metric(results, path=None):
    header = ["approach", "n_geo", "h", "l2", "rate_l2"]
    rows = [[r.approach, r.n_geo, r.h, r.l2, r.rate] for r in results]
    write_rows(path, header, rows)


def read_rows(path):
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))
