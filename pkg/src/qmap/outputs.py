"""Artifact writers: CSV tables, fit JSON, gnuplot scripts.

Every file is written with LF newlines, sorted run-parameter headers and
floats at 17 significant digits, so identical runs produce byte-identical
artifacts.  CSV files open with `# key=value` comment lines echoing the
run parameters; f_curve.csv stacks one block per N, separated by double
blank lines for gnuplot's index convention.
"""

from __future__ import annotations

import json
import os

import numpy as np

from ._version import __version__
from .config import RunSpec


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def runspec_header(spec: RunSpec) -> list:
    lines = [f"# qmap {__version__}"]
    flat = []
    for key, value in spec.as_dict().items():
        if isinstance(value, dict):
            flat.extend((f"{key}.{sub}", v) for sub, v in value.items())
        else:
            flat.append((key, value))
    for key, value in sorted(flat):
        if isinstance(value, (list, tuple)):
            value = ",".join(format_value(v) for v in value)
        else:
            value = format_value(value) if value is not None else "none"
        lines.append(f"# {key}={value}")
    return lines


def write_csv(path: str, spec: RunSpec, columns, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in runspec_header(spec):
            fh.write(line + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(format_value(v) for v in row) + "\n")


def write_blocked_csv(path: str, spec: RunSpec, columns, blocks) -> None:
    """blocks: iterable of (label_line, rows); blocks separated by two blanks."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in runspec_header(spec):
            fh.write(line + "\n")
        fh.write(",".join(columns) + "\n")
        first = True
        for label, rows in blocks:
            if not first:
                fh.write("\n\n")
            first = False
            fh.write(f"# {label}\n")
            for row in rows:
                fh.write(",".join(format_value(v) for v in row) + "\n")


def spectrum_rows(traj) -> list:
    rows = []
    for g, r in enumerate(traj.r_grid):
        for level in range(traj.phases.shape[0]):
            rows.append((float(r), level, float(traj.phases[level, g])))
    return rows


def single_spectrum_rows(r: float, data) -> list:
    return [(float(r), level, float(phi))
            for level, phi in enumerate(data.phases)]


def write_spectrum_csv(path: str, spec: RunSpec, rows) -> None:
    write_csv(path, spec, ("r", "level", "eigenphase"), rows)


def write_shifts_csv(path: str, spec: RunSpec, stats) -> None:
    rows = [(s.N, s.h, s.mean_sq_spacing_units) for s in stats]
    write_csv(path, spec, ("N", "h", "mean_sq_shift_spacing_units"), rows)


def write_fit_json(path: str, spec: RunSpec, study) -> None:
    payload = {
        "qmap_version": __version__,
        "runspec": {k: list(v) if isinstance(v, tuple) else v
                    for k, v in spec.as_dict().items()},
        "data": {
            "N": [int(n) for n in study.N_values],
            "h": [float(h) for h in study.h_values],
            "mean_sq_shift_spacing_units": [float(y) for y in study.mean_sq],
        },
        "models": {
            name: {
                "params": {k: float(v) for k, v in fit.params.items()},
                "rss_log": float(fit.rss_log),
                "aic": float(fit.aic),
                "predicted": [float(p) for p in fit.predicted],
            }
            for name, fit in study.models.items()
        },
        "model": study.model,
        "d": study.d,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_ergodicity_csv(path: str, spec: RunSpec, reports) -> None:
    rows = [(rep.N, rep.variance, rep.F_infinity) for rep in reports]
    write_csv(path, spec, ("N", "variance", "F_infinity"), rows)


def write_f_curve_csv(path: str, spec: RunSpec, reports) -> None:
    blocks = [
        (f"N={rep.N}", [(float(T), float(F)) for T, F in rep.F_curve])
        for rep in reports
    ]
    write_blocked_csv(path, spec, ("T", "F"), blocks)


def write_correlator_csv(path: str, spec: RunSpec, times, classical,
                         quantum) -> None:
    rows = [(float(t), float(c), float(q))
            for t, c, q in zip(times, classical, quantum)]
    write_csv(path, spec, ("t", "C_classical", "f_quantum"), rows)


def write_classical_csv(path: str, spec: RunSpec, curve) -> None:
    rows = [(float(t), float(c), float(s))
            for t, c, s in zip(curve.times, curve.C, curve.stderr)]
    write_csv(path, spec, ("t", "C", "stderr"), rows)


_GP_SECTIONS = {
    "spectrum": [
        ("spectrum.png", [
            'set xlabel "r"',
            'set ylabel "eigenphase"',
            "plot 'spectrum.csv' using 1:3 with dots notitle",
        ]),
    ],
    "scaling": [
        ("shifts.png", [
            "set logscale xy",
            'set xlabel "h = 1/N"',
            'set ylabel "mean square shift (spacing units)"',
            "plot 'shifts.csv' using 2:3 with linespoints title 'measured'",
        ]),
    ],
    "ergodicity": [
        ("variance.png", [
            "set logscale xy",
            'set xlabel "N"',
            'set ylabel "variance"',
            "plot 'ergodicity.csv' using 1:2 with linespoints title 'variance',"
            " 'ergodicity.csv' using 1:3 with linespoints title 'F_infinity'",
        ]),
        ("f_curve.png", [
            "unset logscale",
            "set logscale x",
            'set xlabel "T"',
            'set ylabel "F(T)"',
            "plot for [i=0:*] 'f_curve.csv' index i using 1:2 with lines"
            " title sprintf('block %d', i)",
        ]),
        ("correlator.png", [
            "unset logscale",
            'set xlabel "t"',
            'set ylabel "autocorrelation"',
            "plot 'correlator.csv' using 1:2 with linespoints title 'classical',"
            " 'correlator.csv' using 1:3 with linespoints title 'quantum'",
        ]),
    ],
    "classical": [
        ("classical.png", [
            'set xlabel "t"',
            'set ylabel "C(t)"',
            "plot 'classical.csv' using 1:2:3 with yerrorlines title 'C(t)'",
        ]),
    ],
}
_GP_SECTIONS["sweep"] = _GP_SECTIONS["spectrum"]


def write_plot_script(path: str, command: str) -> None:
    """Emit a gnuplot script rendering this command's artifacts to PNGs."""
    lines = [
        f"# gnuplot script generated by qmap {__version__}",
        "set datafile separator comma",
        "set terminal pngcairo size 900,600",
        "set grid",
        "set key left top",
    ]
    for png, section in _GP_SECTIONS.get(command, []):
        lines.append("")
        lines.append(f"set output '{png}'")
        lines.extend(section)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def prepare_out_dir(out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)


def write_outputs(results: dict, spec: RunSpec) -> list:
    """Write every artifact for one finished run; returns the paths written.

    results carries the computed objects keyed by role; which keys are
    read depends on spec.command.  The gnuplot script is only produced
    when the run asked for it.
    """
    prepare_out_dir(spec.out_dir)
    written: list = []

    def target(name: str) -> str:
        path = os.path.join(spec.out_dir, name)
        written.append(path)
        return path

    cmd = spec.command
    if cmd == "classical":
        write_classical_csv(target("classical.csv"), spec, results["curve"])
    elif cmd == "spectrum":
        write_spectrum_csv(target("spectrum.csv"), spec,
                           single_spectrum_rows(spec.r, results["data"]))
    elif cmd == "sweep":
        write_spectrum_csv(target("spectrum.csv"), spec,
                           spectrum_rows(results["trajectories"]))
    elif cmd == "scaling":
        study = results["study"]
        write_shifts_csv(target("shifts.csv"), spec, study.per_N)
        write_fit_json(target("fit.json"), spec, study)
    elif cmd == "ergodicity":
        reports = results["reports"]
        write_ergodicity_csv(target("ergodicity.csv"), spec, reports)
        write_f_curve_csv(target("f_curve.csv"), spec, reports)
        if "f_quantum" in results:
            write_correlator_csv(target("correlator.csv"), spec,
                                 results["correlation_times"],
                                 results["C_classical"],
                                 results["f_quantum"])
    else:
        raise ValueError(f"write_outputs: unknown command {cmd!r}")

    if spec.emit_plot:
        write_plot_script(target("plots.gp"), cmd)
    return written
