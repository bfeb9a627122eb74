"""Batch front-end: JSON scenario files in, CSV or JSON results out.

Scenario files carry a "kind" discriminator (uncoded, multilegacy, coded,
mimo). Numeric parameters may be given in dB by suffixing the key with
"_db"; conversion to linear happens once at load and unknown keys are
rejected. Commands:

    specshape rate-curve  scenario.json -o out.csv
    specshape prelog-mesh scenario.json -o out.csv
    specshape solve       scenario.json -o out.json

Exit codes: 0 success, 2 input error, 3 infeasible scenario, 4 solver
non-convergence. Output files are written only after the computation
succeeds, with fixed 12-significant-digit formatting so identical inputs
produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import coded as coded_mod
from . import mimo as mimo_mod
from . import multilegacy as multi_mod
from . import shaping
from .errors import InfeasibleScenarioError, SolverError
from .estimation import UncodedScenario
from .spectra import (FrequencyGrid, Spectrum, ar1_spectrum, flat_spectrum,
                      make_grid, mean_power, tabulated_spectrum)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_SOLVER = 4

_KINDS = ("uncoded", "multilegacy", "coded", "mimo")


class SchemaError(ValueError):
    """Scenario file violates the expected schema."""


def db_to_linear(x: float) -> float:
    return 10.0 ** (x / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0:
        raise ValueError("dB undefined for non-positive values")
    return 10.0 * math.log10(x)


def _fmt(x: float) -> str:
    return f"{float(x):.12g}"


def _round12(obj):
    """Round floats to 12 significant digits, recursively."""
    if isinstance(obj, float):
        return float(_fmt(obj))
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    return obj


class _Params:
    """Strict key extraction with one-shot dB conversion."""

    def __init__(self, doc: dict, context: str):
        if not isinstance(doc, dict):
            raise SchemaError(f"{context}: expected a JSON object")
        self._doc = dict(doc)
        self._ctx = context

    def value(self, name: str, required: bool = True, default=None):
        has_lin, has_db = name in self._doc, f"{name}_db" in self._doc
        if has_lin and has_db:
            raise SchemaError(f"{self._ctx}: give either {name} or {name}_db, not both")
        if has_lin:
            v = self._doc.pop(name)
        elif has_db:
            v = db_to_linear(self._number(f"{name}_db", self._doc.pop(f"{name}_db")))
        elif required:
            raise SchemaError(f"{self._ctx}: missing required parameter {name}")
        else:
            return default
        return self._number(name, v)

    def raw(self, name: str, required: bool = True, default=None):
        if name in self._doc:
            return self._doc.pop(name)
        if required:
            raise SchemaError(f"{self._ctx}: missing required key {name}")
        return default

    def has(self, name: str) -> bool:
        return name in self._doc or f"{name}_db" in self._doc

    def finish(self):
        if self._doc:
            raise SchemaError(f"{self._ctx}: unknown keys {sorted(self._doc)}")

    def _number(self, name, v) -> float:
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise SchemaError(f"{self._ctx}: {name} must be a number")
        return float(v)


def _load_doc(path: str) -> dict:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: malformed JSON ({e})") from e
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: top level must be a JSON object")
    return doc


def _kind(p: _Params) -> str:
    kind = p.raw("kind")
    if kind not in _KINDS:
        raise SchemaError(f"unknown kind {kind!r}; expected one of {_KINDS}")
    return kind


def _legacy_spectrum(p: _Params, grid: FrequencyGrid, name="sigma2_s") -> Spectrum:
    values = p.raw("phi_s_values", required=False)
    eps = p.raw("epsilon", required=False)
    if values is not None:
        if eps is not None:
            raise SchemaError("give either epsilon or phi_s_values, not both")
        return tabulated_spectrum(grid, np.asarray(values, dtype=float))
    variance = p.value(name)
    if eps is not None:
        return ar1_spectrum(grid, variance, float(eps))
    return flat_spectrum(grid, variance)


def _power_sweep(p: _Params) -> tuple[np.ndarray, np.ndarray]:
    sw = _Params(p.raw("power_sweep_db"), "power_sweep_db")
    start = sw.raw("start")
    stop = sw.raw("stop")
    points = sw.raw("points")
    sw.finish()
    for name, v in (("start", start), ("stop", stop)):
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise SchemaError(f"power_sweep_db.{name} must be a number (dB)")
    if not isinstance(points, int) or isinstance(points, bool) or points < 0:
        raise SchemaError("power_sweep_db.points must be a nonnegative integer")
    db = np.linspace(float(start), float(stop), points)
    return db, 10.0 ** (db / 10.0)


def _uncoded_scenario(p: _Params, grid: FrequencyGrid, P: float = 1.0) -> UncodedScenario:
    phi_s = _legacy_spectrum(p, grid)
    noise_values = p.raw("phi_n_values", required=False)
    if noise_values is not None:
        phi_n = tabulated_spectrum(grid, np.asarray(noise_values, dtype=float))
    else:
        phi_n = flat_spectrum(grid, p.value("sigma2_n"))
    return UncodedScenario(a=p.value("a"), phi_s=phi_s, phi_n=phi_n,
                           D=p.value("D"), P=P)


def _coded_scenario(p: _Params, P: float) -> coded_mod.CodedScenario:
    a_l = p.value("a_l")
    sigma2_s = p.value("sigma2_s")
    sigma2_nl = p.value("sigma2_nl")
    R_l = _legacy_rate_value(p, a_l, sigma2_s, sigma2_nl)
    return coded_mod.CodedScenario(
        a_l=a_l, g_l=p.value("g_l"), a_c=p.value("a_c"), g_c=p.value("g_c"),
        sigma2_s=sigma2_s, sigma2_nl=sigma2_nl, sigma2_nc=p.value("sigma2_nc"),
        R_l=R_l, P=P)


def _legacy_rate_value(p: _Params, a_l: float, sigma2_s: float, sigma2_nl: float) -> float:
    has_load = "legacy_load" in p._doc
    has_rate = p.has("R_l")
    if has_load == has_rate:
        raise SchemaError("give exactly one of legacy_load or R_l (R_l in nats)")
    if has_load:
        load = p.raw("legacy_load")
        if not isinstance(load, (int, float)) or isinstance(load, bool):
            raise SchemaError("legacy_load must be a number")
        return float(load) * math.log1p(a_l * sigma2_s / sigma2_nl)
    return p.value("R_l")


def _complex_array(raw, name: str, ndim: int) -> np.ndarray:
    """Real nested lists of the expected depth, or one extra trailing level of
    [re, im] pairs for complex entries."""
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as e:
        raise SchemaError(f"{name}: not a rectangular numeric array ({e})") from e
    if arr.ndim == ndim:
        return arr.astype(complex)
    if arr.ndim == ndim + 1 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    raise SchemaError(
        f"{name}: expected a rank-{ndim} real array or rank-{ndim} array of [re, im] pairs")


def _mimo_channel(p: _Params) -> mimo_mod.MimoChannel:
    H_c = _complex_array(p.raw("H_c"), "H_c", ndim=2)
    h_l = _complex_array(p.raw("h_l"), "h_l", ndim=1)
    h_c = _complex_array(p.raw("h_c"), "h_c", ndim=1)
    a_l = p.value("a_l")
    sigma2_s = p.value("sigma2_s")
    sigma2_nl = p.value("sigma2_nl")
    R_l = _legacy_rate_value(p, a_l, sigma2_s, sigma2_nl)
    return mimo_mod.MimoChannel(
        H_c=H_c, h_l=h_l, h_c=h_c,
        a_l=a_l, g_l=p.value("g_l"), a_c=p.value("a_c"), g_c=p.value("g_c"),
        sigma2_s=sigma2_s, sigma2_nl=sigma2_nl, sigma2_nc=p.value("sigma2_nc"),
        R_l=R_l)


def _multilegacy_scenario(p: _Params, grid: FrequencyGrid) -> multi_mod.MultiLegacyScenario:
    spec_p = _Params(p.raw("spectrum"), "spectrum")
    kind = spec_p.raw("type")
    if kind == "flat":
        phi_s = flat_spectrum(grid, spec_p.value("sigma2_s"))
    elif kind == "ar1":
        phi_s = ar1_spectrum(grid, spec_p.value("sigma2_s"), float(spec_p.raw("epsilon")))
    elif kind == "tabulated":
        phi_s = tabulated_spectrum(grid, np.asarray(spec_p.raw("values"), dtype=float))
    else:
        raise SchemaError(f"spectrum.type must be flat, ar1 or tabulated, not {kind!r}")
    spec_p.finish()
    rec_list = p.raw("receivers")
    if not isinstance(rec_list, list) or not rec_list:
        raise SchemaError("receivers must be a non-empty list")
    receivers = []
    for i, rdoc in enumerate(rec_list):
        rp = _Params(rdoc, f"receivers[{i}]")
        receivers.append(multi_mod.LegacyReceiver(
            a=rp.value("a"),
            phi_n=flat_spectrum(grid, rp.value("sigma2_n")),
            D=rp.value("D"),
            g=rp.value("g", required=False, default=1.0)))
        rp.finish()
    sc = multi_mod.MultiLegacyScenario(
        phi_s=phi_s, receivers=tuple(receivers),
        a0=p.value("a0", required=False, default=1.0),
        g0=p.value("g0", required=False, default=1.0))
    return sc


def _rate_factor(log_base: str) -> float:
    return 1.0 if log_base == "e" else 1.0 / math.log(2.0)


def _write_csv(path: str, header: list[str], rows: list[list[str]]):
    lines = [",".join(header)] + [",".join(r) for r in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def _write_json(path: str, payload: dict):
    Path(path).write_text(json.dumps(_round12(payload), indent=2, sort_keys=True) + "\n")


def run_rate_curve(file: str, output_path: str, grid_points: int = 4096,
                   log_base: str = "e", quiet: bool = False) -> None:
    """Rate-versus-power CSV for an uncoded or coded scenario."""
    doc = _load_doc(file)
    p = _Params(doc, file)
    kind = _kind(p)
    factor = _rate_factor(log_base)

    if kind == "uncoded":
        db_axis, powers = _power_sweep(p)
        grid = make_grid(grid_points)
        sc = _uncoded_scenario(p, grid)
        p.finish()
        shaped = shaping.rate_curve(sc, powers, shaping.CurveMethod.SPECTRUM_SHAPING)
        try:
            it = shaping.rate_curve(sc, powers, shaping.CurveMethod.INTERFERENCE_TEMPERATURE)
            it_rates = [r for _, r in it]
        except InfeasibleScenarioError:
            it_rates = [math.nan] * len(powers)
        rows = [[_fmt(db), _fmt(r_it * factor), _fmt(r_sh * factor)]
                for db, r_it, (_, r_sh) in zip(db_axis, it_rates, shaped)]
        _write_csv(output_path, ["P_db", "rate_it", "rate_shaping"], rows)
    elif kind == "coded":
        db_axis, powers = _power_sweep(p)
        sc0 = _coded_scenario(p, P=1.0)
        p.finish()
        rows = []
        for db, pw in zip(db_axis, powers):
            sol = coded_mod.solve_coded(replace(sc0, P=pw))
            rows.append([_fmt(db), _fmt(sol.rate * factor), sol.case_tag.value])
        _write_csv(output_path, ["P_db", "rate", "case_tag"], rows)
    else:
        raise SchemaError("rate-curve requires an uncoded or coded scenario")
    if not quiet:
        print(f"wrote {len(rows)} rows to {output_path}", file=sys.stderr)


def run_prelog_mesh(file: str, output_path: str, grid_points: int = 4096,
                    log_base: str = "e", quiet: bool = False) -> None:
    """High-power prelog over a (D/sigma2_s, a*sigma2_s/sigma2_n) mesh.

    Prelogs are slope ratios, so the log base does not enter; infeasible
    cells emit prelog 0.
    """
    doc = _load_doc(file)
    p = _Params(doc, file)
    if _kind(p) != "uncoded":
        raise SchemaError("prelog-mesh requires an uncoded scenario")
    mesh = _Params(p.raw("mesh"), "mesh")
    d_ratios = mesh.raw("d_ratio")
    snr_dbs = mesh.raw("snr_db")
    mesh.finish()
    for name, axis in (("d_ratio", d_ratios), ("snr_db", snr_dbs)):
        if not isinstance(axis, list) or not axis:
            raise SchemaError(f"mesh.{name} must be a non-empty list")
    grid = make_grid(grid_points)
    phi_s = _legacy_spectrum(p, grid)
    sigma2_n = p.value("sigma2_n")
    p.finish()
    sigma2_s = mean_power(phi_s)
    phi_n = flat_spectrum(grid, sigma2_n)

    rows = []
    for d_ratio in d_ratios:
        for snr_db in snr_dbs:
            a = db_to_linear(float(snr_db)) * sigma2_n / sigma2_s
            sc = UncodedScenario(a=a, phi_s=phi_s, phi_n=phi_n,
                                 D=float(d_ratio) * sigma2_s, P=1.0)
            prelog = shaping.onoff_prelog(sc).prelog
            rows.append([_fmt(d_ratio), _fmt(snr_db), _fmt(prelog)])
    _write_csv(output_path, ["d_ratio", "snr_db", "prelog"], rows)
    if not quiet:
        print(f"wrote {len(rows)} rows to {output_path}", file=sys.stderr)


def _solve_uncoded(p: _Params, grid_points: int, factor: float) -> dict:
    grid = make_grid(grid_points)
    P = p.value("P")
    sc = _uncoded_scenario(p, grid, P=P)
    p.finish()
    sol = shaping.solve(sc)
    if sol.case_tag is shaping.CaseTag.INFEASIBLE:
        raise InfeasibleScenarioError(
            "distortion target below the zero-transmission smoothing floor")
    prelog = shaping.onoff_prelog(sc)
    return {
        "kind": "uncoded",
        "case_tag": sol.case_tag.value,
        "rate": sol.rate * factor,
        "mse": sol.mse,
        "power": sol.power,
        "lambda": sol.lam,
        "mu": sol.mu,
        "prelog": prelog.prelog,
        "gamma": prelog.gamma,
        "omega": list(grid.omegas),
        "phi_x": list(sol.phi_x.values),
    }


def _solve_multilegacy(p: _Params, grid_points: int) -> dict:
    grid = make_grid(grid_points)
    sc = _multilegacy_scenario(p, grid)
    p.finish()
    res = multi_mod.max_prelog_support(sc)
    low_noise = multi_mod.low_noise_support(sc)
    return {
        "kind": "multilegacy",
        "prelog": res.prelog,
        "support_fraction": res.support_fraction,
        "support": [int(b) for b in res.support],
        "budgets": list(res.budgets),
        "spent": list(res.spent),
        "low_noise_support_fraction":
            float(grid.weights[low_noise].sum()) / math.pi,
    }


def _solve_coded(p: _Params, factor: float) -> dict:
    sc = _coded_scenario(p, P=p.value("P"))
    p.finish()
    sol = coded_mod.solve_coded(sc)
    return {
        "kind": "coded",
        "case_tag": sol.case_tag.value,
        "w": sol.w,
        "phi0": sol.phi0,
        "rate": sol.rate * factor,
        "prelog": coded_mod.coded_prelog(sc),
        "residuals": dict(sol.residuals),
    }


def _solve_mimo(p: _Params, grid_points: int, factor: float) -> dict:
    P = p.value("P")
    ch = _mimo_channel(p)
    p.finish()
    sol = mimo_mod.solve_mimo(ch, P, grid=make_grid(grid_points))
    on_cells = np.abs(sol.psd.values).sum(axis=(1, 2)) > 0
    first_on = int(np.argmax(on_cells)) if on_cells.any() else 0
    phi0 = sol.psd.values[first_on]
    return {
        "kind": "mimo",
        "mode": sol.mode.value,
        "w": sol.w,
        "rate": sol.rate * factor,
        "prelog": mimo_mod.mimo_prelog(ch),
        "residuals": dict(sol.residuals),
        "phi0_matrix": [[[float(z.real), float(z.imag)] for z in row] for row in phi0],
    }


def run_single(file: str, output_path: str, grid_points: int = 4096,
               log_base: str = "e", quiet: bool = False) -> None:
    """Solve one scenario of any kind; JSON out."""
    doc = _load_doc(file)
    p = _Params(doc, file)
    kind = _kind(p)
    factor = _rate_factor(log_base)
    if kind == "uncoded":
        payload = _solve_uncoded(p, grid_points, factor)
    elif kind == "multilegacy":
        payload = _solve_multilegacy(p, grid_points)
    elif kind == "coded":
        payload = _solve_coded(p, factor)
    else:
        payload = _solve_mimo(p, grid_points, factor)
    payload["log_base"] = log_base
    _write_json(output_path, payload)
    if not quiet:
        print(f"wrote {output_path}", file=sys.stderr)


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="specshape",
        description="Cognitive-radio spectrum shaping scenario runner")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, helptext in (("rate-curve", "rate vs power CSV"),
                           ("prelog-mesh", "prelog mesh CSV"),
                           ("solve", "single solution JSON")):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("file", help="scenario JSON file")
        sp.add_argument("-o", "--output", required=True, help="output path")
        sp.add_argument("--grid", type=int, default=4096,
                        help="frequency grid points (default 4096)")
        sp.add_argument("--log-base", choices=("e", "2"), default="e",
                        help="log base for reported rates (default e)")
        sp.add_argument("--quiet", action="store_true", help="suppress progress notes")
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    runner = {"rate-curve": run_rate_curve,
              "prelog-mesh": run_prelog_mesh,
              "solve": run_single}[args.command]
    try:
        runner(args.file, args.output, grid_points=args.grid,
               log_base=args.log_base, quiet=args.quiet)
    except InfeasibleScenarioError as e:
        print(f"infeasible scenario: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SolverError as e:
        print(f"solver failed to converge: {e}", file=sys.stderr)
        return EXIT_SOLVER
    except (SchemaError, OSError, ValueError) as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
