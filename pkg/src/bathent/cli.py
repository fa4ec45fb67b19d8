"""Command-line interface: ``bathent {validate,witness,evolve,scan,search,capability}``.

Exit codes: 0 success, 1 usage or parse error, 2 model is not completely
positive (``validate``), 3 numerical tolerance breach.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from typing import Any, Mapping

import numpy as np

from .dynamics import NoneFound, ToleranceBreach, entanglement_onset, negativity_curve
from .generator import GeneratorModel, validate_cp
from .modelfile import ModelSpec, load_model, parse_model
from .search import capability, find_entangling_state
from .witness import (
    ProductState,
    WitnessContext,
    assess,
    basis_state,
    principal_minors,
    product_state,
)

__all__ = ["main", "parse_state", "EVOLVE_HEADER", "SCAN_HEADER", "MAX_GRID_POINTS"]

EVOLVE_HEADER = ("t", "negativity", "min_pt_eigenvalue", "trace_error")
SCAN_HEADER = ("p1", "p2", "is_cp", "min_minor", "verdict", "onset_t")
MAX_GRID_POINTS = 10**6
_SCAN_OUTPUTS = {"cp", "minors", "verdict", "onset"}


class UsageError(Exception):
    pass


def _num(x: float) -> str:
    return format(float(x), ".17g")


def _cplx(z: complex) -> str:
    z = complex(z)
    if z.imag == 0:
        return format(z.real, ".12g")
    return f"{z.real:.12g}{z.imag:+.12g}j"


def _vec_text(v) -> str:
    return "[" + ", ".join(_cplx(z) for z in v) + "]"


# --------------------------------------------------------------------------
# inputs
# --------------------------------------------------------------------------


def _amplitudes(value, path: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise UsageError(f"{path} must be a nonempty list of amplitudes")
    out = []
    for k, a in enumerate(value):
        if isinstance(a, list) and len(a) == 2 and all(isinstance(c, (int, float)) for c in a):
            out.append(complex(a[0], a[1]))
        elif isinstance(a, (int, float)) and not isinstance(a, bool):
            out.append(complex(a))
        else:
            raise UsageError(f"{path}[{k}] must be a number or [re, im]")
    return np.array(out)


def parse_state(spec, d: int) -> ProductState:
    """Product state from a basis label (``"00"``) or explicit amplitudes.

    Explicit amplitudes are a JSON object ``{"psi": [...], "phi": [...]}``
    (as text or already decoded) whose entries are numbers or ``[re, im]``;
    each factor is normalized.
    """
    if isinstance(spec, str):
        text = spec.strip()
        if text.startswith("{"):
            try:
                spec = json.loads(text)
            except json.JSONDecodeError as exc:
                raise UsageError(f"invalid state JSON: {exc.msg}") from exc
        else:
            try:
                return basis_state(text, d)
            except ValueError as exc:
                raise UsageError(str(exc)) from exc
    if not isinstance(spec, Mapping) or set(spec) != {"psi", "phi"}:
        raise UsageError("explicit states need exactly the keys 'psi' and 'phi'")
    psi, phi = _amplitudes(spec["psi"], "psi"), _amplitudes(spec["phi"], "phi")
    if psi.size != d or phi.size != d:
        raise UsageError(f"state factors must have {d} amplitudes")
    if not np.linalg.norm(psi) or not np.linalg.norm(phi):
        raise UsageError("state factors must be nonzero")
    return product_state(psi, phi)


def _parse_params(items) -> dict[str, float]:
    out = {}
    for item in items or ():
        name, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"--param expects name=value, got {item!r}")
        try:
            out[name.strip()] = float(val)
        except ValueError as exc:
            raise UsageError(f"--param {name}: {val!r} is not a number") from exc
    return out


def _load(args) -> tuple[ModelSpec, GeneratorModel]:
    spec = load_model(args.model)
    return spec, spec.instantiate(_parse_params(args.param))


@contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_validate(args) -> int:
    _, model = _load(args)
    rep = validate_cp(model.kossakowski)
    with _output(args.out) as out:
        out.write("eigenvalues: " + " ".join(_num(e) for e in rep.eigenvalues) + "\n")
        out.write(f"min_eigenvalue: {_num(rep.min_eigenvalue)}\n")
        out.write(f"is_cp: {str(rep.is_cp).lower()}\n")
    return 0 if rep.is_cp else 2


def _witness_lines(model: GeneratorModel, state: ProductState) -> list[str]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        result = assess(model, state)
    fo = result.first_order
    wm = fo.witness
    lines = [f"psi: {_vec_text(state.psi)}", f"phi: {_vec_text(state.phi)}"]
    for a, u in enumerate(wm.flips.u, start=2):
        lines.append(f"u[{a}]: {_vec_text(u)}")
    for a, v in enumerate(wm.flips.v, start=2):
        lines.append(f"v[{a}]: {_vec_text(v)}")
    lines.append("M:")
    lines += ["  " + " ".join(_cplx(z) for z in row) for row in wm.m]
    lines.append("minors:")
    for r in principal_minors(wm, include_skipped=False):
        lines.append("  {" + ",".join(map(str, r.index_set)) + "} " + _num(r.value))
    lines.append(f"is_cp: {str(fo.is_cp).lower()}")
    lines.append(f"min_minor: {_num(fo.min_minor.value)}")
    lines.append(f"first_order: {fo.kind}")
    if fo.certificate is not None and fo.kind == "Entangling":
        lines.append("certificate: {" + ",".join(map(str, fo.certificate.index_set)) + "} " + _num(fo.certificate.value))
    if result.resolution is not None:
        for k, c in sorted(result.resolution.coefficients.items()):
            lines.append(f"k{k}_coefficient: {_num(c)}")
    lines.append(f"verdict: {result.verdict}")
    return lines


def cmd_witness(args) -> int:
    _, model = _load(args)
    state = parse_state(args.state, model.d)
    with _output(args.out) as out:
        out.write("\n".join(_witness_lines(model, state)) + "\n")
    return 0


def _time_grid(tmax, steps) -> np.ndarray:
    if tmax is None or not tmax > 0 or not np.isfinite(tmax):
        raise UsageError("--tmax must be a positive number")
    if steps is None or steps < 2:
        raise UsageError("--steps must be at least 2")
    if steps > MAX_GRID_POINTS:
        raise UsageError(f"--steps is limited to {MAX_GRID_POINTS}")
    return np.linspace(0.0, tmax, steps)


def cmd_evolve(args) -> int:
    _, model = _load(args)
    state = parse_state(args.state, model.d)
    curve = negativity_curve(model, state.projector(), _time_grid(args.tmax, args.steps))
    with _output(args.out) as out:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(EVOLVE_HEADER)
        for row in zip(curve.times, curve.negativities, curve.min_pt_eigenvalues, curve.trace_errors):
            w.writerow([_num(v) for v in row])
    return 0


# ---- scan ----------------------------------------------------------------


def _read_scan(path, spec: ModelSpec) -> dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, Mapping):
        raise UsageError(f"{path}: scan spec must be a JSON object")
    axes = doc.get("parameters")
    if not isinstance(axes, list) or not 1 <= len(axes) <= 2:
        raise UsageError("scan spec needs one or two entries in 'parameters'")
    grids, names = [], []
    for k, ax in enumerate(axes):
        if not isinstance(ax, Mapping) or not {"name", "start", "stop", "steps"} <= set(ax):
            raise UsageError(f"parameters[{k}] needs name, start, stop and steps")
        name = ax["name"]
        if name not in spec.parameters:
            raise UsageError(f"parameters[{k}]: unknown parameter {name!r}; the model declares {sorted(spec.parameters)}")
        steps = ax["steps"]
        if isinstance(steps, bool) or not isinstance(steps, int) or steps < 1:
            raise UsageError(f"parameters[{k}].steps must be a positive integer")
        grids.append(np.linspace(float(ax["start"]), float(ax["stop"]), steps))
        names.append(name)
    if int(np.prod([g.size for g in grids])) > MAX_GRID_POINTS:
        raise UsageError(f"scan grid exceeds {MAX_GRID_POINTS} points")
    outputs = set(doc.get("outputs", ["cp", "minors", "verdict"]))
    if outputs - _SCAN_OUTPUTS:
        raise UsageError(f"unknown outputs {sorted(outputs - _SCAN_OUTPUTS)}")
    onset = None
    if "onset" in outputs:
        o = doc.get("onset", {})
        onset = _time_grid(o.get("tmax", 0.5), o.get("steps", 51))
    state = doc.get("state", "search")
    search = None
    if isinstance(state, Mapping) and "search" in state:
        search = state["search"] if isinstance(state["search"], Mapping) else {}
        state = None
    elif state == "search":
        search, state = {}, None
    return {"names": names, "grids": grids, "outputs": outputs, "onset": onset, "state": state, "search": search}


def _scan_point(job) -> list[str]:
    raw, params, point, scan = job
    model = parse_model(raw).instantiate(params)
    if scan["search"] is not None:
        rep = find_entangling_state(model, int(scan["search"].get("budget", 4)), int(scan["search"].get("seed", 0)))
        state = rep.best_state
    else:
        state = parse_state(scan["state"], model.d)
    out = scan["outputs"]
    row = [_num(point[0]), _num(point[1]) if len(point) > 1 else ""]
    row.append(str(validate_cp(model.kossakowski).is_cp).lower() if "cp" in out else "")
    result = None
    if out & {"minors", "verdict"}:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            result = assess(model, state, context=WitnessContext(model))
    row.append(_num(result.first_order.min_minor.value) if "minors" in out else "")
    row.append(result.verdict if "verdict" in out else "")
    if scan["onset"] is not None:
        res = entanglement_onset(model, state, scan["onset"])
        row.append("none" if isinstance(res, NoneFound) else _num(res.t))
    else:
        row.append("")
    return row


def cmd_scan(args) -> int:
    spec, _ = _load(args)
    if args.scan is None:
        raise UsageError("scan needs --scan SPEC")
    scan = _read_scan(args.scan, spec)
    base = {**spec.parameters, **_parse_params(args.param)}
    if scan["state"] is not None:
        parse_state(scan["state"], spec.basis.d)
    jobs = []
    if len(scan["grids"]) == 1:
        points = [(a,) for a in scan["grids"][0]]
    else:
        points = [(a, b) for a in scan["grids"][0] for b in scan["grids"][1]]
    for p in points:
        jobs.append((spec.raw, {**base, **dict(zip(scan["names"], p))}, p, scan))
    if args.jobs and args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            rows = list(ex.map(_scan_point, jobs, chunksize=max(1, len(jobs) // (4 * args.jobs))))
    else:
        rows = [_scan_point(j) for j in jobs]
    with _output(args.out) as out:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(SCAN_HEADER)
        w.writerows(rows)
    return 0


def cmd_search(args) -> int:
    _, model = _load(args)
    rep = find_entangling_state(model, args.budget, args.seed)
    with _output(args.out) as out:
        out.write(f"verdict: {rep.verdict}\n")
        out.write(f"psi: {_vec_text(rep.best_state.psi)}\n")
        out.write(f"phi: {_vec_text(rep.best_state.phi)}\n")
        out.write("best_minor: {" + ",".join(map(str, rep.best_minor.index_set)) + "} " + _num(rep.best_minor.value) + "\n")
        out.write(f"evaluations: {rep.evaluations}\n")
        if rep.verdict != "CertificateFound":
            out.write("note: heuristic evidence only; unvisited states are not covered\n")
    return 0


def cmd_capability(args) -> int:
    spec, model = _load(args)
    if "h12" not in spec.fields:
        raise UsageError(f"{args.model}: model has no h12 coupling")
    rep = capability(model.hamiltonian.h12, model.basis, seed=args.seed)
    with _output(args.out) as out:
        out.write("singular_values: " + " ".join(_num(m) for m in rep.singular_values) + "\n")
        out.write(f"eta_max: {_num(rep.eta_max)}\n")
        out.write(f"numerical_max: {_num(rep.numerical_max)}\n")
        out.write(f"closed_form: {str(rep.closed_form).lower()}\n")
        out.write(f"psi: {_vec_text(rep.maximizer.psi)}\n")
        out.write(f"phi: {_vec_text(rep.maximizer.phi)}\n")
    return 0


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bathent", description="Entanglement generation by Lindblad dynamics of two d-level systems.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--model", required=True, help="JSON model file")
        p.add_argument("--param", action="append", metavar="NAME=VALUE", help="override a model parameter")
        p.add_argument("--out", help="write output here instead of stdout")
        return p

    common(sub.add_parser("validate", help="check complete positivity"))
    p = common(sub.add_parser("witness", help="first-order witness for a product state"))
    p.add_argument("--state", required=True, help='basis label such as "00", or {"psi": [...], "phi": [...]}')
    p = common(sub.add_parser("evolve", help="negativity along the exact evolution (CSV)"))
    p.add_argument("--state", required=True)
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p = common(sub.add_parser("scan", help="parameter scan (CSV)"))
    p.add_argument("--scan", required=True, help="JSON scan spec")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p = common(sub.add_parser("search", help="search product states for an entangling certificate"))
    p.add_argument("--budget", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p = common(sub.add_parser("capability", help="maximal Hamiltonian entangling capability"))
    p.add_argument("--seed", type=int, default=0)
    return parser


_COMMANDS = {
    "validate": cmd_validate,
    "witness": cmd_witness,
    "evolve": cmd_evolve,
    "scan": cmd_scan,
    "search": cmd_search,
    "capability": cmd_capability,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return _COMMANDS[args.command](args)
    except (UsageError, ValueError, OSError) as exc:
        print(f"bathent: error: {exc}", file=sys.stderr)
        return 1
    except ToleranceBreach as exc:
        print(f"bathent: tolerance breach: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
