"""Batch scenario runner.

Every computation in the package is exposed as a subcommand driven by a
flat key/value scenario file, overridable by command-line flags.  Outputs
are CSV (trajectories, snapshots), JSON (scalar reports) and optional SVG
line plots; every file carries a provenance header (tool version and the
scenario hash) and reruns with identical scenario + seed are byte-identical.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import Trajectory, integrate, model_one_floor
from .errors import ConfigError, CslabError, NumericError
from .geometry import fs_metric, metric_field_from_family, scalar_curvature
from .grids import WaveFunction
from .modeltwo import (
    ReducibleRep,
    characteristic_exact_gaussian,
    characteristic_radial,
    gaussian_radial_density,
    h1_closed_form,
    measure_superposition,
    scenario_record,
)
from .schrodinger import (
    DIRICHLET_AT_ZERO,
    DIRICHLET_BOTH,
    EvolutionSetup,
    evolve,
    half_line_window,
    oscillation_window,
    snapshot_csv,
    track_expectations,
)
from .states import (
    AFFINE_DOMAIN,
    PhasePoint,
    affine_coherent,
    affine_family,
    affine_fiducial,
    canonical_coherent,
    canonical_family,
    default_affine_grid,
    default_canonical_grid,
    gaussian_fiducial,
    state_labels,
    verify_centering,
)
from .svgplot import write_line_plot
from .symbols import parse_operator, polynomial_symbol, weak_symbol


@dataclass(frozen=True)
class Param:
    kind: str  # float | int | str | bool | floats | ints
    default: object = None
    required: bool = False
    help: str = ""
    choices: tuple | None = None


_FAMILY = Param("str", "canonical", help="coherent family", choices=("canonical", "affine"))

SCHEMAS: dict[str, dict[str, Param]] = {
    "centering": {
        "family": _FAMILY,
        "omega": Param("float", 1.0, help="Gaussian fiducial frequency"),
        "beta": Param("float", 1.0, help="affine fiducial rate"),
        "hbar": Param("float", 1.0),
        "n_points": Param("int", 20, help="random phase points to check"),
        "p_scale": Param("float", 2.0),
        "q_scale": Param("float", 2.0),
        "tolerance": Param("float", 1e-7),
    },
    "symbol": {
        "operator": Param("str", required=True, help="e.g. '1.0 * D X D'"),
        "family": _FAMILY,
        "omega": Param("float", 1.0),
        "beta": Param("float", 1.0),
        "hbar": Param("float", 1.0),
        "p_list": Param("floats", (0.0, 1.0)),
        "q_list": Param("floats", (0.5, 1.0, 2.0)),
    },
    "metric": {
        "family": _FAMILY,
        "omega": Param("float", 1.0),
        "beta": Param("float", 1.0),
        "hbar": Param("float", 1.0),
        "p_list": Param("floats", (0.0,)),
        "q_list": Param("floats", (1.0,)),
        "n_nodes": Param("int", 0, help="family grid nodes (0 = automatic)"),
    },
    "curvature": {
        "family": _FAMILY,
        "omega": Param("float", 1.0),
        "beta": Param("float", 1.0),
        "hbar": Param("float", 1.0),
        "p": Param("float", 0.0),
        "q_list": Param("floats", (0.5, 1.0, 4.0)),
        "n_nodes": Param("int", 0),
    },
    "evolve-classical": {
        "operator": Param("str", required=True),
        "family": _FAMILY,
        "omega": Param("float", 1.0),
        "beta": Param("float", 1.0),
        "hbar": Param("float", 1.0),
        "p0": Param("float", required=True),
        "q0": Param("float", required=True),
        "t_final": Param("float", 1.0),
        "dt": Param("float", 1e-3),
    },
    "evolve-quantum": {
        "operator": Param("str", required=True),
        "family": _FAMILY,
        "omega": Param("float", 1.0),
        "beta": Param("float", 1.0),
        "hbar": Param("float", 1.0),
        "p0": Param("float", required=True),
        "q0": Param("float", required=True),
        "dt": Param("float", 1e-4),
        "steps": Param("int", 1000),
        "n_nodes": Param("int", 2048),
        "snapshot_every": Param("int", 0, help="0 = automatic stride"),
    },
    "model-one": {
        "beta": Param("float", 1.0),
        "hbar": Param("float", 1.0),
        "p0": Param("float", 1.0),
        "q0": Param("float", 1.0),
        "t_min": Param("float", -10.0),
        "t_max": Param("float", 10.0),
        "dt": Param("float", 1e-3),
        "include_classical": Param("bool", True, help="also run the C = 0 flow"),
    },
    "model-two": {
        "N": Param("int", required=True),
        "m": Param("float", 1.0),
        "zeta": Param("float", required=True),
        "nu": Param("float", 0.0),
        "p": Param("floats", required=True),
        "q": Param("floats", required=True),
    },
    "charfn": {
        "m_prime": Param("float", 1.0),
        "hbar": Param("float", 1.0),
        "p_r_list": Param("floats", (0.5, 1.0, 2.0)),
        "n_list": Param("ints", (4, 8, 16, 32, 64)),
        "atoms": Param("str", "", help="measure atoms 'b:mu,b:mu' (optional)"),
    },
}

_DESCRIPTIONS = {
    "centering": "verify that coherent states read back their (p, q) labels",
    "symbol": "evaluate an operator's classical symbol H(p, q) and gradient",
    "metric": "Fubini-Study metric of a coherent-state sheet",
    "curvature": "scalar curvature of a coherent-state sheet",
    "evolve-classical": "integrate Hamilton's equations for a symbol",
    "evolve-quantum": "Crank-Nicolson evolution with expectation tracking",
    "model-one": "singular vs. regularized flow of H = q p^2 + C/q",
    "model-two": "reducible-representation quartic-oscillator expectations",
    "charfn": "rotationally symmetric characteristic functions",
}


def _parse_value(key: str, param: Param, raw, where: str):
    if not isinstance(raw, str):
        return raw
    raw = raw.strip()
    try:
        if param.kind == "float":
            return float(raw)
        if param.kind == "int":
            return int(raw)
        if param.kind == "bool":
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        if param.kind == "floats":
            return tuple(float(tok) for tok in raw.split(",") if tok.strip())
        if param.kind == "ints":
            return tuple(int(tok) for tok in raw.split(",") if tok.strip())
        return raw
    except ValueError as exc:
        raise ConfigError(f"{where}: cannot parse {key} = {raw!r} as {param.kind}") from exc


def load_scenario(path: Path, schema: dict[str, Param]) -> dict:
    """Flat 'key = value' file; unknown keys are rejected with their line."""
    values: dict = {}
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in schema:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = _parse_value(key, schema[key], raw, f"{path}:{lineno}")
    return values


def resolve_params(subcommand: str, args: argparse.Namespace) -> dict:
    schema = SCHEMAS[subcommand]
    values: dict = {}
    if args.scenario:
        values.update(load_scenario(Path(args.scenario), schema))
    for key, param in schema.items():
        cli_val = getattr(args, key.replace("-", "_"), None)
        if cli_val is not None:
            values[key] = _parse_value(key, param, cli_val, "command line")
    for key, param in schema.items():
        if key not in values:
            if param.required:
                raise ConfigError(f"missing required parameter {key!r}")
            values[key] = param.default
        if param.choices and values[key] not in param.choices:
            raise ConfigError(
                f"{key} must be one of {param.choices}, got {values[key]!r}"
            )
    return values


def scenario_hash(subcommand: str, params: dict, seed: int) -> str:
    canonical = json.dumps(
        {"subcommand": subcommand, "params": params, "seed": seed},
        sort_keys=True,
        default=list,
    )
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# output helpers


class Outputs:
    def __init__(self, out_dir: Path, name: str, fmt: str, tag: str, quiet: bool):
        self.dir = out_dir
        self.name = name.replace("-", "_")
        self.fmt = fmt
        self.tag = tag
        self.quiet = quiet
        out_dir.mkdir(parents=True, exist_ok=True)

    def _announce(self, path: Path):
        if not self.quiet:
            print(f"wrote {path}")

    def provenance(self) -> dict:
        return {"tool_version": __version__, "scenario_hash": self.tag}

    def json(self, payload: dict, suffix: str = "") -> Path:
        path = self.dir / f"{self.name}{suffix}.json"
        payload = {"provenance": self.provenance(), **payload}
        path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
        self._announce(path)
        return path

    def csv_trajectory(self, traj: Trajectory, suffix: str = "") -> Path | None:
        if self.fmt == "json":
            return None
        path = self.dir / f"{self.name}{suffix}.csv"
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# tool: cslab {__version__}\n# scenario: {self.tag}\n")
            traj.write_csv(fh)
        self._announce(path)
        return path

    def csv_snapshot(self, state: WaveFunction, suffix: str) -> Path | None:
        if self.fmt == "json":
            return None
        path = self.dir / f"{self.name}{suffix}.csv"
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# tool: cslab {__version__}\n# scenario: {self.tag}\n")
            snapshot_csv(state, fh)
        self._announce(path)
        return path

    def svg(self, x, series, title, x_label, y_label, suffix: str = "") -> Path | None:
        if self.fmt != "svg":
            return None
        path = self.dir / f"{self.name}{suffix}.svg"
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            write_line_plot(
                fh,
                x,
                series,
                title=title,
                x_label=x_label,
                y_label=y_label,
                comment=f"tool: cslab {__version__}; scenario: {self.tag}",
            )
        self._announce(path)
        return path


def _fiducial(params: dict):
    if params["family"] == "affine":
        return affine_fiducial(params["beta"], params["hbar"])
    return gaussian_fiducial(params["omega"], params["hbar"])


# ---------------------------------------------------------------------------
# subcommand runners


def run_centering(params: dict, rng: np.random.Generator, out: Outputs) -> dict:
    f = _fiducial(params)
    affine = params["family"] == "affine"
    tol = params["tolerance"]
    points = []
    max_err = 0.0
    for _ in range(params["n_points"]):
        p = float(rng.uniform(-params["p_scale"], params["p_scale"]))
        if affine:
            q = float(rng.uniform(0.3, 0.3 + params["q_scale"]))
            pt = PhasePoint(p, q, domain=AFFINE_DOMAIN)
            state = affine_coherent(f, pt)
        else:
            q = float(rng.uniform(-params["q_scale"], params["q_scale"]))
            pt = PhasePoint(p, q)
            state = canonical_coherent(f, pt)
        p_read, q_read = state_labels(f, state, pt)
        err = max(abs(p_read - p), abs(q_read - q))
        max_err = max(max_err, err)
        points.append(
            {"p": p, "q": q, "p_read": p_read, "q_read": q_read, "error": err}
        )
    report = verify_centering(f)
    payload = {
        "family": params["family"],
        "fiducial_centering": {
            "x_moment": report.x_moment,
            "conjugate_moment": report.conjugate_moment,
            "passed": report.passed,
        },
        "points": points,
        "max_error": max_err,
        "tolerance": tol,
        "passed": bool(max_err <= tol and report.passed),
    }
    out.json(payload)
    return payload


def run_symbol(params: dict, rng: np.random.Generator, out: Outputs) -> dict:
    op = parse_operator(params["operator"])
    f = _fiducial(params)
    symbol = weak_symbol(op, f)
    samples = []
    for p in params["p_list"]:
        for q in params["q_list"]:
            dp, dq = symbol.grad(p, q)
            samples.append(
                {"p": p, "q": q, "value": symbol(p, q), "d_dp": dp, "d_dq": dq}
            )
    payload = {
        "operator": params["operator"],
        "hermitian": op.is_hermitian(),
        "closed_form": symbol.closed_form,
        "samples": samples,
    }
    out.json(payload)
    qs = sorted(set(params["q_list"]))
    if len(qs) >= 2:
        p0 = params["p_list"][0]
        out.svg(
            qs,
            [("H(p0, q)", [symbol(p0, q) for q in qs])],
            title=f"symbol of {params['operator']}",
            x_label="q",
            y_label="H",
        )
    return payload


def _family_and_grid(params: dict, q_anchor: float):
    f = _fiducial(params)
    n = params.get("n_nodes") or 0
    if params["family"] == "affine":
        grid = default_affine_grid(f, q=q_anchor, n=n or None)
        return affine_family(f, grid), AFFINE_DOMAIN, f
    grid = default_canonical_grid(f, q=q_anchor, n=n or None)
    return canonical_family(f, grid), "canonical", f


def run_metric(params: dict, rng: np.random.Generator, out: Outputs) -> dict:
    rows = []
    for q in params["q_list"]:
        family, domain, f = _family_and_grid(params, q)
        for p in params["p_list"]:
            g = fs_metric(family, PhasePoint(p, q, domain=domain), hbar=f.hbar)
            rows.append({"p": p, "q": q, "g_pp": g.g_pp, "g_pq": g.g_pq, "g_qq": g.g_qq})
    payload = {"family": params["family"], "points": rows}
    out.json(payload)
    return payload


def run_curvature(params: dict, rng: np.random.Generator, out: Outputs) -> dict:
    rows = []
    for q in params["q_list"]:
        family, domain, f = _family_and_grid(params, q)
        field = metric_field_from_family(family, domain, hbar=f.hbar)
        value = scalar_curvature(field, PhasePoint(params["p"], q, domain=domain))
        rows.append({"p": params["p"], "q": q, "curvature": value})
    payload = {"family": params["family"], "points": rows}
    if params["family"] == "affine":
        payload["constant_negative_curvature"] = -2.0 / params["beta"]
    out.json(payload)
    return payload


def run_evolve_classical(params: dict, rng: np.random.Generator, out: Outputs) -> dict:
    op = parse_operator(params["operator"])
    f = _fiducial(params)
    symbol = weak_symbol(op, f)
    domain = AFFINE_DOMAIN if params["family"] == "affine" else "canonical"
    start = PhasePoint(params["p0"], params["q0"], domain=domain)
    traj = integrate(symbol, start, params["t_final"], params["dt"])
    payload = {
        "operator": params["operator"],
        "energy_initial": float(traj.energy[0]),
        "energy_drift": traj.energy_drift(),
        "singular": traj.singular,
        "singular_reason": traj.singular_reason,
        "final": {"t": float(traj.times[-1]), "p": float(traj.p[-1]), "q": float(traj.q[-1])},
    }
    out.json(payload)
    out.csv_trajectory(traj)
    out.svg(
        traj.times.tolist(),
        [("p", traj.p.tolist()), ("q", traj.q.tolist())],
        title="restricted classical flow",
        x_label="t",
        y_label="p, q",
    )
    return payload


def run_evolve_quantum(params: dict, rng: np.random.Generator, out: Outputs) -> dict:
    op = parse_operator(params["operator"])
    f = _fiducial(params)
    n = params["n_nodes"]
    if params["family"] == "affine":
        grid = half_line_window(f, q_max=3 * params["q0"], n=n)
        pt = PhasePoint(params["p0"], params["q0"], domain=AFFINE_DOMAIN)
        psi0 = affine_coherent(f, pt, grid=grid)
        boundary = DIRICHLET_AT_ZERO
    else:
        grid = oscillation_window(f, params["p0"], params["q0"], n)
        pt = PhasePoint(params["p0"], params["q0"])
        psi0 = canonical_coherent(f, pt, grid=grid)
        boundary = DIRICHLET_BOTH
    psi0 = psi0.normalized()
    setup = EvolutionSetup(op, grid, boundary, params["dt"], params["steps"], f.hbar)
    stride = params["snapshot_every"] or None
    result = evolve(psi0, setup, snapshot_every=stride)
    traj = track_expectations(result)
    payload = {
        "operator": params["operator"],
        "nodes": grid.n,
        "snapshots": len(result.states),
        "energy_initial": float(traj.energy[0]),
        "energy_drift": traj.energy_drift(),
        "x_final": float(traj.q[-1]),
        "p_final": float(traj.p[-1]),
    }
    out.json(payload)
    out.csv_trajectory(traj)
    out.csv_snapshot(result.final(), "_final_state")
    out.svg(
        traj.times.tolist(),
        [("<x>", traj.q.tolist()), ("<p>", traj.p.tolist())],
        title="quantum expectation flow",
        x_label="t",
        y_label="<x>, <p>",
    )
    return payload


def run_model_one(params: dict, rng: np.random.Generator, out: Outputs) -> dict:
    hbar, beta = params["hbar"], params["beta"]
    c = hbar * beta / 2.0
    enhanced = polynomial_symbol({(2, 1): 1.0, (0, -1): c}, hbar, "affine")
    start = PhasePoint(params["p0"], params["q0"], domain=AFFINE_DOMAIN)
    dt = params["dt"]
    back = integrate(enhanced, start, params["t_min"], dt)
    fwd = integrate(enhanced, start, params["t_max"], dt)
    # merge backward (reversed) and forward branches into one record
    times = np.concatenate([back.times[::-1], fwd.times[1:]])
    traj = Trajectory(
        times,
        np.concatenate([back.p[::-1], fwd.p[1:]]),
        np.concatenate([back.q[::-1], fwd.q[1:]]),
        np.concatenate([back.energy[::-1], fwd.energy[1:]]),
        singular=back.singular or fwd.singular,
    )
    energy = float(fwd.energy[0])
    floor = model_one_floor(params["p0"], params["q0"], c)
    payload = {
        "C": c,
        "energy": energy,
        "q_floor_predicted": floor,
        "q_min_observed": traj.min_q(),
        "floor_ratio": traj.min_q() / floor,
        "enhanced_singular": traj.singular,
    }
    if params["include_classical"]:
        classical = polynomial_symbol({(2, 1): 1.0}, hbar, "affine")
        direction = params["t_min"] if params["p0"] > 0 else params["t_max"]
        run = integrate(classical, start, direction, dt)
        payload["classical_singular"] = run.singular
        payload["classical_q_min"] = run.min_q()
        payload["classical_stop_time"] = float(run.times[-1])
    out.json(payload)
    out.csv_trajectory(traj)
    out.svg(
        traj.times.tolist(),
        [("q", traj.q.tolist())],
        title="regularized collapse: q(t) stays above C/E",
        x_label="t",
        y_label="q",
    )
    return payload


def run_model_two(params: dict, rng: np.random.Generator, out: Outputs) -> dict:
    rep = ReducibleRep(params["N"], params["m"], params["zeta"], params.get("hbar", 1.0))
    p = np.asarray(params["p"], dtype=float)
    q = np.asarray(params["q"], dtype=float)
    if p.size != rep.N or q.size != rep.N:
        raise ConfigError(f"p and q must have N = {rep.N} entries")
    record = scenario_record(rep, params["nu"], p, q)
    closed = h1_closed_form(rep, params["nu"], p, q)
    record["closed_form"] = closed
    record["agreement"] = abs(record["H1"] - closed)
    out.json(record)
    return record


def run_charfn(params: dict, rng: np.random.Generator, out: Outputs) -> dict:
    hbar = params["hbar"]
    m_prime = params["m_prime"]
    table = []
    monotone = {}
    for p_r in params["p_r_list"]:
        errors = []
        for n in params["n_list"]:
            density = gaussian_radial_density(n, m_prime, hbar)
            res = characteristic_radial(density, p_r, hbar)
            errors.append(res.difference)
            table.append(
                {
                    "N": n,
                    "p_r": p_r,
                    "exact": res.exact,
                    "descent": res.descent,
                    "difference": res.difference,
                    "gaussian_closed_form": characteristic_exact_gaussian(p_r, m_prime, hbar),
                }
            )
        monotone[str(p_r)] = bool(
            all(errors[i + 1] < errors[i] for i in range(len(errors) - 1))
        )
    payload = {"table": table, "descent_error_monotone": monotone}
    if params["atoms"]:
        atoms = []
        for chunk in params["atoms"].split(","):
            b_text, _, mu_text = chunk.partition(":")
            try:
                atoms.append((float(b_text), float(mu_text)))
            except ValueError as exc:
                raise ConfigError(f"bad atom spec {chunk!r}") from exc
        payload["measure"] = [
            {"p_r": p_r, "value": measure_superposition(atoms, p_r, hbar)}
            for p_r in params["p_r_list"]
        ]
    out.json(payload)
    return payload


_RUNNERS = {
    "centering": run_centering,
    "symbol": run_symbol,
    "metric": run_metric,
    "curvature": run_curvature,
    "evolve-classical": run_evolve_classical,
    "evolve-quantum": run_evolve_quantum,
    "model-one": run_model_one,
    "model-two": run_model_two,
    "charfn": run_charfn,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cslab",
        description="coherent-state laboratory: batch scenario runner",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, schema in SCHEMAS.items():
        p = sub.add_parser(name, help=_DESCRIPTIONS[name], description=_DESCRIPTIONS[name])
        p.add_argument("--scenario", help="flat key/value scenario file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=0, help="RNG seed")
        p.add_argument(
            "--format",
            default="csv",
            choices=("csv", "json", "svg"),
            help="csv: data + JSON report; json: report only; svg: also plots",
        )
        p.add_argument("--quiet", action="store_true")
        for key, param in schema.items():
            p.add_argument(f"--{key}", dest=key.replace("-", "_"), help=param.help or key)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        params = resolve_params(args.subcommand, args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    tag = scenario_hash(args.subcommand, params, args.seed)
    rng = np.random.default_rng(args.seed)
    out = Outputs(Path(args.out), args.subcommand, args.format, tag, args.quiet)
    try:
        _RUNNERS[args.subcommand](params, rng, out)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (NumericError, CslabError) as exc:
        print(f"numerical failure in {args.subcommand}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
