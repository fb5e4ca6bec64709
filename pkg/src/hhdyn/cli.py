"""Command-line entry point: configuration, orchestration, persistence.

Subcommands: propagate, fit, refmodel, check, sweep.  Configuration is
a TOML file validated against a fixed schema (unknown keys rejected),
optionally patched with repeatable --override key=value flags.  All
numeric tables are CSV with 17 significant digits, UNIX newlines and a
#-prefixed provenance block; every command writes a meta.json manifest
naming the parameters that produced its files.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 invariant failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import __version__, fitting, heom, kernels, model, observables, refmodels

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_INVARIANT = 4

DEFAULT_OUTPUT_ENV = "HHDYN_OUTPUT_ROOT"

_U_GRID = [0.5 * i for i in range(13)]  # 0 .. 6 in steps of 0.5

# section -> key -> (types, default); None default means required-less
SCHEMA = {
    "model": {
        "t0": (float, 1.0),
        "U": (float, 0.0),
        "eta": (float, 0.1),
        "gamma": (float, 0.3),
        "beta": (float, 1.0),
    },
    "heom": {
        "K": (int, 1),
        "L": (int, 6),
        "dt": (float, 0.01),
        "t_max": (float, 40.0),
        "record_stride": (int, 5),
        "use_terminator": (bool, True),
        "hamiltonian": (str, "full"),
    },
    "fit": {
        "n_terms": (int, 3),
        "asymptote_mode": (str, "tail-average"),
        "asymptote_value": (float, None),
        "tail_fraction": (float, 0.2),
        "n_starts": (int, 8),
        "seed": (int, 0),
    },
    "refmodel": {
        "modes": (list, [1, 2, 3, 4]),
        "x_min": (float, -1.5),
        "x_max": (float, 1.5),
        "n_points": (int, 61),
        "n_ph": (int, 30),
        "u_values": (list, _U_GRID),
        "delta_f_u_values": (list, [0.0, 6.0]),
    },
    "sweep": {
        "u_values": (list, _U_GRID),
        "eta_values": (list, [0.1, 2.0]),
    },
}


class ConfigError(Exception):
    """Invalid configuration; the message names the offending key."""


def _coerce(section, key, value, want):
    if want is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if want is int and isinstance(value, bool):
        raise ConfigError(f"{section}.{key}: expected integer, got boolean")
    if not isinstance(value, want):
        raise ConfigError(
            f"{section}.{key}: expected {want.__name__}, got {type(value).__name__}"
        )
    return value


def load_config(path: str | None, overrides: list[str]) -> dict:
    """Schema-validated configuration with defaults and overrides applied."""
    raw = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}")
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        dotted, text = item.split("=", 1)
        parts = dotted.strip().split(".")
        if len(parts) != 2:
            raise ConfigError(f"override key {dotted!r} must be section.key")
        try:
            value = tomllib.loads(f"v = {text}")["v"]
        except tomllib.TOMLDecodeError:
            value = text  # bare word: treat as string
        raw.setdefault(parts[0], {})[parts[1]] = value

    config = {}
    for section, keys in SCHEMA.items():
        given = raw.pop(section, {})
        if not isinstance(given, dict):
            raise ConfigError(f"{section}: expected a table")
        out = {}
        for key, (want, default) in keys.items():
            if key in given:
                out[key] = _coerce(section, key, given.pop(key), want)
            else:
                out[key] = default
        if given:
            bad = ", ".join(f"{section}.{k}" for k in sorted(given))
            raise ConfigError(f"unknown keys: {bad}")
        config[section] = out
    if raw:
        raise ConfigError(f"unknown sections: {', '.join(sorted(raw))}")

    if config["fit"]["asymptote_mode"] == "fixed-value" and (
        config["fit"]["asymptote_value"] is None
    ):
        raise ConfigError("fit.asymptote_value required for fixed-value mode")
    return config


def model_params(config: dict) -> model.ModelParams:
    m = config["model"]
    try:
        return model.ModelParams(
            t0=m["t0"], U=m["U"], eta=m["eta"], gamma=m["gamma"], beta=m["beta"]
        )
    except ValueError as exc:
        raise ConfigError(f"model: {exc}")


def heom_config(config: dict) -> heom.HeomConfig:
    h = config["heom"]
    if h["hamiltonian"] not in ("full", "hf"):
        raise ConfigError(f"heom.hamiltonian: unknown variant {h['hamiltonian']!r}")
    try:
        return heom.HeomConfig(
            K=h["K"],
            L=h["L"],
            dt=h["dt"],
            t_max=h["t_max"],
            record_stride=h["record_stride"],
            use_terminator=h["use_terminator"],
        )
    except ValueError as exc:
        raise ConfigError(f"heom: {exc}")


def fit_config(config: dict) -> fitting.FitConfig:
    f = config["fit"]
    try:
        return fitting.FitConfig(
            n_terms=f["n_terms"],
            asymptote_mode=f["asymptote_mode"],
            asymptote_value=f["asymptote_value"],
            tail_fraction=f["tail_fraction"],
            n_starts=f["n_starts"],
            seed=f["seed"],
        )
    except ValueError as exc:
        raise ConfigError(f"fit: {exc}")


def output_dir(args) -> Path:
    if args.out is not None:
        root = Path(args.out)
    else:
        root = Path(os.environ.get(DEFAULT_OUTPUT_ENV, "hhdyn_out"))
    root.mkdir(parents=True, exist_ok=True)
    return root


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    return "%.17g" % value


def write_csv(path: Path, header: list[str], rows, provenance: dict) -> None:
    """CSV body with a #-prefixed provenance block, 17 significant digits."""
    lines = [f"# {k} = {_fmt(v)}" for k, v in provenance.items()]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", newline="\n")


def read_csv(path: Path):
    """(provenance dict, header list, list of string rows) of one CSV."""
    provenance = {}
    header = None
    rows = []
    for line in path.read_text().splitlines():
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                k, v = body.split("=", 1)
                provenance[k.strip()] = v.strip()
            continue
        if not line:
            continue
        if header is None:
            header = line.split(",")
        else:
            rows.append(line.split(","))
    if header is None:
        raise ConfigError(f"{path}: no header row")
    return provenance, header, rows


def write_manifest(path: Path, command: str, config: dict, outputs: list[str],
                   wall_time: float, extra: dict | None = None) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "backend": kernels.ACTIVE_BACKEND,
        "config": config,
        "outputs": outputs,
        "wall_time_s": round(wall_time, 3),
    }
    if extra:
        manifest.update(extra)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


TRAJECTORY_COLUMNS = ["t", "purity", "energy", "cumulant"]
for _i in range(1, 5):
    for _j in range(_i, 5):
        TRAJECTORY_COLUMNS.append(f"re_r{_i}{_j}")
        if _i != _j:
            TRAJECTORY_COLUMNS.append(f"im_r{_i}{_j}")


def _provenance(config: dict) -> dict:
    prov = {"generator": f"hhdyn {__version__}"}
    for section in ("model", "heom"):
        for key, value in config[section].items():
            prov[key] = value
    return prov


def run_propagate_cell(config: dict, out: Path) -> dict:
    """One HEOM cell: trajectory.csv and meta.json under `out`."""
    start = time.time()
    params = model_params(config)
    cfg = heom_config(config)
    traj = heom.propagate_model(params, cfg, config["heom"]["hamiltonian"])
    hs = (
        model.build_hs(params)
        if config["heom"]["hamiltonian"] == "full"
        else model.build_hs0(params)
    )
    obs = observables.observable_series(traj, hs)

    rows = []
    for k, t in enumerate(obs["times"]):
        row = [t, obs["purity"][k], obs["energy"][k], obs["cumulant"][k]]
        rho = obs["rho_eig"][k]
        for i in range(4):
            for j in range(i, 4):
                row.append(rho[i, j].real)
                if i != j:
                    row.append(rho[i, j].imag)
        rows.append(row)

    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "trajectory.csv"
    write_csv(csv_path, TRAJECTORY_COLUMNS, rows, _provenance(config))
    write_manifest(
        out / "meta.json",
        "propagate",
        config,
        ["trajectory.csv"],
        time.time() - start,
        extra={"n_ados": traj.meta["n_ados"]},
    )
    return {"path": str(csv_path), "n_ados": traj.meta["n_ados"]}


def cmd_propagate(args) -> int:
    config = load_config(args.config, args.override)
    run_propagate_cell(config, output_dir(args))
    return 0


def _trajectory_series(path: Path):
    """(provenance, times, purity, rho_eig) from one trajectory.csv."""
    provenance, header, rows = read_csv(path)
    if header != TRAJECTORY_COLUMNS:
        raise ConfigError(f"{path}: unexpected trajectory columns")
    data = np.array([[float(v) for v in row] for row in rows])
    times = data[:, 0]
    purity = data[:, 1]
    rho = np.zeros((len(rows), 4, 4), dtype=complex)
    col = 4
    for i in range(4):
        for j in range(i, 4):
            rho[:, i, j] += data[:, col]
            col += 1
            if i != j:
                rho[:, i, j] += 1j * data[:, col]
                rho[:, j, i] = rho[:, i, j].conj()
                col += 1
    return provenance, times, purity, rho


def cmd_fit(args) -> int:
    config = load_config(args.config, args.override)
    out = output_dir(args)
    if not args.trajectories:
        raise ConfigError("fit requires at least one trajectory.csv path")
    start = time.time()
    cfg = fit_config(config)

    purity_rows = []
    element_rows = []
    n_warnings = 0
    for raw_path in args.trajectories:
        path = Path(raw_path)
        provenance, times, purity, rho = _trajectory_series(path)
        U = float(provenance.get("U", "nan"))
        eta = float(provenance.get("eta", "nan"))

        try:
            res = fitting.fit_exponentials(times, purity, cfg)
        except (ValueError, np.linalg.LinAlgError) as exc:
            print(f"warning: purity fit failed for {path}: {exc}", file=sys.stderr)
            n_warnings += 1
            continue
        n_warnings += len(res.warnings)
        for text in res.warnings:
            print(f"warning: {path}: {text}", file=sys.stderr)
        row = [U, eta]
        for k in range(3):
            if k < len(res.terms):
                row.extend(res.terms[k])
            else:
                row.extend([None, None])
        row.extend([res.asymptote, res.residual_rms, res.converged])
        purity_rows.append(row)

        fits = fitting.fit_density_matrix_elements(times, rho)
        for (i, j), elem in sorted(fits.items()):
            if elem is None:
                element_rows.append([U, eta, f"r{i + 1}{j + 1}", 0.0, None])
            else:
                a, tau = elem.terms[0]
                element_rows.append([U, eta, f"r{i + 1}{j + 1}", a, tau])

    header = ["U", "eta", "a1", "tau1", "a2", "tau2", "a3", "tau3",
              "asymptote", "residual_rms", "converged"]
    prov = {"generator": f"hhdyn {__version__}",
            "n_terms": cfg.n_terms, "asymptote_mode": cfg.asymptote_mode}
    write_csv(out / "purity_fits.csv", header, purity_rows, prov)
    write_csv(
        out / "element_fits.csv",
        ["U", "eta", "element", "p", "tau"],
        element_rows,
        prov,
    )
    write_manifest(
        out / "fit_meta.json",
        "fit",
        config,
        ["purity_fits.csv", "element_fits.csv"],
        time.time() - start,
        extra={"inputs": list(args.trajectories), "n_warnings": n_warnings},
    )
    return 0


def cmd_refmodel(args) -> int:
    config = load_config(args.config, args.override)
    out = output_dir(args)
    start = time.time()
    r = config["refmodel"]
    params = model_params(config)
    smm = refmodels.SingleModeModel(params, n_ph=r["n_ph"])
    grid = np.linspace(r["x_min"], r["x_max"], r["n_points"])
    prov = _provenance(config)
    outputs = []

    for mode in r["modes"]:
        pes = refmodels.bo_pes(smm, mode, grid)
        rows = [[x, *pes.energies[i]] for i, x in enumerate(grid)]
        name = f"pes_x{mode}.csv"
        write_csv(out / name, ["x", "e1", "e2", "e3", "e4"], rows, prov)
        outputs.append(name)

        curve = refmodels.nac(smm, mode, grid)
        rows = [
            [x, curve.coupling[i], bool(curve.flagged[i])]
            for i, x in enumerate(grid)
        ]
        name = f"nac_x{mode}.csv"
        write_csv(out / name, ["x", "coupling", "flagged"], rows, prov)
        outputs.append(name)

    df_rows = []
    for U in r["delta_f_u_values"]:
        cell = refmodels.SingleModeModel(
            model.ModelParams(
                t0=params.t0, U=float(U), eta=params.eta,
                gamma=params.gamma, beta=params.beta,
            ),
            n_ph=r["n_ph"],
        )
        for mode in r["modes"]:
            df_rows.append(
                [float(U), params.eta, mode, refmodels.delta_f_average(cell, mode)]
            )
    write_csv(out / "deltaF.csv", ["U", "eta", "mode", "value"], df_rows, prov)
    outputs.append("deltaF.csv")

    ecor_rows = []
    for U in r["u_values"]:
        cell = model.ModelParams(
            t0=params.t0, U=float(U), eta=params.eta,
            gamma=params.gamma, beta=params.beta,
        )
        hs = model.build_hs(cell)
        hs0 = model.build_hs0(cell)
        try:
            res = refmodels.correlation_energy({0: 0.5, 1: 0.5}, hs, hs0)
            ecor_rows.append([float(U), res.e_cor, res.min_overlap])
        except refmodels.ContinuationError as exc:
            print(f"warning: continuation failed at U={U}: {exc}", file=sys.stderr)
            ecor_rows.append([float(U), None, None])
    write_csv(out / "ecor.csv", ["U", "E_cor", "min_overlap"], ecor_rows, prov)
    outputs.append("ecor.csv")

    write_manifest(
        out / "refmodel_meta.json", "refmodel", config, outputs, time.time() - start
    )
    return 0


def _check_line(name: str, passed: bool, detail: str) -> bool:
    print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
    return passed


def cmd_check(args) -> int:
    config = load_config(args.config, args.override)
    params = model_params(config)
    ok = True

    qs = model.build_coupling_ops()
    defect = float(np.max(np.abs(sum(qs) - np.eye(4))))
    ok &= _check_line("coupling completeness", defect < 1e-14,
                      f"max |sum Q_m - I| = {defect:.2e}")

    vs = model.build_vs(params)
    defect = max(float(np.max(np.abs(vs @ q - q @ vs))) for q in qs)
    ok &= _check_line("interaction commutes with couplings", defect < 1e-14,
                      f"max |[V, Q_m]| = {defect:.2e}")

    hs = model.build_hs(params)
    smallest = min(float(np.max(np.abs(hs @ q - q @ hs))) for q in qs)
    ok &= _check_line("hopping does not commute with couplings",
                      smallest > 1e-10, f"min_m max |[H, Q_m]| = {smallest:.2e}")

    vals = np.linalg.eigvalsh(hs)
    U, t0 = params.U, params.t0
    root = np.sqrt(U * U + 16.0 * t0 * t0)
    closed = np.sort([0.5 * (U - root), 0.0, U, 0.5 * (U + root)])
    defect = float(np.max(np.abs(vals - closed)))
    ok &= _check_line("eigenvalues match closed form", defect < 1e-10,
                      f"max deviation = {defect:.2e}")

    cfg = heom_config(config)
    purities = []
    for U_probe in (0.0, 6.0 * params.t0):
        p = model.ModelParams(t0=params.t0, U=U_probe, eta=params.eta,
                              gamma=params.gamma, beta=params.beta)
        traj = heom.propagate_model(p, cfg, hamiltonian="hf")
        purities.append(np.einsum("tij,tji->t", traj.states, traj.states).real)
    defect = float(np.max(np.abs(purities[0] - purities[1])))
    ok &= _check_line("mean-field purity independent of U", defect < 1e-8,
                      f"max |purity(U=0) - purity(U=6)| = {defect:.2e}")

    dephasing_params = model.ModelParams(
        t0=params.t0, U=0.0, eta=0.01, gamma=params.gamma, beta=params.beta
    )
    expansion = heom.expand_bath(
        dephasing_params.eta, dephasing_params.gamma, dephasing_params.beta, K=2
    )
    sz = np.diag([1.0, -1.0]).astype(complex)
    rho0 = np.full((2, 2), 0.5, dtype=complex)
    t_max = 10.0 / dephasing_params.gamma
    deph_cfg = heom.HeomConfig(K=2, L=5, dt=0.01, t_max=t_max, record_stride=20)
    traj = heom.propagate(np.zeros((2, 2), dtype=complex), [sz], [expansion],
                          rho0, deph_cfg)
    coherence = np.abs(traj.states[:, 0, 1]) / 0.5
    oracle = refmodels.analytic_dephasing(dephasing_params, traj.times)
    defect = float(np.max(np.abs(coherence - oracle) / oracle))
    ok &= _check_line("pure-dephasing quadrature oracle", defect < 1e-3,
                      f"max relative error = {defect:.2e}")

    return 0 if ok else EXIT_INVARIANT


def _sweep_cell(payload):
    config, out = payload
    return run_propagate_cell(config, Path(out))


def cmd_sweep(args) -> int:
    config = load_config(args.config, args.override)
    out = output_dir(args)
    start = time.time()
    cells = []
    for eta in config["sweep"]["eta_values"]:
        for U in config["sweep"]["u_values"]:
            cell_config = json.loads(json.dumps(config))
            cell_config["model"]["U"] = float(U)
            cell_config["model"]["eta"] = float(eta)
            cell_dir = out / f"U{U:g}_eta{eta:g}"
            cells.append((cell_config, str(cell_dir)))

    index = []
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_cell, cells))
    else:
        results = [_sweep_cell(cell) for cell in cells]
    # single writer: the parent alone appends to the index
    for (cell_config, cell_dir), result in zip(cells, results):
        index.append({
            "U": cell_config["model"]["U"],
            "eta": cell_config["model"]["eta"],
            "directory": os.path.basename(cell_dir),
            "n_ados": result["n_ados"],
        })
    write_manifest(
        out / "sweep_meta.json", "sweep", config,
        [entry["directory"] for entry in index],
        time.time() - start, extra={"cells": index},
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hhdyn",
        description="Open-system dynamics of a two-site Hubbard-Holstein molecule",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="TOML configuration file")
        p.add_argument("--out", help="output directory "
                       f"(default ${DEFAULT_OUTPUT_ENV} or ./hhdyn_out)")
        p.add_argument("--jobs", type=int, default=1,
                       help="concurrent cells for batch commands")
        p.add_argument("--override", action="append", default=[],
                       metavar="SECTION.KEY=VALUE",
                       help="configuration override (repeatable)")

    p = sub.add_parser("propagate", help="run one HEOM cell")
    common(p)
    p.set_defaults(func=cmd_propagate)

    p = sub.add_parser("fit", help="fit timescales of saved trajectories")
    common(p)
    p.add_argument("trajectories", nargs="*", help="trajectory.csv paths")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("refmodel", help="surfaces, couplings, correlation energy")
    common(p)
    p.set_defaults(func=cmd_refmodel)

    p = sub.add_parser("check", help="run the invariant battery")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("sweep", help="grid of propagate cells over (U, eta)")
    common(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (heom.TruncationFailureError, heom.StateToleranceError,
            refmodels.ContinuationError, ValueError, MemoryError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
