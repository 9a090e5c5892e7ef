"""Reproducible experiment runner.

Subcommands: couplings, modes, spectrum, storage, decoherence, verify.
Each run writes its numeric artifacts (CSV with a header row, pretty
JSON) plus a manifest.json carrying every parameter, the seed, library
versions and wall time, so any number in the outputs can be regenerated
from the manifest alone.  Artifacts are written once, after all results
are computed.  Identical config and seed reproduce identical numeric
artifact bytes (floats are printed with 17 significant digits).

A JSON config file may supply any subset of the flag values (keys named
like the long flags, dashes replaced by underscores); explicit flags win.
The environment variable NUCMEM_OUT_ROOT relocates the output root.

Exit codes: 0 success, 1 verify failures, 2 invalid configuration,
3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from . import couplings as cp
from . import decoherence as dc
from . import dynamics as dyn
from . import fockspace as fs
from . import hamiltonian as ham
from . import spectra as spec
from . import verify as verify_mod
from .errors import (
    InvalidArgumentError,
    ProfileGenerationError,
    ResourceCapError,
)


def _fmt(x) -> str:
    return f"{x:.17g}"


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise InvalidArgumentError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f"config file is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise InvalidArgumentError("config root must be a JSON object")
    return data


def _merge_config(args: argparse.Namespace, parser_defaults: dict) -> dict:
    """File values fill in wherever the flag was left at its default."""
    cfg = _load_config(getattr(args, "config", None))
    merged = {}
    for key, default in parser_defaults.items():
        cli_value = getattr(args, key)
        if cli_value != default:
            merged[key] = cli_value
        elif key in cfg:
            merged[key] = cfg[key]
        else:
            merged[key] = default
    unknown = set(cfg) - set(parser_defaults) - {"experiment"}
    if unknown:
        raise InvalidArgumentError(
            f"unknown config field(s): {', '.join(sorted(unknown))}")
    return merged


def _out_dir(options: dict, experiment: str) -> Path:
    root = Path(os.environ.get("NUCMEM_OUT_ROOT", "."))
    sub = options.get("out") or f"runs/{experiment}"
    path = root / sub
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_manifest(out: Path, experiment: str, options: dict,
                    artifacts: list, started: float) -> None:
    manifest = {
        "experiment": experiment,
        "options": {k: v for k, v in options.items()},
        "artifacts": sorted(artifacts),
        "versions": {
            "nucmem": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
        "wall_time_s": time.perf_counter() - started,
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _profile_from_options(o: dict) -> cp.CouplingProfile:
    kind = o["kind"]
    kwargs = dict(g0=o["g0"], seed=o["seed"])
    if kind == "gaussian":
        kwargs.update(center=o["center"], width=o["width"], jitter=o["jitter"])
    elif kind == "uniform":
        kwargs.update(low=o["low"], high=o["high"])
    return cp.generate_profile(kind, o["N"], **kwargs)


def _model_params(o: dict, profile: cp.CouplingProfile) -> ham.ModelParams:
    return ham.tune_resonance(ham.ModelParams(
        profile=profile, I0=o["I0"], omega_z=o["omega_z"], Omega_z=0.0))


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

def run_couplings(o: dict) -> int:
    started = time.perf_counter()
    profile = _profile_from_options(o)
    report = cp.homogeneity_metrics(profile, o["threshold_max"], o["threshold_dev"])
    out = _out_dir(o, "couplings")
    profile.write_csv(out / "profile.csv")
    (out / "profile.json").write_text(profile.to_json() + "\n")
    with open(out / "homogeneity.json", "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_manifest(out, "couplings", o,
                    ["profile.csv", "profile.json", "homogeneity.json"], started)
    print(f"ratio_max = {report.ratio_max:.6g} (ok: {report.max_ratio_ok}), "
          f"ratio_dev = {report.ratio_dev:.6g} (ok: {report.dev_ratio_ok})")
    print(f"artifacts in {out}")
    return 0


def run_modes(o: dict) -> int:
    started = time.perf_counter()
    profile = _profile_from_options(o)
    modes = cp.gram_schmidt_modes(profile)
    gram_dev = float(np.abs(modes.h @ modes.h.T - np.eye(modes.N)).max())
    out = _out_dir(o, "modes")
    with open(out / "modes.csv", "w") as fh:
        fh.write("k," + ",".join(f"h_{j}" for j in range(1, modes.N + 1)) + "\n")
        for k in range(1, modes.N + 1):
            fh.write(f"{k}," + ",".join(_fmt(v) for v in modes.vector(k)) + "\n")
    artifacts = ["modes.csv", "orthogonality.json"]
    summary = {"N": modes.N, "max_gram_deviation": gram_dev}
    if profile.N % 2 == 0:
        h = cp.permutation_mode(profile)
        with open(out / "permutation_mode.csv", "w") as fh:
            fh.write("j,h_j\n")
            for j, v in enumerate(h, start=1):
                fh.write(f"{j},{_fmt(v)}\n")
        summary["permutation_overlap"] = float(h @ profile.g)
        artifacts.append("permutation_mode.csv")
    with open(out / "orthogonality.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_manifest(out, "modes", o, artifacts, started)
    print(f"max Gram deviation {gram_dev:.3e}; artifacts in {out}")
    return 0


def run_spectrum(o: dict) -> int:
    started = time.perf_counter()
    profile = _profile_from_options(o)
    params = _model_params(o, profile)
    basis = fs.enumerate_subspace(o["N"], o["I0"], o["n"], dim_cap=o["dim_cap"])
    exchange = ham.build_site_exchange(params, basis)
    exact = spec.eigensolve(exchange, dim_cap=o["dim_cap"], scale=params.rabi)
    effective = spec.effective_spectrum(params, o["n"])
    tol = o["cluster_tol_ratio"] * params.rabi
    comparison = spec.compare_spectra(exact, effective, cluster_tol=tol)
    out = _out_dir(o, "spectrum")
    exact.write_csv(out / "exact_spectrum.csv")
    effective.write_csv(out / "effective_spectrum.csv")
    (out / "comparison.json").write_text(comparison.to_json() + "\n")
    _write_manifest(out, "spectrum", o,
                    ["exact_spectrum.csv", "effective_spectrum.csv",
                     "comparison.json"], started)
    print(f"dims exact/effective: {exact.dim}/{effective.dim}, "
          f"max cluster deviation {comparison.max_rel_dev:.4%} of Omega, "
          f"dimension mismatch {comparison.dimension_mismatch}")
    print(f"artifacts in {out}")
    return 0


def run_storage(o: dict) -> int:
    started = time.perf_counter()
    profile = _profile_from_options(o)
    params = _model_params(o, profile)
    try:
        qubit = dyn.QubitState.make(complex(o["alpha"]), complex(o["beta"]))
    except ValueError:
        raise InvalidArgumentError(
            f"alpha/beta must parse as complex numbers, got {o['alpha']!r}, {o['beta']!r}")
    t_star = dyn.write_time(params)
    m_list = [int(v) for v in str(o["m_list"]).split(",") if v != ""]
    t_grid = np.linspace(0.0, o["t_max_periods"] * t_star, o["t_steps"])
    rows = dyn.storage_error_sweep(params, qubit, m_list, t_grid)
    result = dyn.write_qubit(params, qubit)
    summary = {
        "write_time": t_star,
        "write_fidelity": result.write_fidelity,
        "decode_fidelity": result.decode_fidelity,
        "leakage": result.leakage,
    }
    if o["exact"]:
        outcome = dyn.write_qubit_exact(params, qubit)
        summary["exact_vs_effective_fidelity"] = outcome.fidelity
        summary["exact_vs_effective_trace_distance"] = outcome.trace_distance
        summary["exact_down_probability"] = outcome.down_probability
    out = _out_dir(o, "storage")
    dyn.write_sweep_csv(rows, out / "storage_sweep.csv")
    with open(out / "protocol.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_manifest(out, "storage", o,
                    ["storage_sweep.csv", "protocol.json"], started)
    print(f"write fidelity {result.write_fidelity:.12f}, "
          f"decode fidelity {result.decode_fidelity:.12f}")
    if o["exact"]:
        print(f"exact-model agreement: fidelity {summary['exact_vs_effective_fidelity']:.10f}, "
              f"trace distance {summary['exact_vs_effective_trace_distance']:.3e}")
    print(f"artifacts in {out}")
    return 0


def run_decoherence(o: dict) -> int:
    started = time.perf_counter()
    try:
        nx, nt = (int(v) for v in str(o["grid"]).lower().split("x"))
    except ValueError:
        raise InvalidArgumentError(f"grid must look like 100x100, got {o['grid']!r}")
    params = dc.ThermalParams(N=o["N"], omega_z=o["omega_z"], g=o["g"],
                              kB_T=o["omega_z"] / o["x_max"])
    curve = dc.surface_grid(
        params,
        t_range=(0.0, o["gt_max"] / params.g),
        x_range=(o["x_min"], o["x_max"]),
        steps=(nx, nt))
    out = _out_dir(o, "decoherence")
    curve.write_csv(out / "surface.csv")
    _write_manifest(out, "decoherence", o, ["surface.csv"], started)
    print(f"{nx}x{nt} surface for N={o['N']}; min D = {curve.D.min():.3e}; "
          f"artifacts in {out}")
    return 0


def run_verify(o: dict) -> int:
    results = verify_mod.run_all(seed=o["seed"] if o["seed"] is not None else 0)
    failed = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: {r.detail}")
        failed += 0 if r.passed else 1
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_profile_flags(p: argparse.ArgumentParser, default_kind="gaussian",
                       default_n=80):
    p.add_argument("--N", type=int, default=default_n, help="ensemble size")
    p.add_argument("--kind", default=default_kind, choices=cp.PROFILE_KINDS,
                   help="coupling profile kind")
    p.add_argument("--g0", type=float, default=1.0, help="coupling scale")
    p.add_argument("--center", type=float, default=None,
                   help="gaussian envelope center (default N/2)")
    p.add_argument("--width", type=float, default=None,
                   help="gaussian envelope width (default N/4)")
    p.add_argument("--jitter", type=float, default=0.0,
                   help="relative jitter on the gaussian envelope")
    p.add_argument("--low", type=float, default=0.5, help="uniform lower bound")
    p.add_argument("--high", type=float, default=1.5, help="uniform upper bound")
    p.add_argument("--seed", type=int, default=None, help="seed for random kinds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nucmem",
        description="Nuclear-ensemble quantum memory: exact and effective-model studies")
    sub = parser.add_subparsers(dest="experiment", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--out", default=None, help="output directory")

    p = sub.add_parser("couplings", help="profile statistics and homogeneity checks")
    common(p)
    _add_profile_flags(p, default_kind="homogeneous", default_n=100)
    p.add_argument("--threshold-max", dest="threshold_max", type=float,
                   default=cp.DEFAULT_THRESHOLD_MAX)
    p.add_argument("--threshold-dev", dest="threshold_dev", type=float,
                   default=cp.DEFAULT_THRESHOLD_DEV)

    p = sub.add_parser("modes", help="orthonormal collective mode family")
    common(p)
    _add_profile_flags(p, default_kind="gaussian", default_n=16)

    p = sub.add_parser("spectrum", help="exact vs effective spectrum on V_n")
    common(p)
    _add_profile_flags(p, default_kind="gaussian", default_n=80)
    p.add_argument("--I0", type=float, default=0.5, help="nuclear spin")
    p.add_argument("--n", type=int, default=1, help="excitation sector")
    p.add_argument("--omega-z", dest="omega_z", type=float, default=1.0)
    p.add_argument("--cluster-tol-ratio", dest="cluster_tol_ratio", type=float,
                   default=spec.DEFAULT_CLUSTER_TOL_RATIO)
    p.add_argument("--dim-cap", dest="dim_cap", type=int, default=spec.DEFAULT_DENSE_CAP)

    p = sub.add_parser("storage", help="qubit write map and systematic errors")
    common(p)
    _add_profile_flags(p, default_kind="homogeneous", default_n=100)
    p.add_argument("--I0", type=float, default=0.5)
    p.add_argument("--omega-z", dest="omega_z", type=float, default=1.0)
    p.add_argument("--alpha", default="0.7071067811865476")
    p.add_argument("--beta", default="0.7071067811865476")
    p.add_argument("--m-list", dest="m_list", default="0,1,2",
                   help="memory occupations to sweep")
    p.add_argument("--t-steps", dest="t_steps", type=int, default=41)
    p.add_argument("--t-max-periods", dest="t_max_periods", type=float, default=4.0,
                   help="sweep end in units of the write time")
    p.add_argument("--exact", action=argparse.BooleanOptionalAction, default=True,
                   help="also run the exact-ensemble comparison")

    p = sub.add_parser("decoherence", help="thermal dephasing surface D(T, t)")
    common(p)
    p.add_argument("--N", type=int, default=20)
    p.add_argument("--omega-z", dest="omega_z", type=float, default=1.0)
    p.add_argument("--g", type=float, default=1.0)
    p.add_argument("--grid", default="100x100", help="surface resolution, e.g. 100x100")
    p.add_argument("--x-min", dest="x_min", type=float, default=0.1)
    p.add_argument("--x-max", dest="x_max", type=float, default=10.0)
    p.add_argument("--gt-max", dest="gt_max", type=float, default=4.0 * np.pi)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("verify", help="run the invariant/property suite")
    p.add_argument("--config", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=0)

    return parser


_RUNNERS = {
    "couplings": run_couplings,
    "modes": run_modes,
    "spectrum": run_spectrum,
    "storage": run_storage,
    "decoherence": run_decoherence,
    "verify": run_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    experiment = args.experiment
    defaults = {
        k: parser._subparsers._group_actions[0].choices[experiment].get_default(k)
        for k in vars(args) if k != "experiment"
    }
    try:
        options = _merge_config(args, defaults)
        return _RUNNERS[experiment](options)
    except ResourceCapError as exc:
        print(f"resource cap exceeded: {exc}", file=sys.stderr)
        return 3
    except (InvalidArgumentError, ProfileGenerationError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
