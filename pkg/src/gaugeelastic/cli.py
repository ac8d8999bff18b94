"""
Command line entry point.

    gaugeelastic simulate|homogenize|verify --config FILE [--out DIR] [--suite NAME]

Exit codes: 0 success, 1 a verification check failed, 2 configuration error,
3 runtime error.  Every failure also leaves ``failure.json`` in the output
directory.  ``GAUGEELASTIC_THREADS`` caps the BLAS/OpenMP thread count; the
numerics are single-threaded per operation, so results do not depend on it.
"""

from __future__ import annotations

import argparse
import os
import sys
import traceback

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


def _apply_thread_env():
    n = os.environ.get("GAUGEELASTIC_THREADS")
    if n:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, n)


# ---------------------------------------------------------------------------
# simulate


def _material(cfg, grid):
    import numpy as np

    from .expressions import parse_expression, sample
    from .fields import MaterialModel

    m = cfg["material"]
    if m["file"] is not None:
        data = np.load(cfg.resolve(m["file"]))
        return MaterialModel(np.asarray(data["C"], float), np.asarray(data["rho"], float))

    def field_of(v):
        return sample(parse_expression(v, grid.dim), grid)

    rho = field_of(m["rho"])
    if grid.dim == 1:
        C = field_of(m["C"])
        return MaterialModel(C[None, None, None, None], rho[None, None])
    return MaterialModel.isotropic(field_of(m["lambda"]), field_of(m["mu"]), rho, grid)


def build_simulation(cfg):
    """Grid, model and initial fields described by a ``simulate`` config."""
    import numpy as np

    from .expressions import (prestate_from_expressions, prestate_from_stress_expressions,
                              sample_components)
    from .fields import BodyForceModel, GridSpec, PreState
    from .solver import ElastodynamicModel, SolverConfig, stability_estimate

    g = cfg["grid"]
    grid = GridSpec.uniform(g["dim"], g["n"], g["length"], bc=g["bc"], dt=1.0,
                            n_steps=g["n_steps"])
    mat = _material(cfg, grid)
    dt = g["dt"] if g["dt"] is not None else stability_estimate(mat, grid, cfg["solver"]["cfl"])
    grid = grid.with_dt(float(dt))
    ps_cfg = cfg["prestate"]
    if ps_cfg["u0"] is not None:
        ps = prestate_from_expressions(ps_cfg["u0"], mat, grid, ps_cfg["t0"])
    elif ps_cfg["sigma0"] is not None:
        ps = prestate_from_stress_expressions(ps_cfg["sigma0"], ps_cfg["v0"], grid)
    else:
        ps = PreState.zero(grid)
    model = ElastodynamicModel(cfg["variant"], mat, ps, grid)
    d = grid.dim
    ini = cfg["initial"]
    u = sample_components(ini["u"], grid) if ini["u"] is not None else np.zeros((d,) + grid.shape)
    v = sample_components(ini["v"], grid) if ini["v"] is not None else np.zeros((d,) + grid.shape)
    if ini["noise"]:
        rng = np.random.default_rng(cfg["seed"])
        u = u + ini["noise"] * rng.standard_normal(u.shape)
    src = cfg["source"]
    source = BodyForceModel()
    if src["type"] == "ricker":
        source = BodyForceModel.point_source(grid, tuple(src["node"]), src["component"],
                                             src["amplitude"], src["f_peak"], src["t0"])
    solver = SolverConfig(cfg["solver"]["cfl"], source, tuple(cfg["solver"]["monitors"]),
                          cfg["solver"]["record_every"])
    return grid, model, u, v, solver


def run_simulate(cfg, out_dir):
    import numpy as np

    from .io import write_csv
    from .solver import simulate

    grid, model, u, v, solver = build_simulation(cfg)
    traj = simulate(model, u, v, solver, grid.n_steps)
    meta = {"config_sha256": cfg.digest()}
    times = np.array([s.t for s in traj.snapshots[1:]])
    steps = np.array(traj.steps[1:], float)
    for name, series in traj.monitors.items():
        write_csv(os.path.join(out_dir, f"monitor_{name}.csv"), ["step", "time", "value"],
                  np.column_stack([steps[:len(series)], times[:len(series)], series]), meta)
    if cfg["output"]["snapshots"]:
        coords = [c.ravel() for c in grid.coords()]
        names = ["x", "y"][: grid.dim]
        comp = [f"u{i}" for i in range(grid.dim)] + [f"v{i}" for i in range(grid.dim)]
        for step, snap in zip(traj.steps, traj.snapshots):
            cols = coords + [c.ravel() for c in snap.u] + [c.ravel() for c in snap.udot]
            write_csv(os.path.join(out_dir, f"snapshot_{step:06d}.csv"), names + comp,
                      np.column_stack(cols), dict(meta, step=step, time=snap.t))
    with open(os.path.join(out_dir, "report.txt"), "w", encoding="utf-8") as fh:
        fh.write(f"variant {cfg['variant']}, grid {grid.n}, dt {grid.dt:.17g}, "
                 f"steps {grid.n_steps}\n")
        for name, series in traj.monitors.items():
            if len(series):
                fh.write(f"{name}: first {series[0]:.17g} last {series[-1]:.17g}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# homogenize


def build_laminate(cfg):
    from .homogenizer import LaminateSpec, Phase

    lam = cfg["laminate"]
    comp = tuple(lam["comparison"]) if lam["comparison"] is not None else None
    return LaminateSpec(lam["cell_length"],
                        [Phase(p["C"], p["rho"], p["fraction"]) for p in lam["phases"]],
                        comp, lam["offset"])


HOMOGENIZE_COLUMNS = ["omega", "q", "Re_Ceff", "Im_Ceff", "Re_rhoeff", "Im_rhoeff",
                      "Re_Seff", "Im_Seff", "Re_Shat", "Im_Shat", "condition"]


def run_homogenize(cfg, out_dir):
    import numpy as np

    from .homogenizer import BlochPoint, effective_dispersion, effective_operators
    from .io import write_csv

    lam = build_laminate(cfg)
    sw = cfg["sweep"]
    omegas = np.linspace(sw["omega_start"], sw["omega_stop"], sw["n_omega"])
    rows = []
    for w in omegas:
        op = effective_operators(lam, BlochPoint(float(w), sw["q"], sw["n_harmonics"]))
        rows.append([w, sw["q"], op.Ceff.real, op.Ceff.imag, op.rhoeff.real, op.rhoeff.imag,
                     op.Seff.real, op.Seff.imag, op.Shat.real, op.Shat.imag, op.condition])
    meta = {"config_sha256": cfg.digest(), "comparison": list(lam.comparison)}
    write_csv(os.path.join(out_dir, "effective_operators.csv"), HOMOGENIZE_COLUMNS, rows, meta)
    if sw["dispersion"]:
        table = effective_dispersion(lam, omegas[omegas > 0], sw["n_harmonics"])
        write_csv(os.path.join(out_dir, "dispersion.csv"), ["omega", "q", "v_phase", "gap"],
                  [[r.omega, r.q, r.v_phase, float(r.gap)] for r in table], meta)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def run_verify(cfg, out_dir, suites=None):
    from .checks import SUITES
    from .io import write_json

    names = suites or cfg["suites"]
    bad = [s for s in names if s not in SUITES]
    if bad:
        raise KeyError(f"unknown suite(s) {bad}; available: {sorted(SUITES)}")
    results, seen = [], set()
    for s in names:
        for fn in SUITES[s]:
            if fn.__name__ in seen:
                continue
            seen.add(fn.__name__)
            res = fn()
            results.append((s, res))
            print(res.line(), flush=True)
    n_pass = sum(r.passed for _, r in results)
    summary = f"{n_pass}/{len(results)} checks passed"
    print(summary)
    write_json(os.path.join(out_dir, "verify_report.json"), {
        "config_sha256": cfg.digest(),
        "summary": {"passed": n_pass, "failed": len(results) - n_pass},
        "checks": [{"suite": s, "name": r.name, "relation": r.relation,
                    "measured": r.measured, "tolerance": r.tolerance, "passed": r.passed,
                    "details": r.details} for s, r in results],
    })
    with open(os.path.join(out_dir, "verify_report.txt"), "w", encoding="utf-8") as fh:
        # timings vary between runs, so the text report leaves them out
        for _, r in results:
            fh.write(r.line().rsplit(" [", 1)[0] + "\n")
        fh.write(summary + "\n")
    return EXIT_OK if n_pass == len(results) else EXIT_CHECK


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="gaugeelastic",
                                description="Inhomogeneous elastodynamics: simulation, "
                                            "laminate homogenization and verification.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("simulate", "time-domain run of one equation family"),
                        ("homogenize", "effective operators of a periodic laminate"),
                        ("verify", "run verification suites")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="YAML config file (verify falls back to defaults)",
                        required=name != "verify")
        sp.add_argument("--out", help="output directory (overrides output.dir)")
        if name == "verify":
            sp.add_argument("--suite", action="append",
                            help="suite to run; may be repeated (overrides the config)")
    return p


def main(argv=None):
    _apply_thread_env()
    args = build_parser().parse_args(argv)
    from .config import ConfigError, default_config, parse_config

    out_dir = args.out or "out"
    try:
        if args.config:
            cfg = parse_config(args.config, expect_mode=args.command)
        else:
            cfg = default_config(args.command)
        out_dir = args.out or cfg["output"]["dir"]
        if not os.path.isabs(out_dir) and args.out is None and args.config:
            out_dir = cfg.resolve(out_dir)
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "config.canonical.yaml"), "w", encoding="utf-8") as fh:
            fh.write(cfg.canonical())
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        _failure(out_dir, "config", exc, [list(e) for e in exc.errors])
        return EXIT_CONFIG
    try:
        if args.command == "simulate":
            return run_simulate(cfg, out_dir)
        if args.command == "homogenize":
            return run_homogenize(cfg, out_dir)
        return run_verify(cfg, out_dir, args.suite)
    except Exception as exc:  # noqa: BLE001  every runtime failure maps to exit 3
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        _failure(out_dir, "runtime", exc, traceback.format_exc().splitlines())
        return EXIT_RUNTIME


def _failure(out_dir, kind, exc, details):
    from .io import write_json

    try:
        os.makedirs(out_dir, exist_ok=True)
        write_json(os.path.join(out_dir, "failure.json"),
                   {"kind": kind, "error": type(exc).__name__, "message": str(exc),
                    "details": details})
    except OSError:
        pass


if __name__ == "__main__":
    sys.exit(main())
