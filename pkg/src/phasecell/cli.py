"""Command-line entry point: ``phasecell <group> <command> [flags]``.

Exit codes: 0 success, 2 usage error, 1 domain/numeric error (a JSON object
describing it goes to stderr).
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__, hermite, io, kg_field, peano, phase_maps, svg
from .quadrature import gauss_hermite

log = logging.getLogger("phasecell")

THREADS_ENV = "PHASECELL_THREADS"


class _Outputs:
    """Collects written files so a run manifest can checksum them."""

    def __init__(self):
        self.paths: list[Path] = []

    def write(self, path, text: str, stdout=None):
        if path is None or str(path) == "-":
            (stdout or sys.stdout).write(text)
            return
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        self.paths.append(path)

    def svg(self, path, **geometry):
        text = svg.render_svg(**geometry)
        self.write(path, text)


# ---------------------------------------------------------------------------
# peano


def _peano_approx(args, out):
    curve = peano.build_approximant(args.level)
    idx = np.arange(curve.n_segments + 1)
    verts = curve.vertices
    out.write(args.out, io.csv_text(["index", "u", "x", "y"], [idx, curve.breakpoints, verts[:, 0], verts[:, 1]]))
    if args.svg:
        out.svg(args.svg, polyline=verts)


def _peano_distance(args, out):
    d = peano.sup_distance(args.level)
    bound = peano.sup_distance_bound(args.level)
    out.write(args.out, io.dumps({"level": args.level, "sup_distance": d, "bound": bound, "satisfied": d <= bound}) + "\n")


def _peano_coverage(args, out):
    out.write(args.out, io.dumps(peano.coverage(args.level).as_dict()) + "\n")


def _peano_limit(args, out):
    point, radius, level = peano.limit_point(args.u, args.tol)
    out.write(args.out, io.dumps({"u": args.u, "x": point[0], "y": point[1], "radius": radius, "level": level}) + "\n")


# ---------------------------------------------------------------------------
# basis


def _k_values(args):
    if args.k:
        return np.asarray(args.k, dtype=float)
    return np.linspace(args.kmin, args.kmax, args.num)


def _basis_xi(args, out):
    k = _k_values(args)
    table = hermite.xi_table(args.nmax, k)
    n_col = np.repeat(np.arange(args.nmax + 1), k.size)
    k_col = np.tile(k, args.nmax + 1)
    flat = table.reshape(-1)
    out.write(args.out, io.csv_text(["n", "k", "re", "im"], [n_col, k_col, flat.real, flat.imag]))


def _basis_orthocheck(args, out):
    order = args.order or max(args.nmax + 1, 2 * args.nmax)
    report = hermite.orthonormality_matrix(args.nmax, gauss_hermite(order))
    out.write(args.out, io.dumps(report.as_dict()) + "\n")


# ---------------------------------------------------------------------------
# phase


def _grid(text: str):
    try:
        gx, gy = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like GxG, got {text!r}") from None
    if gx < 2 or gy < 2:
        raise argparse.ArgumentTypeError("grid needs at least 2 points per side")
    return gx, gy


def _interval(text: str):
    try:
        a, b = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"interval must look like a,b, got {text!r}") from None
    return a, b


def _phase_map(args, out):
    gx, gy = args.grid
    x, y = np.meshgrid(np.linspace(0, 1, gx), np.linspace(0, 1, gy), indexing="ij")
    x, y = x.ravel(), y.ravel()
    q, p = phase_maps.composite_map(args.M, args.n, x, y)
    out.write(args.out, io.csv_text(["x", "y", "q", "p"], [x, y, q, p]))
    if args.svg:
        out.svg(args.svg, circles=svg.annulus_boundaries(args.M, args.n))


def _phase_area(args, out):
    report = phase_maps.areas(args.M, args.n, samples=args.samples, seed=args.seed)
    out.write(args.out, io.dumps(report.as_dict()) + "\n")


def _phase_winding(args, out):
    w = phase_maps.winding_number(args.M, args.n, args.x)
    out.write(args.out, io.dumps({"M": args.M, "n": args.n, "x": args.x, "winding_number": w}) + "\n")


def _phase_torus(args, out):
    torus = phase_maps.hyper_torus(args.n1, args.n2, args.n3, args.samples)
    payload = {
        "n": list(torus.ns),
        "radii": list(torus.radii),
        "samples_per_circle": torus.samples_per_circle,
        "max_radius_sq_residual": float(torus.radius_sq_residuals().max()),
        "columns": ["q1", "p1", "q2", "p2", "q3", "p3"],
        "points": [list(row) for row in torus.points],
    }
    out.write(args.out, io.dumps(payload) + "\n")


def _phase_bundle(args, out):
    sample = phase_maps.bundle_sample(phase_maps.peano_circle(args.n), args.fibre, args.base_samples, args.fibre_samples)
    fibre_name = "t" if args.kind == "time" else "k"
    cols = [sample.base_index, sample.total[:, 0], sample.total[:, 1], sample.total[:, 2]]
    out.write(args.out, io.csv_text(["base_index", "q", "p", fibre_name], cols))


# ---------------------------------------------------------------------------
# kg


def _load_spec(path):
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValueError(f"cannot read spec file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValueError(f"spec file {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ValueError("spec file must hold a JSON object")
    return data


def _density(spec, key):
    return kg_field.SpectralDensity.from_dict(spec.get(key), key)


def _kg_residual(args, out):
    k = np.asarray(args.k, dtype=float)
    site = tuple(args.n)
    if len(site) != args.d or k.size != args.d:
        raise ValueError(f"--n and --k need exactly d={args.d} values each")
    res = kg_field.kg_residual_mode(site, k, args.m, args.t, args.sign)
    norm = kg_field.mode_normalization(args.m, k)
    payload = {
        "d": args.d,
        "n": list(site),
        "k": list(k),
        "m": args.m,
        "t": args.t,
        "sign": args.sign,
        "omega": kg_field.omega(args.m, k),
        "residual_re": res.real,
        "residual_im": res.imag,
        "residual_abs": abs(res),
        "normalization": norm,
        "within_tolerance": abs(res) <= 1e-10 * norm,
    }
    out.write(args.out, io.dumps(payload) + "\n")


def _kg_synth(args, out):
    spec = _load_spec(args.spec)
    d = int(spec.get("d", 1))
    field = kg_field.synthesize(
        _density(spec, "A"), _density(spec, "B"), d, args.nmax, float(spec.get("m", 1.0)), args.t,
        kg_field.QuadConfig.from_dict(spec.get("quad")),
    )
    idx = np.indices(field.values.shape).reshape(d, -1)
    flat = field.values.reshape(-1)
    header = [f"n{a + 1}" for a in range(d)] + ["re", "im"]
    out.write(args.out, io.csv_text(header, [*idx, flat.real, flat.imag]))


def _kg_observables(args, out):
    spec = _load_spec(args.spec)
    obs = kg_field.observables(
        _density(spec, "Nplus"), _density(spec, "Nminus"), float(spec.get("m", 0.0)), int(spec.get("d", 1)),
        kg_field.QuadConfig.from_dict(spec.get("quad")),
    )
    out.write(args.out, io.dumps(obs.as_dict()) + "\n")


# ---------------------------------------------------------------------------
# pipeline


PIPELINE_SPECS = {
    "gauss_d1.json": {
        "m": 0.0,
        "d": 1,
        "Nplus": {"family": "gaussian", "params": {"center": 0.0, "width": 1.0, "amplitude": 1.0}},
        "Nminus": {"family": "zero", "params": {}},
        "A": {"family": "gaussian", "params": {"center": 0.0, "width": 1.0, "amplitude": 1.0}},
        "B": {"family": "zero", "params": {}},
        "quad": {"kind": "gauss-legendre", "order": 64, "K": 8.0},
    },
    "gauss_d3.json": {
        "m": 0.0,
        "d": 3,
        "Nplus": {"family": "gaussian", "params": {"center": [0.0, 0.0, 0.0], "width": [1.0, 1.0, 1.0], "amplitude": 1.0}},
        "Nminus": {"family": "zero", "params": {}},
        "A": {"family": "gaussian", "params": {"center": [0.5, 0.0, -0.5], "width": [1.0, 1.0, 1.0], "amplitude": [1.0, 0.5]}},
        "B": {"family": "box", "params": {"center": 0.0, "width": 1.0, "amplitude": 0.25}},
        "quad": {"kind": "gauss-legendre", "order": 64, "K": 8.0},
    },
}


def _pipeline_commands(outdir: Path, seed: int):
    o = lambda name: str(outdir / name)  # noqa: E731
    cmds = []
    for j in (1, 2, 3):
        cmds.append(["peano", "approx", "--level", str(j), "--out", o(f"peano_approx_{j}.csv"), "--svg", o(f"peano_approx_{j}.svg")])
    for j in range(1, 7):
        cmds.append(["peano", "distance", "--level", str(j), "--out", o(f"peano_distance_{j}.json")])
        cmds.append(["peano", "coverage", "--level", str(j), "--out", o(f"peano_coverage_{j}.json")])
    cmds.append(["basis", "xi", "--nmax", "8", "--kmin", "-4", "--kmax", "4", "--num", "17", "--out", o("basis_xi.csv")])
    cmds.append(["basis", "orthocheck", "--nmax", "40", "--order", "60", "--out", o("basis_orthocheck.json")])
    for M, n in ((1, 0), (2, 1), (5, 3), (10, 0)):
        tag = f"M{M}_n{n}"
        cmds.append(["phase", "map", "--M", str(M), "--n", str(n), "--grid", "16x16", "--out", o(f"phase_map_{tag}.csv"), "--svg", o(f"annulus_{tag}.svg")])
        cmds.append(["--seed", str(seed), "phase", "area", "--M", str(M), "--n", str(n), "--out", o(f"phase_area_{tag}.json")])
        cmds.append(["phase", "winding", "--M", str(M), "--n", str(n), "--x", "0.5", "--out", o(f"phase_winding_{tag}.json")])
    cmds.append(["phase", "torus", "--n1", "0", "--n2", "0", "--n3", "0", "--samples", "4", "--out", o("torus_000.json")])
    cmds.append(["phase", "torus", "--n1", "1", "--n2", "2", "--n3", "3", "--samples", "6", "--out", o("torus_123.json")])
    cmds.append(["phase", "bundle", "--n", "0", "--fibre", "0,1", "--kind", "time", "--out", o("bundle_time.csv")])
    cmds.append(["phase", "bundle", "--n", "0", "--fibre=-2,2", "--kind", "momentum", "--out", o("bundle_momentum.csv")])
    cmds.append(["kg", "residual", "--d", "1", "--n", "3", "--k", "0.7", "--m", "1", "--t", "0.4", "--out", o("kg_residual_d1.json")])
    cmds.append(["kg", "residual", "--d", "3", "--n", "4", "5", "6", "--k", "0.3", "-0.2", "1.1", "--m", "0.5", "--t", "0.4", "--out", o("kg_residual_d3.json")])
    cmds.append(["kg", "synth", "--spec", o("gauss_d1.json"), "--t", "0.5", "--nmax", "30", "--out", o("kg_synth_d1.csv")])
    cmds.append(["kg", "synth", "--spec", o("gauss_d3.json"), "--t", "0.5", "--nmax", "6", "--out", o("kg_synth_d3.csv")])
    cmds.append(["kg", "observables", "--spec", o("gauss_d1.json"), "--out", o("kg_observables_d1.json")])
    cmds.append(["kg", "observables", "--spec", o("gauss_d3.json"), "--out", o("kg_observables_d3.json")])
    return cmds


def _pipeline(args, out):
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for name, spec in PIPELINE_SPECS.items():
        out.write(outdir / name, io.dumps(spec) + "\n")
    for argv in _pipeline_commands(outdir, args.seed):
        code = main(argv)
        if code != 0:
            raise RuntimeError(f"pipeline step failed with exit code {code}: {' '.join(argv)}")
    files = sorted(p for p in outdir.iterdir() if p.is_file() and p.name != "manifest.json")
    manifest = {
        "subcommand": "pipeline",
        "flags": {"outdir": ".", "seed": args.seed},
        "seed": args.seed,
        "version": __version__,
        "outputs": {p.name: io.sha256(p) for p in files},
    }
    out.write(outdir / "manifest.json", io.dumps(manifest) + "\n")


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phasecell", description="Peano curves, canonical phase maps and discrete Klein-Gordon fields.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", type=int, default=0, help="seed for every Monte-Carlo path (default 0)")
    parser.add_argument("--manifest", help="write a JSON run manifest with output checksums")
    parser.add_argument("-v", "--verbose", action="store_true")
    groups = parser.add_subparsers(dest="group", metavar="{peano,basis,phase,kg,pipeline}")
    groups.required = True

    def add(sub, name, func, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(func=func, command=name)
        return p

    def with_out(p, help_text="output file (default stdout)"):
        p.add_argument("--out", help=help_text)
        return p

    g = groups.add_parser("peano", help="pre-Peano approximants").add_subparsers(dest="cmd", metavar="{approx,distance,coverage,limit}")
    g.required = True
    p = with_out(add(g, "approx", _peano_approx, "vertices of f^j as CSV (index,u,x,y)"))
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--svg", help="also write the curve as SVG line art")
    p = with_out(add(g, "distance", _peano_distance, "exact sup distance between f^j and f^(j+1)"))
    p.add_argument("--level", type=int, required=True)
    p = with_out(add(g, "coverage", _peano_coverage, "fraction of level-j cells crossed by f^j"))
    p.add_argument("--level", type=int, required=True)
    p = with_out(add(g, "limit", _peano_limit, "approximate Peano point f(u) with certified radius"))
    p.add_argument("--u", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-6)

    g = groups.add_parser("basis", help="Hermite-function basis").add_subparsers(dest="cmd", metavar="{xi,orthocheck}")
    g.required = True
    p = with_out(add(g, "xi", _basis_xi, "xi_n(k) for n <= nmax as CSV (n,k,re,im)"))
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--k", type=float, nargs="+")
    p.add_argument("--kmin", type=float, default=-4.0)
    p.add_argument("--kmax", type=float, default=4.0)
    p.add_argument("--num", type=int, default=9)
    p = with_out(add(g, "orthocheck", _basis_orthocheck, "Gauss-Hermite orthonormality report"))
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--order", type=int)

    g = groups.add_parser("phase", help="canonical phase-space maps").add_subparsers(dest="cmd", metavar="{map,area,winding,torus,bundle}")
    g.required = True
    p = with_out(add(g, "map", _phase_map, "image of a grid on the unit square as CSV (x,y,q,p)"))
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--grid", type=_grid, default=(16, 16))
    p.add_argument("--svg", help="also write the annulus boundaries as SVG")
    p = with_out(add(g, "area", _phase_area, "geometric, covered and Monte-Carlo areas"))
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=int, default=1_000_000)
    p = with_out(add(g, "winding", _phase_winding, "winding number of a domain line"))
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--x", type=float, default=0.5)
    p = with_out(add(g, "torus", _phase_torus, "point cloud on a hyper-torus in R^6 (JSON)"))
    for name in ("--n1", "--n2", "--n3"):
        p.add_argument(name, type=int, required=True)
    p.add_argument("--samples", type=int, default=8)
    p = with_out(add(g, "bundle", _phase_bundle, "samples of Peano circle x fibre interval (CSV)"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--fibre", type=_interval, required=True, help="t0,t1 or K1,K2")
    p.add_argument("--kind", choices=("time", "momentum"), default="time")
    p.add_argument("--base-samples", type=int, default=16)
    p.add_argument("--fibre-samples", type=int, default=4)

    g = groups.add_parser("kg", help="discrete Klein-Gordon field").add_subparsers(dest="cmd", metavar="{residual,synth,observables}")
    g.required = True
    p = with_out(add(g, "residual", _kg_residual, "single-mode field-equation residual (JSON)"))
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.add_argument("--k", type=float, nargs="+", required=True)
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--sign", choices=("-", "+"), default="-")
    p = with_out(add(g, "synth", _kg_synth, "Fourier-Hermite synthesis of Phi(n;t) as CSV"))
    p.add_argument("--spec", required=True)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--nmax", type=int, default=30)
    p = with_out(add(g, "observables", _kg_observables, "energy, momentum and charge (JSON)"))
    p.add_argument("--spec", required=True)

    p = groups.add_parser("pipeline", help="regenerate every output into a directory", description="regenerate every output into a directory")
    p.set_defaults(func=_pipeline, command="pipeline", cmd=None)
    p.add_argument("--outdir", required=True)
    return parser


def _thread_limit():
    raw = os.environ.get(THREADS_ENV, "0")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError(f"{THREADS_ENV} must be >= 0")
    if n == 0:
        return contextlib.nullcontext()
    return threadpool_limits(limits=n)


def _error(kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return 1


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    out = _Outputs()
    try:
        with _thread_limit(), np.errstate(all="raise", under="ignore"):
            args.func(args, out)
    except kg_field.DegenerateModeError as exc:
        return _error("degenerate-mode", str(exc))
    except phase_maps.DomainError as exc:
        return _error("domain", str(exc))
    except (ValueError, IndexError, ArithmeticError, RuntimeError) as exc:
        return _error(type(exc).__name__, str(exc))
    if args.manifest:
        flags = {k: v for k, v in vars(args).items() if k not in ("func", "manifest") and v is not None}
        manifest = {
            "subcommand": " ".join(filter(None, [args.group, getattr(args, "cmd", None)])),
            "flags": {k: (list(v) if isinstance(v, tuple) else v) for k, v in flags.items()},
            "seed": args.seed,
            "version": __version__,
            "outputs": {str(p): io.sha256(p) for p in out.paths},
        }
        Path(args.manifest).write_text(io.dumps(manifest) + "\n", encoding="utf-8")
    return 0


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
