"""Command line front end: ``suctionflow <subcommand> ...``.

Exit codes: 0 success, 2 invalid input or configuration, 3 Picard
non-convergence, 4 numerical failure (divergent integral, failed check,
regression mismatch).
"""

from __future__ import annotations

import argparse
import json
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import __version__
from .errors import ConfigError, ConvergenceError, PreconditionError, SuctionFlowError
from .greens import KernelParams, capital_f, sigma
from .solver import FlowConfig, PicardConfig, Tolerances, picard_solve, solve_lp_modes, solve_stream_mode, \
    solve_swirl_mode, solve_vorticity_mode
from .spaces import AxiVectorField, RadialGrid, RadialProfile, SpectralMeasure, ZetaGrid, reconstruct, \
    weighted_sup_norm
from .specfun import BesselDomainError, bessel_derivatives, bessel_i, bessel_k, wronskian_defect
from .verify import OracleProblem, check_lp_estimate, fd_oracle_mode, residual_report

EXIT_OK, EXIT_INVALID, EXIT_NOCONV, EXIT_NUMERIC = 0, 2, 3, 4


def _num(x: float) -> str:
    return f"{x:.16e}"


# --------------------------------------------------------------------------
# forces


@dataclass
class ForceTerm:
    component: str  # r | theta | z
    mode: int | str = 0  # integer atom or "gaussian"
    phase: str = "cos"  # cos | sin for atoms m != 0
    zeta_center: float = 0.0
    zeta_width: float = 1.0
    radial: str = "powerlaw"  # powerlaw | gaussian_bump
    amplitude: float = 1.0
    exponent: float = 4.0
    center: float = 3.0
    width: float = 1.0

    def radial_fn(self):
        """Callable radial shape and its derivative."""
        a = self.amplitude
        if self.radial == "powerlaw":
            p = self.exponent
            return (lambda r: a * r ** (-p)), (lambda r: -p * a * r ** (-p - 1))
        c, w = self.center, self.width
        return ((lambda r: a * np.exp(-(((r - c) / w) ** 2))),
                (lambda r: -2 * a * (r - c) / w**2 * np.exp(-(((r - c) / w) ** 2))))

    @property
    def tail(self):
        return self.exponent if self.radial == "powerlaw" else None


@dataclass
class ForceConfig:
    terms: list = field(default_factory=list)

    def validate(self, rho: float):
        for i, t in enumerate(self.terms):
            where = f"force[{i}]"
            if t.component not in ("r", "theta", "z"):
                raise ConfigError(f"{where}.component: must be r, theta or z")
            if t.radial not in ("powerlaw", "gaussian_bump"):
                raise ConfigError(f"{where}.radial: must be powerlaw or gaussian_bump")
            if isinstance(t.mode, str):
                if t.mode != "gaussian":
                    raise ConfigError(f"{where}.mode: integer atom or 'gaussian'")
                if t.zeta_width <= 0:
                    raise ConfigError(f"{where}.zeta_width: must be positive")
            elif int(t.mode) != t.mode:
                raise ConfigError(f"{where}.mode: atoms must be integers")
            if t.phase not in ("cos", "sin"):
                raise ConfigError(f"{where}.phase: must be cos or sin")
            if t.radial == "powerlaw" and t.exponent < rho + 1 - 1e-9:
                raise ConfigError(f"{where}.exponent: {t.exponent} < rho + 1 = {rho + 1} (force outside the decay class)")
            if t.radial == "gaussian_bump" and t.width <= 0:
                raise ConfigError(f"{where}.width: must be positive")

    def build(self, grid: RadialGrid, zgrid: ZetaGrid) -> AxiVectorField:
        comps = {"r": SpectralMeasure.zero(grid), "theta": SpectralMeasure.zero(grid), "z": SpectralMeasure.zero(grid)}
        for t in self.terms:
            fn, _ = t.radial_fn()
            prof = RadialProfile.from_function(grid, fn, t.tail)
            if t.mode == "gaussian":
                z = zgrid.nodes
                shape = np.exp(-0.5 * ((z - t.zeta_center) / t.zeta_width) ** 2)
                if t.zeta_center != 0:
                    shape = 0.5 * (shape + np.exp(-0.5 * ((z + t.zeta_center) / t.zeta_width) ** 2))
                mu = SpectralMeasure(grid, {}, zgrid, shape[:, None] * prof.values[None, :], t.tail)
            else:
                m = int(t.mode)
                if m == 0:
                    mu = SpectralMeasure.atom(0, prof)
                elif t.phase == "cos":
                    mu = SpectralMeasure.cosine(m, prof)
                else:  # A sin(mz) = (A/2i) e^{imz} - (A/2i) e^{-imz}
                    mu = SpectralMeasure(grid, {m: prof * (-0.5j), -m: prof * 0.5j})
            comps[t.component] = comps[t.component] + mu
        return AxiVectorField(comps["r"], comps["theta"], comps["z"])


# --------------------------------------------------------------------------
# configuration


_SECTIONS = {
    "flow": {"gamma", "rho", "alpha", "smallness", "alpha_small"},
    "grid": {"n_r", "r_max", "zeta_max", "n_zeta", "m_max"},
    "picard": {"max_iter", "tol_fx", "relax"},
    "tolerances": {"boundary", "d_value", "residual"},
    "output": {"r", "n_z", "workers"},
    "force": None,
}
_TERM_KEYS = set(ForceTerm.__dataclass_fields__)


@dataclass
class OutputSpec:
    r: list = field(default_factory=lambda: [float(x) for x in
                                             np.unique(np.concatenate([np.linspace(1, 10, 37), np.geomspace(10, 1000, 25)]))])
    n_z: int = 16
    workers: int | None = None


def load_config(path):
    """Parse a TOML run file into (FlowConfig, ForceConfig, OutputSpec)."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"{path}: no such file")
    try:
        raw = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"{path}: {err}") from None
    for sec, val in raw.items():
        if sec not in _SECTIONS:
            raise ConfigError(f"unknown section '{sec}'")
        keys = _SECTIONS[sec]
        if keys is not None:
            if not isinstance(val, dict):
                raise ConfigError(f"{sec}: expected a table")
            for k in val:
                if k not in keys:
                    raise ConfigError(f"unknown key '{sec}.{k}'")
    flow, grid = raw.get("flow", {}), raw.get("grid", {})
    out = OutputSpec(**raw.get("output", {}))
    try:
        cfg = FlowConfig(
            **flow, **grid,
            picard=PicardConfig(**raw.get("picard", {})),
            tol=Tolerances(**raw.get("tolerances", {})),
            workers=out.workers,
        )
    except TypeError as err:
        raise ConfigError(str(err)) from None
    terms = []
    for i, t in enumerate(raw.get("force", [])):
        bad = set(t) - _TERM_KEYS
        if bad:
            raise ConfigError(f"unknown key 'force[{i}].{sorted(bad)[0]}'")
        terms.append(ForceTerm(**t))
    forcing = ForceConfig(terms)
    forcing.validate(cfg.rho)
    return cfg, forcing, out


# --------------------------------------------------------------------------
# outputs


def write_fields(v: AxiVectorField, out: OutputSpec, path: Path):
    r = np.asarray(out.r, dtype=float)
    z = 2 * np.pi * np.arange(out.n_z) / out.n_z
    vals = [np.real(reconstruct(c, r, z)) for c in v.components]
    lines = ["r,z,v_r,v_theta,v_z"]
    for i, ri in enumerate(r):
        for j, zj in enumerate(z):
            lines.append(",".join(_num(x) for x in (ri, zj, vals[0][i, j], vals[1][i, j], vals[2][i, j])))
    path.write_text("\n".join(lines) + "\n")


def write_modes(modes, rho: float, path: Path):
    lines = ["mode,zeta,psi_at_1,v_theta_at_1,v_z_at_1,d_omega,c_re,c_im,norm_v_r,norm_v_theta,norm_v_z"]
    for m in modes:
        d = m.defects
        norms = [weighted_sup_norm(p, rho - 1) for p in (m.v_r, m.v_theta, m.v_z)]
        row = [m.label, _num(m.zeta), _num(d["psi_at_1"]), _num(d["v_theta_at_1"]), _num(d["v_z_at_1"]),
               _num(d["d_omega"]), _num(m.c_value.real), _num(m.c_value.imag)] + [_num(x) for x in norms]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def _manifest(args, cfg, forcing, out, outputs, timings):
    return {
        "subcommand": args.command,
        "config": {"flow": asdict(cfg), "force": [asdict(t) for t in forcing.terms], "output": asdict(out)},
        "outputs": sorted(str(p) for p in outputs),
        "versions": {"suctionflow": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
        "timings_s": timings,
    }


def _prepare(args):
    cfg, forcing, out = load_config(args.config)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    f = forcing.build(cfg.radial_grid, cfg.zeta_grid)
    return cfg, forcing, out, outdir, f


def _finish(args, cfg, forcing, out, outdir, files, timings):
    man = outdir / "manifest.json"
    files = list(files) + [man]
    man.write_text(json.dumps(_manifest(args, cfg, forcing, out, files, timings), indent=2, sort_keys=True) + "\n")


# --------------------------------------------------------------------------
# subcommands


def cmd_bessel(args):
    i, k = bessel_i(args.nu, args.x), bessel_k(args.nu, args.x)
    di, dk = bessel_derivatives(args.nu, args.x)
    w = wronskian_defect(args.nu, args.x)
    print(f"I = {_num(i)}\nK = {_num(k)}\ndI = {_num(di)}\ndK = {_num(dk)}\nwronskian_defect = {w:.3e}")
    return EXIT_OK


def cmd_kernel(args):
    print(_num(sigma(args.index, args.r, args.s, KernelParams(args.gamma, args.zeta))))
    return EXIT_OK


def cmd_solve_linear(args):
    cfg, forcing, out, outdir, f = _prepare(args)
    t0 = time.perf_counter()
    v, modes = solve_lp_modes(f, cfg)
    t1 = time.perf_counter()
    rep = residual_report(v, f, cfg)
    t2 = time.perf_counter()
    files = [outdir / "fields.csv", outdir / "modes.csv", outdir / "report.json"]
    write_fields(v, out, files[0])
    write_modes(modes, cfg.rho, files[1])
    files[2].write_text(rep.to_json() + "\n")
    _finish(args, cfg, forcing, out, outdir, files, {"solve": t1 - t0, "report": t2 - t1})
    return EXIT_OK


def cmd_solve_nonlinear(args):
    cfg, forcing, out, outdir, f = _prepare(args)
    t0 = time.perf_counter()
    sol = picard_solve(f, cfg)
    t1 = time.perf_counter()
    rep = residual_report(sol.v, f, cfg, nonlinear=True, history=sol.history)
    t2 = time.perf_counter()
    files = [outdir / "fields.csv", outdir / "report.json"]
    write_fields(sol.v, out, files[0])
    files[1].write_text(rep.to_json() + "\n")
    _finish(args, cfg, forcing, out, outdir, files, {"picard": t1 - t0, "report": t2 - t1})
    print(f"converged in {sol.iterations} iteration(s); last delta {sol.history[-1]:.3e}")
    return EXIT_OK


def _rel(a, b):
    scale = np.max(np.abs(b.values))
    return float(np.max(np.abs(a.values - b.values)) / scale) if scale > 0 else float(np.max(np.abs(a.values)))


def oracle_comparisons(forcing: ForceConfig, modes, cfg: FlowConfig) -> dict:
    """Solver vs FD oracle for every atom of the force (swirl and vorticity)."""
    out = {}
    for m in (mode for mode in modes if mode.is_atom and mode.zeta >= 0):
        zeta = m.zeta
        terms = [t for t in forcing.terms if t.mode != "gaussian" and abs(int(t.mode)) == int(zeta)]

        def coef(t):
            # atom +m coefficient of the term
            if int(t.mode) == 0:
                return 1.0
            return 0.5 if t.phase == "cos" else -0.5j

        def comp(name, deriv=False):
            fns = [(coef(t), t.radial_fn()[1 if deriv else 0]) for t in terms if t.component == name]
            return lambda r: sum(c * fn(r) for c, fn in fns) if fns else np.zeros_like(r)

        tails = [t.tail for t in terms]
        tail = None if any(x is None for x in tails) or not tails else min(tails)
        fth = comp("theta")
        fr, dfz = comp("r"), comp("z", deriv=True)
        grid = m.v_theta.grid
        sw = fd_oracle_mode(OracleProblem("swirl", zeta, cfg.gamma, fth, tail), grid)
        vo = fd_oracle_mode(OracleProblem("vorticity", zeta, cfg.gamma,
                                          lambda r: 1j * zeta * fr(r) - dfz(r), None if tail is None else tail + 1), grid)
        out[m.label] = {"swirl": _rel(m.v_theta, sw) if np.any(sw.values) else 0.0,
                        "vorticity": _rel(m.omega, vo) if np.any(vo.values) else 0.0}
    return out


def cmd_verify(args):
    cfg, forcing, out, outdir, f = _prepare(args)
    if cfg.alpha != 0:
        raise PreconditionError("verify compares against the non-rotating oracle; set alpha = 0")
    t0 = time.perf_counter()
    v, modes = solve_lp_modes(f, cfg)
    rep = residual_report(v, f, cfg)
    oracle = oracle_comparisons(forcing, modes, cfg)
    t1 = time.perf_counter()
    worst = max((max(d.values()) for d in oracle.values()), default=0.0)
    rep.passed["oracle"] = worst <= cfg.tol.residual
    payload = json.loads(rep.to_json())
    payload["oracle"] = oracle
    path = outdir / "report.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    _finish(args, cfg, forcing, out, outdir, [path], {"verify": t1 - t0})
    for name, ok in sorted(rep.passed.items()):
        print(f"{name:12s} {'pass' if ok else 'FAIL'}")
    return EXIT_OK if rep.ok else EXIT_NUMERIC


def golden_values() -> dict:
    """Closed-form checks and the pinned positivity integral, recomputed from scratch."""
    g = RadialGrid()
    cfg = FlowConfig()
    z = SpectralMeasure.zero(cfg.radial_grid)
    f = AxiVectorField(z, z, SpectralMeasure.atom(0, RadialProfile.power_law(cfg.radial_grid, 4.0)))
    v, _ = solve_lp_modes(f, cfg)
    return {
        "capital_f_gamma3_zeta1": float(capital_f(1.0, 3.0)),
        "psi_at_2": solve_stream_mode(RadialProfile.power_law(g, 4.0), 0)[0](2.0).real,
        "omega_at_2": solve_vorticity_mode(RadialProfile.zeros(g), RadialProfile.power_law(g, 4.0), 0, 3.0)(2.0).real,
        "v_theta_at_4": solve_swirl_mode(RadialProfile.power_law(g, 3.5), 0, 3.0)(4.0).real,
        "v_z_at_2": v.comp_z.atoms[0](2.0).real,
        "lp_ratio_end_to_end": check_lp_estimate(v, f, cfg.rho),
    }


def cmd_regress(args):
    vals = golden_values()
    path = Path(args.golden)
    if args.update:
        path.write_text(json.dumps(vals, indent=2, sort_keys=True) + "\n")
        print(f"wrote {path}")
        return EXIT_OK
    if not path.exists():
        raise ConfigError(f"{path}: no such golden file (use --update to create it)")
    ref = json.loads(path.read_text())
    bad = []
    for key, want in sorted(ref.items()):
        got = vals.get(key)
        ok = got is not None and abs(got - want) <= args.rtol * max(abs(want), 1e-300)
        print(f"{key:24s} {'ok ' if ok else 'BAD'} {got!r} vs {want!r}")
        if not ok:
            bad.append(key)
    return EXIT_NUMERIC if bad else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="suctionflow", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    b = sub.add_parser("bessel", help="modified Bessel values and Wronskian defect")
    b.add_argument("--nu", type=float, required=True)
    b.add_argument("--x", type=float, required=True)
    k = sub.add_parser("kernel", help="evaluate a Green's kernel")
    k.add_argument("--index", type=int, required=True)
    k.add_argument("--r", type=float, required=True)
    k.add_argument("--s", type=float, required=True)
    k.add_argument("--zeta", type=float, default=0.0)
    k.add_argument("--gamma", type=float, default=3.0)
    for name, hlp in (("solve-linear", "linearized solve"), ("solve-nonlinear", "Picard solve"),
                      ("verify", "solve and run all independent checks")):
        s = sub.add_parser(name, help=hlp)
        s.add_argument("--config", required=True)
        s.add_argument("--out", default="out")
    r = sub.add_parser("regress", help="compare golden values against a stored file")
    r.add_argument("--golden", required=True)
    r.add_argument("--rtol", type=float, default=1e-9)
    r.add_argument("--update", action="store_true")
    return p


COMMANDS = {"bessel": cmd_bessel, "kernel": cmd_kernel, "solve-linear": cmd_solve_linear,
            "solve-nonlinear": cmd_solve_nonlinear, "verify": cmd_verify, "regress": cmd_regress}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, PreconditionError, BesselDomainError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID
    except ConvergenceError as err:
        print(f"error: {err}; deltas: {', '.join(f'{d:.2e}' for d in err.history)}", file=sys.stderr)
        return EXIT_NOCONV
    except (SuctionFlowError, ArithmeticError, np.linalg.LinAlgError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
