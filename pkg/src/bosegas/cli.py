"""Command-line experiment runner: ``bose <subcommand> [options]``.

Settings come from an optional INI-style config (``--config``) and are
overridden by command-line flags. Config sections and keys (units in
brackets):

    [potential]  kind (gaussian | constant-band | tabulated-radial),
                 strength [energy*volume, the value of v-hat at 0],
                 width [length for gaussian, 1/length band edge otherwise],
                 lambda [dimensionless], table [path], d
    [geometry]   d, L [length], K [integer cutoff], zero_mode (include | exclude),
                 ball (true | false)
    [solver]     mode (box | thermo), kappa [1/volume], mu [energy],
                 rho [1/volume], damping, tol, max_iter, tau [rad], iterations,
                 k_max [1/length], points
    [oracle]     preset, n_max, suite, q, eta [energy]
    [output]     csv, json, trace [paths]
    [run]        seed, threads

Exit codes: 0 success, 2 configuration error, 3 solver non-convergence,
4 failed hard check.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import hfb
from .bogoliubov import dispersion_bg, squeeze_coefficients
from .model import BoxGeometry, Potential, momentum_grid
from .numerics import RadialQuadrature
from .subadditive import HARD_CUTOFF, WRAPAROUND, SpectrumGrid, subadditive_hull

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGED, EXIT_CHECK = 0, 2, 3, 4
DEFAULT_MU = 1.0

SCHEMA = {
    "potential": {"kind": str, "strength": float, "width": float, "lambda": float, "table": str, "d": int},
    "geometry": {"d": int, "L": float, "K": int, "zero_mode": str, "ball": bool},
    "solver": {"mode": str, "kappa": float, "mu": float, "rho": float, "damping": float, "tol": float,
               "max_iter": int, "tau": float, "iterations": int, "k_max": float, "points": int},
    "oracle": {"preset": str, "n_max": int, "suite": str, "q": str, "eta": float},
    "output": {"csv": str, "json": str, "trace": str},
    "run": {"seed": int, "threads": int},
}


class ConfigError(ValueError):
    pass


class NonConvergence(RuntimeError):
    pass


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    return format(x, ".17g") if math.isfinite(x) else ("nan" if math.isnan(x) else ("inf" if x > 0 else "-inf"))


def load_config(path: str | None) -> dict:
    """Parse and validate a config file into {section: {key: value}}."""
    if path is None:
        return {}
    text = Path(path).read_text()
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    lines = text.splitlines()

    def where(section, key=None):
        sec_line = next((i for i, l in enumerate(lines) if l.strip() == f"[{section}]"), 0)
        if key is None:
            return sec_line + 1
        for i in range(sec_line + 1, len(lines)):
            s = lines[i].strip()
            if s.startswith("["):
                break
            if s.split("=")[0].split(":")[0].strip() == key:
                return i + 1
        return sec_line + 1

    out = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"{path}:{where(section)}: unknown section [{section}]")
        out[section] = {}
        for key, raw in parser.items(section):
            kind = SCHEMA[section].get(key)
            if kind is None:
                raise ConfigError(f"{path}:{where(section, key)}: unknown key {key!r} in [{section}]")
            try:
                if kind is bool:
                    val = parser.getboolean(section, key)
                else:
                    val = kind(raw)
            except ValueError as exc:
                raise ConfigError(f"{path}:{where(section, key)}: bad value {raw!r} for {key}: {exc}") from exc
            out[section][key] = val
    return out


def _setting(args, cfg, section, key, attr=None, default=None):
    val = getattr(args, attr or key, None)
    if val is not None:
        return val
    return cfg.get(section, {}).get(key, default)


def _potential(args, cfg, d: int) -> Potential:
    kind = _setting(args, cfg, "potential", "kind", "potential", "gaussian")
    lam = _setting(args, cfg, "potential", "lambda", "coupling", 1.0)
    if kind == "tabulated-radial":
        table = _setting(args, cfg, "potential", "table", "table")
        if not table:
            raise ConfigError("tabulated-radial potential needs a table path")
        return Potential.from_table(table, d, lam)
    strength = _setting(args, cfg, "potential", "strength", "strength", 1.0)
    width = _setting(args, cfg, "potential", "width", "width", 1.0)
    try:
        return Potential(kind, strength, width, lam, d)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _dimension(args, cfg, default=3) -> int:
    d = _setting(args, cfg, "geometry", "d", "d", None)
    if d is None:
        d = cfg.get("potential", {}).get("d", default)
    if d not in (1, 2, 3):
        raise ConfigError(f"dimension must be 1, 2 or 3, got {d}")
    return d


def _geometry(args, cfg, d: int, default_K: int = 4) -> BoxGeometry | None:
    L = _setting(args, cfg, "geometry", "L", "L", 2 * math.pi)
    K = _setting(args, cfg, "geometry", "K", "K", None)
    modes = getattr(args, "modes", None)
    if modes is not None:
        if modes < 1 or modes % 2 == 0:
            raise ConfigError("--modes must be a positive odd number of modes per axis")
        K = (modes - 1) // 2
    if K is None:
        K = default_K
    zero = _setting(args, cfg, "geometry", "zero_mode", "zero_mode", "exclude")
    if zero not in ("include", "exclude"):
        raise ConfigError(f"zero_mode must be include or exclude, got {zero!r}")
    ball = bool(_setting(args, cfg, "geometry", "ball", "ball", False))
    try:
        return BoxGeometry(d, L, K, zero == "include", ball)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) if not isinstance(x, str) else x for x in r])
    if path in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        Path(path).write_text(buf.getvalue())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _write_json(path, payload):
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _out(args, cfg, key):
    return getattr(args, key, None) or cfg.get("output", {}).get(key)


# ---------------------------------------------------------------------------
# subcommands


def cmd_bg_spectrum(args, cfg) -> int:
    d = _dimension(args, cfg)
    pot = _potential(args, cfg, d)
    mu = _setting(args, cfg, "solver", "mu", "mu")
    rho = _setting(args, cfg, "solver", "rho", "rho")
    if (mu is None) == (rho is None):
        raise ConfigError("give exactly one of --mu and --rho")
    if args.continuum:
        k_max = _setting(args, cfg, "solver", "k_max", "k_max", 10.0)
        points = _setting(args, cfg, "solver", "points", "points", 41)
        k = np.linspace(0.0, k_max, points)
    else:
        geo = _geometry(args, cfg, d)
        geo = replace(geo, include_zero=True)
        k = np.linalg.norm(momentum_grid(geo), axis=1)
    omega = dispersion_bg(pot, k, rho=rho, mu=mu)
    mu_eff = mu if mu is not None else rho * pot.v0_hat
    s_abs = np.full(len(k), np.nan)
    nz = k > 0
    if mu_eff > 0 and np.any(nz):
        s_abs[nz] = np.abs(squeeze_coefficients(pot, mu_eff, k[nz])[1])
    elif np.any(nz):
        s_abs[nz] = 0.0
    header = ["k_abs [1/length]",
              "omega_bg [energy] sqrt(k^2/2*(k^2/2+2*vhat(k)*rho))",
              "s_k_abs [dimensionless] pair-rotation amplitude |s_k| (nan at k=0)"]
    _write_csv(_out(args, cfg, "csv"), header, zip(k, omega, s_abs))
    return EXIT_OK


def _read_numeric_csv(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    try:
        float(rows[0][0])
        header = None
    except ValueError:
        header, rows = rows[0], rows[1:]
    try:
        data = np.array([[float(x) for x in r] for r in rows])
    except ValueError as exc:
        raise ConfigError(f"{path}: non-numeric entry: {exc}") from exc
    return header, data


def cmd_hull(args, cfg) -> int:
    if not args.input:
        raise ConfigError("hull needs --input")
    _, data = _read_numeric_csv(args.input)
    if data.ndim != 2 or data.shape[1] < 2:
        raise ConfigError("hull input needs k columns followed by an omega column")
    k, omega = data[:, :-1], data[:, -1]
    d = k.shape[1]
    nonzero = np.abs(k[np.abs(k) > 1e-12])
    if nonzero.size == 0:
        raise ConfigError("hull input needs nonzero momenta")
    step = float(np.min(nonzero))
    m = np.rint(k / step).astype(int)
    if np.max(np.abs(m * step - k)) > 1e-9 * max(1.0, float(np.max(np.abs(k)))):
        raise ConfigError("hull input momenta do not lie on a common lattice")
    rule = args.rule
    if rule == WRAPAROUND:
        if d != 1:
            raise ConfigError("the wraparound rule is for d = 1 only")
        n = 2 * int(np.max(np.abs(m))) + 1
        arr = np.full(n, np.inf)
        for mi, v in zip(m[:, 0], omega):
            arr[mi % n] = v
        grid = SpectrumGrid(arr, step, WRAPAROUND)
        res = subadditive_hull(grid, args.n_max)
        hull = np.array([res.grid.values[mi % n] for mi in m[:, 0]])
    else:
        K = int(np.max(np.abs(m)))
        arr = np.full((2 * K + 1,) * d, np.inf)
        for mi, v in zip(m, omega):
            arr[tuple(mi + K)] = v
        grid = SpectrumGrid(arr, step, HARD_CUTOFF, (K,) * d)
        res = subadditive_hull(grid, args.n_max)
        hull = np.array([res.grid.values[tuple(mi + K)] for mi in m])
    header = [f"k{i + 1} [1/length]" for i in range(d)] + [
        "omega [energy] input dispersion",
        f"hull [energy] largest subadditive minorant on the grid ({rule}, sweeps={res.sweeps})"]
    _write_csv(_out(args, cfg, "csv"), header, [list(a) + [b, c] for a, b, c in zip(k, omega, hull)])
    return EXIT_OK


def _write_trace(path, trace):
    _write_csv(path, ["sweep", "update_norm [dimensionless] damped max-norm change of S"],
               [(i + 1, t) for i, t in enumerate(trace)])


def cmd_hfb_solve(args, cfg) -> int:
    d = _dimension(args, cfg)
    pot = _potential(args, cfg, d)
    mode = "thermo" if args.thermo else ("box" if args.box else _setting(args, cfg, "solver", "mode", None, "box"))
    kappa = _setting(args, cfg, "solver", "kappa", "kappa")
    mu = _setting(args, cfg, "solver", "mu", "mu")
    if kappa is not None and mu is not None:
        raise ConfigError("give at most one of --kappa and --mu")
    if kappa is None and mu is None:
        mu = DEFAULT_MU
    damping = _setting(args, cfg, "solver", "damping", "damping", 0.5)
    tol = _setting(args, cfg, "solver", "tol", "tol", 1e-12)
    max_iter = _setting(args, cfg, "solver", "max_iter", "max_iter", 5000)
    tau = _setting(args, cfg, "solver", "tau", "tau", 0.0)
    trace_path = _out(args, cfg, "trace") or "hfb_trace.csv"
    if mode == "box":
        geo = _geometry(args, cfg, d)
        sol = hfb.solve_finite_box(pot, geo, kappa=kappa, mu=mu, tau=tau, damping=damping, tol=tol,
                                   max_iter=max_iter)
        table = hfb.excitation_upper_bounds(sol, hull=True)
        rep = sol.report
        payload = {
            "mode": "box", "d": d, "L": geo.L, "K": geo.K, "zero_mode": "include" if geo.include_zero else "exclude",
            "alpha": sol.state.alpha, "tau": sol.state.tau, "momenta": sol.state.system.momenta,
            "S": sol.state.S, "C": sol.state.C, "D": sol.D, "B": sol.B, "mu": sol.mu, "rho": sol.rho,
            "D0": rep.gap, "D0_squared": rep.gap_squared,
            "residuals": {"linear_C": rep.linear_residual, "max_O": rep.max_O, "grad_alpha": rep.grad_alpha,
                          "grad_s": rep.grad_s, "constraint": rep.constraint_defect, "imag_S": rep.imag_S},
            "tol": tol, "hessian_psd": rep.hessian_psd, "converged": sol.converged, "iterations": sol.iterations,
        }
        radii = np.linalg.norm(table.momenta, axis=1)
        rows = zip(radii, table.D, table.hull - table.B)
        trace, converged = sol.trace, sol.converged
    elif mode == "thermo":
        quad = RadialQuadrature(d, k_max=_setting(args, cfg, "solver", "k_max", "k_max", 12.0))
        iterations = _setting(args, cfg, "solver", "iterations", "iterations")
        if mu is not None:
            kappa, sol = hfb.kappa_for_mu(pot, d, mu, quad, tol=tol, damping=damping)
        else:
            sol = hfb.solve_thermodynamic(pot, d, kappa, quad, damping, tol, max_iter, iterations, tau)
        payload = {
            "mode": "thermo", "d": d, "kappa": kappa, "tau": tau, "radii": sol.system.nodes, "S": sol.S,
            "C": sol.C, "D": sol.D, "mu": sol.mu, "rho": sol.density, "D0": sol.gap,
            "D0_squared_direct": sol.gap_squared_direct, "D0_squared_formula": sol.gap_squared_formula,
            "gap_history": sol.gap_history, "tol": tol, "converged": sol.converged, "iterations": sol.iterations,
            "energy_density": hfb.continuum_energy_density(sol) if iterations is None else None,
        }
        rows = zip(sol.system.nodes, sol.D, np.full(len(sol.D), np.nan))
        trace = sol.trace
        converged = sol.converged or iterations is not None
    else:
        raise ConfigError(f"solver mode must be box or thermo, got {mode!r}")
    _write_json(_out(args, cfg, "json"), payload)
    csv_path = _out(args, cfg, "csv")
    if csv_path:
        _write_csv(csv_path, ["k_abs [1/length]", "D [energy] quasiparticle energy C*f - Re(S*conj(g))",
                              "hull_D [energy] subadditive hull of D on the box grid (nan in the continuum)"],
                   rows)
    if not converged:
        _write_trace(trace_path, trace)
        print(f"solver did not converge; trace written to {trace_path}", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def _preset(args, cfg):
    from .oracle.suites import PRESETS, OraclePreset

    name = _setting(args, cfg, "oracle", "preset", "preset", "tiny-d1")
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    p = PRESETS[name]
    over = {}
    for key, attr in (("n_max", "n_max"), ("mu", "mu"), ("K", "K"), ("L", "L")):
        v = getattr(args, attr, None)
        if v is not None:
            over[key] = v
    if getattr(args, "coupling", None) is not None:
        over["coupling"] = args.coupling
    return replace(p, **over) if over else p


def cmd_oracle(args, cfg) -> int:
    from .oracle import FockSpace, Reference, ground_and_ies, van_hove_formfactor
    from .oracle.suites import SUITES, run_suites

    preset = _preset(args, cfg)
    if args.verb == "spectrum":
        space = FockSpace(preset.modes(), preset.n_max, preset.L)
        gs = ground_and_ies(space, space.hamiltonian(preset.potential, preset.mu))
        payload = {"preset": preset.__dict__, "dimension": space.dimension, "E": gs.energy,
                   "ground_sector": gs.sector_label, "degenerate": gs.degenerate,
                   "excitation_minima": {",".join(map(str, k)): v for k, v in gs.sector_minima.items()}}
        _write_json(_out(args, cfg, "json"), payload)
        return EXIT_OK
    if args.verb == "verify":
        suite = args.suite or cfg.get("oracle", {}).get("suite", "all")
        names = SUITES if suite == "all" else tuple(s.strip() for s in suite.split(","))
        seed = _setting(args, cfg, "run", "seed", "seed", 0)
        try:
            checks = run_suites(preset, names, seed)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        failed = [c for c in checks if c.hard and not c.passed]
        for c in checks:
            status = "PASS" if c.passed else ("FAIL" if c.hard else "note")
            print(f"{status} [{c.suite}] {c.name}: {c.value:.3e} (tol {c.tolerance:.1e})", file=sys.stderr)
        json_path = _out(args, cfg, "json") or (os.devnull if args.quiet else None)
        _write_json(json_path, {"preset": preset.__dict__, "seed": seed, "checks": [c.as_dict() for c in checks],
                     "failed": len(failed)})
        return EXIT_CHECK if failed else EXIT_OK
    if args.verb == "formfactor":
        space = FockSpace(preset.modes(), preset.n_max, preset.L)
        gs = ground_and_ies(space, space.hamiltonian(preset.potential, preset.mu))
        ref = Reference.from_ground(gs)
        q_raw = args.q or cfg.get("oracle", {}).get("q", "1")
        q = np.array([int(x) for x in str(q_raw).split(",")])
        if len(q) != preset.d:
            raise ConfigError(f"q needs {preset.d} integer components")
        eta = _setting(args, cfg, "oracle", "eta", "eta")
        ff = van_hove_formfactor(ref, q, eta=eta)
        _write_csv(_out(args, cfg, "csv"), ["omega [energy] excitation energy above E",
                                            "S [1/energy] Lorentzian-broadened density spectral weight per particle"],
                   zip(ff.omega, ff.values))
        if _out(args, cfg, "json"):
            _write_json(_out(args, cfg, "json"), {"eta": ff.eta, "s_q": ff.s_direct, "weight_sum": ff.weight_sum,
                                                  "first_moment": ff.first_moment, "fsum_moment": ff.fsum_moment,
                                                  "quadrature_sum": ff.quadrature_sum})
        return EXIT_OK
    raise ConfigError(f"unknown oracle verb {args.verb!r}")


def compare_bounds(preset, hull: bool = True) -> tuple[list, list]:
    """Rows (k, lower, E, B, B+D, B+hull, eps, feynman) and ordering violations."""
    from .oracle import FockSpace, Reference, bijls_feynman, ground_and_ies

    pot = preset.potential
    geo = BoxGeometry(preset.d, preset.L, preset.K, False)
    space = FockSpace(preset.modes(), preset.n_max, preset.L)
    gs = ground_and_ies(space, space.hamiltonian(pot, preset.mu))
    ref = Reference.from_ground(gs)
    sol = hfb.solve_finite_box(pot, geo, mu=preset.mu)
    if not sol.converged:
        raise NonConvergence("finite-box solver did not converge")
    table = hfb.excitation_upper_bounds(sol, hull=hull)
    lower = hfb.lower_bound_energy(pot, geo.volume, mu=preset.mu, box=geo)
    rows, bad = [], []
    E = gs.energy
    for i, m in enumerate(BoxGeometry(preset.d, preset.L, preset.K, True).integer_modes()):
        lab = tuple(int(x) for x in m)
        eps = gs.sector_minima.get(lab, math.nan)
        if np.any(m):
            try:
                feyn = bijls_feynman(ref, gs, m).rayleigh
            except ValueError:
                feyn = math.nan
        else:
            feyn = 0.0
        row = (lab, lower, E, sol.B, table.bound[i], table.hull[i] if hull else math.nan, eps, feyn)
        rows.append(row)
        if not (lower <= E + 1e-12 and E <= sol.B + 1e-12):
            bad.append((lab, "lower <= E <= B"))
        if E + eps > table.bound[i] + 1e-12:
            bad.append((lab, "E + eps <= B + D"))
        if not np.any(m) and abs(eps) > 1e-12:
            bad.append((lab, "eps(0) = 0"))
    return rows, bad


def cmd_compare_bounds(args, cfg) -> int:
    preset = _preset(args, cfg)
    try:
        rows, bad = compare_bounds(preset)
    except NonConvergence as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_NONCONVERGED
    d = preset.d
    header = [f"m{i + 1} [integer mode]" for i in range(d)] + [
        "lower [energy] -V(v(0)/2+mu)^2/(2 vhat(0)) with periodized v(0)",
        "E_oracle [energy] exact capped ground energy of H - mu N",
        "B [energy] squeezed-state energy",
        "B_plus_D [energy] squeezed-state upper bound on the sector minimum",
        "B_plus_hullD [energy] uncorrelated multi-quasiparticle bound",
        "eps_oracle [energy] exact excitation minimum in the sector",
        "feynman [energy] Rayleigh quotient of N_k Psi"]
    _write_csv(_out(args, cfg, "csv"), header, [list(r[0]) + list(r[1:]) for r in rows])
    for lab, what in bad:
        print(f"ordering violation at {lab}: {what}", file=sys.stderr)
    return EXIT_CHECK if bad else EXIT_OK


def cmd_sound_speed(args, cfg) -> int:
    if args.input:
        _, data = _read_numeric_csv(args.input)
        if data.ndim != 2 or data.shape[1] != 2:
            raise ConfigError("sound-speed input needs two columns: rho, e")
        rho, e = data[:, 0], data[:, 1]
        extra = {}
    else:
        d = _dimension(args, cfg)
        if d == 1:
            raise ConfigError("the continuum energy density needs d = 2 or 3")
        pot = _potential(args, cfg, d)
        rho0 = _setting(args, cfg, "solver", "rho", "rho", 1.0)
        h = args.step * rho0
        rho = rho0 + h * np.arange(-2, 3)
        quad = RadialQuadrature(d, k_max=_setting(args, cfg, "solver", "k_max", "k_max", 12.0))
        vals = [hfb.hfb_energy_density(pot, d, r, quad) for r in rho]
        e = np.array([v[0] for v in vals])
        mu_mid = vals[2][1].mu
        extra = {"mu": mu_mid, "sqrt_mu": math.sqrt(mu_mid), "samples_e": e, "samples_rho": rho}
    try:
        c = hfb.speed_of_sound(rho, e)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    _write_json(_out(args, cfg, "json"), {"c_s": c.value, "error": c.error, "stable": c.stable,
                                          "second_derivative": c.second_derivative, "rho": c.rho, **extra})
    return EXIT_OK


# ---------------------------------------------------------------------------


def _add_potential(p):
    p.add_argument("--potential", choices=["gaussian", "constant-band", "tabulated-radial"])
    p.add_argument("--strength", type=float, help="v-hat(0) [energy*volume]")
    p.add_argument("--width", type=float)
    p.add_argument("--lambda", dest="coupling", type=float, help="coupling multiplier")
    p.add_argument("--table", help="two-column |k| value file")


def _add_geometry(p):
    p.add_argument("--d", type=int)
    p.add_argument("--L", type=float, help="box side [length]")
    p.add_argument("--K", type=int, help="mode cutoff |m_i| <= K")
    p.add_argument("--modes", type=int, help="modes per axis (odd); sets K")
    p.add_argument("--zero-mode", dest="zero_mode", choices=["include", "exclude"])


def _add_output(p, csv_=True, json_=True):
    if csv_:
        p.add_argument("--out", dest="csv", help="CSV path (default stdout)")
    if json_:
        p.add_argument("--json", help="JSON path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bose", description="Bose gas bounds, spectra and exact checks.")
    ap.add_argument("--config", help="INI config file")
    ap.add_argument("--threads", type=int, help="cap on worker threads (sets BOSE_THREADS)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bg-spectrum", help="Bogoliubov dispersion table")
    _add_potential(p)
    _add_geometry(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--mu", type=float)
    g.add_argument("--rho", type=float)
    p.add_argument("--continuum", action="store_true", help="uniform radial grid instead of the box")
    p.add_argument("--k-max", dest="k_max", type=float)
    p.add_argument("--points", type=int)
    _add_output(p, json_=False)

    p = sub.add_parser("hull", help="subadditive hull of a tabulated dispersion")
    p.add_argument("--input", required=False)
    p.add_argument("--rule", choices=[HARD_CUTOFF, WRAPAROUND], default=HARD_CUTOFF)
    p.add_argument("--n-max", dest="n_max", type=int, help="maximum number of sweeps")
    _add_output(p, json_=False)

    p = sub.add_parser("hfb-solve", help="squeezed-state fixed point")
    _add_potential(p)
    _add_geometry(p)
    m = p.add_mutually_exclusive_group()
    m.add_argument("--box", action="store_true")
    m.add_argument("--thermo", action="store_true")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--kappa", type=float)
    g.add_argument("--mu", type=float)
    p.add_argument("--damping", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--tau", type=float)
    p.add_argument("--iterations", type=int, help="fixed number of undamped sweeps (thermo)")
    p.add_argument("--k-max", dest="k_max", type=float)
    p.add_argument("--trace", help="trace CSV path written on non-convergence")
    _add_output(p)

    p = sub.add_parser("oracle", help="exact diagonalization checks")
    p.add_argument("verb", choices=["spectrum", "verify", "formfactor"])
    p.add_argument("--preset")
    p.add_argument("--suite", help="'all' or a comma list")
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--mu", type=float)
    p.add_argument("--K", type=int)
    p.add_argument("--L", type=float)
    p.add_argument("--lambda", dest="coupling", type=float)
    p.add_argument("--q", help="comma-separated integer mode")
    p.add_argument("--eta", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--quiet", action="store_true", help="suppress the JSON report on stdout")
    _add_output(p)

    p = sub.add_parser("compare-bounds", help="bound table on a preset oracle system")
    p.add_argument("--preset")
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--mu", type=float)
    p.add_argument("--K", type=int)
    p.add_argument("--L", type=float)
    p.add_argument("--lambda", dest="coupling", type=float)
    _add_output(p, json_=False)

    p = sub.add_parser("sound-speed", help="c_s = sqrt(rho e''(rho))")
    _add_potential(p)
    p.add_argument("--d", type=int)
    p.add_argument("--input", help="CSV of evenly spaced rho, e samples")
    p.add_argument("--rho", type=float)
    p.add_argument("--step", type=float, default=0.02, help="relative density step")
    p.add_argument("--k-max", dest="k_max", type=float)
    _add_output(p, csv_=False)
    return ap


COMMANDS = {
    "bg-spectrum": cmd_bg_spectrum,
    "hull": cmd_hull,
    "hfb-solve": cmd_hfb_solve,
    "oracle": cmd_oracle,
    "compare-bounds": cmd_compare_bounds,
    "sound-speed": cmd_sound_speed,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        threads = args.threads or cfg.get("run", {}).get("threads")
        if threads:
            os.environ["BOSE_THREADS"] = str(threads)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except hfb.HfbIterationError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED


if __name__ == "__main__":
    sys.exit(main())
