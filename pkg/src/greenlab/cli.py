"""Command-line orchestration.

Subcommands: heat, green, kato, sobolev, sweep, certify-scalar,
certify-magnetic, certify-spin, check-invariants.

Every run writes its artifacts into one output directory together with a
manifest listing each file, the config hash and the seed.  CSV and JSON
outputs are byte-reproducible for a fixed config and seed; wall-clock
timestamps live only in the manifest.  Exit codes: 0 success, 2 config
error, 3 a computed verdict failed, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

from .errors import ConfigError, GreenlabError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERDICT = 3
EXIT_NUMERICAL = 4

SUBCOMMANDS = ("heat", "green", "kato", "sobolev", "sweep", "certify-scalar",
               "certify-magnetic", "certify-spin", "check-invariants")

_FMT = "%.12g"


# ---------------------------------------------------------------------------
# config handling
# ---------------------------------------------------------------------------

_DEFAULTS = {
    "operator": "scalar",
    "beta": {"type": "zero"},
    "y": "center",
    "lambda": 1.0,
    "r_grid": [0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
    "tolerances": {"eig": 1e-8, "semigroup": 1e-8, "cg": 1e-10},
    "seed": 0,
    "figures": True,
    "t": 0.1,
    "t_grid": [0.0, 0.25, 0.5, 1.0, 2.0],
    "trials": 100,
}


def _require(cfg: dict, key: str, types, pred=None, what=""):
    if key not in cfg:
        raise ConfigError(key, "missing")
    val = cfg[key]
    if not isinstance(val, types):
        raise ConfigError(key, f"expected {what or types}")
    if pred is not None and not pred(val):
        raise ConfigError(key, f"invalid value {val!r}")
    return val


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"not valid JSON ({exc})")
    if not isinstance(cfg, dict):
        raise ConfigError("config", "top level must be an object")
    merged = dict(_DEFAULTS)
    merged.update(cfg)
    for key, sub in (("beta", _DEFAULTS["beta"]), ("tolerances", _DEFAULTS["tolerances"])):
        if not isinstance(merged[key], dict):
            raise ConfigError(key, "must be an object")
        filled = dict(sub)
        filled.update(merged[key])
        merged[key] = filled
    return merged


def validate_config(cfg: dict, subcommand: str) -> None:
    man = _require(cfg, "manifold", dict, what="an object")
    kind = _require(man, "kind", str, lambda v: v in ("FlatBox", "WarpedRadial"),
                    "FlatBox or WarpedRadial")
    if kind == "FlatBox":
        _require(man, "half_width", (int, float), lambda v: v > 0, "a positive number")
        _require(man, "n", int, lambda v: v >= 3, "an int >= 3")
    else:
        _require(man, "r_max", (int, float), lambda v: v > 0, "a positive number")
        _require(man, "radial_points", int, lambda v: v >= 3, "an int >= 3")
    if cfg["operator"] not in ("scalar", "magnetic", "pauli"):
        raise ConfigError("operator", "must be scalar, magnetic or pauli")
    tol = cfg["tolerances"]
    for key in ("eig", "semigroup", "cg"):
        if not (isinstance(tol.get(key), (int, float)) and tol[key] > 0):
            raise ConfigError(f"tolerances.{key}", "must be a positive number")
    bt = cfg["beta"].get("type")
    if bt not in ("zero", "constant", "fourier", "gauge"):
        raise ConfigError("beta.type", "must be zero, constant, fourier or gauge")
    if not isinstance(cfg["seed"], int):
        raise ConfigError("seed", "must be an integer")
    if subcommand in ("sweep", "certify-scalar", "certify-magnetic", "certify-spin"):
        kg = cfg.get("kappa_grid")
        if not (isinstance(kg, list) and kg and all(
                isinstance(v, (int, float)) and v >= 0 for v in kg)) and kg != "trusted":
            raise ConfigError("kappa_grid", "must be 'trusted' or a nonempty list "
                                            "of nonnegative numbers")
    if subcommand in ("certify-scalar", "kato"):
        rg = cfg.get("r_grid")
        if not (isinstance(rg, list) and rg and all(
                isinstance(v, (int, float)) and v > 0 for v in rg)):
            raise ConfigError("r_grid", "must be a nonempty list of positive numbers")
    if subcommand in ("certify-magnetic", "certify-spin"):
        if not (isinstance(cfg.get("c6"), (int, float)) and cfg["c6"] > 0):
            raise ConfigError("c6", "must be a positive number (from certify-scalar)")
    if subcommand == "certify-spin":
        if not (isinstance(cfg.get("lambda"), (int, float)) and cfg["lambda"] > 0):
            raise ConfigError("lambda", "must be a positive number")


# ---------------------------------------------------------------------------
# small output helpers
# ---------------------------------------------------------------------------

class OutputDir:
    def __init__(self, root: str):
        self.root = root
        self.files: list[str] = []
        os.makedirs(root, exist_ok=True)

    def path(self, name: str) -> str:
        return os.path.join(self.root, name)

    def _commit(self, name: str, text: str) -> None:
        tmp = self.path(name + ".tmp")
        with open(tmp, "w") as fh:
            fh.write(text)
        os.replace(tmp, self.path(name))
        self.files.append(name)

    def write_csv(self, name: str, header: str, rows) -> None:
        lines = [header]
        for row in rows:
            lines.append(",".join(
                (_FMT % v) if isinstance(v, float) else str(v) for v in row))
        self._commit(name, "\n".join(lines) + "\n")

    def write_json(self, name: str, obj) -> None:
        self._commit(name, json.dumps(obj, indent=2, sort_keys=True,
                                      default=_jsonable) + "\n")

    def register(self, name: str) -> str:
        self.files.append(name)
        return self.path(name)


def _jsonable(obj):
    import numpy as np
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def write_manifest(out: OutputDir, cfg: dict, subcommand: str, status: str) -> None:
    import greenlab
    import numpy
    import scipy
    blob = json.dumps(cfg, sort_keys=True).encode()
    manifest = {
        "command": subcommand,
        "config_sha256": hashlib.sha256(blob).hexdigest(),
        "seed": cfg.get("seed", 0),
        "status": status,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "files": sorted(out.files),
        "versions": {"greenlab": greenlab.__version__,
                     "numpy": numpy.__version__, "scipy": scipy.__version__},
    }
    tmp = out.path("manifest.json.tmp")
    with open(tmp, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, out.path("manifest.json"))


# ---------------------------------------------------------------------------
# pipeline pieces (lazy imports keep --help fast)
# ---------------------------------------------------------------------------

def _build_manifold(cfg: dict):
    from . import geometry as g
    man = cfg["manifold"]
    if man["kind"] == "FlatBox":
        spec = g.MetricSpec(kind=g.Kind.FLAT_BOX,
                            box_half_width=float(man["half_width"]),
                            grid_points_per_axis=int(man["n"]))
    else:
        spec = g.MetricSpec(kind=g.Kind.WARPED_RADIAL,
                            warp_profile=g.WarpProfile(man.get("warp", "Hyperbolic")),
                            r_max=float(man["r_max"]),
                            radial_points=int(man["radial_points"]),
                            angular_mode_cutoff=int(man.get("ell_max", 0)))
    return g.build_manifold(spec)


def _resolve_y(cfg: dict, m) -> int:
    y = cfg["y"]
    if y == "center":
        return m.center_node()
    if isinstance(y, int) and 0 <= y < m.n_nodes:
        if m.boundary_mask[y]:
            raise ConfigError("y", "base point sits on the boundary")
        return y
    raise ConfigError("y", "must be 'center' or a valid interior node index")


def _beta_field(cfg: dict, m, index: int = 0):
    import numpy as np
    from .bundles import random_fourier_potential
    bcfg = cfg["beta"]
    kind = bcfg["type"]
    if kind == "zero":
        return np.zeros((m.n_nodes, 3))
    if kind == "constant":
        b = float(bcfg.get("b", 1.0))
        x = m.nodes
        return np.stack([-b * x[:, 1] / 2, b * x[:, 0] / 2, np.zeros(m.n_nodes)], axis=1)
    if kind == "fourier":
        return random_fourier_potential(
            m, seed=int(bcfg.get("seed", cfg["seed"])) + index,
            amplitude=float(bcfg.get("amplitude", 2.0)))
    # pure gauge: beta = grad chi for a seeded smooth chi
    import numpy as np
    from .bundles import smooth_scalar_field
    n = m.spec.grid_points_per_axis
    chi = smooth_scalar_field(m, seed=int(bcfg.get("chi_seed", cfg["seed"])),
                              complex_valued=False).real
    grads = np.gradient(chi.reshape(n, n, n), m.h)
    return np.stack([g.ravel() for g in grads], axis=1)


def _kappa_grid(cfg: dict, m):
    import numpy as np
    from .stability import trusted_kappa_window
    kg = cfg.get("kappa_grid", "trusted")
    if kg == "trusted":
        lo, hi = trusted_kappa_window(m)
        return list(np.geomspace(lo, hi, int(cfg.get("kappa_points", 6))))
    return [float(v) for v in kg]


def _green_bundle(cfg: dict, m, y):
    """Shared heavy path: operator, gap, both Green routes, envelope fit."""
    from .bundles import assemble_laplace_beltrami
    from .heatgreen import (GreenParams, fit_gaussian_bound, green_via_heat,
                            green_via_solve)
    from .spectral import smallest_eigenpairs
    tol = cfg["tolerances"]
    L = assemble_laplace_beltrami(m)
    lam1 = smallest_eigenpairs(L, k=1, tol=tol["eig"], seed=cfg["seed"])[0][0]
    params = GreenParams(semigroup_tol=tol["semigroup"], sample_seed=cfg["seed"])
    Gh = green_via_heat(m, L, y, lam1=lam1, params=params)
    Gs = green_via_solve(m, L, y, tol=tol["cg"], correction=Gh.meta["correction"])
    fit = fit_gaussian_bound(Gh.meta["envelope_samples"])
    return L, lam1, Gh, Gs, fit


# ---------------------------------------------------------------------------
# subcommand handlers: return True when every computed verdict passed,
# None when the subcommand has no verdicts
# ---------------------------------------------------------------------------

def _cmd_heat(cfg, out: OutputDir):
    import numpy as np
    from .bundles import assemble_laplace_beltrami
    from .geometry import distance_field
    from .heatgreen import heat_column
    m = _build_manifold(cfg)
    y = _resolve_y(cfg, m)
    L = assemble_laplace_beltrami(m)
    col = heat_column(m, L, y, float(cfg["t"]), tol=cfg["tolerances"]["semigroup"])
    d = distance_field(m, y)
    rows = [(i, float(m.nodes[i, 0]), float(m.nodes[i, 1]), float(m.nodes[i, 2]),
             float(d[i]), float(col.values[i])) for i in range(m.n_nodes)]
    out.write_csv("heat_column.csv", "node,x1,x2,x3,dist,p", rows)
    out.write_json("summary.json", {
        "t": cfg["t"], "base_point": y, "mass": float(np.sum(
            m.volume_weights * col.values)), "max": float(col.values.max())})
    if cfg["figures"]:
        from .report import heat_column_figure
        heat_column_figure(out.register("heat_column.png"), d, col.values, cfg["t"])
    return None


def _cmd_green(cfg, out: OutputDir):
    from .geometry import distance_field, save_manifold
    m = _build_manifold(cfg)
    y = _resolve_y(cfg, m)
    L, lam1, Gh, Gs, fit = _green_bundle(cfg, m, y)
    from .heatgreen import green_decay_constant
    c3m, c3p, ok = green_decay_constant(m, Gh, fit)
    d = distance_field(m, y)
    rows = [(i, float(d[i]), float(Gh.values[i]), float(Gs.values[i]))
            for i in range(m.n_nodes)]
    out.write_csv("green_field.csv", "node,dist,G_heat,G_solve", rows)
    save_manifold(m, out.path("manifold.txt"))
    out.files.append("manifold.txt")
    out.write_json("summary.json", {
        "lam1": lam1, "C1": fit.C1, "C2": fit.C2,
        "C3_measured": c3m, "C3_predicted": c3p, "decay_ok": bool(ok),
        "amplitude": Gh.meta["amplitude"], "base_point": y})
    if cfg["figures"]:
        from .report import green_figure
        green_figure(out.register("green_field.png"), d, Gh.values, Gs.values, m.h)
    return bool(ok)


def _cmd_kato(cfg, out: OutputDir):
    import numpy as np
    from .heatgreen import kato_sweep
    m = _build_manifold(cfg)
    y = _resolve_y(cfg, m)
    L, lam1, Gh, _, fit = _green_bundle(cfg, m, y)
    values = kato_sweep(m, L, Gh, cfg["r_grid"], lam1,
                        semigroup_tol=cfg["tolerances"]["semigroup"])
    rows = [(kv.r, kv.value, kv.value * np.sqrt(kv.r)) for kv in values]
    out.write_csv("kato_table.csv", "r,C_r,C_r_times_sqrt_r", rows)
    rr = np.array([kv.r for kv in values])
    cc = np.array([kv.value for kv in values])
    slope = float(np.polyfit(np.log(rr), np.log(cc), 1)[0])
    out.write_json("summary.json", {
        "slope": slope, "C_kato": float(np.max(cc * np.sqrt(rr))),
        "sup_nodes": [kv.sup_node for kv in values], "base_point": y})
    if cfg["figures"]:
        from .report import kato_figure
        kato_figure(out.register("kato_scaling.png"), rr, cc)
    return None


def _cmd_sobolev(cfg, out: OutputDir):
    from .bundles import assemble_laplace_beltrami
    from .stability import sobolev_constant
    m = _build_manifold(cfg)
    L = assemble_laplace_beltrami(m)
    est = sobolev_constant(m, L, seed=cfg["seed"])
    out.write_csv("sobolev_scan.csv", "label,ratio",
                  [(lbl, float(r)) for lbl, r in est.table])
    out.write_json("summary.json", {
        "C4": est.value, "family_max": est.family_max,
        "best_scale": est.best_scale})
    if cfg["figures"]:
        from .report import sobolev_figure
        sobolev_figure(out.register("sobolev_scan.png"),
                       [t[0] for t in est.table], [t[1] for t in est.table])
    return None


def _energy_csv(out: OutputDir, cert) -> None:
    rows = [(r.kappa, r.E0, r.bound, r.margin, r.flag)
            for r in cert.energy_table]
    out.write_csv("energy_table.csv", "kappa,E0,bound,margin,flag", rows)


def _cmd_sweep(cfg, out: OutputDir):
    import numpy as np
    from .stability import (HamiltonianSpec, assemble_hamiltonian,
                            ground_state_energy, smoothing_check, _window_flag)
    from .bundles import smooth_scalar_field
    m = _build_manifold(cfg)
    y = _resolve_y(cfg, m)
    L, lam1, Gh, _, fit = _green_bundle(cfg, m, y)
    kappas = _kappa_grid(cfg, m)
    rows = []
    v0 = None
    for kap in kappas:
        H = assemble_hamiltonian(L, Gh, HamiltonianSpec("scalar", kap, y))
        E0, v0 = ground_state_energy(H, tol=cfg["tolerances"]["eig"],
                                     seed=cfg["seed"], v0=v0)
        rows.append((float(kap), E0, float("nan"), float("nan"),
                     _window_flag(m, kap)))
    out.write_csv("energy_table.csv", "kappa,E0,bound,margin,flag", rows)
    kk = np.array([r[0] for r in rows])
    ee = np.array([r[1] for r in rows])
    ok = ee < 0
    expo = float(np.polyfit(np.log(kk[ok]), np.log(-ee[ok]), 1)[0]) if ok.sum() >= 3 else None
    smooth = smoothing_check(
        assemble_hamiltonian(L, Gh, HamiltonianSpec("scalar", float(kk[-1]), y)),
        cfg["t_grid"], smooth_scalar_field(m, seed=cfg["seed"]),
        tol=cfg["tolerances"]["semigroup"])
    out.write_csv("smoothing.csv", "t,sup_norm,l2_norm", smooth)
    out.write_json("summary.json", {"fit_exponent": expo, "lam1": lam1,
                                    "base_point": y})
    if cfg["figures"]:
        from .report import smoothing_figure, sweep_figure
        sweep_figure(out.register("sweep.png"), kk, ee,
                     np.full_like(kk, np.nan),
                     reference=-kk ** 2 / (64 * np.pi ** 2))
        smoothing_figure(out.register("smoothing.png"), smooth)
    return None


def _cmd_certify_scalar(cfg, out: OutputDir):
    import numpy as np
    from .stability import certify_scalar, sobolev_constant
    m = _build_manifold(cfg)
    y = _resolve_y(cfg, m)
    L, lam1, Gh, Gs, fit = _green_bundle(cfg, m, y)
    est = sobolev_constant(m, L, seed=cfg["seed"])
    kappas = _kappa_grid(cfg, m)
    cert = certify_scalar(m, L, Gh, cfg["r_grid"], kappas, y, fit, lam1,
                          C4=est.value, eig_tol=cfg["tolerances"]["eig"],
                          seed=cfg["seed"])
    extra_y = cfg.get("multi_y", 0)
    if extra_y:
        rng = np.random.default_rng(cfg["seed"])
        picks = _random_interior_points(m, rng, int(extra_y))
        per_y = []
        for yy in picks:
            Lb, lamb, Ghb, _, fitb = _green_bundle(cfg, m, yy)
            cb = certify_scalar(m, Lb, Ghb, cfg["r_grid"], kappas, yy, fitb,
                                lamb, eig_tol=cfg["tolerances"]["eig"],
                                seed=cfg["seed"])
            per_y.append({"y": yy, "C6": cb.C6, "all_pass": cb.all_pass})
        cert.notes["multi_y"] = per_y
        cert.all_pass &= all(r["all_pass"] for r in per_y)
    out.write_json("certificate.json", cert.to_dict())
    _energy_csv(out, cert)
    out.write_csv("kato_table.csv", "r,C_r,C_r_times_sqrt_r",
                  [(r, c, cs) for r, c, cs, _ in cert.r_table])
    if cfg["figures"]:
        from .report import kato_figure, sweep_figure
        kk = np.array([r.kappa for r in cert.energy_table])
        sweep_figure(out.register("sweep.png"), kk,
                     np.array([r.E0 for r in cert.energy_table]),
                     np.array([r.bound for r in cert.energy_table]),
                     reference=-kk ** 2 / (64 * np.pi ** 2))
        kato_figure(out.register("kato_scaling.png"),
                    np.array([r[0] for r in cert.r_table]),
                    np.array([r[1] for r in cert.r_table]))
    return cert.all_pass


def _random_interior_points(m, rng, count: int):
    import numpy as np
    inner = np.where(m.interior & (m.boundary_distance()
                                   > 0.25 * m.spec.box_half_width))[0]
    return [int(v) for v in rng.choice(inner, size=count, replace=False)]


def _cmd_certify_magnetic(cfg, out: OutputDir):
    from .bundles import connection_from_potential
    from .stability import certify_magnetic
    m = _build_manifold(cfg)
    y = _resolve_y(cfg, m)
    L, lam1, Gh, _, fit = _green_bundle(cfg, m, y)
    count = int(cfg.get("ensemble", 5))
    conns = [connection_from_potential(m, _beta_field(cfg, m, index=i), rank=1)
             for i in range(count)]
    cert = certify_magnetic(m, conns, Gh, _kappa_grid(cfg, m), y,
                            C6=float(cfg["c6"]), eig_tol=cfg["tolerances"]["eig"],
                            seed=cfg["seed"])
    out.write_json("certificate.json", cert.to_dict())
    _energy_csv(out, cert)
    if cfg["figures"]:
        import numpy as np
        from .report import sweep_figure
        kk = np.array([r.kappa for r in cert.energy_table])
        sweep_figure(out.register("sweep.png"), kk,
                     np.array([r.E0 for r in cert.energy_table]),
                     np.array([r.bound for r in cert.energy_table]))
    return cert.all_pass


def _cmd_certify_spin(cfg, out: OutputDir):
    from .bundles import assemble_pauli, connection_from_potential
    from .stability import certify_spin, sobolev_constant
    m = _build_manifold(cfg)
    y = _resolve_y(cfg, m)
    L, lam1, Gh, _, fit = _green_bundle(cfg, m, y)
    if isinstance(cfg.get("c4"), (int, float)) and cfg["c4"] > 0:
        c4 = float(cfg["c4"])
    else:
        c4 = sobolev_constant(m, L, seed=cfg["seed"]).value
    bvals = cfg.get("field_strengths", [0.5, 1.0, 2.0])
    assemblies = []
    for b in bvals:
        sub = dict(cfg)
        sub["beta"] = {"type": "constant", "b": float(b)}
        conn = connection_from_potential(m, _beta_field(sub, m), rank=2)
        assemblies.append(assemble_pauli(m, conn))
    cert = certify_spin(m, assemblies, Gh, float(cfg["lambda"]),
                        _kappa_grid(cfg, m), y, C6=float(cfg["c6"]), C4=c4,
                        eig_tol=cfg["tolerances"]["eig"], seed=cfg["seed"])
    cert.notes["field_strengths"] = [float(b) for b in bvals]
    out.write_json("certificate.json", cert.to_dict())
    _energy_csv(out, cert)
    if cfg["figures"]:
        import numpy as np
        from .report import sweep_figure
        kk = np.array([r.kappa for r in cert.energy_table])
        sweep_figure(out.register("sweep.png"), kk,
                     np.array([r.extra["shifted_energy"] for r in cert.energy_table]),
                     np.array([r.bound for r in cert.energy_table]))
    return cert.all_pass


def _cmd_check_invariants(cfg, out: OutputDir):
    from .invariants import run_invariant_battery
    rep = run_invariant_battery(trials=int(cfg.get("trials", 100)),
                                seed=cfg["seed"])
    out.write_json("invariants.json", {
        "trials": rep.trials, "failures": rep.failures, "worst": rep.worst,
        "total_failures": rep.total_failures})
    return rep.total_failures == 0


_HANDLERS = {
    "heat": _cmd_heat,
    "green": _cmd_green,
    "kato": _cmd_kato,
    "sobolev": _cmd_sobolev,
    "sweep": _cmd_sweep,
    "certify-scalar": _cmd_certify_scalar,
    "certify-magnetic": _cmd_certify_magnetic,
    "certify-spin": _cmd_certify_spin,
    "check-invariants": _cmd_check_invariants,
}


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def run(subcommand: str, config_path: str, out_dir: str | None = None,
        seed: int | None = None, threads: int | None = None,
        figures: bool | None = None) -> int:
    """Programmatic entry; returns the process exit status."""
    try:
        if subcommand not in SUBCOMMANDS:
            raise ConfigError("subcommand", f"unknown subcommand {subcommand!r}")
        cfg = load_config(config_path)
        if seed is not None:
            cfg["seed"] = seed
        if figures is not None:
            cfg["figures"] = figures
        validate_config(cfg, subcommand)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    root = out_dir or cfg.get("out_dir") or os.environ.get("GREENLAB_OUT") or "."
    out = OutputDir(root)

    limiter = None
    if threads is not None:
        try:
            from threadpoolctl import threadpool_limits
            limiter = threadpool_limits(limits=threads)
        except ImportError:
            os.environ["OMP_NUM_THREADS"] = str(threads)

    status = "ok"
    try:
        out.write_json("config_used.json", cfg)
        verdict = _HANDLERS[subcommand](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GreenlabError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        status = f"numerical failure: {exc}"
        write_manifest(out, cfg, subcommand, status)
        return EXIT_NUMERICAL
    finally:
        if limiter is not None:
            limiter.unregister()

    if verdict is False:
        status = "verdict failed"
    write_manifest(out, cfg, subcommand, status)
    print(f"{subcommand}: {status}; {len(out.files)} artifact(s) in {root}")
    return EXIT_OK if verdict in (None, True) else EXIT_VERDICT


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(
        prog="greenlab",
        description="Green's functions, gauge operators and stability "
                    "certificates on discretized 3-manifolds")
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", required=True, help="experiment config (JSON)")
    ap.add_argument("--out", default=None, help="output directory "
                    "(default: config out_dir, then $GREENLAB_OUT, then '.')")
    ap.add_argument("--seed", type=int, default=None, help="override config seed")
    ap.add_argument("--threads", type=int, default=None,
                    help="cap BLAS/OpenMP thread pools")
    ap.add_argument("--no-figures", action="store_true",
                    help="skip figure rendering")
    args = ap.parse_args(argv)
    return run(args.subcommand, args.config, out_dir=args.out, seed=args.seed,
               threads=args.threads,
               figures=False if args.no_figures else None)


if __name__ == "__main__":
    sys.exit(main())
