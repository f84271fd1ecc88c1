"""symlab command line.

    symlab <command> --config <file> [--out <dir>] [--seed <n>] [--workers <k>]

Commands: certify, cone, symmetrize, regularity, wavepacket, evolve, growth,
all-paper-checks. Each writes ``<command>.json`` plus CSV tables (and SVG
plots unless ``"plots": false``) into the output directory. Exit status is
0 when every asserted check passes, 1 on a failed check or a failed run,
and 2 on usage or config errors, in which case nothing is written.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Callable

import numpy as np

from . import cauchy, checks, reports
from .errors import ConfigError, SymlabError
from .grid import GridFunction, save_trajectory
from .regularity import (ReducedFamily, discontinuity_gap, holder_fit, lipschitz_estimate, oscillation,
                         symmetrizer_field)
from .symbols import (SymbolFamily, builtin_config, cone_explore, direction_change_constant, direction_certificate,
                      hyperbolicity_check, necessary_condition_probe, sphere_samples,
                      strong_hyperbolicity_in_direction)
from .symbols.analysis import char_roots, complement_basis
from .wavepacket import (DyadicFrame, canonical_field, commutator_energy_probe, dyadic_decompose, isometry_defect,
                         localization_probe, trend_slope)

COMMANDS = ("certify", "cone", "symmetrize", "regularity", "wavepacket", "evolve", "growth", "all-paper-checks")
TOP_KEYS = {"schema_version", "command", "family", "grids", "tolerances", "expect", "seed", "out_dir", "plots",
            "budget", "only"}
DEFAULT_OUT = "symlab_out"


# ---------------------------------------------------------------------------
# config coercion


def _num(v, name: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{name} must be a number")
    return float(v)


def _int(v, name: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{name} must be an integer")
    return v


def _pos_int(v, name: str) -> int:
    v = _int(v, name)
    if v <= 0:
        raise ConfigError(f"{name} must be positive")
    return v


def _bool(v, name: str) -> bool:
    if not isinstance(v, bool):
        raise ConfigError(f"{name} must be true or false")
    return v


def _nums(v, name: str) -> list[float]:
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{name} must be a nonempty list of numbers")
    return [_num(x, name) for x in v]


def _ints(v, name: str) -> list[int]:
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{name} must be a nonempty list of integers")
    return [_int(x, name) for x in v]


def _str(v, name: str) -> str:
    if not isinstance(v, str):
        raise ConfigError(f"{name} must be a string")
    return v


def _obj(v, name: str) -> dict:
    if not isinstance(v, dict):
        raise ConfigError(f"{name} must be an object")
    return v


def _opt(conv: Callable) -> Callable:
    return lambda v, name: None if v is None else conv(v, name)


def _matrix_rows(v, name: str) -> list[list[float]]:
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{name} must be a nonempty list of vectors")
    return [_nums(r, name) for r in v]


def _section(raw: dict | None, schema: dict, where: str) -> dict:
    """Fill defaults and coerce; unknown keys are an error."""
    raw = {} if raw is None else _obj(raw, where)
    extra = set(raw) - set(schema)
    if extra:
        raise ConfigError(f"unknown fields in {where}: {sorted(extra)}")
    out = {}
    for key, (default, conv) in schema.items():
        out[key] = conv(raw[key], f"{where}.{key}") if key in raw else default
    return out


# ---------------------------------------------------------------------------
# run context


class Run:
    """Validated config plus the pieces every command needs."""

    def __init__(self, command: str, cfg: dict, seed: int, workers: int):
        self.command = command
        self.cfg = cfg
        self.seed = seed
        self.workers = workers
        self.fam: SymbolFamily | None = None
        self.grids: dict = {}
        self.tol: dict = {}
        self.expect: dict = {}
        self.plots = True
        self.tables: dict[str, tuple[list[str], list[list]]] = {}
        self.svgs: list[tuple[str, str, dict]] = []
        self.blobs: list[Callable[[Path], list[str]]] = []

    @property
    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def echo(self) -> dict:
        out = {"command": self.command, "seed": self.seed, "grids": self.grids, "tolerances": self.tol,
               "expect": self.expect, "plots": self.plots}
        if self.fam is not None:
            out["family"] = self.fam.to_config()
        return out

    def table(self, name: str, header: list[str], rows: list[list]) -> None:
        self.tables[name] = (header, rows)

    def plot(self, name: str, table: str, **kw) -> None:
        if self.plots:
            self.svgs.append((name, table, kw))


def _family(raw, required: bool) -> SymbolFamily | None:
    if raw is None:
        if required:
            raise ConfigError("missing field: family")
        return None
    if isinstance(raw, str):
        raw = builtin_config(raw)
    return SymbolFamily.from_config(_obj(raw, "family"))


def _vector(v, n: int, name: str) -> np.ndarray:
    vec = np.asarray(_nums(v, name))
    if vec.size != n:
        raise ConfigError(f"{name} must have {n} entries")
    return vec


def _param_vector(fam: SymbolFamily, v, name: str) -> np.ndarray:
    if v is None:
        return np.array([(p.lo + p.hi) / 2 for p in fam.params])
    if isinstance(v, dict):
        names = [p.name for p in fam.params]
        extra = set(v) - set(names)
        if extra or set(names) - set(v):
            raise ConfigError(f"{name} must give exactly the parameters {names}")
        return np.array([_num(v[k], f"{name}.{k}") for k in names])
    return _vector(v, fam.n_params, name)


def _param_grid(fam: SymbolFamily, explicit, per: int) -> np.ndarray:
    if explicit is not None:
        return np.array([_param_vector(fam, p, "grids.params") for p in explicit]).reshape(len(explicit), fam.n_params)
    if fam.n_params == 0:
        return np.zeros((1, 0))
    axes = [np.linspace(p.lo, p.hi, per) for p in fam.params]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _e(n: int, k: int) -> list[float]:
    v = [0.0] * n
    v[k] = 1.0
    return v


# ---------------------------------------------------------------------------
# commands: each has prepare (validation only) and execute


METRICS: dict[str, set[str]] = {
    "certify": {"max_imag", "C1", "C2", "C3", "C4", "c4", "symmetry_defect", "positivity", "failures"},
    "cone": {"chart_points", "K", "c", "C", "C1", "probe", "probe_ratio"},
    "symmetrize": {"max_symmetry_defect", "min_positivity", "failures", "max_condition"},
    "regularity": {"lipschitz_constant", "holder_exponent", "holder_r2", "gap"},
    "wavepacket": {"max_isometry_defect", "reconstruction_defect", "max_localization_slope", "commutator_slope"},
    "evolve": {"C", "gamma", "growth_rate", "max_norm_ratio", "conservation_defect"},
    "growth": {"fit_exponent", "fit_prefactor", "r2", "prefactor_ratio"},
}


def prepare_certify(run: Run, raw: dict) -> None:
    fam = run.fam = _family(raw.get("family"), True)
    run.grids = _section(raw.get("grids"), {
        "direction": (_e(fam.d + 1, 0), _nums), "params": (None, _opt(lambda v, n: v)),
        "samples_per_param": (5, _pos_int), "n_sphere": (1000, _pos_int), "n_certificate": (64, _pos_int),
        "probes": (True, _bool)}, "grids")
    _vector(run.grids["direction"], fam.d + 1, "grids.direction")
    run.grids["params"] = _param_grid(fam, run.grids["params"], run.grids["samples_per_param"]).tolist()
    run.tol = _section(raw.get("tolerances"), {"imag": (1e-8, _num), "symmetry": (1e-8, _num)}, "tolerances")


def execute_certify(run: Run, rep: reports.Report) -> dict:
    fam, g = run.fam, run.grids
    nu = np.asarray(g["direction"])
    params = np.asarray(g["params"], dtype=float).reshape(len(g["params"]), fam.n_params)
    hyp = hyperbolicity_check(fam, nu, params, n_sphere=g["n_sphere"], tol=run.tol["imag"])
    xis = sphere_samples(fam.d + 1, g["n_sphere"])
    rows = []
    for a in params:
        im = float(np.abs(char_roots(fam, a, nu, xis).imag).max())
        rows.append(list(a) + [im])
    run.table("certify_params", [p.name for p in fam.params] + ["max_imag"], rows)
    sweep = strong_hyperbolicity_in_direction(fam, nu, params, n_sphere=g["n_certificate"], probes=g["probes"])
    rep.results.update(hyperbolicity={"max_imag": hyp.max_imag, "worst_param": hyp.worst_param,
                                      "worst_xi": hyp.worst_xi, "n_checked": hyp.n_checked},
                       certificate=sweep.summary())
    rep.evidence.update(sphere=f"sphere_samples({fam.d + 1}, {g['n_sphere']})",
                        certificate_sphere=f"sphere_samples({fam.d}, {g['n_certificate']}) in the complement of nu")
    rep.check("hyperbolic", hyp.max_imag <= run.tol["imag"], f"max |Im root| {hyp.max_imag:.3g}")
    rep.check("strongly hyperbolic", sweep.passed, f"{len(sweep.failures)} failing samples")
    rep.check("symmetrizer hermitian", sweep.symmetry_defect <= run.tol["symmetry"], f"{sweep.symmetry_defect:.3g}")
    return {"max_imag": hyp.max_imag, "C1": sweep.C1, "C2": sweep.C2, "C3": sweep.C3, "C4": sweep.C4,
            "c4": sweep.c4, "symmetry_defect": sweep.symmetry_defect, "positivity": sweep.positivity,
            "failures": float(len(sweep.failures))}


def prepare_cone(run: Run, raw: dict) -> None:
    fam = run.fam = _family(raw.get("family"), True)
    run.grids = _section(raw.get("grids"), {
        "a": (None, _opt(lambda v, n: v)), "direction": (_e(fam.d + 1, 0), _nums), "target": (None, _opt(_nums)),
        "budget": (5000, _pos_int), "ring": (6, _pos_int), "gammas": (np.logspace(-3, 3, 19).tolist(), _nums),
        "n_sphere": (500, _pos_int)}, "grids")
    run.grids["a"] = _param_vector(fam, run.grids["a"], "grids.a").tolist()
    _vector(run.grids["direction"], fam.d + 1, "grids.direction")
    if run.grids["target"] is not None:
        _vector(run.grids["target"], fam.d + 1, "grids.target")
    run.tol = _section(raw.get("tolerances"), {"slack": (0.1, _num)}, "tolerances")


def execute_cone(run: Run, rep: reports.Report) -> dict:
    fam, g = run.fam, run.grids
    a, nu = np.asarray(g["a"]), np.asarray(g["direction"])
    chart = cone_explore(fam, a, nu, budget=g["budget"], ring=g["ring"])
    run.table("cone_points", [f"v{k}" for k in range(fam.d + 1)] + ["det", "radius"],
              [list(p) + [d, r] for p, d, r in zip(chart.points, chart.detvals, chart.radii)])
    C = necessary_condition_probe(fam, a, nu, n_sphere=g["n_sphere"], gammas=g["gammas"])
    out = {"chart_points": float(len(chart.points)), "K": chart.K, "c": chart.c, "C": C}
    rep.results.update(chart={"points": len(chart.points), "K": chart.K, "c": chart.c, "complete": chart.complete},
                       resolvent_bound=C)
    rep.evidence.update(resolvent_sphere=f"sphere_samples({fam.d + 1}, {g['n_sphere']})")
    if g["target"] is not None:
        target = np.asarray(g["target"])
        inside = chart.contains(target)
        rep.check("target certified", inside)
        if inside:
            C1 = direction_change_constant(fam, a, nu, target, C, chart=chart)
            probe = necessary_condition_probe(fam, a, target, n_sphere=g["n_sphere"], gammas=g["gammas"])
            out.update(C1=C1, probe=probe, probe_ratio=probe / C1)
            rep.results["target"] = {"C1": C1, "probe": probe, "witness": chart.witness(target)}
            rep.check("resolvent bound in target direction", probe <= (1 + run.tol["slack"]) * C1,
                      f"probe / C1 = {probe / C1:.4g}")
    return out


def prepare_symmetrize(run: Run, raw: dict) -> None:
    fam = run.fam = _family(raw.get("family"), True)
    run.grids = _section(raw.get("grids"), {
        "a": (None, _opt(lambda v, n: v)), "direction": (_e(fam.d + 1, 0), _nums), "xis": (None, _opt(_matrix_rows)),
        "n_sphere": (64, _pos_int), "probes": (True, _bool)}, "grids")
    run.grids["a"] = _param_vector(fam, run.grids["a"], "grids.a").tolist()
    nu = _vector(run.grids["direction"], fam.d + 1, "grids.direction")
    if run.grids["xis"] is None:
        basis = complement_basis(nu)
        run.grids["xis"] = (sphere_samples(fam.d, run.grids["n_sphere"]) @ basis.T).tolist()
    for xi in run.grids["xis"]:
        _vector(xi, fam.d + 1, "grids.xis")
    run.tol = _section(raw.get("tolerances"), {"symmetry": (1e-8, _num)}, "tolerances")


def execute_symmetrize(run: Run, rep: reports.Report) -> dict:
    fam, g = run.fam, run.grids
    a, nu = np.asarray(g["a"]), np.asarray(g["direction"])
    rows, items = [], []
    sym, pos, cond, fails = 0.0, np.inf, 0.0, 0
    for xi in np.asarray(g["xis"], dtype=float):
        dc = direction_certificate(fam, a, nu, xi, probes=g["probes"])
        if dc.S is None:
            fails += 1
            rows.append(list(xi) + [False, float("nan"), float("nan"), float("nan")])
            items.append({"xi": xi, "pass": False, "reason": dc.certificate.reason})
            continue
        Lxi = fam.symbol(a, xi)
        M = dc.S @ Lxi
        d = float(np.linalg.norm(M - M.conj().T, 2) / max(np.linalg.norm(dc.S, 2) * np.linalg.norm(Lxi, 2), 1e-300))
        H = dc.S @ dc.L_nu
        p = float(np.linalg.eigvalsh(0.5 * (H + H.conj().T))[0])
        c = float(np.linalg.cond(dc.S))
        sym, pos, cond = max(sym, d), min(pos, p), max(cond, c)
        rows.append(list(xi) + [True, d, p, c])
        items.append({"xi": xi, "pass": True, "S": dc.S, "symmetry_defect": d, "positivity": p})
    run.table("symmetrize", [f"xi{k}" for k in range(fam.d + 1)] + ["pass", "symmetry_defect", "positivity",
                                                                     "condition"], rows)
    rep.results["samples"] = items
    rep.check("all samples symmetrized", fails == 0, f"{fails} failures")
    rep.check("S L(xi) hermitian", sym <= run.tol["symmetry"], f"{sym:.3g}")
    rep.check("S L(nu) positive", pos > 0, f"{pos:.4g}")
    return {"max_symmetry_defect": sym, "min_positivity": pos, "failures": float(fails), "max_condition": cond}


def prepare_regularity(run: Run, raw: dict) -> None:
    fam = run.fam = _family(raw.get("family"), True)
    run.grids = _section(raw.get("grids"), {
        "direction": (_e(fam.d + 1, 0), _nums), "coords": (["x", "xi1"], lambda v, n: [_str(c, n) for c in v]),
        "fixed_params": ({}, _obj), "fixed_xi": (_e(fam.d + 1, fam.d), _nums), "center": (None, _opt(_nums)),
        "halfwidth": (0.1, _num), "levels": ([33, 65, 129], _ints), "holder_halfwidth": (0.005, _num),
        "holder_points": (257, _pos_int)}, "grids")
    g = run.grids
    _vector(g["direction"], fam.d + 1, "grids.direction")
    _vector(g["fixed_xi"], fam.d + 1, "grids.fixed_xi")
    if not 1 <= len(g["coords"]) <= 2:
        raise ConfigError("grids.coords must name one or two coordinates")
    if len(g["levels"]) < 2:
        raise ConfigError("grids.levels needs at least two refinement levels")
    g["fixed_params"] = {k: _num(v, f"grids.fixed_params.{k}") for k, v in g["fixed_params"].items()}
    if g["center"] is None:
        g["center"] = [0.0] * len(g["coords"])
    _vector(g["center"], len(g["coords"]), "grids.center")
    try:
        ReducedFamily(fam, g["direction"], g["coords"], g["fixed_params"], g["fixed_xi"])
    except SymlabError as exc:
        raise ConfigError(str(exc)) from None


def execute_regularity(run: Run, rep: reports.Report) -> dict:
    g = run.grids
    rf = ReducedFamily(run.fam, g["direction"], g["coords"], g["fixed_params"], g["fixed_xi"])
    c = np.asarray(g["center"])

    def axes(hw, n):
        return [np.linspace(ci - hw, ci + hw, n) for ci in c]

    levels = [symmetrizer_field(rf, axes(g["halfwidth"], n)) for n in g["levels"]]
    lip = lipschitz_estimate(levels)
    gap, gaps, survives = discontinuity_gap(levels, c)
    fine = symmetrizer_field(rf, axes(g["holder_halfwidth"], g["holder_points"]))
    alpha, r2, flags = holder_fit(fine, c)
    radii = 4 * fine.spacing * 2.0 ** np.arange(6)
    run.table("regularity_modulus", ["radius", "oscillation"], [[r, oscillation(fine, c, r)] for r in radii])
    osc0 = oscillation(fine, c, radii[0])
    run.plot("regularity_modulus", "regularity_modulus", x="radius", ys=["oscillation"], logx=True, logy=True,
             title="modulus of continuity", fit=(alpha, osc0 / radii[0] ** alpha) if osc0 > 0 else None)
    rep.results.update(lipschitz=lip.summary(), holder={"exponent": alpha, "r2": r2, "flags": flags},
                       gap={"gap": gap, "levels": gaps, "survives": survives})
    rep.evidence.update(level_axes=[axes(g["halfwidth"], n)[0][[0, -1]].tolist() + [n] for n in g["levels"]],
                        holder_radii=radii, invalid_points=fine.invalid)
    return {"lipschitz_constant": lip.lipschitz_constant, "holder_exponent": alpha, "holder_r2": r2,
            "gap": gap if survives else 0.0}


def prepare_wavepacket(run: Run, raw: dict) -> None:
    run.fam = _family(raw.get("family"), False)
    run.grids = _section(raw.get("grids"), {
        "n": (1024, _pos_int), "L": (float(np.pi), _num), "ncomp": (2, _pos_int),
        "lambdas": ((2.0 ** np.arange(3, 10)).tolist(), _nums), "levels": (list(range(3, 9)), _ints),
        "orders": ([1, 2, 3], _ints), "commutator_n": (512, _pos_int), "params": ({}, _obj)}, "grids")
    run.tol = _section(raw.get("tolerances"), {
        "isometry": (1e-6, _num), "reconstruction": (1e-12, _num), "localization_slope": (0.1, _num),
        "commutator_slope": (0.1, _num)}, "tolerances")
    if run.fam is not None and run.fam.d not in (1, 2):
        raise ConfigError("commutator probe needs a family with d = 1 or 2")


def execute_wavepacket(run: Run, rep: reports.Report) -> dict:
    g, rng = run.grids, run.rng
    lams = np.asarray(g["lambdas"])
    u = GridFunction.band_limited_noise(rng, g["n"], g["L"], ncomp=g["ncomp"])
    iso = [isometry_defect(u, lam) for lam in lams]
    fr = DyadicFrame.for_grid(u)
    total = sum(p.values for p in dyadic_decompose(u, fr))
    recon = float(np.abs(total - u.values).max() / np.abs(u.values).max())
    js = np.asarray(g["levels"])
    slopes = {}
    for order in g["orders"]:
        logs = [localization_probe(u, int(j), order, 0, 0, fr).log2_ratio for j in js]
        slopes[str(order)] = trend_slope(js, logs)
    cols, rows = ["lambda", "isometry_defect"], [[lam, d] for lam, d in zip(lams, iso)]
    out = {"max_isometry_defect": max(iso), "reconstruction_defect": recon,
           "max_localization_slope": max(slopes.values())}
    rep.results.update(isometry_defects=iso, reconstruction_defect=recon, localization_slopes=slopes)
    rep.evidence.update(data=f"band-limited noise, seed {run.seed}", frame_levels=fr.J)
    rep.check("isometry", out["max_isometry_defect"] < run.tol["isometry"], f"{out['max_isometry_defect']:.3g}")
    rep.check("reconstruction", recon < run.tol["reconstruction"], f"{recon:.3g}")
    rep.check("localization", out["max_localization_slope"] <= run.tol["localization_slope"])
    if run.fam is not None:
        fam = run.fam
        S = canonical_field(fam, g["params"])
        v = GridFunction.from_function(lambda x: np.outer(np.linspace(1.0, 0.3, fam.N),
                                                          np.exp(-(x - 0.3) ** 2 / 2)), g["commutator_n"], 2 * np.pi)
        ratios = [commutator_energy_probe(v, S, fam, lam, g["params"], eta=lam if fam.d == 2 else None).ratio
                  for lam in lams]
        slope = trend_slope(np.log(lams), np.log(ratios))
        cols.append("commutator_ratio")
        rows = [r + [q] for r, q in zip(rows, ratios)]
        out["commutator_slope"] = slope
        rep.results.update(commutator_ratios=ratios, commutator_slope=slope)
        rep.check("commutator trend", slope <= run.tol["commutator_slope"], f"{slope:.3g}")
    run.table("wavepacket", cols, rows)
    return out


def _data_schema(N: int) -> dict:
    return {"center": (0.0, _num), "width": (0.5, _num), "k0": (0.0, _num),
            "amplitudes": ([1.0] + [0.0] * (N - 1), _nums)}


def prepare_evolve(run: Run, raw: dict) -> None:
    fam = run.fam = _family(raw.get("family"), True)
    run.grids = _section(raw.get("grids"), {
        "n": (256, _pos_int), "L": (float(np.pi), _num), "T": (1.0, _num), "dt": (None, _opt(_num)),
        "eta": (None, _opt(_num)), "params": ({}, _obj), "stride": (10, _pos_int), "taper": (0.8, _opt(_num)),
        "filter_order": (36, _opt(_pos_int)), "data": ({}, _obj)}, "grids")
    g = run.grids
    g["data"] = _section(g["data"], _data_schema(fam.N), "grids.data")
    if len(g["data"]["amplitudes"]) != fam.N:
        raise ConfigError(f"grids.data.amplitudes must have {fam.N} entries")
    g["params"] = {k: _num(v, f"grids.params.{k}") for k, v in g["params"].items()}
    if fam.d > 2:
        raise ConfigError("evolution supports d = 1 or 2")
    if g["T"] <= 0:
        raise ConfigError("grids.T must be positive")


def execute_evolve(run: Run, rep: reports.Report) -> dict:
    fam, g = run.fam, run.grids
    d = g["data"]
    dims = 2 if fam.d == 2 and g["eta"] is None else 1
    amps = np.asarray(d["amplitudes"], dtype=complex)

    def profile(*xs):
        r2 = sum((x - d["center"]) ** 2 for x in xs)
        return np.multiply.outer(amps, np.exp(-r2 / (2 * d["width"] ** 2) + 1j * d["k0"] * xs[0]))

    u0 = GridFunction.from_function(profile, g["n"], g["L"], dims)
    prob = cauchy.EvolutionProblem(fam, u0, g["T"], dt=g["dt"], params=g["params"], eta=g["eta"],
                                   stride=g["stride"], taper=g["taper"], filter_order=g["filter_order"])
    traj = cauchy.evolve(prob)
    C, gamma = cauchy.growth_constant(traj)
    rate = cauchy.growth_rate(traj)
    n0 = traj.norms[0]
    run.table("evolve_norms", ["t", "norm", "ratio"], [[t, v, v / n0] for t, v in zip(traj.t_steps, traj.norms)])
    run.plot("evolve_norms", "evolve_norms", x="t", ys=["ratio"], logy=True, title="|u(t)| / |u(0)|")

    def blob(out: Path) -> list[str]:
        save_trajectory(out / "evolve_trajectory.symg", traj.snaps, traj.times)
        return ["evolve_trajectory.symg", "evolve_trajectory.symg.json"]

    run.blobs.append(blob)
    rep.results.update(C=C, gamma=gamma, growth_rate=rate, dt=traj.dt, dt_max=traj.dt_max,
                       diagnostics=traj.diagnostics, snapshot_times=traj.times)
    rep.evidence.update(dims=dims, grid={"n": g["n"], "L": g["L"]})
    return {"C": C, "gamma": gamma, "growth_rate": rate, "max_norm_ratio": traj.diagnostics["max_norm_ratio"],
            "conservation_defect": traj.diagnostics["conservation_defect"]}


def prepare_growth(run: Run, raw: dict) -> None:
    run.fam = _family(raw.get("family"), False)
    run.grids = _section(raw.get("grids"), {
        "alpha": (0.5, _num), "etas": ((4.0 ** np.arange(2, 8)).tolist(), _nums), "T": (None, _opt(_num)),
        "n": (512, _pos_int), "Lz": (16.0, _num), "data": ("gaussian", _str)}, "grids")
    g = run.grids
    if g["alpha"] < 0:
        raise ConfigError("grids.alpha must be non-negative")
    if g["data"] not in ("gaussian", "ansatz"):
        raise ConfigError("grids.data must be gaussian or ansatz")
    if any(e <= 0 for e in g["etas"]):
        raise ConfigError("grids.etas must be positive")
    if g["T"] is None:
        g["T"] = 2.0 if g["alpha"] == 0 else 5.0
    if run.fam is None:
        from .symbols import example1

        run.fam = example1(a="holder", alpha=g["alpha"])


def execute_growth(run: Run, rep: reports.Report) -> dict:
    g = run.grids
    with reports.worker_map(run.workers) as mapper:
        gr = cauchy.mode_growth(g["alpha"], g["etas"], g["T"], n=g["n"], Lz=g["Lz"], data=g["data"], fam=run.fam,
                                mapper=mapper)
    alpha = g["alpha"]
    if alpha == 0:
        oracle, what = abs(cauchy.oscillator_eigen(0.0, 1.0).beta.imag), "|Im beta| for beta^2 = 1 + i"
    elif alpha < 1:
        oracle, what = cauchy.first_order_shift(alpha) / 2, "lambda1 / 2"
    else:
        oracle, what = float("nan"), "none"
    ratio = gr.fit_prefactor / oracle if np.isfinite(oracle) else float("nan")
    run.table("growth", ["eta", "sigma"], [[e, s] for e, s in zip(gr.eta_list, gr.sigma)])
    run.plot("growth", "growth", x="eta", ys=["sigma"], logx=True, logy=True, title=f"growth rates, alpha = {alpha:g}",
             fit=(gr.fit_exponent, gr.fit_prefactor) if np.isfinite(gr.fit_exponent) else None)
    rep.results.update(gr.summary())
    rep.results.update(prefactor_oracle=oracle, prefactor_oracle_kind=what, prefactor_ratio=ratio)
    rep.evidence.update(frame="z = sqrt(eta) x on [-Lz, Lz)", rate_window="middle third of [0, T]")
    rep.check("fit available", np.isfinite(gr.fit_exponent), "; ".join(gr.flags))
    return {"fit_exponent": gr.fit_exponent, "fit_prefactor": gr.fit_prefactor, "r2": gr.r2, "prefactor_ratio": ratio}


HANDLERS = {
    "certify": (prepare_certify, execute_certify),
    "cone": (prepare_cone, execute_cone),
    "symmetrize": (prepare_symmetrize, execute_symmetrize),
    "regularity": (prepare_regularity, execute_regularity),
    "wavepacket": (prepare_wavepacket, execute_wavepacket),
    "evolve": (prepare_evolve, execute_evolve),
    "growth": (prepare_growth, execute_growth),
}


def _expectations(raw, command: str) -> dict:
    exp = {} if raw is None else _obj(raw, "expect")
    out = {}
    for key, bounds in exp.items():
        if key not in METRICS[command]:
            raise ConfigError(f"expect.{key}: unknown metric for {command}; known: {sorted(METRICS[command])}")
        if not isinstance(bounds, list) or len(bounds) != 2:
            raise ConfigError(f"expect.{key} must be [lo, hi] (null for open ends)")
        out[key] = [_opt(_num)(b, f"expect.{key}") for b in bounds]
    return out


# ---------------------------------------------------------------------------
# driver


class UsageError(Exception):
    pass


def load_config(path: str | None, command: str) -> dict:
    if path is None:
        if command != "all-paper-checks":
            raise UsageError("--config is required")
        return {"schema_version": 1}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    cfg = _obj(cfg, "config")
    extra = set(cfg) - TOP_KEYS
    if extra:
        raise ConfigError(f"unknown fields in config: {sorted(extra)}")
    if cfg.get("schema_version") != reports.SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {cfg.get('schema_version')!r}")
    if "command" in cfg and cfg["command"] != command:
        raise ConfigError(f"config is for {cfg['command']!r}, not {command!r}")
    return cfg


def prepare(command: str, cfg: dict, seed: int, workers: int) -> Run:
    run = Run(command, cfg, seed, workers)
    run.plots = _bool(cfg.get("plots", True), "plots")
    if command == "all-paper-checks":
        for key in ("family", "grids", "tolerances", "expect"):
            if key in cfg:
                raise ConfigError(f"{key} is not used by all-paper-checks")
        budget = _str(cfg.get("budget", "full"), "budget")
        if budget not in ("full", "reduced"):
            raise ConfigError("budget must be full or reduced")
        only = cfg.get("only")
        if only is not None:
            only = _ints(only, "only")
            if not set(only) <= set(checks.CRITERIA):
                raise ConfigError(f"only: criteria are {sorted(checks.CRITERIA)}")
        run.grids = {"budget": budget, "only": only}
        return run
    for key in ("budget", "only"):
        if key in cfg:
            raise ConfigError(f"{key} is only used by all-paper-checks")
    HANDLERS[command][0](run, cfg)
    run.expect = _expectations(cfg.get("expect"), command)
    return run


def execute(run: Run, progress: Callable | None = None) -> tuple[reports.Report, dict]:
    rep = reports.Report(run.command, run.echo())
    if run.command == "all-paper-checks":
        with reports.worker_map(run.workers) as mapper:
            res = checks.all_checks(run.seed, mapper, reduced=run.grids["budget"] == "reduced",
                                    only=run.grids["only"], progress=progress)
        rep.results["criteria"] = {str(k): r.to_dict() for k, r in res.items()}
        rep.results["summary"] = {str(k): r.to_dict()["status"] for k, r in res.items()}
        for k, r in res.items():
            if not r.skipped:
                failing = [c.name for c in r.checks if not c.passed]
                rep.check(f"criterion {k}: {r.title}", r.passed, "; ".join(failing))
        run.table("criteria", ["criterion", "title", "status"],
                  [[k, r.title, r.to_dict()["status"]] for k, r in res.items()])
        return rep, res
    metrics = HANDLERS[run.command][1](run, rep)
    rep.results["metrics"] = metrics
    for key, (lo, hi) in run.expect.items():
        v = metrics.get(key, float("nan"))
        ok = np.isfinite(v) and (lo is None or v >= lo) and (hi is None or v <= hi)
        span = f"[{'-inf' if lo is None else f'{lo:g}'}, {'inf' if hi is None else f'{hi:g}'}]"
        rep.check(f"expect {key} in {span}", ok, f"{v:.6g}")
    return rep, {}


def write_outputs(run: Run, rep: reports.Report, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for name, (header, rows) in run.tables.items():
        reports.write_csv(out / f"{name}.csv", header, rows)
        rep.files.append(f"{name}.csv")
    for name, table, kw in run.svgs:
        reports.svg_from_csv(out / f"{table}.csv", out / f"{name}.svg", **kw)
        rep.files.append(f"{name}.svg")
    for blob in run.blobs:
        rep.files.extend(blob(out))
    name = f"{run.command}.json"
    rep.files.append(name)
    reports.write_json(out / name, rep.to_dict())


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="symlab", description="Symmetrizer and hyperbolicity laboratory.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON run config (optional for all-paper-checks)")
    ap.add_argument("--out", help=f"output directory (default: config out_dir or ./{DEFAULT_OUT})")
    ap.add_argument("--seed", type=int, help="random seed (default: config seed or 0)")
    ap.add_argument("--workers", type=int, default=1, help="bounded worker count for parallel sweeps")
    ap.add_argument("--budget", choices=("full", "reduced"), help="all-paper-checks: reduced skips criteria 8 and 9")
    return ap


def _progress(res) -> None:
    status = "skip" if res.skipped else ("PASS" if res.passed else "FAIL")
    limit = f" (limit {res.limit:g} s)" if res.limit else ""
    print(f"  [{status}] {res.key:>2} {res.title:<28} {res.seconds:8.1f} s{limit}", flush=True)


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.workers < 1:
            raise UsageError("--workers must be at least 1")
        cfg = load_config(args.config, args.command)
        if args.budget is not None:
            if args.command != "all-paper-checks":
                raise UsageError("--budget applies to all-paper-checks only")
            cfg["budget"] = args.budget
        seed = args.seed if args.seed is not None else _int(cfg.get("seed", 0), "seed")
        out = Path(args.out if args.out is not None else _str(cfg.get("out_dir", DEFAULT_OUT), "out_dir"))
        run = prepare(args.command, cfg, seed, args.workers)
    except (UsageError, ConfigError) as exc:
        print(f"symlab: error: {exc}", file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    try:
        rep, _ = execute(run, progress=_progress if args.command == "all-paper-checks" else None)
    except SymlabError as exc:
        print(f"symlab: {args.command} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    write_outputs(run, rep, out)
    for c in rep.checks:
        print(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}" + (f" ({c.detail})" if c.detail else ""))
    print(f"{args.command}: {'pass' if rep.passed else 'fail'} in {time.perf_counter() - t0:.1f} s; "
          f"report {out / (args.command + '.json')}")
    if not rep.passed:
        print("failing checks: " + ", ".join(rep.failing), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
