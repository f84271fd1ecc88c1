"""The acceptance suite as plain functions.

Each criterion takes a seeded generator and a ``mapper`` for independent
sweeps, and returns a :class:`CriterionResult` whose ``checks`` decide the
verdict. Wall-clock time is recorded on the result but never enters a
report, so reports stay byte-identical across runs.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import cauchy, matrix_core as mc
from .grid import GridFunction
from .regularity import ReducedFamily, discontinuity_gap, holder_fit, sample_field, symmetrizer_field
from .reports import Check, dumps
from .symbols import (char_roots, cone_explore, direction_change_constant, example1, hyperbolicity_check,
                      kernel_identities, necessary_condition_probe, random_kernel_instance, sphere_samples)
from .wavepacket import (DyadicFrame, canonical_field, commutator_energy_probe, dyadic_decompose,
                         isometry_defect, localization_probe, rough_control_field, trend_slope)

NU = np.array([1.0, 0.0, 0.0])
NU_PRIME = np.array([1.0, 0.5, 0.0])
ROUGH_R = [[0, 0, 0], [0, 0, 1], [0, 1, 0]]


@dataclass
class CriterionResult:
    key: int
    title: str
    limit: float
    metrics: dict = field(default_factory=dict)
    evidence: dict = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    skipped: bool = False
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.skipped and all(c.passed for c in self.checks)

    def check(self, name: str, ok, detail: str = "") -> None:
        self.checks.append(Check(name, bool(ok), detail))

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "status": "skipped" if self.skipped else ("pass" if self.passed else "fail"),
            "runtime_limit_s": self.limit or None,
            "metrics": self.metrics,
            "evidence": self.evidence,
            "checks": [{"name": c.name, "pass": c.passed, "detail": c.detail} for c in self.checks],
        }


# ---------------------------------------------------------------------------
# matrix level


def certificates(res: CriterionResult, rng: np.random.Generator, mapper: Callable = map,
                 n_random: int = 10_000, n_jordan: int = 1_000) -> None:
    worst_lower = np.inf
    worst_sym = 0.0
    fails = {"hermitian": 0, "semisimple": 0}
    for kind, make in (("hermitian", mc.random_hermitian), ("semisimple", mc.random_semisimple_real)):
        for _ in range(n_random):
            N = int(rng.integers(1, 7))
            A = make(rng, N)
            cert = mc.strong_hyperbolicity_certificate(A)
            if not cert.passed:
                fails[kind] += 1
                continue
            worst_lower = min(worst_lower, cert.c4 - (1.0 / N - 1e-8))
            # |S| = C4 since S is Hermitian positive definite
            scale = cert.C4 * np.linalg.norm(A, 2)
            worst_sym = max(worst_sym, cert.checks["symmetry_defect"] / max(scale, 1e-300))
    reasons: dict[str, int] = {}
    for _ in range(n_jordan):
        N = int(rng.integers(2, 7))
        reason = mc.strong_hyperbolicity_certificate(mc.random_jordan(rng, N)).reason
        reasons[reason] = reasons.get(reason, 0) + 1
    res.metrics.update(hermitian_failures=fails["hermitian"], semisimple_failures=fails["semisimple"],
                       jordan_reasons=reasons, min_lower_margin=worst_lower, max_symmetry_defect=worst_sym)
    res.evidence.update(n_hermitian=n_random, n_semisimple=n_random, n_jordan=n_jordan, sizes="N uniform in 1..6",
                        jordan_sizes="N uniform in 2..6", cond_max=1e3, symmetry_tol=1e-8, lower_tol=1e-8)
    res.check("hermitian pass", fails["hermitian"] == 0, f"{fails['hermitian']} failures")
    res.check("semisimple pass", fails["semisimple"] == 0, f"{fails['semisimple']} failures")
    res.check("jordan defective", reasons == {"defective": n_jordan}, str(reasons))
    res.check("S >= Id/N - 1e-8", worst_lower >= 0, f"margin {worst_lower:.3g}")
    res.check("|SA - (SA)*| <= 1e-8 |S||A|", worst_sym <= 1e-8, f"max {worst_sym:.3g}")


def sum_bound(res: CriterionResult, rng: np.random.Generator, mapper: Callable = map, n: int = 10_000) -> None:
    worst = 0.0
    bad = hyp = 0
    per_m: dict[int, int] = {}
    for _ in range(n):
        m = int(rng.integers(1, 6))
        N = int(rng.integers(2, 5))
        eps, K1, K2 = rng.uniform(0.1, 2.0, size=3)
        S, p, mu = mc.random_sum_instance(rng, m, N, eps, K1, K2)
        out = mc.sum_bound_check(S, p, mu, eps, K1, K2)
        per_m[m] = per_m.get(m, 0) + 1
        hyp += not out.hypotheses_ok
        bad += not out.holds
        worst = max(worst, out.ratio)
    res.metrics.update(max_ratio=worst, violations=bad, inadmissible=hyp, instances_per_m=per_m)
    res.evidence.update(n_instances=n, m_range=[1, 5], N_range=[2, 4], eps_K_range=[0.1, 2.0])
    res.check("instances admissible", hyp == 0, f"{hyp} inadmissible")
    res.check("sum bound holds", bad == 0, f"max lhs/bound {worst:.4g}")


def kernel_suite(res: CriterionResult, rng: np.random.Generator, mapper: Callable = map, n: int = 1_000) -> None:
    ident = ratio = rdef = 0.0
    rank_bad = 0
    for _ in range(n):
        inst = random_kernel_instance(rng, int(rng.integers(2, 7)))
        _, ids = kernel_identities(inst.L, inst.S, inst.J)
        ident = max(ident, ids.projector_identity)
        ratio = max(ratio, ids.norm_ratio)
        rdef = max(rdef, ids.range_defect)
        rank_bad += not ids.range_rank_ok
    res.metrics.update(max_projector_identity=ident, max_norm_ratio=ratio, max_range_defect=rdef,
                       rank_failures=rank_bad)
    res.evidence.update(n_instances=n, N_range=[2, 6], identity_tol=1e-8, norm_slack=0.01, range_tol=1e-8)
    res.check("projector identity <= 1e-8", ident <= 1e-8, f"{ident:.3g}")
    res.check("projector norm bound, 1% slack", ratio <= 1.01, f"{ratio:.4g}")
    res.check("orthogonality and rank", rdef <= 1e-8 and rank_bad == 0, f"defect {rdef:.3g}, rank failures {rank_bad}")


# ---------------------------------------------------------------------------
# symbol level


def example_roots(res: CriterionResult, rng: np.random.Generator, mapper: Callable = map,
                  n_sphere: int = 1000) -> None:
    fam = example1()
    avals = np.linspace(-0.5, 0.5, 20)
    xvals = np.array([-1.0, -0.3, 0.4, 1.0])
    params = np.array([[a, x] for a in avals for x in xvals])
    rep = hyperbolicity_check(fam, NU, params, n_sphere=n_sphere)
    xis = sphere_samples(3, n_sphere)
    err = 0.0
    for a, x in params:
        r = np.sort(char_roots(fam, [a, x], NU, xis).real, axis=-1)
        s = np.sqrt(xis[:, 1] ** 2 + x * x * xis[:, 2] ** 2)
        # roots of det L(xi + lambda nu) are -tau + {0, +-s}
        expected = np.stack([-s, 0 * s, s], axis=-1) - xis[:, :1]
        err = max(err, float(np.abs(r - expected).max()))
    res.metrics.update(max_imag=rep.max_imag, max_root_error=err)
    res.evidence.update(a_values=avals, x_values=xvals, n_sphere=n_sphere, sphere="deterministic golden-angle points",
                        direction=NU, tol=1e-8)
    res.check("max |Im root| <= 1e-8", rep.max_imag <= 1e-8, f"{rep.max_imag:.3g}")
    res.check("roots {0, +-sqrt(xi^2 + x^2 eta^2)}", err <= 1e-8, f"{err:.3g}")


def cone_change(res: CriterionResult, rng: np.random.Generator, mapper: Callable = map) -> None:
    fam = example1()
    points = [[0.5, 1.0], [-0.5, 0.5], [0.25, -1.0]]
    gammas = np.logspace(-3, 3, 19)
    rows = []
    for a in points:
        chart = cone_explore(fam, a, NU)
        inside = chart.contains(NU_PRIME)
        C = necessary_condition_probe(fam, a, NU, gammas=gammas, n_sphere=500)
        row = {"a": a, "certified": inside, "chart_points": len(chart.points), "K": chart.K, "C": C}
        if inside:
            C1 = direction_change_constant(fam, a, NU, NU_PRIME, C, chart=chart)
            probe = necessary_condition_probe(fam, a, NU_PRIME, gammas=gammas, n_sphere=500)
            row.update(C1=C1, probe=probe, ratio=probe / C1)
        rows.append(row)
    res.metrics["points"] = rows
    res.evidence.update(nu=NU, nu_prime=NU_PRIME, gammas=gammas, n_sphere=500, slack=0.1)
    res.check("nu' certified", all(r["certified"] for r in rows))
    worst = max((r.get("ratio", np.inf) for r in rows), default=np.inf)
    res.check("probe <= 1.1 C1", worst <= 1.1, f"max probe/C1 {worst:.4g}")


def regularity_suite(res: CriterionResult, rng: np.random.Generator, mapper: Callable = map) -> None:
    calib = {}
    for beta in (0.25, 0.5, 0.75):
        f = sample_field(lambda p, b=beta: np.abs(p[:, 0]) ** b, [np.linspace(-1, 1, 2049)])
        calib[str(beta)] = holder_fit(f, [0.0])[0]
    fam = example1(a="holder", alpha=0.5)
    rf = ReducedFamily(fam, NU, ["x", "xi1"], fixed_xi=[0, 0, 1])
    ax = np.linspace(-0.005, 0.005, 257)
    alpha, r2, _ = holder_fit(symmetrizer_field(rf, [ax, ax]), [0.0, 0.0])
    rc = ReducedFamily(example1(), NU, ["x", "xi1"], fixed_params={"a": 0.5}, fixed_xi=[0, 0, 1])
    levels = [symmetrizer_field(rc, [np.linspace(-0.1, 0.1, 2 * n + 1)] * 2) for n in (16, 32, 64)]
    gap, gaps, survives = discontinuity_gap(levels, [0.0, 0.0])
    res.metrics.update(calibration=calib, holder_exponent=alpha, holder_r2=r2, gap=gap, gap_levels=gaps,
                       gap_survives=survives)
    res.evidence.update(calibration_grid="2049 points on [-1, 1]", holder_grid="257^2 on [-0.005, 0.005]^2",
                        gap_grids=[33, 65, 129], gap_box=0.1, eta=1.0, tol=0.05)
    res.check("calibration within 0.05", all(abs(v - float(b)) <= 0.05 for b, v in calib.items()), str(calib))
    res.check("|x|^0.5 exponent in [0.4, 0.6]", 0.4 <= alpha <= 0.6, f"{alpha:.4g}")
    res.check("constant a gap > 0.1", survives and gap > 0.1, f"{gap:.4g}")


# ---------------------------------------------------------------------------
# wave packets


def _commutator_job(job) -> tuple[float, float]:
    which, lam = job
    fam = example1(a="x")
    S = canonical_field(fam)
    if which == "rough":
        S = rough_control_field(S, ROUGH_R)
    u = GridFunction.from_function(
        lambda x: np.outer([1, 0.6j, 0.3 - 0.2j], np.exp(-(x - 0.3) ** 2 / 2)), 512, L=2 * np.pi)
    out = commutator_energy_probe(u, S, fam, lam, eta=lam)
    return out.signed, out.ratio


def wavepacket_suite(res: CriterionResult, rng: np.random.Generator, mapper: Callable = map) -> None:
    lams = 2.0 ** np.arange(3, 10)
    u = GridFunction.band_limited_noise(rng, 1024, ncomp=2)
    iso = [isometry_defect(u, lam) for lam in lams]
    v = GridFunction.band_limited_noise(rng, 1024, ncomp=3)
    fr = DyadicFrame.for_grid(v)
    total = sum(p.values for p in dyadic_decompose(v, fr))
    recon = float(np.abs(total - v.values).max() / np.abs(v.values).max())
    js = np.arange(3, 9)
    slopes = {}
    for order in (1, 2, 3):
        for m, alpha in ((0, 0), (2, 1)):
            logs = [localization_probe(v, int(j), order, m, alpha, fr).log2_ratio for j in js]
            slopes[f"n={order},m={m},alpha={alpha}"] = trend_slope(js, logs)
    jobs = [(w, float(lam)) for w in ("lipschitz", "rough") for lam in lams]
    out = list(mapper(_commutator_job, jobs))
    k = len(lams)
    lip, rough = [r for _, r in out[:k]], [r for _, r in out[k:]]
    s_lip = trend_slope(np.log(lams), np.log(lip))
    s_rough = trend_slope(np.log(lams), np.log(rough))
    res.metrics.update(isometry_defects=iso, reconstruction_defect=recon, localization_slopes=slopes,
                       commutator_lipschitz=lip, commutator_rough=rough, slope_lipschitz=s_lip,
                       slope_rough=s_rough)
    res.evidence.update(lambdas=lams, n=1024, levels=js, commutator_grid={"n": 512, "L": "2 pi", "eta": "lambda"},
                        rough_control="S - 0.5 min(sqrt|x|, 1) R", R=ROUGH_R)
    res.check("isometry defect < 1e-6", max(iso) < 1e-6, f"{max(iso):.3g}")
    res.check("reconstruction defect < 1e-12", recon < 1e-12, f"{recon:.3g}")
    res.check("localization slopes <= 0.1", max(slopes.values()) <= 0.1, f"max {max(slopes.values()):.3g}")
    res.check("Lipschitz commutator slope <= 0.1", s_lip <= 0.1, f"{s_lip:.3g}")
    res.check("rough commutator slope > 0.3", s_rough > 0.3, f"{s_rough:.3g}")


# ---------------------------------------------------------------------------
# Cauchy problems

ETAS = 4.0 ** np.arange(2, 8)


def illposed_rates(res: CriterionResult, rng: np.random.Generator, mapper: Callable = map) -> None:
    oracle = abs(cauchy.oscillator_eigen(0.0, 1.0).beta.imag)
    lam_quad = cauchy.first_order_shift(0.5)
    lam_gamma = cauchy.first_order_shift_gamma(0.5)
    r0 = cauchy.mode_growth(0.0, ETAS, 2.0, n=512, mapper=mapper)
    r5 = cauchy.mode_growth(0.5, ETAS, 5.0, n=512, mapper=mapper)
    g_rel = abs(r0.fit_prefactor / oracle - 1)
    pref = r5.fit_prefactor / (lam_quad / 2)
    res.metrics.update(oracle_im_beta=oracle, alpha0=r0.summary(), alpha05=r5.summary(), lambda1_quadrature=lam_quad,
                       lambda1_gamma=lam_gamma, prefactor_ratio=pref, g_relative_error=g_rel)
    res.evidence.update(etas=ETAS, n=512, Lz=16.0, T={"alpha0": 2.0, "alpha05": 5.0}, data="gaussian",
                        rate_window="middle third of [0, T]")
    res.check("oracle |Im beta| near 0.4551", abs(oracle - 0.4551) < 5e-4, f"{oracle:.6g}")
    res.check("alpha=0 exponent 0.5 +- 0.02", abs(r0.fit_exponent - 0.5) <= 0.02, f"{r0.fit_exponent:.4g}")
    res.check("alpha=0 prefactor within 5%", g_rel <= 0.05, f"{r0.fit_prefactor:.4g}")
    res.check("lambda1 quadrature vs Gamma <= 1e-10", abs(lam_quad - lam_gamma) <= 1e-10,
              f"{abs(lam_quad - lam_gamma):.3g}")
    res.check("alpha=0.5 exponent 0.25 +- 0.05", abs(r5.fit_exponent - 0.25) <= 0.05, f"{r5.fit_exponent:.4g}")
    res.check("alpha=0.5 prefactor within 15%", abs(pref - 1) <= 0.15, f"ratio {pref:.4g}")


def _effective_gamma(job) -> float:
    alpha, eta, T, n = job
    fam = example1(a="holder", alpha=alpha)
    return cauchy.growth_constant(cauchy.evolve(cauchy.zframe_problem(fam, alpha, eta, T, n)))[1]


def _lipschitz_gamma(eta: float) -> float:
    tr = cauchy.evolve(cauchy.zframe_problem(example1(a="x"), 0.0, eta, 1.0, 256))
    return cauchy.growth_constant(tr)[1]


def wellposed_contrast(res: CriterionResult, rng: np.random.Generator, mapper: Callable = map) -> None:
    rows = cauchy.refinement_growth(example1(a="x"), 16.0, T=1.0, n_list=(256, 512))
    gam = np.array([r["gamma"] for r in rows])
    spread = float(np.abs(gam / gam[0] - 1).max())
    by_eta = {f"{e:g}": _lipschitz_gamma(e) for e in (16.0, 256.0, 4096.0)}
    etas = ETAS[:5]
    eff = list(mapper(_effective_gamma, [(0.5, float(e), 5.0, 256) for e in etas]))
    p, g, r2 = cauchy.power_fit(etas, eff)
    res.metrics.update(refinement=rows, gamma_spread=spread, lipschitz_gamma_by_eta=by_eta,
                       rough_effective_gamma=eff, rough_exponent=p, rough_prefactor=g, rough_r2=r2)
    res.evidence.update(eta=16.0, T=1.0, n_list=[256, 512], dt="CFL step and half of it", rough_etas=etas,
                        rough_T=5.0, rough_n=256, gamma="least-squares slope of log(|u|/|u0|) over [0, T]")
    res.check("a=x gamma within 20% across resolutions", spread <= 0.2, f"spread {spread:.3g}")
    res.check("alpha=0.5 effective gamma ~ eta^(0.25 +- 0.05)", abs(p - 0.25) <= 0.05, f"{p:.4g}")


# ---------------------------------------------------------------------------
# bundle

CRITERIA = {
    1: ("certificates", 60.0, certificates),
    2: ("sum bound", 30.0, sum_bound),
    3: ("kernel identities", 30.0, kernel_suite),
    4: ("example 1 roots", 60.0, example_roots),
    5: ("cone and direction change", 60.0, cone_change),
    6: ("regularity", 120.0, regularity_suite),
    7: ("wave packets", 120.0, wavepacket_suite),
    8: ("ill-posedness rates", 600.0, illposed_rates),
    9: ("well-posedness contrast", 600.0, wellposed_contrast),
}
HEAVY = (8, 9)


def criterion_rng(seed: int, key: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(key)])


def run_criterion(key: int, seed: int = 7, mapper: Callable = map) -> CriterionResult:
    title, limit, fn = CRITERIA[key]
    res = CriterionResult(key, title, limit)
    t0 = time.perf_counter()
    fn(res, criterion_rng(seed, key), mapper)
    res.seconds = time.perf_counter() - t0
    return res


def replay_check(seed: int, first: dict[int, CriterionResult]) -> CriterionResult:
    """Rerun the cheap seeded criteria and compare their serialized payloads."""
    res = CriterionResult(10, "determinism", 0.0)
    t0 = time.perf_counter()
    same = {}
    for key in (2, 3):
        if key not in first:
            continue
        again = run_criterion(key, seed)
        same[str(key)] = dumps(again.to_dict()) == dumps(first[key].to_dict())
    if not same:
        res.skipped = True
        return res
    res.metrics["replayed"] = same
    res.evidence["note"] = "full-report byte identity is checked by rerunning the command"
    res.check("seeded replay identical", bool(same) and all(same.values()), str(same))
    res.seconds = time.perf_counter() - t0
    return res


def all_checks(seed: int = 7, mapper: Callable = map, reduced: bool = False,
               only: list[int] | None = None, progress: Callable | None = None) -> dict[int, CriterionResult]:
    out: dict[int, CriterionResult] = {}
    for key, (title, limit, _) in CRITERIA.items():
        if (only and key not in only) or (reduced and key in HEAVY):
            out[key] = CriterionResult(key, title, limit, skipped=True)
        else:
            out[key] = run_criterion(key, seed, mapper)
        if progress:
            progress(out[key])
    out[10] = replay_check(seed, {k: v for k, v in out.items() if not v.skipped})
    if progress:
        progress(out[10])
    return out
