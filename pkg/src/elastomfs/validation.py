"""Oracle-agreement and property checks.

Every ``check_*`` function returns one or more :class:`CheckResult` objects
and never raises on a failed comparison, so the same code backs both the
``validate`` subcommand and the acceptance tests.
"""

import subprocess
import sys
from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from .addition_theorem import (
    ElasticParameters,
    fundamental_solution,
    fundamental_solution_batch,
    radial_factors,
)
from .experiment import ExperimentConfig, compare_with_reference, run_experiment
from .reference_oracles import vector_wave_fundamental, closed_form_fundamental, helmholtz_green, pde_residual
from .special_functions import (
    grad_spherical_wave,
    legendre_assoc,
    spherical_bessel_j,
    spherical_hankel1,
    spherical_wave,
)

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def random_directions(rng, n):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def random_pairs(rng, n, max_ratio=0.5, r_min=0.2, r_max=5.0):
    """Pairs ``(x, y)`` with radii in ``[r_min, r_max]`` and ``|y| / |x| <= max_ratio``."""
    rx = rng.uniform(r_min / max_ratio, r_max, n)
    ry = rng.uniform(r_min, max_ratio * rx)
    return rx[:, None] * random_directions(rng, n), ry[:, None] * random_directions(rng, n)


def check_oracle_equivalence(seed=0, n_pairs=200, n_max=30, oracle_n_max=40, tol=1e-8):
    rng = np.random.default_rng(seed)
    params = ElasticParameters(-1.0, 2.0, 1.0)
    x, y = random_pairs(rng, n_pairs)
    phi = fundamental_solution_batch(x, y, params, n_max)
    closed = np.max(np.abs(phi - closed_form_fundamental(x, y, params)))
    series = np.max(np.abs(phi - vector_wave_fundamental(x, y, params, oracle_n_max)))
    return [
        CheckResult("1 oracle equivalence (closed form)", closed <= tol,
                    f"max abs diff {closed:.2e} (tol {tol:.0e})"),
        CheckResult("1 oracle equivalence (vector wave series)", series <= tol,
                    f"max abs diff {series:.2e} (tol {tol:.0e})"),
    ]


def check_helmholtz_reduction(seed=0, n_pairs=200, n_max=30, tol=1e-10, mu=2.0):
    rng = np.random.default_rng(seed)
    params = ElasticParameters(-mu, mu, 1.0)
    x, y = random_pairs(rng, n_pairs)
    phi = fundamental_solution_batch(x, y, params, n_max)
    ref = (helmholtz_green(params.k_s, x, y) / mu)[:, None, None] * np.eye(3)
    err = np.max(np.abs(phi - ref))
    return [CheckResult("2 Helmholtz reduction", err <= tol, f"max abs diff {err:.2e} (tol {tol:.0e})")]


def check_pde_residual(seed=0, n_points=5, n_max=30, h=1e-2, min_ratio=3.5):
    rng = np.random.default_rng(seed)
    params = ElasticParameters(-1.0, 2.0, 1.0)
    ratios = []
    for _ in range(n_points):
        y = rng.uniform(0.2, 0.5) * random_directions(rng, 1)[0]
        x = rng.uniform(1.5, 3.0) * random_directions(rng, 1)[0]
        for col in range(3):
            field = lambda p, c=col: fundamental_solution(p, y, params, n_max)[:, c]
            coarse = np.linalg.norm(pde_residual(field, params, x, h))
            fine = np.linalg.norm(pde_residual(field, params, x, h / 2))
            ratios.append(coarse / fine)
    worst = min(ratios)
    return [CheckResult("3 PDE residual O(h^2)", worst >= min_ratio,
                        f"smallest residual reduction {worst:.3f} (need >= {min_ratio})")]


def _legendre_identity_residuals(n_max=30, n_theta=50):
    """Largest residual of each Legendre identity, relative to the largest term involved."""
    theta = np.linspace(0.1, np.pi - 0.1, n_theta)
    z, s = np.cos(theta), np.sin(theta)

    cache = {}

    def P(n, m):
        if (n, m) not in cache:
            cache[n, m] = legendre_assoc(n, m, z) if n >= 0 and abs(m) <= n else np.zeros_like(z)
        return cache[n, m]

    worst = np.zeros(4)
    for n in range(n_max + 1):
        for m in range(-n, n + 1):
            cases = [
                (0, [(n - m) * P(n, m) / s, -(n + m) * z / s * P(n - 1, m)], [P(n - 1, m + 1)]),
                (1, [(n + m) * P(n, m) / s, -(n + m) * z / s * P(n - 1, m)],
                 [-(n + m) * (n + m - 1) * P(n - 1, m - 1)]),
                (2, [(2 * n + 1) * s * P(n, m)], [P(n - 1, m + 1), -P(n + 1, m + 1)]),
                (2, [(2 * n + 1) * s * P(n, m)],
                 [(n - m + 1) * (n - m + 2) * P(n + 1, m - 1), -(n + m - 1) * (n + m) * P(n - 1, m - 1)]),
                (3, [(2 * n + 1) * z * P(n, m)], [(n - m + 1) * P(n + 1, m), (n + m) * P(n - 1, m)]),
            ]
            for idx, lhs, rhs in cases:
                scale = max(np.max(np.abs(t)) for t in lhs + rhs)
                if scale == 0:
                    continue
                res = np.max(np.abs(sum(lhs) - sum(rhs))) / scale
                worst[idx] = max(worst[idx], res)
    return worst


def check_legendre_and_gradient_identities(tol=1e-9, seed=0, n_cases=100, fd_tol=1e-6):
    worst = _legendre_identity_residuals()
    out = [CheckResult(f"4 Legendre identity {i + 1}", w <= tol, f"max scaled residual {w:.2e} (tol {tol:.0e})")
           for i, w in enumerate(worst)]

    rng = np.random.default_rng(seed)
    errs = []
    for _ in range(n_cases):
        kind = rng.choice(["regular", "outgoing"])
        n = int(rng.integers(0, 16))
        m = int(rng.integers(-n, n + 1))
        k = rng.uniform(0.3, 2.0)
        x = rng.uniform(0.5, 3.0) * random_directions(rng, 1)[0]
        h = 1e-5 * np.linalg.norm(x)
        exact = grad_spherical_wave(kind, k, n, m, x)
        fd = np.array([(spherical_wave(kind, k, n, m, x + h * e) - spherical_wave(kind, k, n, m, x - h * e)) / (2 * h)
                       for e in np.eye(3)])
        errs.append(np.linalg.norm(exact - fd) / np.linalg.norm(exact))
    worst_fd = max(errs)
    out.append(CheckResult("4 gradient formulas vs finite differences", worst_fd <= fd_tol,
                           f"max rel err {worst_fd:.2e} over {n_cases} cases (tol {fd_tol:.0e})"))
    return out


def check_radial_identities(seed=0, n_cases=1000, ulps=8):
    rng = np.random.default_rng(seed)
    params = ElasticParameters(-1.0, 2.0, 1.0)
    worst_s = worst_p = 0.0
    for _ in range(n_cases):
        n1, n2 = (int(v) for v in rng.integers(0, 21, 2))
        r = rng.uniform(0.2, 10.0)
        t = rng.uniform(0.0, r)
        tri = radial_factors(n1, n2, r, t, params)
        ks, kp = params.k_s, params.k_p
        s = ks**3 * spherical_hankel1(n1, ks * r) * spherical_bessel_j(n2, ks * t)
        p = kp**3 * spherical_hankel1(n1, kp * r) * spherical_bessel_j(n2, kp * t)
        scale = abs(s) + abs(p)
        if scale == 0:
            continue
        worst_s = max(worst_s, abs((tri.h_plus - tri.h_minus) - 2 * s) / scale)
        worst_p = max(worst_p, abs((tri.h_plus + tri.h_minus) - 2 * p) / scale)
    equal = ElasticParameters(-1.0, 1.0, 1.0)  # lam = -mu gives k_p = k_s
    zero = all(radial_factors(n1, n2, r, t, equal).h_minus == 0
               for n1, n2, r, t in zip(rng.integers(0, 21, 200), rng.integers(0, 21, 200),
                                       rng.uniform(0.2, 10, 200), rng.uniform(0, 0.2, 200)))
    tol = ulps * EPS
    return [
        CheckResult("5 h_plus - h_minus = 2 h_s", worst_s <= tol, f"max rel dev {worst_s:.2e} (tol {tol:.1e})"),
        CheckResult("5 h_plus + h_minus = 2 h_p", worst_p <= tol, f"max rel dev {worst_p:.2e} (tol {tol:.1e})"),
        CheckResult("5 h_minus vanishes when k_p = k_s", zero, "exact zero" if zero else "nonzero value found"),
    ]


def check_mfs_experiment(config: ExperimentConfig = None, e2_cap=1e-3, factor=20.0):
    config = config or ExperimentConfig()
    report = run_experiment(config)
    rows = {n: (ei, e2) for n, ei, e2 in report.rows}
    e2s = [e2 for _, _, e2 in report.rows]
    listed = ", ".join(f"{v:.3e}" for v in e2s)
    complete = all(n in rows for n in (56, 152, 296)) and not report.failures
    mono = complete and all(b <= a for a, b in zip(e2s, e2s[1:]))
    out = [CheckResult("6a e_2 non-increasing in N", mono, f"e_2 = [{listed}]" +
                       ("" if complete else f"; failed rows {report.failures}"))]
    e2_152 = rows.get(152, (np.nan, np.nan))[1]
    out.append(CheckResult("6b e_2 at N=152", bool(e2_152 <= e2_cap), f"{e2_152:.3e} (cap {e2_cap:.0e})"))
    cmp = compare_with_reference(report, factor)
    side = "; ".join(f"N={c['N']}: ({c['e_inf']:.2e}, {c['e_2']:.2e}) vs ({c['ref_e_inf']:.2e}, "
                     f"{c['ref_e_2']:.2e}){' FLAGGED' if c['flagged'] else ''}" for c in cmp)
    out.append(CheckResult("6c within factor 20 of reference table", len(cmp) == 3 and not any(c["flagged"] for c in cmp),
                           side))
    return out


def check_symmetry(seed=0, n_pairs=200, n_max=30, tol=1e-9):
    rng = np.random.default_rng(seed)
    params = ElasticParameters(-1.0, 2.0, 1.0)
    x, y = random_pairs(rng, n_pairs)
    phi = fundamental_solution_batch(x, y, params, n_max)
    asym = np.max(np.abs(phi - np.swapaxes(phi, 1, 2)), axis=(1, 2)) / np.max(np.abs(phi), axis=(1, 2))
    worst = float(np.max(asym))
    swap_exact = all(np.array_equal(fundamental_solution(a, b, params, n_max), fundamental_solution(b, a, params, n_max))
                     for a, b in zip(x[:50], y[:50]))
    return [
        CheckResult("7 transpose symmetry", worst <= tol, f"max relative asymmetry {worst:.2e} (tol {tol:.0e})"),
        CheckResult("7 argument swap exact", swap_exact, "bitwise equal" if swap_exact else "differs"),
    ]


def check_determinism(args=(), runs=2):
    """Run ``elastomfs run`` in fresh interpreters and compare stdout bytes."""
    outputs = []
    for _ in range(runs):
        proc = subprocess.run([sys.executable, "-m", "elastomfs", "run", *args],
                              capture_output=True, check=False)
        outputs.append((proc.returncode, proc.stdout))
    same = all(o == outputs[0] for o in outputs)
    ok = same and outputs[0][0] == 0 and outputs[0][1].startswith(b"N,e_inf,e_2\n")
    return [CheckResult("8 run output bit-identical", ok,
                        f"{runs} runs, exit code {outputs[0][0]}, {len(outputs[0][1])} bytes"
                        + ("" if same else ", outputs differ"))]


ALL_CHECKS: List[Callable[[], List[CheckResult]]] = [
    check_oracle_equivalence,
    check_helmholtz_reduction,
    check_pde_residual,
    check_legendre_and_gradient_identities,
    check_radial_identities,
    check_mfs_experiment,
    check_symmetry,
    check_determinism,
]


def run_all(checks=None) -> List[CheckResult]:
    results = []
    for check in checks or ALL_CHECKS:
        results.extend(check())
    return results
