"""Configuration and driver for the exterior-cube MFS convergence study."""

import logging
from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np

from .addition_theorem import DEFAULT_SEPARATION, ElasticParameters
from .exceptions import ConfigError, DomainError
from .mfs import (
    ErrorReport,
    assemble_system,
    cube_boundary_lattice,
    error_metrics,
    evaluate_mfs,
    evaluation_grid,
    homothetic_basis,
    point_source_data,
    solve_dense,
    spherical_point,
)

logger = logging.getLogger(__name__)

# reported MFS errors (N, e_inf, e_2) for lambda=-1, mu=2, n<=10, a=0.95
REFERENCE_TABLE = ((56, 1.23e-2, 6.34e-4), (152, 5.02e-4, 2.49e-5), (296, 4.65e-4, 2.29e-5))


@dataclass(frozen=True)
class ExperimentConfig:
    lam: float = -1.0
    mu: float = 2.0
    omega: float = 1.0
    trunc: int = 10
    # order used only for collocation pairs inside the radius guard
    fallback_trunc: Optional[int] = 20
    separation: float = DEFAULT_SEPARATION
    ratio: float = 0.95
    subdivs: Tuple[int, ...] = (3, 5, 7)
    source_radial: Tuple[float, float, float] = (0.9, 1.0, 1.0)
    source_vector: Tuple[float, float, float] = (1.0, 2.0, -1.0)
    grid_half_width: float = 5.0
    grid_per_axis: int = 11
    seed: int = 0

    def params(self) -> ElasticParameters:
        return ElasticParameters(self.lam, self.mu, self.omega)

    def validate(self):
        try:
            self.params()
        except DomainError as exc:
            if not self.mu > 0:
                key = "mu"
            elif not self.omega > 0:
                key = "omega"
            else:
                key = "lambda"
            raise ConfigError(f"invalid {key}: {exc}", key=key) from exc
        if self.trunc < 0:
            raise ConfigError(f"invalid trunc: must be >= 0, got {self.trunc}", key="trunc")
        if self.fallback_trunc is not None and self.fallback_trunc < self.trunc:
            raise ConfigError("invalid fallback_trunc: must be >= trunc", key="fallback_trunc")
        if not 0 <= self.separation < 1:
            raise ConfigError("invalid separation: must lie in [0, 1)", key="separation")
        if not 0.0 < self.ratio < 1.0:
            raise ConfigError(f"invalid ratio: must lie in (0, 1), got {self.ratio}", key="ratio")
        if not self.subdivs:
            raise ConfigError("invalid subdivs: list is empty", key="subdivs")
        if any(s < 1 for s in self.subdivs):
            raise ConfigError("invalid subdivs: entries must be >= 1", key="subdivs")
        r, theta, _ = self.source_radial
        if not (r >= 0 and 0 <= theta <= np.pi):
            raise ConfigError("invalid source_r/source_theta: need r >= 0 and 0 <= theta <= pi", key="source_r")
        if np.max(np.abs(self.source_point())) >= 1.0:
            raise ConfigError("invalid source_r: the source must lie strictly inside the cube", key="source_r")
        if not np.any(self.source_vector):
            raise ConfigError("invalid source_v: must be nonzero", key="source_v")
        if not self.grid_half_width > 1.0:
            raise ConfigError("invalid grid_half_width: must exceed 1", key="grid_half_width")
        if self.grid_per_axis < 2:
            raise ConfigError("invalid grid_per_axis: must be >= 2", key="grid_per_axis")
        return self

    def source_point(self) -> np.ndarray:
        return spherical_point(*self.source_radial)


# config-file key -> (dataclass field, parser)
def _int(s):
    return int(s)


def _float(s):
    return float(s)


def _opt_int(s):
    return None if s.strip().lower() in ("none", "") else int(s)


def _int_list(s):
    return tuple(int(p) for p in s.split(",") if p.strip())


def _float3(s):
    vals = tuple(float(p) for p in s.split(","))
    if len(vals) != 3:
        raise ValueError("expected three comma-separated numbers")
    return vals


_KEYS = {
    "lambda": ("lam", _float),
    "mu": ("mu", _float),
    "omega": ("omega", _float),
    "trunc": ("trunc", _int),
    "fallback_trunc": ("fallback_trunc", _opt_int),
    "separation": ("separation", _float),
    "ratio": ("ratio", _float),
    "subdivs": ("subdivs", _int_list),
    "source_r": ("source_radial", 0),
    "source_theta": ("source_radial", 1),
    "source_phi": ("source_radial", 2),
    "source_v": ("source_vector", _float3),
    "grid_half_width": ("grid_half_width", _float),
    "grid_per_axis": ("grid_per_axis", _int),
    "seed": ("seed", _int),
}


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines into a ``{key: raw string}`` dict."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}", key=key)
        out[key] = value
    return out


def build_config(values: dict, base: ExperimentConfig = None) -> ExperimentConfig:
    """Apply raw string (or already typed) values on top of ``base`` and validate."""
    cfg = base or ExperimentConfig()
    updates = {}
    radial = list(cfg.source_radial)
    for key, value in values.items():
        key = key.replace("-", "_")
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}", key=key)
        name, parser = _KEYS[key]
        try:
            if isinstance(parser, int):
                radial[parser] = float(value)
                continue
            updates[name] = parser(value) if isinstance(value, str) else value
        except ValueError as exc:
            raise ConfigError(f"cannot parse {key} = {value!r}: {exc}", key=key) from exc
    updates["source_radial"] = tuple(radial)
    return replace(cfg, **updates).validate()


def parse_config(path=None, overrides: dict = None) -> ExperimentConfig:
    """Read a config file (optional) and apply flag overrides; flags win."""
    values = {}
    if path is not None:
        try:
            with open(path) as fh:
                values.update(parse_config_text(fh.read()))
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    values.update(overrides or {})
    return build_config(values)


@dataclass
class RowDiagnostics:
    subdiv: int
    n_basis: int
    condition_number: float
    relative_residual: float


def run_experiment(config: ExperimentConfig, diagnostics: List[RowDiagnostics] = None) -> ErrorReport:
    """Solve and score the point-source problem for every entry of ``config.subdivs``.

    A failing row is recorded in ``report.failures`` with its stage; the
    remaining rows still run.
    """
    config.validate()
    params = config.params()
    n_max, sep, fb = config.trunc, config.separation, config.fallback_trunc
    source = point_source_data(config.source_point(), np.array(config.source_vector), params, n_max, sep)
    grid = evaluation_grid(config.grid_half_width, config.grid_per_axis)
    exact = source(grid)
    report = ErrorReport()
    for subdiv in config.subdivs:
        stage = "mesh"
        try:
            mesh = cube_boundary_lattice(subdiv)
            stage = "basis"
            basis = homothetic_basis(mesh, config.ratio)
            stage = "assembly"
            system = assemble_system(mesh, basis, params, n_max, source, sep, fb)
            stage = "solve"
            sol = solve_dense(system)
            stage = "evaluation"
            approx = evaluate_mfs(sol, basis, params, n_max, grid, sep, fb)
            stage = "metrics"
            e_inf, e_2 = error_metrics(exact, approx)
        except (ArithmeticError, ValueError) as exc:
            logger.info("subdiv %d failed at stage %s: %s", subdiv, stage, exc)
            report.failures.append((subdiv, stage, str(exc)))
            continue
        logger.info("N=%d  e_inf=%.3e  e_2=%.3e  cond=%.3e", len(basis), e_inf, e_2, sol.condition_number)
        if diagnostics is not None:
            diagnostics.append(RowDiagnostics(subdiv, len(basis), sol.condition_number,
                                              sol.residual_norm / np.linalg.norm(system.rhs)))
        report.add(len(basis), e_inf, e_2)
    return report


def compare_with_reference(report: ErrorReport, factor: float = 20.0):
    """Pair computed rows with the reference table; flag ratios beyond ``factor``.

    Returns a list of dicts with keys ``N, e_inf, e_2, ref_e_inf, ref_e_2, flagged``.
    """
    ref = {n: (ei, e2) for n, ei, e2 in REFERENCE_TABLE}
    out = []
    for n, ei, e2 in report.rows:
        if n not in ref:
            continue
        ri, r2 = ref[n]
        off = max(ei / ri, ri / ei, e2 / r2, r2 / e2) if ei > 0 and e2 > 0 else float("inf")
        out.append(dict(N=n, e_inf=ei, e_2=e2, ref_e_inf=ri, ref_e_2=r2, worst_ratio=off,
                        flagged=off > factor))
    return out
