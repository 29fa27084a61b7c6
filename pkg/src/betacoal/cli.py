"""Command-line harness: each command reads a JSON config and writes a CSV table.

Exit codes: 0 success, 2 config error, 3 regime error, 4 resource-cap error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from typing import Annotated, Literal, Optional

from pydantic import AfterValidator, BaseModel, ConfigDict, Field, ValidationError, field_validator

from . import asymptotics
from .errors import RegimeError, ResourceCapError
from .exact import DiscreteLaw, exact_laws_X, exact_moments_L, exact_moments_X
from .metrics import EmpiricalSample, chi_T, ks_distance, wasserstein_1_cdf
from .rates import CoalescentParams
from .renewal import exact_first_passage_laws
from .simulate import SimulationConfig, monte_carlo, write_samples_csv
from .stable import StableCDF, limit_spec, normalize, regime_for, stable_cf

log = logging.getLogger("betacoal")

EXIT_OK, EXIT_CONFIG, EXIT_REGIME, EXIT_CAP = 0, 2, 3, 4
MIN_REPLICATES = 100


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ParamsBlock(_Strict):
    a: float = Field(gt=0)
    b: float = Field(gt=0)
    mutation_rate: Optional[float] = Field(default=None, ge=0)

    def build(self) -> CoalescentParams:
        return CoalescentParams(self.a, self.b, self.mutation_rate)


def _nonempty_grid(v: list[int]) -> list[int]:
    if not v:
        raise ValueError("n grid must not be empty")
    return v


NGrid = Annotated[list[Annotated[int, Field(ge=2)]], AfterValidator(_nonempty_grid)]


class SimulateConfig(_Strict):
    params: ParamsBlock
    n: int = Field(ge=1)
    replicates: int = Field(ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)


class ExactMomentsConfig(_Strict):
    params: ParamsBlock
    n_grid: NGrid
    j_max: int = Field(default=3, ge=0, le=12)
    functionals: list[Literal["X", "L"]] = ["X"]

    @field_validator("n_grid")
    @classmethod
    def _min_n(cls, v):
        if min(v) < 3:
            raise ValueError("expansions need n >= 3")
        return v


class LimitCheckConfig(_Strict):
    params: ParamsBlock
    n_grid: NGrid
    replicates: int = Field(default=10_000, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    functional: Literal["X", "L", "M"] = "X"
    T: float = Field(default=2.0, gt=0)
    metrics: list[Literal["chi_T", "ks"]] = ["chi_T", "ks"]
    exact_law: bool = False


class BranchIdentityConfig(_Strict):
    params: ParamsBlock
    n_grid: NGrid
    replicates: int = Field(default=10_000, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)


class SumCase(_Strict):
    alpha: float
    p: float


class ExpansionCheckConfig(_Strict):
    b_values: list[float] = [0.5, 1.0, 2.0]
    cases: list[SumCase] = [SumCase(alpha=1, p=1), SumCase(alpha=2, p=2), SumCase(alpha=1.5, p=0)]
    n_grid: NGrid = [2**k for k in range(7, 18)]


class CoefficientsConfig(_Strict):
    b_values: list[float] = [0.5, 1.0, 2.0]
    j_max: int = Field(default=6, ge=1, le=50)
    cases: list[SumCase] = [SumCase(alpha=1, p=1), SumCase(alpha=2, p=2), SumCase(alpha=1.5, p=0)]


def _num(x: float) -> str:
    return repr(float(x))


def _writer(fp):
    return csv.writer(fp, lineterminator="\n")


def cmd_simulate(cfg: SimulateConfig, fp, workers: int = 1) -> None:
    params = cfg.params.build()
    if cfg.replicates < MIN_REPLICATES:
        log.warning("only %d replicates; summaries will be noisy", cfg.replicates)
    result = monte_carlo(SimulationConfig(params, cfg.n, cfg.replicates, cfg.seed), workers)
    write_samples_csv(result, fp)


def cmd_exact_moments(cfg: ExactMomentsConfig, fp, workers: int = 1) -> None:
    params = cfg.params.build()
    if params.a != 1.0:
        raise RegimeError("moment expansions are stated for a = 1")
    b = params.b
    n_max = max(cfg.n_grid)
    w = _writer(fp)
    w.writerow(("n", "j", "functional", "exact", "prediction", "residual_scaled"))
    tables = {}
    for f in cfg.functionals:
        build = exact_moments_X if f == "X" else exact_moments_L
        tables[f] = build(n_max, cfg.j_max, params)
    for f in cfg.functionals:
        scale_b = 1.0 if f == "X" else b
        for n in cfg.n_grid:
            ln = math.log(n)
            for j in range(cfg.j_max + 1):
                exact = tables[f].moment(n, j)
                if j == 0:
                    w.writerow((n, j, f, _num(exact), _num(1.0), _num(0.0)))
                    continue
                pred = (asymptotics.predict_moment_X if f == "X" else asymptotics.predict_moment_L)(n, j, b)
                lead = (n / ln) ** j / scale_b**j
                resid = (exact / lead - 1 - asymptotics.m_coeff(j, b) / ln) * ln**2
                w.writerow((n, j, f, _num(exact), _num(pred.value), _num(resid)))


def _normalized_samples(cfg: LimitCheckConfig, params: CoalescentParams, n: int, workers: int):
    result = monte_carlo(SimulationConfig(params, n, cfg.replicates, cfg.seed), workers)
    raw = {"X": result.collisions, "L": result.branch_length, "M": result.segregating_sites}[cfg.functional]
    if raw is None:
        raise RegimeError("functional M needs a mutation rate")
    return normalize(raw, n, params, regime_for(params, cfg.functional))


def cmd_limit_check(cfg: LimitCheckConfig, fp, workers: int = 1) -> None:
    params = cfg.params.build()
    params.require_limit_regime()
    w = _writer(fp)
    w.writerow(("n", "metric", "value"))
    if cfg.exact_law:
        n_max = max(cfg.n_grid)
        laws_x = exact_laws_X(n_max, params)
        laws_n = exact_first_passage_laws(n_max, params)
        for n in cfg.n_grid:
            x = DiscreteLaw.from_dense(laws_x[n, :n].copy())
            nn = DiscreteLaw.from_dense(laws_n[n, : n + 1].copy())
            d1 = wasserstein_1_cdf(x, nn)
            w.writerow((n, "d1", _num(d1)))
            w.writerow((n, "d1_scaled", _num(d1 / n**params.a)))
        return
    if cfg.replicates < MIN_REPLICATES:
        log.warning("only %d replicates; distances will be noisy", cfg.replicates)
    regime_for(params, cfg.functional)
    spec = limit_spec(params)
    cdf = StableCDF(spec) if "ks" in cfg.metrics else None
    for n in cfg.n_grid:
        start = time.perf_counter()
        sample = EmpiricalSample.of(_normalized_samples(cfg, params, n, workers))
        for metric in cfg.metrics:
            if metric == "chi_T":
                value = chi_T(sample, lambda t: stable_cf(spec, t), cfg.T)
            else:
                value = ks_distance(sample, cdf)
            w.writerow((n, metric, _num(value)))
        log.info("n=%d done in %.1fs", n, time.perf_counter() - start)


def branch_identity_estimate(params: CoalescentParams, n: int, replicates: int, seed: int,
                             workers: int = 1) -> float:
    """Monte Carlo estimate of E(b L_n - X_n)^2 / n."""
    result = monte_carlo(SimulationConfig(params, n, replicates, seed), workers)
    gap = params.b * result.branch_length - result.collisions
    return math.fsum(gap * gap) / replicates / n


def cmd_branch_identity(cfg: BranchIdentityConfig, fp, workers: int = 1) -> None:
    params = cfg.params.build()
    if params.a != 1.0:
        raise RegimeError("the branch-length identity is stated for a = 1")
    if cfg.replicates < MIN_REPLICATES:
        log.warning("only %d replicates; estimates will be noisy", cfg.replicates)
    w = _writer(fp)
    w.writerow(("n", "estimate"))
    for n in cfg.n_grid:
        start = time.perf_counter()
        est = branch_identity_estimate(params, n, cfg.replicates, cfg.seed, workers)
        w.writerow((n, _num(est)))
        log.info("n=%d estimate=%.4g (%.1fs)", n, est, time.perf_counter() - start)


def cmd_expansion_check(cfg: ExpansionCheckConfig, fp, workers: int = 1) -> None:
    """Scaled residuals of the weighted-sum, decrement-sum and total-rate expansions."""
    w = _writer(fp)
    w.writerow(("suite", "b", "alpha", "p", "n", "residual_scaled"))
    for case in cfg.cases:
        for n in cfg.n_grid:
            r = asymptotics.weighted_sum_residual(n, case.alpha, case.p)
            w.writerow(("weighted_sum", "", _num(case.alpha), _num(case.p), n, _num(r)))
    for b in cfg.b_values:
        for case in cfg.cases:
            for n in cfg.n_grid:
                r = asymptotics.decrement_weighted_sum_residual(n, case.alpha, case.p, b)
                w.writerow(("decrement_sum", _num(b), _num(case.alpha), _num(case.p), n, _num(r)))
        for n in cfg.n_grid:
            w.writerow(("total_rate", _num(b), "", "", n, _num(asymptotics.total_rate_residual(n, b))))
            w.writerow(("inverse_total_rate", _num(b), "", "", n,
                        _num(asymptotics.inverse_total_rate_residual(n, b))))


def cmd_coefficients(cfg: CoefficientsConfig, fp, workers: int = 1) -> None:
    w = _writer(fp)
    w.writerow(("b", "quantity", "j", "alpha", "p", "value"))
    for b in cfg.b_values:
        coeffs = asymptotics.ExpansionCoefficients.compute(b, cfg.j_max)
        for j in range(1, cfg.j_max + 1):
            w.writerow((_num(b), "kappa", j, "", "", _num(coeffs.kappa[j])))
            w.writerow((_num(b), "m", j, "", "", _num(coeffs.m[j])))
        for case in cfg.cases:
            value = asymptotics.c_coeff(b, case.alpha, case.p)
            w.writerow((_num(b), "c", "", _num(case.alpha), _num(case.p), _num(value)))


COMMANDS = {
    "simulate": (SimulateConfig, cmd_simulate),
    "exact-moments": (ExactMomentsConfig, cmd_exact_moments),
    "limit-check": (LimitCheckConfig, cmd_limit_check),
    "branch-identity": (BranchIdentityConfig, cmd_branch_identity),
    "expansion-check": (ExpansionCheckConfig, cmd_expansion_check),
    "coefficients": (CoefficientsConfig, cmd_coefficients),
}
_NEEDS_CONFIG = {"simulate", "exact-moments", "limit-check", "branch-identity"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="betacoal", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int, help="master seed, overrides the config")
    parser.add_argument("--workers", type=int, default=1, help="worker processes (wall time only)")
    parser.add_argument("--out", help="output CSV path (default: stdout)")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    return parser


def load_config(command: str, path: Optional[str], seed: Optional[int]):
    model, _ = COMMANDS[command]
    if path is None:
        if command in _NEEDS_CONFIG:
            raise ValueError(f"{command} requires --config")
        data = {}
    else:
        with open(path) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError("config must be a JSON object")
    if seed is not None:
        if "seed" not in model.model_fields:
            raise ValueError(f"{command} takes no seed")
        data = {**data, "seed": seed}
    return model.model_validate(data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        if args.workers < 1:
            raise ValueError("--workers must be >= 1")
        cfg = load_config(args.command, args.config, args.seed)
    except (OSError, ValueError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _, run = COMMANDS[args.command]
    buf = io.StringIO()
    try:
        run(cfg, buf, args.workers)
    except RegimeError as exc:
        print(f"regime error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except ResourceCapError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
