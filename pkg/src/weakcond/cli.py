"""Command-line interface.

Exit codes: 0 success, 1 usage or input error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import io as wio
from .condition import condition_report, estimate_weak_condition
from .dist import DomainError, QuadratureError, SigmaLaw
from .eig import (
    KernelDimensionError,
    MultipleEigenvalueError,
    NotAnEigenvalueError,
    all_eigenvalues,
    spectral_data,
)
from .fixtures import demo_pencil
from .mc import empirical_tail
from .polymat import KernelSearchError, MatrixPolynomial, RankInstabilityError, coeff_norm, normal_rank
from .sensitivity import DegenerateDirectionError

__all__ = ["RunConfig", "GridSpec", "main", "build_parser", "identify_eigenvalue", "IdentificationError"]

COMMANDS = ("analyze", "tails", "montecarlo", "estimate", "demo")


class UsageError(Exception):
    pass


class IdentificationError(RuntimeError):
    def __init__(self, msg, candidates):
        super().__init__(msg)
        self.candidates = candidates


NUMERICAL_ERRORS = (NotAnEigenvalueError, MultipleEigenvalueError, KernelDimensionError,
                    KernelSearchError, RankInstabilityError, QuadratureError, DegenerateDirectionError,
                    DomainError, IdentificationError, np.linalg.LinAlgError)


@dataclass(frozen=True)
class GridSpec:
    t_min: float
    t_max: float
    points: int
    log: bool = False

    def __post_init__(self):
        if not (self.points >= 1 and 0 <= self.t_min and self.t_min <= self.t_max):
            raise ValueError("grid needs 0 <= MIN <= MAX and POINTS >= 1")
        if self.points > 1 and self.t_min == self.t_max:
            raise ValueError("grid with several points needs MIN < MAX")
        if self.log and self.t_min <= 0:
            raise ValueError("log grid needs MIN > 0")

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        parts = text.split(":")
        if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] not in ("log", "lin")):
            raise ValueError(f"grid must be MIN:MAX:POINTS[:log], got {text!r}")
        return cls(float(parts[0]), float(parts[1]), int(parts[2]), len(parts) == 4 and parts[3] == "log")

    def values(self) -> np.ndarray:
        if self.log:
            return np.geomspace(self.t_min, self.t_max, self.points)
        return np.linspace(self.t_min, self.t_max, self.points)


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: str | None = None
    lam: complex | None = None
    delta: float = 0.01
    samples: int = 100_000
    seed: int = 0
    grid: GridSpec | None = None
    output: str | None = None
    format: str = "json"
    eta: float = 1.0

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if not 0 < self.delta < 1:
            raise ValueError(f"--delta must lie in (0, 1), got {self.delta}")
        if self.samples < 1:
            raise ValueError(f"--samples must be >= 1, got {self.samples}")
        if self.format not in ("json", "csv"):
            raise ValueError("--format must be json or csv")
        if not self.eta > 0:
            raise ValueError("--eta must be positive")


def parse_lambda(text: str) -> complex:
    parts = text.split(",")
    if len(parts) not in (1, 2):
        raise ValueError(f"--lambda must be RE or RE,IM, got {text!r}")
    vals = [float(p) for p in parts]
    return complex(vals[0], vals[1] if len(vals) == 2 else 0.0)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="weakcond", description="Weak condition numbers of eigenvalues of matrix polynomials.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "analyze": "condition numbers of one eigenvalue",
        "tails": "exact and bound tails of the directional sensitivity",
        "montecarlo": "empirical tail from random perturbations",
        "estimate": "estimate the weak condition number from one random perturbation",
        "demo": "analyze the built-in 4x4 singular pencil at eigenvalue 1",
    }
    for name in COMMANDS:
        s = sub.add_parser(name, help=helps[name])
        s.add_argument("--input", help="polynomial JSON file, or 'demo' for the built-in pencil")
        s.add_argument("--lambda", dest="lam", help="eigenvalue RE[,IM]; use --lambda=-1,0 for negatives")
        s.add_argument("--delta", type=float, default=0.01, help="failure probability in (0, 1)")
        s.add_argument("--samples", type=int, default=100_000, help="Monte Carlo sample count")
        s.add_argument("--seed", type=int, default=0, help="RNG seed")
        s.add_argument("--grid", help="MIN:MAX:POINTS[:log]; default 0.1/gamma:100/gamma:50:log")
        s.add_argument("--output", help="write here (atomically) instead of stdout")
        s.add_argument("--format", choices=("json", "csv"), help="csv only for tails and montecarlo",
                       default="csv" if name in ("tails", "montecarlo") else "json")
        s.add_argument("--eta", type=float, default=1.0, help="confidence parameter for estimate")
    return p


def config_from_args(argv) -> RunConfig:
    a = build_parser().parse_args(argv)
    try:
        return RunConfig(command=a.command, input=a.input,
                         lam=parse_lambda(a.lam) if a.lam is not None else None,
                         delta=a.delta, samples=a.samples, seed=a.seed,
                         grid=GridSpec.parse(a.grid) if a.grid else None,
                         output=a.output, format=a.format, eta=a.eta)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def load_input(cfg: RunConfig) -> MatrixPolynomial:
    if cfg.command == "demo" or cfg.input in (None, "demo"):
        if cfg.command != "demo" and cfg.input is None:
            raise UsageError("--input is required (a JSON file or 'demo')")
        return demo_pencil()
    try:
        return wio.load_polynomial(cfg.input)
    except OSError as exc:
        raise UsageError(f"cannot read {cfg.input}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{cfg.input}: invalid JSON: {exc}") from None
    except Exception as exc:  # schema and shape errors
        msg = getattr(exc, "message", str(exc))
        raise UsageError(f"{cfg.input}: invalid polynomial: {msg}") from None


def identify_eigenvalue(P: MatrixPolynomial, seed: int = 0, runs: int = 2, rel_eps: float = 1e-12,
                        threshold: float = 1e-6):
    """Heuristic choice of a reliable eigenvalue of a possibly singular ``P``.

    Computed eigenvalues of a singular problem are mostly artefacts that move
    by O(1) under tiny perturbations, while true eigenvalues move by O(eps).
    Each candidate is scored by its largest relative move over ``runs``
    perturbations of relative size ``rel_eps``.

    Returns
    -------
    lam : complex
        The unique stable candidate.
    candidates : list of dict
        Every finite computed eigenvalue with its score.
    """
    rng = np.random.default_rng(seed)
    base = all_eigenvalues(P)
    base = base[np.isfinite(base)]
    scale = coeff_norm(P)
    moved = []
    for _ in range(runs):
        c = rng.standard_normal(P.coeffs.shape)
        if P.field == "complex":
            c = c + 1j * rng.standard_normal(P.coeffs.shape)
        E = MatrixPolynomial(c / np.linalg.norm(c.ravel()), P.field)
        ev = all_eigenvalues(P + E * (rel_eps * scale))
        moved.append(ev[np.isfinite(ev)])
    cands = []
    for z in base:
        score = max((np.min(np.abs(ev - z)) if ev.size else math.inf) for ev in moved) / max(1.0, abs(z))
        cands.append({"lambda": [z.real, z.imag], "score": float(score), "stable": bool(score <= threshold)})
    stable = [c for c in cands if c["stable"]]
    # a stable eigenvalue may show up several times if it is not simple
    if len(stable) != 1:
        raise IdentificationError(f"{len(stable)} stable eigenvalue candidates; pass --lambda", cands)
    return complex(*stable[0]["lambda"]), cands


def _resolve(cfg: RunConfig, P: MatrixPolynomial):
    if cfg.command == "demo":
        return complex(1.0), "given", None
    if cfg.lam is not None:
        return cfg.lam, "given", None
    lam, cands = identify_eigenvalue(P, cfg.seed)
    return lam, "heuristic", cands


def _emit(cfg: RunConfig, text: str, out) -> None:
    if cfg.output:
        try:
            wio.write_atomic(cfg.output, text)
        except OSError as exc:
            raise UsageError(f"cannot write {cfg.output}: {exc.strerror or exc}") from None
    else:
        out.write(text)


def cmd_analyze(cfg: RunConfig, P: MatrixPolynomial) -> dict:
    lam, source, cands = _resolve(cfg, P)
    S = spectral_data(P, lam)
    rep = condition_report(SigmaLaw.from_spectral(S), cfg.delta)
    out = {"n": S.n, "degree": S.d, "field": P.field, "rank": S.r,
           "lambda": [S.lam.real, S.lam.imag], "lambda_source": source,
           "gamma": S.gamma, "gamma_inv": 1 / S.gamma, "report": rep.to_dict()}
    if cands is not None:
        out["candidates"] = cands
    return out


def _tail(cfg: RunConfig, P: MatrixPolynomial, samples: int):
    lam, _, _ = _resolve(cfg, P)
    S = spectral_data(P, lam)
    law = SigmaLaw.from_spectral(S)
    grid = cfg.grid.values() if cfg.grid else np.geomspace(0.1 / S.gamma, 100 / S.gamma, 50)
    return empirical_tail(P, lam, law, grid, samples, cfg.seed, S=S)


def cmd_estimate(cfg: RunConfig, P: MatrixPolynomial) -> dict:
    lam, source, _ = _resolve(cfg, P)
    S = spectral_data(P, lam)
    est = estimate_weak_condition(P, S.lam, delta=cfg.delta, eta=cfg.eta, S=S, seed=cfg.seed)
    return {"lambda": [S.lam.real, S.lam.imag], "lambda_source": source, "seed": cfg.seed,
            "gamma_inv": 1 / S.gamma, "estimate": est.to_dict()}


def run(cfg: RunConfig, out=None) -> None:
    out = sys.stdout if out is None else out
    P = load_input(cfg)
    if cfg.command in ("tails", "montecarlo"):
        curve = _tail(cfg, P, cfg.samples if cfg.command == "montecarlo" else 0)
        _emit(cfg, curve.to_csv() if cfg.format == "csv" else wio.dumps(curve.to_dict()), out)
        return
    if cfg.format != "json":
        raise UsageError(f"{cfg.command} supports only --format json")
    result = cmd_estimate(cfg, P) if cfg.command == "estimate" else cmd_analyze(cfg, P)
    _emit(cfg, wio.dumps(result), out)


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
        run(cfg)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except IdentificationError as exc:
        print(f"eigenvalue identification (heuristic) failed: {exc}", file=sys.stderr)
        print(wio.dumps({"candidates": exc.candidates}), file=sys.stderr, end="")
        return 2
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:  # invalid configuration, e.g. WEAKCOND_THREADS
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
