"""Batch command line: ``sostar <command> [flags]``.

Every command reads matrix JSON where needed and writes JSON (or CSV for
distributions) to ``--output`` or standard output.  Library errors exit
with status 2 and a one-line JSON error on standard error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import antisym, coherent, crosscheck, io, semiclassical
from .errors import ParseError, SoStarError

COMMANDS = ("validate", "decompose", "expect", "distribution", "semiclassical", "symmetry", "oracle", "example-4leg")


@dataclass(frozen=True)
class RunConfig:
    command: str
    input_path: str | None = None
    output_path: str | None = None
    omega_path: str | None = None
    csv_path: str | None = None
    tol: float = antisym.TOL_MULT
    j_max: int = 50
    seed: int = 0
    n: int = 3
    trials: int = 10

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.j_max < 0:
            raise ValueError("j_max must be non-negative")


def _input(config: RunConfig) -> np.ndarray:
    if config.input_path is None:
        raise ParseError(f"{config.command} needs --input")
    return io.load_matrix(config.input_path)


def _validate(config: RunConfig) -> dict:
    rep = antisym.validate_domain(_input(config))
    return {"is_antisymmetric": rep.is_antisymmetric, "spectral_norm_sq": rep.spectral_norm_sq, "in_domain": rep.in_domain}


def _decompose(config: RunConfig) -> dict:
    zeta = _input(config)
    cf = antisym.canonical_decompose(zeta, tol_mult=config.tol)
    rec, uni = cf.residuals(zeta)
    return {
        "u": io.matrix_to_json(cf.u),
        "lambdas": list(cf.lambdas),
        "half_rank": cf.half_rank,
        "padding": cf.padding,
        "groups": [{"lambda": lam, "multiplicity": mu} for lam, mu in cf.groups],
        "reconstruction_residual": rec,
        "unitarity_residual": uni,
    }


def _expect(config: RunConfig) -> dict:
    zeta = _input(config)
    omega = io.load_matrix(config.omega_path) if config.omega_path else zeta
    e, f, ft = coherent.matrix_elements(omega, zeta)
    return {
        "normalization": coherent.normalization(zeta),
        "overlap": coherent.overlap(omega, zeta),
        "E": io.matrix_to_json(e),
        "F": io.matrix_to_json(f),
        "Ftilde": io.matrix_to_json(ft),
        "area": coherent.area_report(zeta).as_dict(),
    }


def _distribution(config: RunConfig) -> dict:
    rows = coherent.area_distribution(_input(config), config.j_max)
    if config.csv_path:
        Path(config.csv_path).write_text(io.distribution_csv(rows))
    return {"distribution": [{"J": j, "P": p} for j, p in rows], "partial_sum": sum(p for _, p in rows)}


def _semiclassical(config: RunConfig) -> dict:
    zeta = _input(config)
    fam = semiclassical.extract_spinor_families(zeta)
    out = fam.as_dict()
    out["coarse_defect"] = semiclassical.coarse_closure_defect(fam)
    out["symmetry"] = semiclassical.symmetry_group_of(zeta, tol_mult=config.tol).as_dict()
    return out


def _symmetry(config: RunConfig) -> dict:
    zeta = _input(config)
    desc = semiclassical.symmetry_group_of(zeta, tol_mult=config.tol)
    rng = np.random.default_rng(config.seed)
    samples = []
    for _ in range(config.trials):
        w = semiclassical.sample_symmetry(desc, rng)
        samples.append({"w": io.matrix_to_json(w), "residual": semiclassical.stabilizer_residual(desc, w)})
    return {"symmetry": desc.as_dict(), "samples": samples}


def _oracle(config: RunConfig) -> dict:
    rep = crosscheck.oracle_suite(config.n, config.j_max, config.trials, config.seed)
    out = rep.as_dict()
    out.update(n=config.n, j_max=config.j_max, seed=config.seed, max_norm_sq=crosscheck.safe_norm_sq(config.n, config.j_max))
    return out


def _example(config: RunConfig) -> dict:
    rep = semiclassical.example_4leg()
    out = {
        "zeta": io.matrix_to_json(rep.zeta),
        "families": rep.family.as_dict()["families"],
        "mixed_families": rep.mixed.as_dict()["families"],
        "face_areas": rep.face_areas,
        "family_areas": rep.family_areas,
        "coarse_defect": rep.defect,
        "symmetry": rep.symmetry.as_dict(),
        "w_residual": rep.w_residual,
    }
    return out


HANDLERS = {
    "validate": _validate,
    "decompose": _decompose,
    "expect": _expect,
    "distribution": _distribution,
    "semiclassical": _semiclassical,
    "symmetry": _symmetry,
    "oracle": _oracle,
    "example-4leg": _example,
}


def run(config: RunConfig) -> int:
    """Execute one command; returns the process exit status."""
    try:
        result = HANDLERS[config.command](config)
    except (SoStarError, OverflowError) as exc:
        code = getattr(exc, "code", "overflow")
        sys.stderr.write(json.dumps({"error": code, "message": str(exc)}, sort_keys=True) + "\n")
        return 2
    text = io.dumps(result)
    if config.output_path:
        Path(config.output_path).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sostar", description="SO*(2N) coherent intertwiner toolkit")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--input", help="matrix JSON for zeta")
    p.add_argument("--omega", help="second matrix JSON for expect (defaults to the input)")
    p.add_argument("--output", help="write the JSON report here instead of stdout")
    p.add_argument("--csv", help="distribution: also write J,P rows here")
    p.add_argument("--jmax", type=int, default=50, help="area cutoff")
    p.add_argument("--tol", type=float, default=antisym.TOL_MULT, help="relative tolerance for grouping equal lambdas")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=3, help="oracle: number of legs")
    p.add_argument("--trials", type=int, default=10)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig(
            command=args.command,
            input_path=args.input,
            output_path=args.output,
            omega_path=args.omega,
            csv_path=args.csv,
            tol=args.tol,
            j_max=args.jmax,
            seed=args.seed,
            n=args.n,
            trials=args.trials,
        )
    except ValueError as exc:
        sys.stderr.write(json.dumps({"error": "invalid_config", "message": str(exc)}, sort_keys=True) + "\n")
        return 2
    return run(config)


if __name__ == "__main__":
    raise SystemExit(main())
