"""Command-line entry point: ``sosbound <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys

from . import bench, dressed, fock, toy
from .driver import SolverConfig, solve
from .errors import SosError
from .models import FAMILIES, ModelSpec, toy_spinless_terms
from .operators import SpinfulHamiltonian, spinless_to_json


def parse_seeds(text: str) -> list[int]:
    """``"3"`` -> [3], ``"0:100"`` -> 0..99, ``"1,4,9"`` -> list."""
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if ":" in part:
            lo, hi = part.split(":")
            seeds.extend(range(int(lo), int(hi)))
        elif part:
            seeds.append(int(part))
    if not seeds:
        raise ValueError(f"no seeds in {text!r}")
    return seeds


def parse_floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _write(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _config(args) -> SolverConfig:
    return SolverConfig(damping_f=args.damping, tol=args.tol, max_iter=args.max_iter)


def _hamiltonian(args) -> SpinfulHamiltonian:
    if getattr(args, "input", None):
        with open(args.input) as fh:
            return SpinfulHamiltonian.from_json(fh.read())
    seed = parse_seeds(args.seeds)[0]
    return ModelSpec(args.family, args.n_o, parse_floats(args.epsilon)[0], seed, args.u).build()


def cmd_generate(args):
    if args.family == "toy-spinless-quartic":
        _write(spinless_to_json(4, toy_spinless_terms(parse_floats(args.epsilon)[0])), args.out)
        return
    _write(_hamiltonian(args).to_json(), args.out)


def cmd_solve(args):
    res = solve(_hamiltonian(args), _config(args))
    if args.format == "json":
        _write(res.to_json(), args.out)
    else:
        _write(
            "bound,certified_bound,err,converged,iterations,wall_time_s\n"
            f"{res.bound},{res.certified_bound},{res.err},{res.converged},{res.iterations},{res.wall_time}\n",
            args.out,
        )


def cmd_exact(args):
    e0 = fock.ground_energy(fock.build_spinful(_hamiltonian(args)))
    _write(json.dumps({"exact": e0}) if args.format == "json" else f"exact\n{e0}\n", args.out)


def cmd_pt(args):
    H0, V = bench.split_h0(_hamiltonian(args))
    pt = fock.rs_pt(H0, V, order=3)
    vals = {f"pt{k}": pt.total(1.0, k) for k in range(4)}
    if args.format == "json":
        _write(json.dumps(vals), args.out)
    else:
        _write(",".join(vals) + "\n" + ",".join(str(v) for v in vals.values()) + "\n", args.out)


def cmd_sweep(args):
    records = bench.run_sweep(
        args.family,
        args.n_o,
        parse_floats(args.epsilon),
        parse_seeds(args.seeds),
        _config(args),
        with_oracle=not args.no_oracle,
    )
    text = bench.emit(records, args.format, args.out)
    if not args.out:
        sys.stdout.write(text)
    print(json.dumps(bench.summary(records)), file=sys.stderr)


def cmd_toy(args):
    if args.mode == "fragment":
        _write(toy.fragment_table(parse_floats(args.epsilon)), args.out)
    elif args.mode == "general":
        _write(toy.general_table(parse_floats(args.epsilon), args.branch), args.out)
    else:
        _write(f"boundary\n{toy.feasibility_boundary()}\n", args.out)


def cmd_dressed(args):
    pert = dressed.SpinlessPerturbation.random(args.n, parse_seeds(args.seeds)[0])
    sector_pert = dressed.SpinlessPerturbation.random(args.n, parse_seeds(args.seeds)[0], families=("V4",))
    lines = ["epsilon,residual_o1,residual_o2,sector_residual"]
    for eps in parse_floats(args.epsilon):
        r1 = dressed.residual_norm(pert, args.mode_index, eps, order=1)
        r2 = dressed.residual_norm(pert, args.mode_index, eps, order=2)
        sec = dressed.sector_residual(sector_pert, args.mode_index, eps) if args.n >= 7 else ""
        lines.append(f"{eps},{r1},{r2},{sec}")
    _write("\n".join(lines) + "\n", args.out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sosbound", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, model=True, solver=False, default_eps="0.01"):
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--out", help="output file (default stdout)")
        sp.add_argument("--epsilon", default=default_eps, help="comma-separated values")
        sp.add_argument("--seeds", default="0", help="'3', '0:100' or '1,4,9'")
        if model:
            sp.add_argument("--family", choices=FAMILIES, default="gaussian-quartic")
            sp.add_argument("--n-o", dest="n_o", type=int, default=4)
            sp.add_argument("--u", type=float, default=None, help="two-orbital density coupling")
            sp.add_argument("--input", help="Hamiltonian JSON file instead of model flags")
        if solver:
            sp.add_argument("--damping", type=float, default=0.5)
            sp.add_argument("--tol", type=float, default=1e-5)
            sp.add_argument("--max-iter", dest="max_iter", type=int, default=40)

    for name, fn, solver in (
        ("generate", cmd_generate, False),
        ("solve", cmd_solve, True),
        ("exact", cmd_exact, False),
        ("pt", cmd_pt, False),
    ):
        sp = sub.add_parser(name)
        common(sp, solver=solver)
        sp.set_defaults(func=fn)

    sp = sub.add_parser("sweep")
    common(sp, solver=True)
    sp.add_argument("--no-oracle", action="store_true", help="skip exact diagonalization and PT")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("toy")
    common(sp, model=False, default_eps="0.1,1,5,20")
    sp.add_argument("--mode", choices=("fragment", "general", "boundary"), default="fragment")
    sp.add_argument("--branch", choices=("weak", "strong"), default="weak")
    sp.set_defaults(func=cmd_toy)

    sp = sub.add_parser("dressed")
    common(sp, model=False, default_eps="0.01,0.02,0.04")
    sp.add_argument("--n", type=int, default=6, help="number of spinless modes")
    sp.add_argument("--mode-index", dest="mode_index", type=int, default=0)
    sp.set_defaults(func=cmd_dressed)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SosError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
