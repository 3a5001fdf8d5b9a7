"""Command line entry point: ``symnmf run`` and ``symnmf build``."""
from __future__ import annotations

import argparse
import logging
import os
import sys

from .bench import ExperimentSpec, export, load_matrix, parse_update, run_experiment
from .core import write_matrix_market

EXIT_OK, EXIT_ERROR, EXIT_CAP = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="symnmf", description="Symmetric NMF by penalized ANLS with adaptive penalty.")
    sub = p.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("run", help="multi-start factorization of one matrix")
    r.add_argument("--matrix", required=True,
                   help="MatrixMarket file, gen:class1:n=..,p=.., gen:wsn|sc|sk|dd:n=.., "
                        "points:<csv>, gauss:<csv> or cosine:<csv>")
    r.add_argument("--k", type=int, required=True)
    r.add_argument("--inner", choices=("gcd", "bpp"), default="gcd")
    r.add_argument("--eta", type=float, default=1e-3)
    r.add_argument("--update", default="ada", help="ada, g1.01, g1.1, g1.4, ...")
    r.add_argument("--starts", type=int, default=5)
    r.add_argument("--seed", type=int, default=0, help="base seed (SYMNMF_SEED overrides)")
    r.add_argument("--numax", type=int, default=500)
    r.add_argument("--out", help="summary JSON path")
    r.add_argument("--trace", help="trace CSV path of the best start")
    r.add_argument("--cor-av", action="store_true", help="append cor_av column to the trace CSV")
    r.add_argument("--save-w", help="write the best factor W as MatrixMarket")
    r.add_argument("--jobs", type=int, default=None)
    r.add_argument("--problem", default=None)

    b = sub.add_parser("build", help="materialize a matrix source as MatrixMarket")
    b.add_argument("--matrix", required=True)
    b.add_argument("--out", required=True)

    for s in (r, b):
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def _run(args) -> int:
    seed = int(os.environ.get("SYMNMF_SEED", args.seed))
    update, zeta = parse_update(args.update)
    spec = ExperimentSpec(
        problem=args.problem or args.matrix, source=args.matrix, k=args.k, inner=args.inner,
        eta=args.eta, update=update, zeta=zeta, starts=args.starts, base_seed=seed, nu_max=args.numax,
    )
    report = run_experiment(spec, jobs=args.jobs)
    if args.out:
        export(report, "json", args.out)
    if args.trace:
        export(report, "csv", args.trace, with_cor_av=args.cor_av)
    if args.save_w:
        write_matrix_market(args.save_w, report.W, symmetric=False)
    print(f"problem={report.problem} n={report.n} k={report.k} eps_S={report.eps_S:.6g} "
          f"nu_tot={report.nu_tot} cor={report.cor} T={report.T:.2f}s status={report.status} "
          f"best_seed={report.best_seed}")
    return EXIT_OK if report.status == "converged" else EXIT_CAP


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.cmd == "run":
            return _run(args)
        write_matrix_market(args.out, load_matrix(args.matrix))
        return EXIT_OK
    except Exception as exc:
        print(f"symnmf: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
