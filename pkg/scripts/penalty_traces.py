"""Per-iteration traces for the adaptive penalty and several geometric
factors on one problem, written as CSV files ready for plotting beta, the
error pair and the corrections per row against the outer iteration."""
import argparse
from pathlib import Path

from symnmf.anls import SymConfig, sym_anls
from symnmf.bench import load_matrix, parse_update, write_trace_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--matrix", default="gen:class1:n=2000,p=80")
    ap.add_argument("--k", type=int, default=80)
    ap.add_argument("--eta", type=float, default=1e-4)
    ap.add_argument("--updates", nargs="+", default=["ada", "g1.01", "g1.1", "g1.4"])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--outdir", type=Path, default=Path("traces"))
    args = ap.parse_args()

    A = load_matrix(args.matrix)
    args.outdir.mkdir(parents=True, exist_ok=True)
    for name in args.updates:
        update, zeta = parse_update(name)
        res = sym_anls(A, SymConfig(k=args.k, eta=args.eta, update=update, zeta=zeta, seed=args.seed))
        path = args.outdir / f"{name}.csv"
        write_trace_csv(path, res.trace, n=A.shape[0])
        print(f"{name:>6}: nu_tot={res.nu_tot} eps_S={res.eps_S:.3e} final beta={res.trace[-1].beta:.3g} -> {path}",
              flush=True)


if __name__ == "__main__":
    main()
