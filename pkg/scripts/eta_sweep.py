"""Effect of the GCD tolerance on a single problem: total coordinate
corrections and outer iterations for a range of eta values."""
import argparse

from symnmf.anls import SymConfig, sym_anls
from symnmf.bench import load_matrix


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--matrix", default="gen:class1:n=2000,p=80")
    ap.add_argument("--k", type=int, default=80)
    ap.add_argument("--eta", type=float, nargs="+", default=[1e-1, 1e-2, 1e-3, 1e-4, 1e-5])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--numax", type=int, default=500)
    args = ap.parse_args()

    A = load_matrix(args.matrix)
    print(f"{'eta':>8} {'nu_tot':>7} {'cor/1000':>10} {'eps_S':>10} {'time':>8}  status")
    for eta in args.eta:
        res = sym_anls(A, SymConfig(k=args.k, eta=eta, seed=args.seed, nu_max=args.numax))
        print(f"{eta:8.0e} {res.nu_tot:7d} {res.corrections // 1000:10d} {res.eps_S:10.3e} "
              f"{res.elapsed_s:7.1f}s  {res.status}", flush=True)


if __name__ == "__main__":
    main()
