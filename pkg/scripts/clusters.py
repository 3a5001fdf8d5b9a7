"""Clustered point clouds turned into normalized-cut similarity graphs, then
factorized with k equal to the number of generated clusters. Reports the
final error and how well the argmax of each row of W recovers the labels."""
import argparse

import numpy as np

from symnmf.anls import SymConfig, sym_anls
from symnmf.similarity import KernelConfig, gen_synthetic, kernel_similarity

CLUSTERS = {"wsn": 5, "sc": 3, "sk": 3, "dd": 4}


def purity(labels, assigned):
    keep = labels >= 0
    labels, assigned = labels[keep], assigned[keep]
    hits = sum(np.bincount(labels[assigned == c]).max() for c in np.unique(assigned))
    return hits / labels.size


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--kinds", nargs="+", default=list(CLUSTERS))
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    for kind in args.kinds:
        ps = gen_synthetic(kind, args.n, args.seed)
        A = kernel_similarity(ps, KernelConfig("diameter"))
        res = sym_anls(A, SymConfig(k=CLUSTERS[kind], seed=args.seed))
        p = purity(ps.labels, res.W.argmax(axis=1))
        print(f"{kind:>4}: eps_S={res.eps_S:.4f} nu_tot={res.nu_tot:3d} purity={p:.3f} {res.status}")


if __name__ == "__main__":
    main()
