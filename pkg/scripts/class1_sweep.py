"""Random low-rank sweep: A = V V^T for several inner dimensions p and ranks k,
multi-start runs, per-p averages of final error, outer iterations and time."""
import argparse
import json

from symnmf.bench import ExperimentSpec, aggregate, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--p", type=int, nargs="+", default=[20, 40, 80])
    ap.add_argument("--k", type=int, nargs="+", default=[5, 10, 20, 40, 80])
    ap.add_argument("--update", default="ada", choices=["ada", "geometric"])
    ap.add_argument("--zeta", type=float, default=1.01)
    ap.add_argument("--eta", type=float, default=1e-3)
    ap.add_argument("--starts", type=int, default=5)
    ap.add_argument("--jobs", type=int, default=None)
    ap.add_argument("--json", help="write every report here")
    args = ap.parse_args()

    reports = []
    for p in args.p:
        for k in args.k:
            if k >= args.n:
                continue
            spec = ExperimentSpec(f"R(p={p}) k={k}", f"gen:class1:n={args.n},p={p}", k, eta=args.eta,
                                  update=args.update, zeta=args.zeta, starts=args.starts, group=f"p={p}")
            rep = run_experiment(spec, jobs=args.jobs)
            print(f"{spec.problem:<18} eps_S={rep.eps_S:.4f} nu_tot={rep.nu_tot:4d} T={rep.T:8.2f}s {rep.status}",
                  flush=True)
            reports.append(rep)

    print("\ngroup        eps_S    nu_tot         T")
    for row in aggregate(reports):
        print(row.formatted())
    for row in aggregate(reports, grouping=lambda r: "all"):
        print(row.formatted())
    if args.json:
        with open(args.json, "w") as fh:
            json.dump([r.to_dict() for r in reports], fh, indent=1)


if __name__ == "__main__":
    main()
