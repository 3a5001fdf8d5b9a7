import csv

import numpy as np
import pytest

from symnmf.anls import SymConfig, sym_anls
from symnmf.bench import (
    ExperimentReport,
    ExperimentSpec,
    StartSummary,
    aggregate,
    cor_av,
    export,
    load_matrix,
    load_report,
    parse_update,
    read_trace_csv,
    run_experiment,
)
from symnmf.core import write_matrix_market
from symnmf.similarity import gen_synthetic, random_lowrank, write_points_csv

SRC = "gen:class1:n=60,p=4,seed=1"


def spec(**kw):
    base = dict(problem="p", source=SRC, k=4, starts=2)
    base.update(kw)
    return ExperimentSpec(**base)


def fake_report(group, eps, nu, T):
    return ExperimentReport("x", group, 10, 2, eps, nu, 0, T, "converged", 0, [], [])


def test_load_matrix_sources(tmp_path):
    np.testing.assert_array_equal(load_matrix(SRC), random_lowrank(60, 4, 1))
    A = load_matrix("gen:dd:n=150")
    assert A.shape == (150, 150) and np.array_equal(A, A.T)
    pts = tmp_path / "pts.csv"
    write_points_csv(pts, gen_synthetic("dd", 150, 0))
    np.testing.assert_allclose(load_matrix(f"points:{pts}"), A, atol=1e-14)
    vec = tmp_path / "v.csv"
    np.savetxt(vec, np.random.default_rng(0).random((20, 3)), delimiter=",")
    assert load_matrix(f"gauss:{vec}").shape == (20, 20)
    assert load_matrix(f"cosine:{vec}").shape == (20, 20)
    mtx = tmp_path / "a.mtx"
    write_matrix_market(mtx, A)
    np.testing.assert_array_equal(load_matrix(str(mtx)), A)
    with pytest.raises(ValueError):
        load_matrix("gen:class1:n=10,p=2,q=3")
    with pytest.raises(ValueError):
        load_matrix("gen:class1:n=10,p")


def test_parse_update():
    assert parse_update("ADA") == ("ada", 1.01)
    assert parse_update("g1.4") == ("geometric", 1.4)
    with pytest.raises(ValueError):
        parse_update("linear")


def test_spec_seeds():
    assert spec(starts=3, base_seed=5).start_seeds() == [5, 6, 7]
    assert spec(starts=2, seeds=(9, 1)).start_seeds() == [9, 1]
    with pytest.raises(ValueError):
        spec(starts=0)
    with pytest.raises(ValueError):
        spec(starts=2, seeds=(1,))


def test_single_start_matches_direct_run():
    rep = run_experiment(spec(starts=1, base_seed=3), jobs=1)
    res = sym_anls(load_matrix(SRC), SymConfig(k=4, seed=3))
    assert rep.eps_S == res.eps_S and rep.nu_tot == res.nu_tot and rep.best_seed == 3
    assert rep.cor == res.corrections == sum(t.corrections for t in rep.trace)
    np.testing.assert_array_equal(rep.W, res.W)


def test_best_start_and_tie_break():
    rep = run_experiment(spec(starts=3), jobs=1)
    assert rep.eps_S == min(s.eps_S for s in rep.starts)
    assert rep.T == max(s.elapsed_s for s in rep.starts)
    tie = run_experiment(spec(starts=2, seeds=(4, 4)), jobs=1)
    assert tie.starts[0].eps_S == tie.starts[1].eps_S and tie.best_seed == 4


def test_serial_and_parallel_agree():
    a = run_experiment(spec(starts=3), jobs=1)
    b = run_experiment(spec(starts=3), jobs=3)
    assert [(s.seed, s.eps_S, s.nu_tot, s.cor) for s in a.starts] == \
           [(s.seed, s.eps_S, s.nu_tot, s.cor) for s in b.starts]
    np.testing.assert_array_equal(a.W, b.W)


def test_failed_start_is_skipped(caplog):
    A = random_lowrank(20, 2, 0)
    with pytest.raises(RuntimeError, match="all 2 starts failed"):
        run_experiment(spec(k=25), A=A, jobs=1)


def test_aggregate_means():
    rows = aggregate([fake_report("R1", 0.01, 10, 1.0), fake_report("R1", 0.03, 20, 3.0),
                      fake_report("R2", 0.5, 1, 1.0)])
    assert [r.group for r in rows] == ["R1", "R2"]
    assert rows[0].eps_S == pytest.approx(0.02) and rows[0].nu_tot == 15 and rows[0].T == 2.0
    assert rows[0].count == 2
    assert rows[0].formatted().split() == ["R1", "0.020", "15.00", "2.00"]
    by_k = aggregate([fake_report("a", 0.1, 1, 1), fake_report("b", 0.3, 1, 1)], grouping=lambda r: r.k)
    assert len(by_k) == 1 and by_k[0].eps_S == pytest.approx(0.2)


def test_exports(tmp_path):
    rep = run_experiment(spec(starts=2), jobs=1)
    js = tmp_path / "r.json"
    export(rep, "json", js)
    back = load_report(js)
    assert back == rep  # W is excluded from comparison and from the file
    tr = tmp_path / "t.csv"
    export(rep, "csv", tr, with_cor_av=True)
    with open(tr) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["nu", "beta", "alpha", "eps_S", "eps_N", "delta", "rho", "corrections", "elapsed_s", "cor_av"]
    assert len(rows) - 1 == rep.nu_tot
    assert [float(r[-1]) for r in rows[1:]] == cor_av(rep)
    assert read_trace_csv(tr) == rep.trace
    export(rep, "csv", tr)
    with open(tr) as fh:
        assert next(csv.reader(fh))[-1] == "elapsed_s"
    with pytest.raises(ValueError):
        export(rep, "xml", tmp_path / "r.xml")


def test_cor_av():
    rep = fake_report("g", 0.1, 1, 1.0)
    rep.trace = [type("T", (), {"corrections": 40})()]
    assert cor_av(rep) == [2.0]
