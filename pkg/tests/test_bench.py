import json
import statistics

import pytest

from mgtapf.bench import (HEADER, SweepError, aggregate, benchmark_to_csv, expand_sweep,
                          load_sweep, read_csv, run_benchmark, split_rows)
from mgtapf.formats import write_map
from mgtapf.instances import random_grid

OMEGAS = [1.0, 1.05, 1.1, 1.3]


@pytest.fixture(scope="module")
def sweep(tmp_path_factory):
    path = tmp_path_factory.mktemp("maps") / "small8.map"
    path.write_text(write_map(random_grid(4, 8, 8, 0.1)))
    return {
        "maps": [str(path)],
        "agents": [4],
        "bands": [[1, 2]],
        "configs": [{"algo": "ecbs-ta", "omega": w} for w in OMEGAS],
        "time_limit": 20,
        "seeds": 10,
    }


@pytest.fixture(scope="module")
def rows(sweep):
    return read_csv(benchmark_to_csv(sweep))


def test_row_counts_and_order(rows):
    raw, agg = split_rows(rows)
    assert len(raw) == 40 and len(agg) == 4
    assert raw[0]["instance"] == "small8-m4-k1-2-s0"
    assert [r["omega"] for r in raw[:4]] == ["1", "1.05", "1.1", "1.3"]
    assert {r["instance"] for r in agg} == {"agg:small8-m4-k1-2"}


def test_aggregates_recomputed_from_raw(rows):
    raw, agg = split_rows(rows)
    common = None
    for w in ("1", "1.05", "1.1", "1.3"):
        solved = {r["instance"] for r in raw if r["omega"] == w and r["status"] == "solved"}
        common = solved if common is None else common & solved
    for a in agg:
        mine = [r for r in raw if r["omega"] == a["omega"]]
        n_ok = sum(r["status"] == "solved" for r in mine)
        assert a["status"] == f"success {n_ok}/10"
        for field in ("flowtime", "ct_expanded", "lower_bound"):
            vals = [float(r[field]) for r in mine if r["instance"] in common]
            assert float(a[field]) == pytest.approx(statistics.mean(vals), abs=1e-6)


def test_bounded_rows(rows):
    raw, _ = split_rows(rows)
    for r in raw:
        if r["status"] == "solved":
            assert float(r["flowtime"]) <= float(r["omega"]) * float(r["lower_bound"]) + 1e-6


def test_header_and_floats(sweep):
    text = benchmark_to_csv({**sweep, "seeds": [3], "configs": sweep["configs"][:1]})
    first = text.splitlines()[0]
    assert first == ",".join(HEADER)
    row = read_csv(text)[0]
    assert len(row["runtime_s"].split(".")[1]) == 6


def test_workers_do_not_change_results(sweep):
    small = {**sweep, "seeds": [0, 1, 2], "configs": sweep["configs"][:2]}
    one = run_benchmark(small, workers=1)
    two = run_benchmark(small, workers=2)
    strip = lambda rs: [{k: v for k, v in r.items() if k != "runtime_s"} for r in rs]
    assert strip(one) == strip(two)


def test_aggregate_without_common_solutions():
    rows = [
        {"instance": "g-s0", "algo": "a", "heuristic": "none", "omega": "1", "status": "timeout",
         **{f: "" for f in HEADER[5:]}},
        {"instance": "g-s0", "algo": "b", "heuristic": "none", "omega": "1", "status": "solved",
         "flowtime": "4", "makespan": "2", "ct_expanded": "1", "roots": "1", "ll_expanded": "9",
         "runtime_s": "0.1", "lower_bound": "4"},
    ]
    agg = aggregate(rows)
    assert [a["status"] for a in agg] == ["success 0/1", "success 1/1"]
    assert agg[1]["flowtime"] == ""


@pytest.mark.parametrize("bad", [
    {},
    {"maps": ["empty32"], "agents": [2], "bands": [[1, 1]], "configs": [{"algo": "x"}], "seeds": 1},
    {"maps": ["empty32"], "agents": [2], "bands": [[1]], "configs": [], "seeds": 1},
])
def test_bad_sweeps(bad):
    with pytest.raises((SweepError, ValueError)):
        expand_sweep(bad)


def test_load_sweep(tmp_path, sweep):
    p = tmp_path / "s.json"
    p.write_text(json.dumps(sweep))
    assert load_sweep(str(p)) == sweep
    p.write_text("{nope")
    with pytest.raises(SweepError):
        load_sweep(str(p))


def test_read_csv_rejects_other_header():
    with pytest.raises(SweepError):
        read_csv("a,b\n1,2\n")
