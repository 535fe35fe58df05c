import os
from pathlib import Path

import pytest

import blogc

MODELS = Path(os.environ.get("BLOGC_MODELS_DIR", Path(__file__).resolve().parents[2] / "models"))


def burglary_exact():
    pb, pe = 0.1, 0.2
    alarm = {(1, 1): 0.95, (1, 0): 0.94, (0, 1): 0.29, (0, 0): 0.01}
    joint = {0: 0.0, 1: 0.0}
    for b in (0, 1):
        for e in (0, 1):
            a_true = alarm[(b, e)]
            for a, pa in ((1, a_true), (0, 1 - a_true)):
                pj = 0.9 if a else 0.05
                pm = 0.7 if a else 0.01
                joint[b] += (pb if b else 1 - pb) * (pe if e else 1 - pe) * pa * pj * pm
    return joint[1] / (joint[0] + joint[1])


def test_parse_errors_raise():
    with pytest.raises(RuntimeError):
        blogc.parse("random Real x ~ ;")


def test_round_trip_and_analysis():
    m = blogc.load(MODELS / "burglary.blog")
    again = blogc.parse(m.source())
    assert again.source() == m.source()
    info = blogc.analyze(m)
    assert isinstance(info, dict) and info
    assert m.gibbs_ineligible() == ""


def test_enumeration_matches_closed_form():
    r = blogc.enumerate_exact(blogc.load(MODELS / "burglary.blog"))
    assert r["queries"][0]["histogram"]["true"] == pytest.approx(burglary_exact(), abs=1e-12)


def test_emission_is_deterministic():
    m = blogc.load(MODELS / "infgmm.blog")
    assert blogc.emit(m, algo="pmh") == blogc.emit(blogc.load(MODELS / "infgmm.blog"), algo="pmh")
    with pytest.raises(ValueError):
        blogc.emit(m, algo="hmc")


def test_interpreter_lw():
    stats = blogc.interp_lw(blogc.load(MODELS / "burglary.blog"), 20000, seed=3)
    assert stats["n_samples"] == 20000
    assert stats["query_results"][0]["histogram"]["true"] == pytest.approx(burglary_exact(), abs=0.03)


def test_compile_run_and_replay(tmp_path):
    m = blogc.load(MODELS / "burglary.blog")
    exe = blogc.compile(m, tmp_path, name="burglary", algo="pmh")
    trace = tmp_path / "trace.jsonl"
    stats = blogc.run(exe, 2000, seed=5, record_proposals=trace, record_state=True)
    assert stats["algo"] == "pmh" and stats["n_samples"] == 2000
    rep = blogc.check_replay(m, trace)
    assert rep["steps"] == 2000
    assert rep["ok"], rep.get("failure")
