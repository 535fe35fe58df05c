"""Python interface to the blogc compiler.

Models are parsed and checked once; every other call takes the Model. Results
that the C++ side renders as JSON come back as dicts.
"""

import json
import os
import subprocess
import tempfile

from . import _blogc
from ._blogc import Model, emit

__all__ = ["Model", "load", "parse", "emit", "analyze", "compile", "run", "interp_lw", "interp_pmh",
           "enumerate_exact", "check_replay"]


def load(path):
    return Model.from_file(os.fspath(path))


def parse(source):
    return Model.from_source(source)


def analyze(model):
    return json.loads(model.analysis_json())


def compile(model, out_dir, name="model", algo="pmh", db=True, rc=True, acu=True):
    """Emit and build a program; returns the executable path."""
    source = emit(model, algo=algo, db=db, rc=rc, acu=acu, name=name)
    return _blogc.build(source, os.fspath(out_dir), f"{name}_{algo}")


def run(exe, n, seed=1, record_proposals=None, record_state=False, debug_oracle=False, timeout=None):
    """Run a compiled program and return its stats."""
    with tempfile.TemporaryDirectory() as tmp:
        stats = os.path.join(tmp, "stats.json")
        cmd = [os.fspath(exe), "-n", str(n), "--seed", str(seed), "--quiet", "--stats", stats]
        if record_proposals is not None:
            cmd += ["--record-proposals", os.fspath(record_proposals)]
        if record_state:
            cmd.append("--record-state")
        if debug_oracle:
            cmd.append("--debug-oracle")
        proc = subprocess.run(cmd, capture_output=True, text=True, timeout=timeout)
        if proc.returncode != 0:
            raise RuntimeError(f"{exe} exited with {proc.returncode}: {proc.stderr.strip()}")
        with open(stats) as f:
            return json.load(f)


def interp_lw(model, n, seed=1, eager=False):
    return json.loads(_blogc.interp_lw(model, n, seed, eager))


def interp_pmh(model, n, seed=1):
    return json.loads(_blogc.interp_pmh(model, n, seed))


def enumerate_exact(model, max_worlds=50_000_000):
    return _blogc.enumerate_exact(model, max_worlds)


def check_replay(model, trace, max_steps=0):
    return json.loads(_blogc.check_replay(model, os.fspath(trace), max_steps))
