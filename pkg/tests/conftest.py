import os

import pytest

from essence_refine.ast import NameSupply
from essence_refine.checker import load
from essence_refine.engine import RuleContext
from essence_refine.oracle import constant_env
from essence_refine.representation import enumerate_representations, taken_names

CORPUS = os.path.join(os.path.dirname(__file__), "corpus")


def corpus_names():
    return sorted(f[:-len(".essence")] for f in os.listdir(CORPUS) if f.endswith(".essence"))


def corpus_text(name):
    with open(os.path.join(CORPUS, name + ".essence")) as fh:
        source = fh.read()
    p = os.path.join(CORPUS, name + ".param")
    params = open(p).read() if os.path.exists(p) else None
    return source, params


def represented(source, reps=None, mode="single", params=None):
    """The first representation choice whose summary matches ``reps`` (any when None)."""
    spec, _ = load(source, params)
    for rs in enumerate_representations(spec, mode):
        if reps is None or rs.assignment.summary() == reps:
            return rs
    raise AssertionError(f"no representation choice {reps!r}")


def context(spec):
    return RuleContext({d.name: d for d in spec.decls}, NameSupply(taken_names(spec)),
                       options={"consts": constant_env(spec), "close_bubbles": True})


@pytest.fixture
def corpus():
    return corpus_text


def plain(e):
    """``e`` without representation tags on references (for comparing with parsed text)."""
    from dataclasses import replace

    from essence_refine.ast import Ref, map_bottom_up
    return map_bottom_up(e, lambda n: replace(n, rep=None) if isinstance(n, Ref) else n)


# acceptance results, filled by tests/test_acceptance.py and printed at the end of the run
ACCEPTANCE: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE):
        terminalreporter.write_line(line[1])
