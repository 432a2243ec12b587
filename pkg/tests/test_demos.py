from __future__ import annotations

import runpy
from pathlib import Path

import pytest

DEMOS = sorted((Path(__file__).resolve().parents[1] / "demos").glob("*.py"))


@pytest.mark.slow
@pytest.mark.parametrize("path", DEMOS, ids=[p.stem for p in DEMOS])
def test_demo_runs(path, capsys):
    runpy.run_path(str(path), run_name="__main__")
    assert capsys.readouterr().out.strip()


def test_demos_present():
    assert {p.stem for p in DEMOS} >= {
        "mittag_leffler", "forward_problem", "inverse_roundtrip",
        "vanishing_kernel", "kernel_bounds"}

# vim: foldmethod=marker
