"""Tests for branch tables, diagrams and run reports."""

import csv
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from matool.errors import BranchError
from matool.report import (
    BRANCH_COLUMNS,
    RunReport,
    emit_branch_csv,
    emit_branch_json,
    emit_branch_svg,
    jsonable,
)
from matool.stability import annotate_stability


class TestBranchTable:
    """Tests for emit_branch_csv and emit_branch_json."""

    def test_header_and_rows(self, tmp_path, saturating_branch):
        path = emit_branch_csv(saturating_branch, tmp_path / "branch.csv")

        with path.open() as handle:
            rows = list(csv.reader(handle))
        assert tuple(rows[0]) == BRANCH_COLUMNS
        assert len(rows) == len(saturating_branch) + 1
        first = rows[1]
        assert float(first[0]) == pytest.approx(saturating_branch.points[0].s)
        assert first[3:] == ["", "", ""]

    def test_same_branch_same_bytes(self, tmp_path, saturating_branch):
        one = emit_branch_csv(saturating_branch, tmp_path / "one.csv")
        two = emit_branch_csv(saturating_branch, tmp_path / "two.csv")

        assert one.read_bytes() == two.read_bytes()

    def test_stability_columns_filled(self, tmp_path, saturating_branch):
        annotated = annotate_stability(saturating_branch)
        path = emit_branch_csv(annotated, tmp_path / "branch.csv")

        rows = list(csv.DictReader(path.read_text().splitlines()))
        assert all(row["morse_index"] == "0" for row in rows)
        assert all(row["stable"] == "true" for row in rows)

    def test_json_records(self, tmp_path, exponential_branch):
        path = emit_branch_json(exponential_branch, tmp_path / "branch.json")

        records = json.loads(path.read_text())
        assert len(records) == len(exponential_branch)
        assert set(records[0]) == set(BRANCH_COLUMNS)

    def test_empty_branch_refused(self, tmp_path, saturating_branch):
        empty = dataclasses.replace(saturating_branch, points=())
        with pytest.raises(BranchError):
            emit_branch_csv(empty, tmp_path / "branch.csv")
        with pytest.raises(BranchError):
            emit_branch_svg(empty, tmp_path / "branch.svg")
        assert not (tmp_path / "branch.svg").exists()


class TestBranchDiagram:
    """Tests for emit_branch_svg."""

    def test_fold_is_circled(self, tmp_path, exponential_branch):
        text = emit_branch_svg(exponential_branch, tmp_path / "branch.svg").read_text()

        assert text.startswith("<svg")
        assert text.count('class="turning-point max"') == 1
        assert "<polyline" in text

    def test_bifurcation_guide(self, tmp_path, saturating_branch, lambda1_branch):
        """Only the finite load lambda_1 / f0 is drawn; finf = 0 puts the other at infinity."""
        text = emit_branch_svg(saturating_branch, tmp_path / "b.svg", lambda1_branch).read_text()

        assert text.count('class="asymptote f0"') == 1
        assert "asymptote finf" not in text
        assert "turning-point" not in text

    @pytest.mark.parametrize("s", [0.0, -1.0])
    def test_nonpositive_amplitude_refused(self, tmp_path, saturating_branch, s):
        bad = dataclasses.replace(saturating_branch.points[0], s=s)
        branch = dataclasses.replace(saturating_branch, points=(bad, *saturating_branch.points[1:]))
        with pytest.raises(BranchError, match="s <= 0"):
            emit_branch_svg(branch, tmp_path / "branch.svg")
        assert not (tmp_path / "branch.svg").exists()


class TestRunReport:
    """Tests for jsonable and RunReport."""

    def test_non_finite_floats(self):
        assert jsonable([math.inf, -math.inf, math.nan]) == ["inf", "-inf", "nan"]

    def test_numpy_and_paths(self):
        value = {"a": np.arange(3), "b": np.float64(0.5), "c": Path("x/y"), 1: (True, None)}
        assert jsonable(value) == {"a": [0, 1, 2], "b": 0.5, "c": "x/y", "1": [True, None]}

    def test_dataclass(self):
        failure = {"s": 1.0, "reason": "no bracket"}
        assert jsonable(dataclasses.make_dataclass("F", ["s", "reason"])(**failure)) == failure

    def test_write(self, tmp_path):
        report = RunReport("eigen", {"problem": {"N": 1}}, {"mu": math.inf}, passed=True)

        path = report.write(tmp_path / "runs")

        assert path == tmp_path / "runs" / "eigen.report.json"
        data = json.loads(path.read_text())
        assert data["results"] == {"mu": "inf"}
        assert data["passed"] is True
        assert data["failures"] == []
