import pytest

from reassign.model import MalformedProblem
from reassign.repro import (
    REPRO_IDS,
    all_repro_reports,
    repro_bttc_ri,
    repro_intro_example,
    repro_n3_incompatibility,
    repro_n4_tables,
    repro_npb,
    run_repro,
)


def failing_labels(report):
    return {line.label for line in report.lines if not line.ok}


def test_walkthrough_report_documents_known_deviation():
    report = repro_intro_example()
    assert not report.ok
    assert failing_labels(report) == {"intro/tsd-assignment", "intro/tsd-equals-csd"}
    for line in report.lines:
        if not line.ok:
            assert "documented deviation" in line.note


def test_four_division_tables_all_pass():
    report = repro_n4_tables()
    assert report.ok
    # ten preference tables, eight improvement items, three deviation items
    assert len([l for l in report.lines if l.label.startswith("tables/E")]) == 10
    assert len([l for l in report.lines if "/ri-" in l.label]) == 8
    assert len([l for l in report.lines if "/sp-" in l.label]) == 3


def test_backward_trading_report_all_pass():
    report = repro_bttc_ri()
    assert report.ok and len(report.lines) == 7


@pytest.mark.parametrize("n", [3, 4, 5, 6, 12])
def test_draft_report_all_pass(n):
    report = repro_npb(n)
    assert report.ok, failing_labels(report)
    if n >= 4:
        assert any("sp-" in l.label for l in report.lines)


def test_three_division_impossibility_all_pass():
    report = repro_n3_incompatibility()
    assert report.ok
    by_label = {l.label: l for l in report.lines}
    assert by_label["n3/scan-profiles"].computed == "8"
    assert by_label["n3/scan-rules"].computed == "64"


def test_run_repro_dispatch():
    assert set(REPRO_IDS) == {"intro", "tables", "bttc", "npb", "n3"}
    assert run_repro("tables").ok
    assert run_repro("npb", n=5).ok
    with pytest.raises(MalformedProblem):
        run_repro("nope")


def test_reports_are_deterministic():
    once = [r.to_dict() for r in all_repro_reports(npb_sizes=(3, 4))]
    twice = [r.to_dict() for r in all_repro_reports(npb_sizes=(3, 4))]
    assert once == twice
    ids = [r["repro"] for r in once]
    assert ids == ["intro", "tables", "bttc", "npb(n=3)", "npb(n=4)", "n3"]


def test_render_marks_lines():
    report = repro_intro_example()
    text = report.render()
    assert "PASS intro/csd-assignment" in text
    assert "FAIL intro/tsd-assignment" in text
