"""
Tests for chip transport, the grid search and the verification suites.
"""

import pytest

import verification
from config import PencilSettings
from errors import InvalidParameterError
from graph_core import build_chain_of_loops
from lattice_paths import LatticePath, enumerate_paths, path_to_divisor
from verification import CaseResult, VerificationReport, chip_transport, run_suite, search_rank_divisors


def P(text: str) -> LatticePath:
    return LatticePath.parse(text)


class TestChipTransport:

    def test_small_paths(self):
        assert chip_transport(P("1,2,1"), build_chain_of_loops(2)) == [0, 1, 0]
        assert chip_transport(P("1,2,3,2,1"), build_chain_of_loops(4)) == [0, 1, 2, 1, 0]

    @pytest.mark.parametrize("p", enumerate_paths(4) + enumerate_paths(6))
    def test_trace_is_path_minus_one(self, p):
        trace = chip_transport(p, build_chain_of_loops(p.g))
        assert trace == [h - 1 for h in p.entries]
        assert trace[0] == trace[-1] == 0


class TestSearch:

    def test_unique_pencil_in_genus_two(self):
        chain = build_chain_of_loops(2)
        found = search_rank_divisors(chain, 1, 2, limit=None)
        assert found == [path_to_divisor(P("1,2,1"), chain).divisor]

    def test_no_pencil_of_degree_one(self):
        assert search_rank_divisors(build_chain_of_loops(2), 1, 1) == []

    def test_bad_parameters(self):
        with pytest.raises(InvalidParameterError):
            search_rank_divisors(build_chain_of_loops(2), -1, 2)


class TestReport:

    def test_exit_code_and_totals(self):
        report = VerificationReport("prop2", 2, [CaseResult("a", True), CaseResult("b", False, "boom")])
        assert report.passed_count == 1 and report.failed_count == 1
        assert report.exit_code == 1
        assert report.text_lines()[0] == "prop2 g=2: 2 cases, 1 passed, 1 failed"
        assert report.text_lines()[2] == "✗ b  boom"
        assert report.tsv_lines()[0] == "suite\tg\tcase\tstatus\tdetail"
        assert report.tsv_lines()[1] == "prop2\t2\ta\tpass\t"

    def test_clean_report(self):
        assert VerificationReport("sigma", 2, [CaseResult("a", True)]).exit_code == 0


class TestSuites:

    @pytest.mark.parametrize("g, cases", [(2, 1), (4, 2)])
    def test_prop2(self, g, cases):
        report = run_suite("prop2", g)
        assert len(report.cases) == cases
        assert report.exit_code == 0
        assert all("rank(2D_p)=2" in case.detail for case in report.cases)

    def test_sigma(self):
        report = run_suite("sigma", 4)
        assert report.exit_code == 0
        assert "invariant pencils: 2" in report.notes

    def test_bijection(self):
        report = run_suite("bijection", 4)
        assert [case.case_id for case in report.cases] == ["1,2,1,2,1", "1,2,3,2,1", "injectivity", "class-count"]
        assert report.exit_code == 0

    def test_class_count_respects_bound(self):
        report = run_suite("bijection", 4, PencilSettings(class_count_max_g=2))
        assert "class-count" not in [case.case_id for case in report.cases]

    @pytest.mark.parametrize("g, r, d", [(2, 1, 1), (4, 1, 2)])
    def test_brill_noether_negative(self, g, r, d):
        report = run_suite("brill-noether", g, r=r, d=d)
        assert report.cases[0].detail == f"rho({g},{r},{d}) = -2"
        assert [case.case_id for case in report.cases[1:]] == ["nonexistence@1", "nonexistence@1/2"]
        assert all("evidence, not proof" in case.detail for case in report.cases[1:])
        assert report.exit_code == 0

    def test_brill_noether_existence(self):
        report = run_suite("brill-noether", 4)
        assert report.cases[0].detail == "rho(4,1,3) = 0"
        assert report.cases[1].case_id == "existence"
        assert report.exit_code == 0

    def test_brill_noether_existence_by_search(self):
        report = run_suite("brill-noether", 2, r=2, d=4)
        assert report.cases[1].passed
        assert "grid search found" in report.cases[1].detail

    def test_refuses_infeasible_genus(self):
        with pytest.raises(InvalidParameterError, match="feasibility bound"):
            run_suite("prop2", 10)
        with pytest.raises(InvalidParameterError):
            run_suite("brill-noether", 6)

    def test_unknown_suite(self):
        with pytest.raises(InvalidParameterError):
            run_suite("riemann", 2)

    def test_time_budget_aborts(self, mocker):
        mocker.patch.object(verification, "_deadline_passed", return_value=True)
        report = run_suite("prop2", 4, PencilSettings(max_seconds=1))
        assert report.aborted
        assert report.cases == []
        assert report.exit_code == 1
        assert report.text_lines()[-1].startswith("✗ aborted")

    def test_parallel_run_keeps_order(self):
        serial = run_suite("prop2", 4, PencilSettings(jobs=1))
        parallel = run_suite("prop2", 4, PencilSettings(jobs=2))
        assert serial.text_lines() == parallel.text_lines()

    def test_failure_in_a_case_is_reported(self, mocker):
        mocker.patch.object(verification, "chip_transport", return_value=[0, 0, 0])
        report = run_suite("prop2", 2)
        assert report.exit_code == 1
        assert "expected 0,1,0" in report.cases[0].detail

    @pytest.mark.slow
    @pytest.mark.parametrize("g", [6, 8])
    def test_prop2_desk_scale(self, g):
        report = run_suite("prop2", g, PencilSettings(jobs=2))
        assert report.exit_code == 0
        assert len(report.cases) == len(enumerate_paths(g))

    @pytest.mark.slow
    def test_bijection_genus_six(self):
        assert run_suite("bijection", 6).exit_code == 0
