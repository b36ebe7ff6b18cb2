#!/usr/bin/env python3
"""
Verification Suites
Runs the rank, involution, bijection and Brill-Noether checks over every
lattice path of a given genus and collects the outcomes in a report.

Suites:
  prop2          rank(2 D_p) = 2 and the chip transport trace q_i = p_i - 1
  sigma          D_p ~ sigma(D_{reverse(p)}) two ways, invariance iff palindromic
  bijection      every D_p certified; distinct paths give distinct classes
  brill-noether  existence for rho >= 0, grid evidence of nonexistence for rho < 0
"""

import logging
import time
from concurrent.futures import ProcessPoolExecutor, TimeoutError as FutureTimeout
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Any, Callable, List, Optional, Sequence, Tuple

from chip_firing import Divisor, emptiness_witness, has_rank_at_least, is_equivalent, reduce, reduced_effective_divisors
from config import SUITES, PencilSettings
from errors import InvalidParameterError, PencilError
from graph_core import ChainOfLoops, Rational, build_chain_of_loops, refine, to_fraction
from lattice_paths import (
    LatticePath,
    brill_noether_number,
    catalan_count,
    enumerate_paths,
    enumerate_pencil_classes,
    path_to_divisor,
)
from symmetry import check_sigma_case

logger = logging.getLogger(__name__)


@dataclass
class CaseResult:
    case_id: str
    passed: bool
    detail: str = ""
    data: Any = None


@dataclass
class VerificationReport:
    """Outcome of one suite run. Cases keep the order in which they were scheduled."""
    suite: str
    g: int
    cases: List[CaseResult] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    aborted: bool = False

    @property
    def passed_count(self) -> int:
        return sum(1 for case in self.cases if case.passed)

    @property
    def failed_count(self) -> int:
        return len(self.cases) - self.passed_count

    @property
    def exit_code(self) -> int:
        return 0 if self.failed_count == 0 and not self.aborted else 1

    def text_lines(self) -> List[str]:
        lines = [f"{self.suite} g={self.g}: {len(self.cases)} cases, "
                 f"{self.passed_count} passed, {self.failed_count} failed"]
        for case in self.cases:
            mark = "✓" if case.passed else "✗"
            lines.append(f"{mark} {case.case_id}  {case.detail}".rstrip())
        lines.extend(self.notes)
        if self.aborted:
            lines.append("✗ aborted: time budget exhausted, report is partial")
        return lines

    def tsv_lines(self) -> List[str]:
        lines = ["suite\tg\tcase\tstatus\tdetail"]
        for case in self.cases:
            status = "pass" if case.passed else "fail"
            lines.append(f"{self.suite}\t{self.g}\t{case.case_id}\t{status}\t{case.detail}")
        if self.aborted:
            lines.append(f"{self.suite}\t{self.g}\t-\taborted\ttime budget exhausted")
        return lines


# Chip transport

def chip_transport(path: LatticePath, chain: ChainOfLoops,
                   granularity: Optional[Rational] = None) -> List[int]:
    """
    q_i = chips at v_i after moving as many chips of 2 D_p - 2 v_0 as possible
    from loops 1..i onto v_i, i.e. the v_i-reduced form on those loops.
    """
    pencil = path_to_divisor(path, chain, granularity, certify=False)
    q = pencil.granularity
    start = pencil.divisor * 2 - Divisor({chain.vertex(0): 2})
    trace = [start[chain.vertex(0)]]
    for i in range(1, chain.g + 1):
        loops = chain.loops_subgraph(1, i)
        reduced = reduce(refine(loops, q), start.restricted_to(loops), chain.vertex(i))
        trace.append(reduced[chain.vertex(i)])
    return trace


def search_rank_divisors(chain: ChainOfLoops, r: int, d: int,
                         granularity: Optional[Rational] = None,
                         limit: Optional[int] = 1) -> List[Divisor]:
    """
    v_0-reduced effective grid divisors of degree d and rank >= r.

    Every class of rank >= 0 has an effective v_0-reduced representative, so the
    search covers every class that meets the grid.
    """
    if r < 0 or d < 0:
        raise InvalidParameterError(f"need r >= 0 and d >= 0, got r={r}, d={d}")
    q = chain.natural_granularity() if granularity is None else to_fraction(granularity)
    refined = refine(chain.graph, q)
    found = []
    for divisor in reduced_effective_divisors(refined, d, chain.vertex(0)):
        if has_rank_at_least(refined, divisor, r):
            found.append(divisor)
            if limit is not None and len(found) >= limit:
                break
    return found


# Per-case checks (module level so worker processes can pickle them)

def _prop2_case(path: LatticePath, chain: ChainOfLoops, granularity: Optional[Fraction]) -> CaseResult:
    try:
        pencil = path_to_divisor(path, chain, granularity, certify=False)
        refined = refine(chain.graph, pencil.granularity)
        double = pencil.divisor * 2
        witness = Divisor({chain.vertex(0): 2, chain.vertex(chain.g): 1})
        at_least_two = has_rank_at_least(refined, double, 2)
        blocked = emptiness_witness(refined, double, witness).empty
        trace = chip_transport(path, chain, pencil.granularity)
        expected = [p - 1 for p in path.entries]
        passed = at_least_two and blocked and trace == expected
        rank_text = "2" if at_least_two and blocked else ("<2" if not at_least_two else ">2")
        detail = f"rank(2D_p)={rank_text}; trace {','.join(map(str, trace))}"
        if trace != expected:
            detail += f" (expected {','.join(map(str, expected))})"
        return CaseResult(str(path), passed, detail)
    except PencilError as exc:
        return CaseResult(str(path), False, f"error: {exc}")


def _sigma_case(path: LatticePath, chain: ChainOfLoops, granularity: Optional[Fraction]) -> CaseResult:
    try:
        case = check_sigma_case(path, chain, granularity)
    except PencilError as exc:
        return CaseResult(str(path), False, f"error: {exc}")
    detail = (f"invariant={'yes' if case.invariant else 'no'} "
              f"equivalent={case.equivalent} f-witness={case.f_witness} mirror-reduced={case.mirror_reduced}")
    return CaseResult(str(path), case.passed, detail, data=case.invariant)


def _bijection_case(path: LatticePath, chain: ChainOfLoops, granularity: Optional[Fraction]) -> CaseResult:
    try:
        pencil = path_to_divisor(path, chain, granularity, certify=True)
    except PencilError as exc:
        return CaseResult(str(path), False, f"error: {exc}")
    points = " ".join(f"w_{i}={w}" for i, w in sorted(pencil.ascent_points.items()))
    return CaseResult(str(path), True, f"v_0-reduced, rank 1; {points}".rstrip(), data=pencil)


# Suite runner

@dataclass
class _Task:
    func: Callable[..., CaseResult]
    args: Tuple


def _deadline_passed(deadline: Optional[float]) -> bool:
    return deadline is not None and time.monotonic() >= deadline


def _run_tasks(tasks: Sequence[_Task], jobs: int,
               deadline: Optional[float]) -> Tuple[List[CaseResult], bool]:
    """Results in task order; stops early once the deadline passes."""
    results: List[CaseResult] = []
    if jobs <= 1:
        for task in tasks:
            if _deadline_passed(deadline):
                return results, True
            results.append(task.func(*task.args))
            logger.debug("finished %s", results[-1].case_id)
        return results, False

    executor = ProcessPoolExecutor(max_workers=jobs)
    try:
        futures = [executor.submit(task.func, *task.args) for task in tasks]
        for future in futures:
            timeout = None if deadline is None else max(0.0, deadline - time.monotonic())
            try:
                results.append(future.result(timeout=timeout))
            except FutureTimeout:
                return results, True
            logger.debug("finished %s", results[-1].case_id)
        return results, False
    finally:
        executor.shutdown(wait=False, cancel_futures=True)


def _bounded_genus(suite: str, g: int, settings: PencilSettings) -> None:
    bound = settings.suite_max_g[suite]
    if g > bound:
        raise InvalidParameterError(
            f"{suite} at g={g} exceeds the feasibility bound g <= {bound}; "
            f"raise PENCILS_MAX_G_{suite.upper().replace('-', '_')} to try anyway")


def run_suite(suite: str, g: int, settings: Optional[PencilSettings] = None,
              ell: Optional[Rational] = None, granularity: Optional[Rational] = None,
              r: Optional[int] = None, d: Optional[int] = None) -> VerificationReport:
    """
    Run one verification suite.

    Args:
        suite: one of prop2, sigma, bijection, brill-noether
        g: genus of the uniform chain of loops
        settings: jobs, time budget and feasibility bounds
        ell: long edge length (default max(2g-2, 1))
        granularity: grid granularity (default natural)
        r, d: rank and degree for brill-noether (default r=1, d=g/2+1)

    Returns:
        VerificationReport; infeasible parameters raise InvalidParameterError
    """
    settings = settings or PencilSettings()
    if suite not in SUITES:
        raise InvalidParameterError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    _bounded_genus(suite, g, settings)
    chain = build_chain_of_loops(g, ell)
    q = None if granularity is None else to_fraction(granularity)
    deadline = None if settings.max_seconds is None else time.monotonic() + settings.max_seconds
    logger.info("running %s at g=%d with %d job(s)", suite, g, settings.jobs)

    if suite == 'brill-noether':
        return _run_brill_noether(chain, r, d, q, deadline)

    paths = enumerate_paths(g)
    case_func = {'prop2': _prop2_case, 'sigma': _sigma_case, 'bijection': _bijection_case}[suite]
    results, aborted = _run_tasks([_Task(case_func, (p, chain, q)) for p in paths],
                                  settings.jobs, deadline)
    report = VerificationReport(suite, g, results, aborted=aborted)

    if suite == 'sigma':
        invariant = sum(1 for case in results if case.data)
        report.notes.append(f"invariant pencils: {invariant}")
    elif suite == 'bijection' and not aborted:
        pencils = [case.data for case in results if case.data is not None]
        _check_injectivity(report, chain, pencils, deadline)
        if not report.aborted and g <= settings.class_count_max_g:
            _check_class_count(report, chain, pencils, deadline)
    return report


def _check_injectivity(report: VerificationReport, chain: ChainOfLoops,
                       pencils: List[Any], deadline: Optional[float]) -> None:
    clashes = []
    for a, b in combinations(pencils, 2):
        if _deadline_passed(deadline):
            report.aborted = True
            return
        refined = refine(chain.graph, min(a.granularity, b.granularity))
        if is_equivalent(refined, a.divisor, b.divisor):
            clashes.append(f"{a.path}~{b.path}")
    pairs = len(pencils) * (len(pencils) - 1) // 2
    detail = f"{pairs} pairs inequivalent" if not clashes else "equivalent: " + " ".join(clashes)
    report.cases.append(CaseResult("injectivity", not clashes, detail))


def _check_class_count(report: VerificationReport, chain: ChainOfLoops,
                       pencils: List[Any], deadline: Optional[float]) -> None:
    if _deadline_passed(deadline):
        report.aborted = True
        return
    classes = enumerate_pencil_classes(chain)
    expected = catalan_count(chain.g // 2 + 1)
    matches = set(classes) == {p.divisor for p in pencils}
    passed = len(classes) == expected and matches
    detail = f"{len(classes)} reduced rank-1 classes on the grid, lambda = {expected}"
    if not matches:
        detail += "; classes differ from the D_p"
    report.cases.append(CaseResult("class-count", passed, detail))


def _run_brill_noether(chain: ChainOfLoops, r: Optional[int], d: Optional[int],
                       granularity: Optional[Fraction], deadline: Optional[float]) -> VerificationReport:
    g = chain.g
    r = 1 if r is None else r
    d = g // 2 + 1 if d is None else d
    if r < 0 or d < 0:
        raise InvalidParameterError(f"need r >= 0 and d >= 0, got r={r}, d={d}")
    rho = brill_noether_number(g, r, d)
    q = chain.natural_granularity() if granularity is None else granularity
    report = VerificationReport('brill-noether', g)
    report.cases.append(CaseResult("rho", True, f"rho({g},{r},{d}) = {rho}"))

    if rho >= 0:
        report.cases.append(_existence_case(chain, r, d, q))
        return report

    for grid in (q, q / 2):
        if _deadline_passed(deadline):
            report.aborted = True
            break
        found = search_rank_divisors(chain, r, d, grid)
        if found:
            detail = f"rank-{r} degree-{d} divisor found at granularity {grid}: {found[0]}"
        else:
            detail = f"no counterexample at granularity {grid} (evidence, not proof)"
        report.cases.append(CaseResult(f"nonexistence@{grid}", not found, detail))
    return report


def _existence_case(chain: ChainOfLoops, r: int, d: int, q: Fraction) -> CaseResult:
    g = chain.g
    try:
        if r == 1 and g % 2 == 0 and d >= g // 2 + 1:
            path = enumerate_paths(g)[0]
            pencil = path_to_divisor(path, chain, q, certify=False)
            witness = pencil.divisor + Divisor({chain.vertex(0): d - pencil.divisor.degree})
            refined = refine(chain.graph, pencil.granularity)
            ok = has_rank_at_least(refined, witness, r)
            return CaseResult("existence", ok, f"D_p for {path} plus base chips: {witness}")
        found = search_rank_divisors(chain, r, d, q)
    except PencilError as exc:
        return CaseResult("existence", False, f"error: {exc}")
    if found:
        return CaseResult("existence", True, f"grid search found {found[0]}")
    return CaseResult("existence", False, f"no rank-{r} degree-{d} divisor on the grid of granularity {q}")
