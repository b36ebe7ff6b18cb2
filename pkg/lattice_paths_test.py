"""
Tests for lattice path enumeration, the closed-form counts and the path -> divisor map.
"""

import logging
from collections import Counter
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, strategies as st

import lattice_paths
from chip_firing import Divisor, emptiness_witness, has_rank_at_least, is_equivalent, rank
from errors import CertificationError, InvalidParameterError, ParseError, PrecisionError
from graph_core import build_chain_of_loops, build_generic_chain, refine
from lattice_paths import (
    LatticePath,
    brill_noether_count,
    brill_noether_number,
    catalan_count,
    enumerate_paths,
    enumerate_pencil_classes,
    enumerate_symmetric_paths,
    midheights,
    path_to_divisor,
    reverse_path,
    symmetric_count_by_midheight,
    symmetric_count_closed_form,
)

LAMBDA = [1, 2, 5, 14, 42, 132, 429, 1430, 4862]
LAMBDA_SYMMETRIC = [1, 2, 3, 6, 10, 20, 35, 70, 126]


def P(text: str) -> LatticePath:
    return LatticePath.parse(text)


class TestLatticePath:

    @pytest.mark.parametrize("entries", [
        (1, 2, 1, 2),
        (1, 0, 1),
        (2, 3, 2),
        (1, 2, 2, 2, 1),
        (1,),
        (1, 2, 3, 4, 3),
    ])
    def test_invalid_paths(self, entries):
        with pytest.raises(InvalidParameterError):
            LatticePath(entries)

    def test_basic_properties(self):
        p = P("1,2,3,2,1,2,1")
        assert p.g == 6 and p.degree == 4
        assert p.ascents() == [1, 2, 5]
        assert not p.is_symmetric()
        assert str(p) == "1,2,3,2,1,2,1"

    def test_parse_errors(self):
        with pytest.raises(ParseError):
            P("1,2,x")
        with pytest.raises(ParseError):
            P("1,2,2")

    def test_reverse(self):
        assert reverse_path(P("1,2,1")) == P("1,2,1")
        assert reverse_path(P("1,2,1,2,3,2,1")) == P("1,2,3,2,1,2,1")

    @given(st.sampled_from(enumerate_paths(10)))
    def test_reverse_is_an_involution(self, p):
        assert reverse_path(reverse_path(p)) == p
        assert reverse_path(p).is_symmetric() == p.is_symmetric()


class TestEnumeration:

    def test_small_genera(self):
        assert enumerate_paths(2) == [P("1,2,1")]
        assert enumerate_paths(4) == [P("1,2,1,2,1"), P("1,2,3,2,1")]
        assert len(enumerate_paths(6)) == 5

    @pytest.mark.parametrize("g", [0, 3, -2, True])
    def test_bad_genus(self, g):
        with pytest.raises(InvalidParameterError):
            enumerate_paths(g)
        with pytest.raises(InvalidParameterError):
            enumerate_symmetric_paths(g)

    def test_counts_match_closed_forms(self):
        for g in range(2, 21, 2):
            d = g // 2 + 1
            paths = enumerate_paths(g)
            assert len(paths) == catalan_count(d)
            assert paths == sorted(set(paths))
            assert len(enumerate_symmetric_paths(g)) == symmetric_count_closed_form(d)

    @pytest.mark.parametrize("g", [2, 4, 6, 8, 10])
    def test_symmetric_paths_are_the_palindromes(self, g):
        palindromes = [p for p in enumerate_paths(g) if p.is_symmetric()]
        assert enumerate_symmetric_paths(g) == palindromes

    def test_symmetric_small_genera(self):
        assert enumerate_symmetric_paths(2) == [P("1,2,1")]
        assert enumerate_symmetric_paths(4) == enumerate_paths(4)
        assert len(enumerate_symmetric_paths(6)) == 3


class TestCounts:

    def test_table_values(self):
        assert [catalan_count(d) for d in range(2, 11)] == LAMBDA
        assert [symmetric_count_closed_form(d) for d in range(2, 11)] == LAMBDA_SYMMETRIC

    def test_ratio_decreases(self):
        ratios = [Fraction(symmetric_count_closed_form(d), catalan_count(d)) for d in range(2, 11)]
        assert ratios[0] == ratios[1] == 1
        assert all(a > b for a, b in zip(ratios[1:], ratios[2:]))

    def test_midheight_small_degrees(self):
        assert midheights(3) == [1, 3]
        assert midheights(4) == [2, 4]
        assert symmetric_count_by_midheight(3, 1) == 1
        assert symmetric_count_by_midheight(3, 3) == 1
        assert [symmetric_count_by_midheight(5, m) for m in (1, 3, 5)] == [2, 3, 1]

    @pytest.mark.parametrize("d, m", [(4, 1), (5, 2), (3, 5), (3, 0), (1, 1)])
    def test_midheight_rejects_bad_parameters(self, d, m):
        with pytest.raises(InvalidParameterError):
            symmetric_count_by_midheight(d, m)

    def test_midheights_sum_to_symmetric_count(self):
        for d in range(2, 13):
            assert sum(symmetric_count_by_midheight(d, m) for m in midheights(d)) \
                == symmetric_count_closed_form(d)

    @pytest.mark.parametrize("g", [2, 4, 6, 8, 10, 12])
    def test_midheight_counts_match_enumeration(self, g):
        d = g // 2 + 1
        by_middle = Counter(p[g // 2] for p in enumerate_symmetric_paths(g))
        assert by_middle == {m: symmetric_count_by_midheight(d, m) for m in midheights(d)}

    def test_brill_noether_number(self):
        assert brill_noether_number(2, 1, 1) == -2
        assert brill_noether_number(4, 1, 2) == -2
        assert brill_noether_number(4, 1, 3) == 0

    def test_general_count_matches_catalan(self):
        for d in range(2, 11):
            assert brill_noether_count(2 * d - 2, 1, d) == catalan_count(d)
        assert brill_noether_count(6, 2, 6) == 5
        with pytest.raises(InvalidParameterError):
            brill_noether_count(4, 1, 4)


class TestPathToDivisor:

    def test_genus_two(self):
        chain = build_chain_of_loops(2)
        pencil = path_to_divisor(P("1,2,1"), chain)
        w = chain.graph.point("J_1", 1)
        assert pencil.ascent_points == {1: w}
        assert pencil.divisor == Divisor({chain.vertex(0): 1, w: 1})
        assert pencil.granularity == 1

    def test_genus_four_staircase(self):
        chain = build_chain_of_loops(4, ell=6)
        pencil = path_to_divisor(P("1,2,3,2,1"), chain)
        assert pencil.divisor.degree == 3
        assert pencil.ascent_points == {1: chain.graph.point("J_1", 5), 2: chain.graph.point("J_2", 4)}
        assert pencil.divisor[chain.vertex(0)] == 1

    @pytest.mark.parametrize("p", enumerate_paths(4))
    def test_no_chips_on_descent_loops(self, p):
        chain = build_chain_of_loops(4)
        pencil = path_to_divisor(p, chain)
        loops_with_chips = {int(point.edge.split("_")[1]) for point in pencil.divisor.support()
                            if not point.is_vertex}
        assert loops_with_chips == set(p.ascents())

    def test_circle_position_oracle(self):
        chain = build_chain_of_loops(4, ell=6)
        graph = chain.graph
        assert lattice_paths._circle_class_matches(chain, 2, 2, 3, graph.point("J_2", 4))
        assert not lattice_paths._circle_class_matches(chain, 2, 2, 3, graph.point("J_2", 3))
        assert not lattice_paths._circle_class_matches(chain, 2, 1, 2, graph.point("J_2", 4))
        assert lattice_paths._circle_class_matches(chain, 2, 0, 1, chain.vertex(2))
        with pytest.raises(InvalidParameterError):
            lattice_paths._circle_class_matches(chain, 2, 1, 2, graph.point("J_3", 1))

    def test_generic_chain(self):
        chain = build_generic_chain([4, 5], [1, 1])
        pencil = path_to_divisor(P("1,2,1"), chain)
        assert pencil.ascent_points == {1: chain.graph.point("J_1", 3)}

    def test_genus_mismatch(self):
        with pytest.raises(InvalidParameterError):
            path_to_divisor(P("1,2,1"), build_chain_of_loops(4))

    def test_off_grid_point_triggers_refinement(self, mocker, caplog):
        real = lattice_paths._certified_ascent_point

        def coarse_grid_misses(chain, i, before, after, granularity):
            return None if granularity == 1 else real(chain, i, before, after, granularity)

        mocker.patch.object(lattice_paths, "_certified_ascent_point", side_effect=coarse_grid_misses)
        chain = build_chain_of_loops(2)
        with caplog.at_level(logging.WARNING, logger="lattice_paths"):
            pencil = path_to_divisor(P("1,2,1"), chain)
        assert pencil.granularity == Fraction(1, 2)
        assert pencil.ascent_points == {1: chain.graph.point("J_1", 1)}
        assert "retrying" in caplog.text

    def test_precision_error_after_last_refinement(self, mocker):
        mocker.patch.object(lattice_paths, "is_equivalent", return_value=False)
        mocker.patch.object(lattice_paths, "_circle_class_matches", return_value=False)
        with pytest.raises(PrecisionError):
            path_to_divisor(P("1,2,1"), build_chain_of_loops(2), max_refinements=1)

    def test_oracle_disagreement_is_fatal(self, mocker):
        mocker.patch.object(lattice_paths, "_circle_class_matches", return_value=False)
        with pytest.raises(CertificationError):
            path_to_divisor(P("1,2,1"), build_chain_of_loops(2))

    @pytest.mark.parametrize("g", [2, 4])
    def test_distinct_paths_give_distinct_classes(self, g):
        chain = build_chain_of_loops(g)
        refined = refine(chain.graph, Fraction(1))
        pencils = [path_to_divisor(p, chain) for p in enumerate_paths(g)]
        for a, b in combinations(pencils, 2):
            assert not is_equivalent(refined, a.divisor, b.divisor)

    @pytest.mark.parametrize("g", [2, 4])
    def test_grid_enumeration_finds_exactly_the_pencils(self, g):
        chain = build_chain_of_loops(g)
        classes = enumerate_pencil_classes(chain)
        assert len(classes) == catalan_count(g // 2 + 1)
        assert set(classes) == {path_to_divisor(p, chain, certify=False).divisor for p in enumerate_paths(g)}

    @pytest.mark.parametrize("g", [2, 4])
    def test_ranks_agree_on_finer_grid(self, g):
        chain = build_chain_of_loops(g)
        fine = refine(chain.graph, Fraction(1, 2))
        for p in enumerate_paths(g):
            coarse = path_to_divisor(p, chain)
            halved = path_to_divisor(p, chain, Fraction(1, 2))
            assert halved.divisor == coarse.divisor
            double = halved.divisor * 2
            assert has_rank_at_least(fine, double, 2)
            blocker = Divisor({chain.vertex(0): 2, chain.vertex(g): 1})
            assert emptiness_witness(fine, double, blocker).empty

    @pytest.mark.slow
    def test_ranks_agree_on_finer_grid_genus_six(self):
        chain = build_chain_of_loops(6)
        fine = refine(chain.graph, Fraction(1, 2))
        blocker = Divisor({chain.vertex(0): 2, chain.vertex(6): 1})
        for p in enumerate_paths(6):
            halved = path_to_divisor(p, chain, Fraction(1, 2), certify=False)
            assert halved.divisor == path_to_divisor(p, chain, certify=False).divisor
            assert rank(fine, halved.divisor).rank == 1
            double = halved.divisor * 2
            assert has_rank_at_least(fine, double, 2)
            assert emptiness_witness(fine, double, blocker).empty

    @pytest.mark.slow
    @pytest.mark.parametrize("g", [6, 8])
    def test_desk_scale_bijection(self, g):
        chain = build_chain_of_loops(g)
        refined = refine(chain.graph, Fraction(1))
        pencils = [path_to_divisor(p, chain) for p in enumerate_paths(g)]
        assert len(pencils) == catalan_count(g // 2 + 1)
        if g == 6:
            for a, b in combinations(pencils, 2):
                assert not is_equivalent(refined, a.divisor, b.divisor)
        else:
            assert len({pencil.divisor for pencil in pencils}) == len(pencils)
