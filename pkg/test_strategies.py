"""
Tests for five-locus strategies and exact iterated play.

This script tests:
1. Genome text form, allele names and the named strategies
2. The next-action rule
3. Match playout, cycle detection and long-run means
4. Exhaustive cycle bound and payoff symmetry over all 32 x 32 pairings
5. The round-robin table
"""
import itertools
import sys

import pytest

from core.errors import InvalidInputError
from games.game_core import C, D, PayoffMatrix
from games.strategies import Genome, named_strategy, next_action, play_match, resolve_genome, round_robin

CANONICAL = PayoffMatrix.of(5, 3, 1, 0)
ALL_GENOMES = [Genome.parse("".join(code)) for code in itertools.product("CD", repeat=5)]


def test_genome_text_form():
    tft = Genome.parse("ccdcd")
    assert str(tft) == "CCDCD"
    assert tft.alleles() == ["friendly", "constructive", "vengeful", "merciful", "hawkish"]
    assert named_strategy("Pavlov").alleles() == ["friendly", "constructive", "vengeful", "exploitative", "dovish"]
    for bad in ("CCDC", "CCDCX", "CCDCDD"):
        with pytest.raises(InvalidInputError):
            Genome.parse(bad)


def test_named_strategies():
    tft = named_strategy("TFT")
    assert tft.initial is C and tft.on_cd is D
    assert named_strategy("pavlov").on_dd is C
    alld = named_strategy("AllD")
    assert all(action is D for action in (alld.initial, alld.on_cc, alld.on_cd, alld.on_dc, alld.on_dd))
    assert str(named_strategy("AllC")) == "CCCCC"
    assert resolve_genome("DCDCD") == Genome.parse("DCDCD")
    with pytest.raises(InvalidInputError):
        named_strategy("GrimTrigger")


def test_next_action():
    assert next_action(named_strategy("TFT"), C, D) is D
    assert next_action(named_strategy("Pavlov"), D, D) is C
    alld = named_strategy("AllD")
    for own, opp in itertools.product((C, D), repeat=2):
        assert next_action(alld, own, opp) is D


def test_match_examples():
    tft = named_strategy("TFT")
    both = play_match(tft, tft, CANONICAL)
    assert both.cycle() == [(C, C)]
    assert both.mean_payoffs == (3.0, 3.0)

    exploit = play_match(named_strategy("AllD"), tft, CANONICAL)
    assert exploit.transcript == [(D, C), (D, D)]
    assert exploit.cycle_start == 1
    assert exploit.opening_payoffs == [(5.0, 0.0)]
    assert exploit.mean_payoffs == (1.0, 1.0)

    shifting = play_match(named_strategy("Pavlov"), named_strategy("AllD"), CANONICAL)
    assert shifting.cycle() == [(C, D), (D, D)]
    assert shifting.cycle_length == 2
    assert shifting.mean_payoffs == (0.5, 3.0)


def test_match_is_deterministic():
    g1, g2 = Genome.parse("CDDCC"), Genome.parse("DCCDD")
    assert play_match(g1, g2, CANONICAL) == play_match(g1, g2, CANONICAL)


def test_cycle_bound_and_symmetry():
    """Four joint states: every pairing cycles within five rounds, and swapping players swaps the means."""
    print("=== Playing all 1024 ordered pairings ===")
    for g1, g2 in itertools.product(ALL_GENOMES, repeat=2):
        outcome = play_match(g1, g2, CANONICAL)
        assert outcome.cycle_start + outcome.cycle_length <= 5
        assert len(outcome.transcript) <= 4
        mirrored = play_match(g2, g1, CANONICAL)
        assert mirrored.mean_payoffs == outcome.mean_payoffs[::-1]
        cycle = outcome.cycle()
        # the state after the last one in the cycle is the first one again
        a1, a2 = cycle[-1]
        assert (next_action(g1, a1, a2), next_action(g2, a2, a1)) == cycle[0]


def test_round_robin():
    table = round_robin(["AllC", "AllD", "TFT", "Pavlov"], CANONICAL)
    assert table["AllD"]["AllC"] == 5.0
    assert table["AllC"]["AllD"] == 0.0
    assert table["TFT"]["AllD"] == 1.0
    assert table["Pavlov"]["AllD"] == 0.5
    assert table["TFT"]["Pavlov"] == table["Pavlov"]["TFT"] == 3.0


if __name__ == "__main__":
    print("Running strategy tests...")
    test_genome_text_form()
    test_named_strategies()
    test_next_action()
    test_match_examples()
    test_match_is_deterministic()
    test_cycle_bound_and_symmetry()
    test_round_robin()
    print("All tests completed successfully!")
