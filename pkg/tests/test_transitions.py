import random

import pytest

from dlmparse.conll import validate_sentence
from dlmparse.transitions import (
    LEFT_ARC,
    RIGHT_ARC,
    SHIFT,
    OracleError,
    Transition,
    apply,
    arcs_to_sentence,
    initial,
    is_terminal,
    legal,
    oracle,
    replay,
)

from helpers import enumerate_projective_heads, make_sentence


def test_transition_constructor_contracts():
    with pytest.raises(ValueError):
        Transition("NOPE")
    with pytest.raises(ValueError):
        Transition(SHIFT, "det")
    with pytest.raises(ValueError):
        Transition(LEFT_ARC)


def test_initial_configurations():
    c1 = initial(make_sentence([0]))
    assert c1.stack == (0,) and c1.buffer == (1,) and c1.arcs == ()
    c0 = initial(make_sentence([]))
    assert is_terminal(c0)
    c3 = initial(make_sentence([2, 0, 2]))
    assert c3.buffer == (1, 2, 3)


def test_legal_moves():
    s = make_sentence([0])
    c = initial(s)
    assert legal(c) == {SHIFT}
    c = apply(c, Transition(SHIFT))
    # stack [0, 1], empty buffer: only the final RIGHT_ARC remains
    assert legal(c) == {RIGHT_ARC}
    s = make_sentence([2, 0])
    c = replay(s, [Transition(SHIFT), Transition(SHIFT)])
    assert legal(c) == {LEFT_ARC, RIGHT_ARC}


def test_apply_steps():
    s = make_sentence([0], deprels=["root"])
    c = apply(initial(s), Transition(SHIFT))
    assert c.stack == (0, 1) and c.buffer == ()
    c = apply(c, Transition(RIGHT_ARC, "root"))
    assert c.arcs == ((0, 1, "root"),)
    assert is_terminal(c)


def test_left_arc_by_hand():
    s = make_sentence([2, 0])
    c = replay(s, [Transition(SHIFT), Transition(SHIFT)])
    c = apply(c, Transition(LEFT_ARC, "det"))
    assert c.arcs == ((2, 1, "det"),)
    assert c.stack == (0, 2)


def test_apply_rejects_illegal():
    c = initial(make_sentence([0]))
    with pytest.raises(ValueError):
        apply(c, Transition(LEFT_ARC, "x"))


def test_apply_does_not_mutate():
    s = make_sentence([2, 0])
    c = initial(s)
    snapshot = (c.stack, c.buffer, c.arcs)
    apply(c, Transition(SHIFT))
    assert (c.stack, c.buffer, c.arcs) == snapshot


def test_oracle_single_token():
    s = make_sentence([0], deprels=["root"])
    assert oracle(s) == [Transition(SHIFT), Transition(RIGHT_ARC, "root")]


def test_oracle_two_tokens():
    s = make_sentence([2, 0], deprels=["det", "root"])
    assert oracle(s) == [
        Transition(SHIFT),
        Transition(SHIFT),
        Transition(LEFT_ARC, "det"),
        Transition(RIGHT_ARC, "root"),
    ]


def test_oracle_rejects_nonprojective():
    s = make_sentence([3, 0, 2])
    with pytest.raises(OracleError):
        oracle(s)


def test_oracle_roundtrip_exhaustive_small():
    for n in range(1, 6):
        for heads in enumerate_projective_heads(n):
            deprels = [f"l{(i + heads[i]) % 3}" for i in range(n)]
            s = make_sentence(list(heads), deprels=deprels)
            seq = oracle(s)
            assert len(seq) == 2 * n
            final = replay(s, seq)
            assert is_terminal(final)
            assert arcs_to_sentence(s, final.arcs) == s


def test_random_legal_walks_produce_valid_trees(rng):
    for _ in range(200):
        n = rng.randint(0, 9)
        s = make_sentence([0] * n)  # heads irrelevant: we walk randomly
        c = initial(s)
        steps = 0
        while not is_terminal(c):
            kinds = sorted(legal(c))
            kind = rng.choice(kinds)
            t = Transition(kind) if kind == SHIFT else Transition(kind, "dep")
            c = apply(c, t)
            steps += 1
        assert steps == 2 * n
        tree = arcs_to_sentence(s, c.arcs)
        validate_sentence(tree)  # single head per token, rooted, acyclic
