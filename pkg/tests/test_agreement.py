import pytest

from dlmparse.agreement import agree, filter_agreement
from dlmparse.conll import AlignmentError, Treebank
from dlmparse.synth import corrupt_heads, generate_corpus

from helpers import make_sentence, random_sentence


def test_identical_trees_agree():
    s = make_sentence([2, 0], deprels=["det", "root"])
    assert agree(s, s)


def test_label_difference():
    a = make_sentence([2, 0], deprels=["det", "root"])
    b = make_sentence([2, 0], deprels=["amod", "root"])
    assert not agree(a, b, labeled=True)
    assert agree(a, b, labeled=False)


def test_head_difference_fails_both_modes():
    a = make_sentence([2, 0])
    b = make_sentence([0, 1])
    assert not agree(a, b, labeled=True)
    assert not agree(a, b, labeled=False)


def test_length_mismatch_is_alignment_error():
    a = make_sentence([0])
    b = make_sentence([2, 0])
    with pytest.raises(AlignmentError):
        agree(a, b)


def test_form_mismatch_is_alignment_error():
    a = make_sentence([0], forms=["x"])
    b = make_sentence([0], forms=["y"])
    with pytest.raises(AlignmentError):
        agree(a, b)


def test_agree_symmetric(rng):
    for _ in range(100):
        n = rng.randint(1, 8)
        a = random_sentence(rng, n)
        b = a.with_arcs(random_sentence(rng, n).heads, a.deprels)
        for labeled in (True, False):
            assert agree(a, b, labeled) == agree(b, a, labeled)


def test_labeled_agreement_implies_unlabeled(rng):
    for _ in range(200):
        n = rng.randint(1, 8)
        a = random_sentence(rng, n)
        b = a.with_arcs(random_sentence(rng, n).heads, random_sentence(rng, n).deprels)
        if agree(a, b, labeled=True):
            assert agree(a, b, labeled=False)


def test_filter_identical_corpora():
    tb = generate_corpus(10, seed=3)
    kept, report = filter_agreement(tb, tb)
    assert kept.sentences == tb.sentences
    assert report.agreement_rate == 1.0
    assert report.agreed == report.total == 10


def test_filter_disjoint_parses():
    tb = Treebank(sentences=[make_sentence([2, 0]), make_sentence([0, 1])])
    other = Treebank(sentences=[make_sentence([0, 1]), make_sentence([2, 0])])
    kept, report = filter_agreement(tb, other)
    assert len(kept) == 0
    assert report.agreement_rate == 0.0
    assert report.mean_length_agreed == 0.0


def test_filter_mixed_statistics():
    # ten sentences, exactly four agreements; check means by hand
    agree_sents = [make_sentence([0] * n) for n in (2, 3, 4, 5)]
    disagree_a = [make_sentence([2, 0]) for _ in range(6)]
    disagree_b = [make_sentence([0, 1]) for _ in range(6)]
    a = Treebank(sentences=agree_sents + disagree_a)
    b = Treebank(sentences=agree_sents + disagree_b)
    kept, report = filter_agreement(a, b)
    assert report.total == 10
    assert report.agreed == 4
    assert len(kept) == report.agreed
    assert report.agreement_rate == pytest.approx(0.4)
    assert report.mean_length_agreed == pytest.approx((2 + 3 + 4 + 5) / 4)
    assert report.mean_length_all == pytest.approx((2 + 3 + 4 + 5 + 12) / 10)
    assert kept.sentences == agree_sents  # from corpus A, input order


def test_filter_output_subset_order_preserving(rng):
    tb = generate_corpus(40, seed=17)
    noisy = corrupt_heads(tb, rate=0.3, seed=5)
    kept, report = filter_agreement(tb, noisy)
    assert report.agreed == len(kept)
    it = iter(tb.sentences)
    for s in kept:  # subsequence check
        while next(it) is not s:
            pass


def test_filter_sentence_count_mismatch():
    a = generate_corpus(3, seed=1)
    b = Treebank(sentences=list(generate_corpus(3, seed=1).sentences[:2]))
    with pytest.raises(AlignmentError):
        filter_agreement(a, b)


def test_report_record_line():
    tb = generate_corpus(5, seed=2)
    _, report = filter_agreement(tb, tb)
    line = report.record()
    assert "\n" not in line
    fields = dict(kv.split("=") for kv in line.split())
    assert fields["total"] == "5" and fields["agreed"] == "5"
