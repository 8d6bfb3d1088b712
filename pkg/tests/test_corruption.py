import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from corpusforge.corruption import (
    CorruptionParams,
    build_example,
    corrupt_stream,
    plan_spans,
    reconstruct,
)


def rng_for(i=0):
    return np.random.default_rng(np.random.SeedSequence([99, i]))


def test_params_validation():
    CorruptionParams().validate()
    with pytest.raises(ValueError):
        CorruptionParams(mask_rate=0.0).validate()
    with pytest.raises(ValueError):
        CorruptionParams(mask_rate=1.0).validate()
    with pytest.raises(ValueError):
        CorruptionParams(mean_span_len=0.5).validate()
    with pytest.raises(ValueError):
        CorruptionParams(seq_len=1).validate()


def test_plan_small_sequence_single_span():
    # n=20 at rate 0.15 masks 3 tokens in one span of length 3
    params = CorruptionParams()
    for i in range(25):
        spans = plan_spans(20, params, rng_for(i))
        assert len(spans) == 1
        (start, length) = spans[0]
        assert length == 3
        assert 1 <= start <= 17


def test_plan_full_sequence_counts():
    # n=1024: 154 noise tokens in 51 spans
    params = CorruptionParams()
    for i in range(10):
        spans = plan_spans(1024, params, rng_for(i))
        assert sum(length for _, length in spans) == 154
        assert len(spans) == 51


def test_plan_position_zero_never_noise():
    params = CorruptionParams(mask_rate=0.45, mean_span_len=1.0)
    for i in range(200):
        spans = plan_spans(8, params, rng_for(i))
        assert spans[0][0] >= 1


def test_plan_spans_disjoint_nonadjacent():
    params = CorruptionParams(mask_rate=0.3, mean_span_len=2.0)
    for i in range(100):
        spans = plan_spans(64, params, rng_for(i))
        for (s1, l1), (s2, _) in zip(spans, spans[1:]):
            assert s1 + l1 < s2  # at least one kept token between spans


def test_plan_minimum_sequence():
    spans = plan_spans(2, CorruptionParams(), rng_for())
    assert spans == [(1, 1)]


def test_plan_too_short_rejected():
    with pytest.raises(ValueError, match="too short"):
        plan_spans(1, CorruptionParams(), rng_for())


def test_plan_never_masks_everything():
    params = CorruptionParams(mask_rate=0.99, mean_span_len=1.0)
    for n in (2, 3, 5, 8):
        spans = plan_spans(n, params, rng_for(n))
        assert sum(length for _, length in spans) <= n - 1


def test_build_example_hand_case(vocab):
    ids = [10, 11, 12, 13, 14]
    example = build_example(ids, [(1, 2)], vocab)
    s0 = vocab.sentinel_id(0)
    assert example.input_ids == [10, s0, 13, 14]
    assert example.target_ids == [s0, 11, 12, vocab.eos_id]
    assert example.num_spans == 1


def test_build_example_two_spans(vocab):
    ids = list(range(100, 110))
    example = build_example(ids, [(1, 2), (5, 3)], vocab)
    s0, s1 = vocab.sentinel_id(0), vocab.sentinel_id(1)
    assert example.input_ids == [100, s0, 103, 104, s1, 108, 109]
    assert example.target_ids == [s0, 101, 102, s1, 105, 106, 107, vocab.eos_id]


def test_build_example_errors(vocab):
    ids = list(range(10, 20))
    with pytest.raises(ValueError, match="zero-length"):
        build_example(ids, [(1, 0)], vocab)
    with pytest.raises(ValueError, match="overlaps or touches"):
        build_example(ids, [(1, 2), (3, 1)], vocab)
    with pytest.raises(ValueError):
        build_example(ids, [(8, 5)], vocab)  # runs past the end
    too_many = [(i * 2 + 1, 1) for i in range(vocab.sentinel_count + 1)]
    with pytest.raises(ValueError, match="sentinel budget"):
        build_example(list(range(10, 510)), too_many, vocab)
    with pytest.raises(ValueError, match="reserved id"):
        build_example([10, vocab.eos_id, 12], [(1, 1)], vocab)
    with pytest.raises(ValueError, match="reserved id"):
        build_example([10, vocab.sentinel_id(5), 12], [(1, 1)], vocab)


def test_reconstruct_inverts_hand_case(vocab):
    ids = [10, 11, 12, 13, 14]
    example = build_example(ids, [(1, 2)], vocab)
    assert reconstruct(example, vocab) == ids


def test_reconstruct_rejects_malformed(vocab):
    from corpusforge.corruption import CorruptionExample
    bad = CorruptionExample(input_ids=[10], target_ids=[11, vocab.eos_id], num_spans=0)
    with pytest.raises(ValueError, match="before first sentinel"):
        reconstruct(bad, vocab)


def test_corrupt_stream_deterministic(vocab):
    texts = ["the old library near the market square holds many printed books"] * 5
    params = CorruptionParams(seq_len=32, seed=123)
    run1 = [(e.input_ids, e.target_ids) for e in corrupt_stream(texts, vocab, params)]
    run2 = [(e.input_ids, e.target_ids) for e in corrupt_stream(texts, vocab, params)]
    assert run1 == run2
    # stream position seeds each example: identical texts corrupt differently
    assert len({tuple(inp) for inp, _ in run1}) > 1


def test_corrupt_stream_seed_changes_output(vocab):
    texts = ["farmers bring fresh vegetables and fruit to the city on market days"]
    a = next(iter(corrupt_stream(texts, vocab, CorruptionParams(seq_len=32, seed=1))))
    b = next(iter(corrupt_stream(texts, vocab, CorruptionParams(seq_len=32, seed=2))))
    assert (a.input_ids, a.target_ids) != (b.input_ids, b.target_ids)


def test_corrupt_stream_skips_tiny_texts(vocab):
    # single-char text encodes to one id, too short to corrupt
    out = list(corrupt_stream(["a", "the river flows slowly through the valley"],
                              vocab, CorruptionParams(seq_len=32)))
    assert len(out) == 1


def test_corrupt_stream_truncates(vocab):
    long_text = "every citizen may take part in the government " * 50
    params = CorruptionParams(seq_len=64)
    (example,) = list(corrupt_stream([long_text], vocab, params))
    kept = [i for i in example.input_ids if not vocab.is_sentinel(i)]
    noise = [i for i in example.target_ids
             if not vocab.is_sentinel(i) and i != vocab.eos_id]
    assert len(kept) + len(noise) == 64


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=2, max_value=400),
       st.sampled_from([0.1, 0.15, 0.3, 0.5]),
       st.sampled_from([1.0, 2.0, 3.0, 10.0]),
       st.integers(min_value=0, max_value=2 ** 31))
def test_plan_build_reconstruct_roundtrip(vocab, n, rate, mean_len, seed):
    assume(n * rate / mean_len + 1 <= vocab.sentinel_count)
    params = CorruptionParams(mask_rate=rate, mean_span_len=mean_len)
    rng = np.random.default_rng(seed)
    ids = list(range(3, 3 + n))  # plain content ids, no reserved collisions
    spans = plan_spans(n, params, rng)
    example = build_example(ids, spans, vocab)
    assert reconstruct(example, vocab) == ids
    assert example.num_spans == len(spans)
    # target layout: sentinel then its span tokens, repeated, then EOS
    assert example.target_ids[-1] == vocab.eos_id
    assert vocab.is_sentinel(example.target_ids[0])
