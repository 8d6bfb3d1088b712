import json

import pytest

from corpusforge.cleanse import (
    BadWordsFilter,
    FilterConfig,
    FilterReport,
    bad_words_filter,
    confidence_gate,
    dedup_lines,
    line_length_filter,
    run_cascade,
    terminal_punct_filter,
)
from corpusforge.ingest import CleanPage, RawDocument, read_documents
from corpusforge.langid import LangPrediction


def page(*lines, language=None):
    return CleanPage(url="u", timestamp="t", lines=list(lines), language=language)


def test_line_length_boundaries():
    assert line_length_filter(page("x" * 200, "y" * 200, "z" * 200))
    assert not line_length_filter(page("x" * 500, "y" * 500))
    assert not line_length_filter(page("x" * 199, "y" * 199, "z" * 199))


def test_line_length_counts_code_points_not_bytes():
    # 200 three-byte characters are 200 characters
    assert line_length_filter(page("あ" * 200, "あ" * 200, "あ" * 200))


def test_line_length_custom_thresholds():
    assert line_length_filter(page("abcde"), min_long_lines=1, min_line_chars=5)
    assert not line_length_filter(page("abcd"), min_long_lines=1, min_line_chars=5)


def test_terminal_punct_keeps_and_drops():
    filtered = terminal_punct_filter(page("Keep this.", "Drop this", 'He said "yes!"'))
    assert filtered.lines == ["Keep this.", 'He said "yes!"']


def test_terminal_punct_trailing_space_ok():
    assert terminal_punct_filter(page("Fine. ")).lines == ["Fine. "]


def test_terminal_punct_empty_page():
    assert terminal_punct_filter(page()).lines == []


def test_badwords_whole_word_alphabetic():
    checker = BadWordsFilter({"en": {"florgle"}})
    assert not checker.passes(page("they florgle daily"), "en")
    assert not checker.passes(page("They FLORGLE daily"), "en")  # case-insensitive
    assert checker.passes(page("the florgleish dialect"), "en")  # substring passes
    assert checker.passes(page("unflorgle is different"), "en")


def test_badwords_substring_for_unsegmented():
    checker = BadWordsFilter({"ja": {"ゾルグ"}})
    assert not checker.passes(page("村のゾルグボンの話"), "ja")


def test_badwords_no_list_passes():
    checker = BadWordsFilter({"en": {"florgle"}})
    assert checker.passes(page("anything at all"), "fr")
    assert not checker.has_list("fr")
    assert checker.passes(page("anything"), None)


def test_badwords_wrapper_uses_page_language():
    assert not bad_words_filter(page("a florgle b", language="en"), {"en": {"florgle"}})
    assert bad_words_filter(page("a florgle b", language="fr"), {"en": {"florgle"}})


def test_badwords_from_dir(tmp_path):
    (tmp_path / "en").write_text("florgle\n\nwuzzle\n")
    checker = BadWordsFilter.from_dir(tmp_path)
    assert not checker.passes(page("wuzzle!"), "en")


def test_badwords_malformed_file_rejected(tmp_path):
    (tmp_path / "en").write_bytes(b"\xff\xfe not utf8")
    with pytest.raises(ValueError, match="malformed wordlist"):
        BadWordsFilter.from_dir(tmp_path)


def test_dedup_first_occurrence_wins():
    pages = [page("shared line", "unique a"), page("shared line", "unique b")]
    out = list(dedup_lines(pages))
    assert out[0].lines == ["shared line", "unique a"]
    assert out[1].lines == ["unique b"]


def test_dedup_trim_only_matching():
    pages = [page("  spaced  "), page("spaced")]
    out = list(dedup_lines(pages))
    assert len(out) == 1


def test_dedup_case_sensitive():
    pages = [page("Line"), page("line")]
    assert len(list(dedup_lines(pages))) == 2


def test_dedup_drops_emptied_pages():
    pages = [page("only line"), page("only line")]
    out = list(dedup_lines(pages))
    assert len(out) == 1


def test_dedup_idempotent():
    pages = [page("a", "b"), page("b", "c"), page("a", "d")]
    once = list(dedup_lines(pages))
    twice = list(dedup_lines(once))
    assert [p.lines for p in once] == [p.lines for p in twice]


def test_confidence_gate_boundary():
    p = page("text")
    assert confidence_gate(p, LangPrediction("en", 0.70), 0.70)
    assert p.language == "en" and p.confidence == pytest.approx(0.70)
    assert not confidence_gate(page("text"), LangPrediction("en", 0.69), 0.70)


def test_confidence_gate_zero_threshold_passes_everything():
    assert confidence_gate(page("x"), LangPrediction("en", 0.0001), 0.0)


def test_config_validation():
    with pytest.raises(ValueError, match="min_long_lines"):
        FilterConfig(min_long_lines=0).validate()
    with pytest.raises(ValueError, match="confidence_threshold"):
        FilterConfig(confidence_threshold=1.5).validate()
    with pytest.raises(ValueError, match="english_prob_threshold"):
        FilterConfig(english_prob_threshold=0.0).validate()


ENGLISH_LINE = (
    "The old library near the market square holds thousands of printed books "
    "and the children learn to read and write during their first school years "
    "while the river flows slowly through the valley past the small village.")


def docs_from(*texts):
    return [RawDocument(f"https://x.example/{i}", "t", text)
            for i, text in enumerate(texts)]


def test_cascade_conservation_and_report(profile):
    docs = docs_from(
        "\n".join([ENGLISH_LINE + " one.", ENGLISH_LINE + " two.", ENGLISH_LINE + " three."]),
        "too\nshort",
    )
    stream, report = run_cascade(FilterConfig(), iter(docs), profile)
    survivors = list(stream)
    assert len(survivors) == 1
    assert survivors[0].language == "en"
    for counter in report.stages.values():
        assert counter.pages_in == counter.pages_out + counter.pages_dropped
    assert report.stages["line_length"].detail == {"too_few_long_lines": 1}


def test_cascade_stage_order_recorded(profile):
    docs = docs_from("\n".join([ENGLISH_LINE + " a.", ENGLISH_LINE + " b.",
                                ENGLISH_LINE + " c."]))
    badwords = BadWordsFilter({"en": {"florgle"}})
    stream, _ = run_cascade(FilterConfig(), iter(docs), profile, badwords=badwords)
    (survivor,) = list(stream)
    assert survivor.source_filters == ["line_length", "dedup", "badwords",
                                       "confidence_gate"]
    # without any loaded wordlists the bad-words stage is skipped entirely
    stream, _ = run_cascade(FilterConfig(), iter(docs), profile)
    (survivor,) = list(stream)
    assert survivor.source_filters == ["line_length", "dedup", "confidence_gate"]


def test_cascade_empty_input(profile):
    stream, report = run_cascade(FilterConfig(), iter([]), profile)
    assert list(stream) == []
    for counter in report.stages.values():
        assert counter.pages_in == 0


def test_cascade_deterministic(profile):
    docs = docs_from(
        "\n".join([ENGLISH_LINE + " a.", ENGLISH_LINE + " b.", ENGLISH_LINE + " c."]),
        "\n".join([ENGLISH_LINE + " d.", ENGLISH_LINE + " a.", ENGLISH_LINE + " e."]),
    )
    runs = []
    for _ in range(2):
        stream, report = run_cascade(FilterConfig(), iter(docs), profile)
        runs.append(([p.lines for p in stream], report.to_json()))
    assert runs[0] == runs[1]


def test_cascade_disabling_filters_never_decreases_survivors(profile, corpus_files):
    def all_docs():
        for path in corpus_files:
            yield from read_documents(path)

    badwords = BadWordsFilter.from_dir("tests/fixtures/badwords")

    def survivors(config):
        stream, _ = run_cascade(config, all_docs(), profile, badwords=badwords)
        return sum(1 for _ in stream)

    base = survivors(FilterConfig())
    assert survivors(FilterConfig(enable_line_length=False)) >= base
    assert survivors(FilterConfig(enable_dedup=False)) >= base
    assert survivors(FilterConfig(enable_badwords=False)) >= base
    assert survivors(FilterConfig(confidence_threshold=0.01)) >= base


def test_cascade_c4_mode(profile):
    accept = "\n".join([ENGLISH_LINE + " alpha.", ENGLISH_LINE + " beta.",
                        ENGLISH_LINE + " gamma."])
    # no terminal punctuation: every line is removed before the length check
    unpunct = accept.replace(".", "")
    docs = docs_from(accept, unpunct)
    stream, report = run_cascade(FilterConfig(c4_mode=True), iter(docs), profile)
    survivors = list(stream)
    assert len(survivors) == 1
    assert survivors[0].language == "en"
    assert survivors[0].confidence >= 0.99
    assert report.stages["line_length"].pages_dropped == 1


def test_cascade_report_json_shape(profile):
    docs = docs_from("short")
    stream, report = run_cascade(FilterConfig(), iter(docs), profile)
    list(stream)
    doc = json.loads(report.to_json())
    assert doc["line_length"]["pages_in"] == 1
    assert doc["line_length"]["pages_dropped"] == 1


def test_cascade_parallel_matches_serial(profile):
    docs = docs_from(*(
        "\n".join([ENGLISH_LINE + f" {i} a.", ENGLISH_LINE + f" {i} b.",
                   ENGLISH_LINE + f" {i} c."])
        for i in range(25)
    ))
    serial, _ = run_cascade(FilterConfig(), iter(docs), profile)
    parallel, _ = run_cascade(FilterConfig(), iter(docs), profile, parallelism=4)
    assert [p.lines for p in serial] == [p.lines for p in parallel]
