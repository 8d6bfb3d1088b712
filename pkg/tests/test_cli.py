import json

import pytest

from corpusforge import cli, ingest


def parse(argv):
    return cli.build_parser().parse_args(argv)


def write_jsonl(path, records):
    path.write_text(
        "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records),
        encoding="utf-8")


# -- config files ------------------------------------------------------------

def test_load_config_basics(tmp_path):
    cfg = tmp_path / "forge.cfg"
    cfg.write_text(
        "# top comment\n"
        "\n"
        "alpha = 0.5   # inline comment\n"
        "out=result.json\n"
        "alpha = 0.7\n",
        encoding="utf-8")
    assert cli.load_config(cfg) == {"alpha": "0.7", "out": "result.json"}


def test_load_config_rejects_bare_line(tmp_path):
    cfg = tmp_path / "forge.cfg"
    cfg.write_text("alpha 0.5\n", encoding="utf-8")
    with pytest.raises(ValueError, match="line 1: expected key = value"):
        cli.load_config(cfg)


def test_settings_flag_beats_config_beats_default(tmp_path):
    cfg = tmp_path / "forge.cfg"
    cfg.write_text("alpha = 0.5\n", encoding="utf-8")

    plain = cli.Settings(parse(["mix"]))
    assert plain.get("alpha", 0.3, cast=float) == 0.3

    from_config = cli.Settings(parse(["mix", "--config", str(cfg)]))
    assert from_config.get("alpha", 0.3, cast=float) == 0.5

    from_flag = cli.Settings(parse(["mix", "--config", str(cfg), "--alpha", "0.7"]))
    assert from_flag.get("alpha", 0.3, cast=float) == 0.7


def test_settings_bool_cast_from_config(tmp_path):
    cfg = tmp_path / "forge.cfg"
    cfg.write_text("c4_mode = yes\nenable_dedup = off\n", encoding="utf-8")
    settings = cli.Settings(parse(["clean", "--config", str(cfg)]))
    assert settings.get("c4_mode", False, cast=bool) is True
    assert settings.get("enable_dedup", True, cast=bool) is False


def test_settings_require_message():
    settings = cli.Settings(parse(["plan"]))
    with pytest.raises(ValueError, match="missing required setting 'out'"):
        settings.require("out")


def test_seed_precedence(tmp_path, monkeypatch):
    monkeypatch.setenv("FORGE_SEED", "11")
    assert cli.Settings(parse(["mix"])).seed() == 11

    cfg = tmp_path / "forge.cfg"
    cfg.write_text("seed = 22\n", encoding="utf-8")
    assert cli.Settings(parse(["mix", "--config", str(cfg)])).seed() == 22
    assert cli.Settings(
        parse(["mix", "--config", str(cfg), "--seed", "33"])).seed() == 33


def test_seed_missing_error(monkeypatch):
    monkeypatch.delenv("FORGE_SEED", raising=False)
    with pytest.raises(ValueError, match="no seed:"):
        cli.Settings(parse(["mix"])).seed()


# -- error boundary ----------------------------------------------------------

def test_main_reports_errors_on_stderr(tmp_path, capsys):
    code = cli.main(["clean", "--in", str(tmp_path / "nothing-*.jsonl"),
                     "--out", str(tmp_path)])
    assert code == 1
    err = capsys.readouterr().err
    assert "forge clean: error: no input files match" in err


def test_cast_error_names_the_line(tmp_path, capsys):
    gold = tmp_path / "gold.jsonl"
    write_jsonl(gold, [{"premise": "p", "hypothesis": "h"}])
    code = cli.main(["cast", "--task", "xnli", "--in", str(gold),
                     "--out", str(tmp_path / "out.jsonl")])
    assert code == 1
    err = capsys.readouterr().err
    assert "line 1" in err and "missing field 'label'" in err


def test_eval_length_mismatch(tmp_path, capsys):
    gold = tmp_path / "gold.jsonl"
    write_jsonl(gold, [{"label": "entailment"}, {"label": "neutral"}])
    pred = tmp_path / "pred.txt"
    pred.write_text("entailment\n", encoding="utf-8")
    code = cli.main(["eval", "--task", "xnli", "--pred", str(pred),
                     "--gold", str(gold), "--out", str(tmp_path / "m.json")])
    assert code == 1
    assert "1 predictions but 2" in capsys.readouterr().err


# -- cast --------------------------------------------------------------------

def test_cast_xnli(tmp_path, capsys):
    gold = tmp_path / "gold.jsonl"
    write_jsonl(gold, [
        {"id": "a1", "premise": "Cats sleep.", "hypothesis": "Cats rest.",
         "label": "entailment"},
        {"premise": "It rains.", "hypothesis": "It is dry.",
         "label": "contradiction"},
    ])
    out = tmp_path / "cast.jsonl"
    assert cli.main(["cast", "--task", "xnli", "--in", str(gold),
                     "--out", str(out)]) == 0
    rows = [json.loads(line) for line in out.read_text().splitlines()]
    assert rows[0] == {
        "id": "a1",
        "input": "xnli premise: Cats sleep. hypothesis: Cats rest.",
        "target": "entailment",
        "task": "xnli",
    }
    assert rows[1]["target"] == "contradiction"
    assert "id" not in rows[1]
    assert "cast: 2 xnli examples" in capsys.readouterr().out


def test_cast_ner_and_qa(tmp_path):
    ner_gold = tmp_path / "ner.jsonl"
    write_jsonl(ner_gold, [
        {"tokens": ["Jo", "joined", "Acme", "."],
         "entities": [{"label": "PER", "surface": "Jo"},
                      {"label": "ORG", "surface": "Acme"}]},
        {"tokens": ["Nothing", "here", "."], "entities": []},
    ])
    ner_out = tmp_path / "ner_cast.jsonl"
    assert cli.main(["cast", "--task", "ner", "--in", str(ner_gold),
                     "--out", str(ner_out)]) == 0
    rows = [json.loads(line) for line in ner_out.read_text().splitlines()]
    assert rows[0]["input"] == "ner: Jo joined Acme ."
    assert rows[0]["target"] == "PER: Jo $$ ORG: Acme"
    assert rows[1]["target"] == "None"

    qa_gold = tmp_path / "qa.jsonl"
    write_jsonl(qa_gold, [
        {"context": "Li lives in Pune.", "question": "Where does Li live?",
         "answers": ["Pune"]},
    ])
    qa_out = tmp_path / "qa_cast.jsonl"
    assert cli.main(["cast", "--task", "qa", "--in", str(qa_gold),
                     "--out", str(qa_out)]) == 0
    row = json.loads(qa_out.read_text().splitlines()[0])
    assert row["input"] == "question: Where does Li live? context: Li lives in Pune."
    assert row["target"] == "Pune"


# -- eval --------------------------------------------------------------------

def test_eval_qa_scores(tmp_path):
    gold = tmp_path / "gold.jsonl"
    write_jsonl(gold, [{"answers": ["the cat"]}, {"answers": ["x y"]}])
    pred = tmp_path / "pred.txt"
    pred.write_text("The cat!\ny z\n", encoding="utf-8")
    out = tmp_path / "metrics.json"
    assert cli.main(["eval", "--task", "qa", "--pred", str(pred),
                     "--gold", str(gold), "--out", str(out)]) == 0
    metrics = json.loads(out.read_text(encoding="utf-8"))
    # example 1 matches after normalization; example 2 shares 1 of 2 tokens
    assert metrics["em"] == pytest.approx(50.0)
    assert metrics["f1"] == pytest.approx(75.0)
    assert metrics["examples"] == 2


def test_eval_ner_scores(tmp_path):
    gold = tmp_path / "gold.jsonl"
    write_jsonl(gold, [
        {"entities": [{"label": "LOC", "surface": "Paris"},
                      {"label": "ORG", "surface": "Acme"}]},
        {"entities": [{"label": "PER", "surface": "Li"}]},
    ])
    pred = tmp_path / "pred.txt"
    pred.write_text("LOC: Paris\nPER: Li $$ junk\n", encoding="utf-8")
    out = tmp_path / "metrics.json"
    assert cli.main(["eval", "--task", "ner", "--pred", str(pred),
                     "--gold", str(gold), "--out", str(out)]) == 0
    metrics = json.loads(out.read_text(encoding="utf-8"))
    # pooled counts: tp=2, fp=0, fn=1 -> f1 = 4/5
    assert metrics["entity_f1"] == pytest.approx(80.0)
    assert metrics["counts"] == {"tp": 2, "fp": 0, "fn": 1}
    assert metrics["malformed_fragments"] == 1


def test_eval_classification_accuracy(tmp_path):
    gold = tmp_path / "gold.jsonl"
    write_jsonl(gold, [{"label": lab} for lab in
                       ("entailment", "neutral", "contradiction", "entailment")])
    pred = tmp_path / "pred.txt"
    pred.write_text("entailment\nneutral\nentailment\n entailment \n",
                    encoding="utf-8")
    out = tmp_path / "metrics.json"
    assert cli.main(["eval", "--task", "xnli", "--pred", str(pred),
                     "--gold", str(gold), "--out", str(out)]) == 0
    metrics = json.loads(out.read_text(encoding="utf-8"))
    assert metrics["accuracy"] == pytest.approx(75.0)
    assert metrics["counts"] == {"correct": 3, "total": 4}


# -- plan --------------------------------------------------------------------

def test_plan_writes_budget(tmp_path):
    out = tmp_path / "plan.json"
    assert cli.main(["plan", "--out", str(out)]) == 0
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert doc["token_budget"] == 1024 * 1024 * 10 ** 6
    assert doc["schedule"]["lr_at_final_step"] == 0.001


def test_plan_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "forge.cfg"
    out = tmp_path / "plan.json"
    cfg.write_text(f"out = {out}\ntotal_steps = 40000\n", encoding="utf-8")
    assert cli.main(["plan", "--config", str(cfg),
                     "--total-steps", "20000"]) == 0
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert doc["schedule"]["total_steps"] == 20000
    assert doc["token_budget"] == 20000 * 1024 * 1024


# -- clean smoke on the fixture corpus ---------------------------------------

def test_clean_smoke(tmp_path, fixtures_dir, capsys):
    out_dir = tmp_path / "cleaned"
    code = cli.main([
        "clean",
        "--in", str(fixtures_dir / "corpus" / "shard-000.jsonl"),
        "--out", str(out_dir),
        "--profile", str(fixtures_dir / "langid_profile.json"),
        "--badwords", str(fixtures_dir / "badwords"),
        "--seed", "7",
    ])
    assert code == 0
    pages = list(ingest.read_pages(out_dir / "cleaned.jsonl"))
    assert pages
    assert all(p.language and p.confidence >= 0.70 for p in pages)
    report = json.loads((out_dir / "report.json").read_text(encoding="utf-8"))
    assert set(report) >= {"line_length", "dedup", "confidence_gate"}
    assert "clean:" in capsys.readouterr().out
