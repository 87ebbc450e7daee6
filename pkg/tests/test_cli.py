"""End-to-end command-line tests, run in process through ``main(argv)``."""

import io
import json

import pytest

from gecx.bpe import BpeSegmenter
from gecx.cli import main
from gecx.lm import NGramLanguageModel
from gecx.spelling import Lexicon

M2_TEXT = """\
S the cat sat
A 1 2|||Det|||a|||REQUIRED|||-NONE-|||0

S dogs runs fast
A 1 2|||SVA|||run|||REQUIRED|||-NONE-|||0
"""


@pytest.fixture
def run(capsys, monkeypatch):
    """Invoke the CLI and capture (exit_code, stdout, stderr)."""

    def invoke(argv, stdin=None):
        if stdin is not None:
            monkeypatch.setattr("sys.stdin", io.StringIO(stdin))
        code = main(argv)
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return invoke


class TestTokenizeCommand:
    def test_stdin_to_stdout(self, run):
        code, out, err = run(["tokenize"], stdin="It's good.\n")
        assert code == 0
        assert out == "It 's good .\n"

    def test_manifest_on_stderr_when_stdout_only(self, run):
        code, out, err = run(["tokenize"], stdin="Hi.\n")
        assert code == 0
        manifest = json.loads(err.strip())
        assert manifest["command"] == "tokenize"
        assert manifest["seed"] == 42

    def test_file_to_file_with_sibling_manifest(self, run, tmp_path):
        src = tmp_path / "raw.txt"
        src.write_text("I don't know.\n", encoding="utf-8")
        out_path = tmp_path / "tok.txt"
        code, out, err = run(["tokenize", "--in", str(src), "--out", str(out_path)])
        assert code == 0
        assert out_path.read_text(encoding="utf-8") == "I do n't know .\n"
        manifest = json.loads((tmp_path / "tok.txt.manifest.json").read_text())
        assert manifest["command"] == "tokenize"
        assert str(src) in manifest["inputs"]
        assert len(manifest["inputs"][str(src)]) == 64
        assert manifest["version"]
        assert manifest["duration_seconds"] >= 0

    def test_explicit_manifest_path(self, run, tmp_path):
        src = tmp_path / "raw.txt"
        src.write_text("Hi.\n", encoding="utf-8")
        target = tmp_path / "run.json"
        code, _, _ = run(
            ["--manifest", str(target), "tokenize", "--in", str(src), "--out", "-"]
        )
        assert code == 0
        assert json.loads(target.read_text())["command"] == "tokenize"


class TestExitCodes:
    def test_unknown_command_is_usage_error(self, run):
        code, _, err = run(["frobnicate"])
        assert code == 1
        assert "error:" in err

    def test_bad_jobs_value(self, run):
        code, _, err = run(["--jobs", "0", "tokenize"], stdin="")
        assert code == 1
        assert "--jobs" in err

    def test_missing_input_file(self, run, tmp_path):
        code, _, err = run(["tokenize", "--in", str(tmp_path / "nope.txt")])
        assert code == 2
        assert "error:" in err

    def test_malformed_data_file(self, run, tmp_path):
        bad = tmp_path / "gold.m2"
        bad.write_text("A 1 2|||edit before any source\n", encoding="utf-8")
        hyp = tmp_path / "hyp.txt"
        hyp.write_text("a\n", encoding="utf-8")
        code, _, err = run(["m2", "score", "--gold", str(bad), "--hyp", str(hyp)])
        assert code == 2

    def test_version_flag(self, run):
        with pytest.raises(SystemExit) as exc:
            run(["--version"])
        assert exc.value.code == 0


class TestSeedResolution:
    def test_env_variable_overrides_default(self, run, monkeypatch):
        monkeypatch.setenv("GECX_SEED", "7")
        _, _, err = run(["tokenize"], stdin="Hi.\n")
        assert json.loads(err.strip())["seed"] == 7

    def test_flag_beats_env_variable(self, run, monkeypatch):
        monkeypatch.setenv("GECX_SEED", "7")
        _, _, err = run(["--seed", "3", "tokenize"], stdin="Hi.\n")
        assert json.loads(err.strip())["seed"] == 3

    def test_non_integer_env_value_is_usage_error(self, run, monkeypatch):
        monkeypatch.setenv("GECX_SEED", "lots")
        code, _, err = run(["tokenize"], stdin="Hi.\n")
        assert code == 1
        assert "GECX_SEED" in err


class TestTruecaseCommands:
    def test_train_then_apply(self, run, tmp_path):
        train = tmp_path / "train.txt"
        train.write_text(
            "he said the dog barks .\n"
            "we met the dog .\n"
            "they fund NASA projects .\n",
            encoding="utf-8",
        )
        model = tmp_path / "truecase.tsv"
        code, _, _ = run(["truecase", "train", "--in", str(train), "--out", str(model)])
        assert code == 0
        test = tmp_path / "test.txt"
        test.write_text("THE dog runs .\nnasa launched .\n", encoding="utf-8")
        out = tmp_path / "cased.txt"
        code, _, _ = run(
            ["truecase", "apply", "--model", str(model), "--in", str(test), "--out", str(out)]
        )
        assert code == 0
        assert out.read_text(encoding="utf-8") == "the dog runs .\nNASA launched .\n"


class TestBpeCommands:
    def test_learn_then_apply(self, run, tmp_path):
        train = tmp_path / "train.txt"
        train.write_text("low low low low\nlower lower\n", encoding="utf-8")
        model = tmp_path / "codes.txt"
        code, _, _ = run(
            ["bpe", "learn", "--merges", "10", "--in", str(train), "--out", str(model)]
        )
        assert code == 0
        out = tmp_path / "seg.txt"
        code, _, _ = run(
            ["bpe", "apply", "--model", str(model), "--in", str(train), "--out", str(out)]
        )
        assert code == 0
        first = out.read_text(encoding="utf-8").splitlines()[0].split()
        assert all(piece == "low" for piece in first)


class TestLmCommands:
    def test_train_score_and_ppl(self, run, tmp_path):
        train = tmp_path / "train.txt"
        train.write_text("a b a\nb a b\na b b\n", encoding="utf-8")
        model = tmp_path / "model.arpa"
        code, _, _ = run(
            ["lm", "train", "--order", "2", "--in", str(train), "--out", str(model)]
        )
        assert code == 0
        assert model.read_text(encoding="utf-8").startswith("\\data\\")

        code, out, _ = run(["lm", "score", "--model", str(model)], stdin="a b\n")
        assert code == 0
        logprob, n_scored, normalized = out.strip().split("\t")
        assert float(logprob) < 0
        assert n_scored == "3"
        assert abs(float(normalized) - float(logprob) / 3) < 1e-12

        code, out, _ = run(["lm", "ppl", "--model", str(model)], stdin="a b\nb a\n")
        assert code == 0
        assert out.startswith("perplexity\t")
        assert float(out.split("\t")[1]) > 1.0


class TestM2Command:
    def test_score_report_and_per_sentence(self, run, tmp_path):
        gold = tmp_path / "gold.m2"
        gold.write_text(M2_TEXT, encoding="utf-8")
        hyp = tmp_path / "hyp.txt"
        hyp.write_text("the a sat\ndogs runs fast\n", encoding="utf-8")
        per = tmp_path / "per.tsv"
        code, out, _ = run(
            [
                "m2", "score",
                "--gold", str(gold),
                "--hyp", str(hyp),
                "--per-sentence", str(per),
            ]
        )
        assert code == 0
        report = dict(line.split("\t") for line in out.splitlines())
        assert report["tp"] == "1"
        assert report["fp"] == "0"
        assert report["fn"] == "1"
        assert report["precision"] == "1.0000"
        assert report["recall"] == "0.5000"
        rows = per.read_text(encoding="utf-8").splitlines()
        assert rows[0] == "sentence\ttp\tfp\tfn\tannotator"
        assert len(rows) == 3


class TestGleuCommand:
    def _write(self, tmp_path):
        (tmp_path / "src.txt").write_text("a b c d\nx y z w\n", encoding="utf-8")
        (tmp_path / "hyp.txt").write_text("a b c d\nx y q w\n", encoding="utf-8")
        (tmp_path / "ref1.txt").write_text("a b c d\nx y q w\n", encoding="utf-8")
        (tmp_path / "ref2.txt").write_text("a b c e\nx y q v\n", encoding="utf-8")

    def test_same_seed_gives_identical_bytes(self, run, tmp_path):
        self._write(tmp_path)
        argv = [
            "gleu", "score",
            "--src", str(tmp_path / "src.txt"),
            "--hyp", str(tmp_path / "hyp.txt"),
            "--ref", str(tmp_path / "ref1.txt"),
            "--ref", str(tmp_path / "ref2.txt"),
            "--iterations", "50",
        ]
        first = run(["--seed", "11", *argv, "--out", str(tmp_path / "a.txt")])
        second = run(["--seed", "11", *argv, "--out", str(tmp_path / "b.txt")])
        assert first[0] == 0 and second[0] == 0
        assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()
        assert (tmp_path / "a.txt").read_text(encoding="utf-8").startswith("gleu\t")

    def test_reference_length_mismatch(self, run, tmp_path):
        self._write(tmp_path)
        (tmp_path / "ref1.txt").write_text("a b c d\n", encoding="utf-8")
        code, _, err = run(
            [
                "gleu", "score",
                "--src", str(tmp_path / "src.txt"),
                "--hyp", str(tmp_path / "hyp.txt"),
                "--ref", str(tmp_path / "ref1.txt"),
            ]
        )
        assert code == 2


class TestNbestCommands:
    NBEST = (
        "0 ||| the cat sat ||| Lm= -4.5 Wp= 3.0 ||| -1.5\n"
        "0 ||| the cat sit ||| Lm= -1.0 Wp= 3.0 ||| -3.0\n"
        "1 ||| hello there ||| Lm= -2.0 Wp= 2.0 ||| -0.5\n"
    )

    def test_rescore_picks_new_best(self, run, tmp_path):
        nbest = tmp_path / "lists.nbest"
        nbest.write_text(self.NBEST, encoding="utf-8")
        weights = tmp_path / "weights.tsv"
        weights.write_text("Lm\t1.0\nWp\t0.0\n", encoding="utf-8")
        reranked = tmp_path / "reranked.nbest"
        code, out, _ = run(
            [
                "nbest", "rescore",
                "--nbest", str(nbest),
                "--weights", str(weights),
                "--nbest-out", str(reranked),
            ]
        )
        assert code == 0
        assert out.splitlines() == ["the cat sit", "hello there"]
        assert "the cat sit" in reranked.read_text(encoding="utf-8").splitlines()[0]

    def test_annotate_adds_columns(self, run, tmp_path):
        train = tmp_path / "lm_train.txt"
        train.write_text("the cat sat\nthe cat sat\n", encoding="utf-8")
        arpa = tmp_path / "wlm.arpa"
        NGramLanguageModel(order=2).fit(
            [line.split() for line in train.read_text().splitlines()]
        ).save_arpa(arpa)
        config = tmp_path / "annotators.json"
        config.write_text(
            json.dumps([{"kind": "lm", "name": "Wlm", "model_path": "wlm.arpa"}]),
            encoding="utf-8",
        )
        nbest = tmp_path / "lists.nbest"
        nbest.write_text(self.NBEST, encoding="utf-8")
        src = tmp_path / "src.txt"
        src.write_text("the cat sat\nhello there\n", encoding="utf-8")
        out_path = tmp_path / "annotated.nbest"
        code, _, _ = run(
            [
                "nbest", "annotate",
                "--nbest", str(nbest),
                "--src", str(src),
                "--annotators", str(config),
                "--out", str(out_path),
            ]
        )
        assert code == 0
        assert "Wlm=" in out_path.read_text(encoding="utf-8")


class TestTuneCommands:
    def _fixture(self, tmp_path):
        gold = tmp_path / "gold.m2"
        gold.write_text(M2_TEXT, encoding="utf-8")
        nbest = tmp_path / "lists.nbest"
        # the uncorrected hypothesis leads each list, so a zero weight
        # keeps it and only a positive Lm weight flips to the correction
        nbest.write_text(
            "0 ||| the cat sat ||| Lm= -1.0 ||| 0.0\n"
            "0 ||| the a sat ||| Lm= 1.0 ||| 0.0\n"
            "1 ||| dogs runs fast ||| Lm= -1.0 ||| 0.0\n"
            "1 ||| dogs run fast ||| Lm= 1.0 ||| 0.0\n",
            encoding="utf-8",
        )
        return gold, nbest

    def test_grid_search_reports_weight(self, run, tmp_path):
        gold, nbest = self._fixture(tmp_path)
        out_path = tmp_path / "weights.tsv"
        code, out, _ = run(
            [
                "tune", "grid",
                "--nbest", str(nbest),
                "--feature", "Lm",
                "--metric", "m2",
                "--gold", str(gold),
                "--out", str(out_path),
            ]
        )
        assert code == 0
        assert out.startswith("weight\t")
        assert float(out.split("\t")[1]) > 0
        assert "Lm\t" in out_path.read_text(encoding="utf-8")

    def test_mert_writes_weights_that_fix_both_sentences(self, run, tmp_path):
        gold, nbest = self._fixture(tmp_path)
        weights = tmp_path / "mert.tsv"
        code, _, _ = run(
            [
                "tune", "mert",
                "--nbest", str(nbest),
                "--metric", "m2",
                "--gold", str(gold),
                "--out", str(weights),
            ]
        )
        assert code == 0
        name, value = weights.read_text(encoding="utf-8").split()
        assert name == "Lm"
        assert float(value) > 0

    def test_mira_runs_to_completion(self, run, tmp_path):
        gold, nbest = self._fixture(tmp_path)
        weights = tmp_path / "mira.tsv"
        code, _, _ = run(
            [
                "tune", "mira",
                "--nbest", str(nbest),
                "--metric", "m2",
                "--gold", str(gold),
                "--epochs", "3",
                "--out", str(weights),
            ]
        )
        assert code == 0
        assert weights.exists()

    def test_metric_m2_requires_gold(self, run, tmp_path):
        _, nbest = self._fixture(tmp_path)
        code, _, err = run(
            ["tune", "grid", "--nbest", str(nbest), "--feature", "Lm", "--metric", "m2"]
        )
        assert code == 1
        assert "--gold" in err


class TestPipelineCommand:
    def test_run_with_rules_and_traces(self, run, tmp_path):
        rules = tmp_path / "rules.txt"
        rules.write_text("every thing ||| everything\n", encoding="utf-8")
        config = tmp_path / "pipeline.json"
        config.write_text(
            json.dumps({"stages": [{"kind": "corrector", "rules_path": "rules.txt"}]}),
            encoding="utf-8",
        )
        src = tmp_path / "src.txt"
        src.write_text("every thing changed\n", encoding="utf-8")
        out = tmp_path / "out.txt"
        traces = tmp_path / "traces"
        code, _, _ = run(
            [
                "pipeline", "run",
                "--config", str(config),
                "--in", str(src),
                "--out", str(out),
                "--trace-dir", str(traces),
            ]
        )
        assert code == 0
        assert out.read_text(encoding="utf-8") == "everything changed\n"
        assert (traces / "stage_00_corrector.txt").read_text(
            encoding="utf-8"
        ) == "everything changed\n"


class TestSpellCommand:
    def test_corrects_typo_end_to_end(self, run, tmp_path):
        vocab = ["the", "problem", "is", "different", "difficulty", "personal"]
        sentences = [
            ["the", "problem", "is", "different"],
            ["the", "difficulty", "is", "personal"],
        ]
        lex_path = tmp_path / "lexicon.tsv"
        Lexicon({w: 5 for w in vocab}).to_file(lex_path)
        bpe_path = tmp_path / "codes.txt"
        BpeSegmenter(num_merges=200).fit(sentences * 5).to_file(bpe_path)
        char_path = tmp_path / "char.arpa"
        NGramLanguageModel(order=3).fit([list(w) for w in vocab]).save_arpa(char_path)
        word_path = tmp_path / "word.arpa"
        NGramLanguageModel(order=2).fit(sentences * 5).save_arpa(word_path)
        code, out, _ = run(
            [
                "spell", "run",
                "--lexicon", str(lex_path),
                "--bpe", str(bpe_path),
                "--char-lm", str(char_path),
                "--word-lm", str(word_path),
            ],
            stdin="the probelm is different\n",
        )
        assert code == 0
        assert out == "the problem is different\n"


class TestHumanCommand:
    def test_scores_mode_with_ratio(self, run):
        code, out, _ = run(
            ["human", "compare", "--scores", "0.7,0.8", "--system-score", "0.6"]
        )
        assert code == 0
        report = dict(line.split("\t") for line in out.splitlines())
        assert float(report["mean"]) == pytest.approx(0.75)
        assert float(report["ratio"]) == pytest.approx(80.0)

    def test_gold_mode(self, run, tmp_path):
        gold = tmp_path / "gold.m2"
        gold.write_text(
            "S the cat sat\n"
            "A 1 2|||Det|||a|||REQUIRED|||-NONE-|||0\n"
            "A 1 2|||Det|||a|||REQUIRED|||-NONE-|||1\n\n",
            encoding="utf-8",
        )
        code, out, _ = run(["human", "compare", "--gold", str(gold)])
        assert code == 0
        report = dict(line.split("\t") for line in out.splitlines())
        assert float(report["mean"]) == pytest.approx(1.0)
        assert float(report["sd"]) == pytest.approx(0.0)

    def test_requires_exactly_one_source(self, run):
        code, _, err = run(["human", "compare"])
        assert code == 1
        assert "exactly one" in err
