import json

import numpy as np
import pytest

from phishvis import bytevis, classifier, cli, corpus
from phishvis.errors import EmptyContent
from phishvis.pipeline import Checker, check_url
from phishvis.store import Store

PAGE = corpus.gen_page("phishing", "PayPal Phish", 0, 0)


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    return code, capsys.readouterr().out


def test_checker_dedupe(tmp_path, stub, model_file):
    stub.add("/login", PAGE)
    st = Store(tmp_path / "home")
    checker = Checker(classifier.load_model(model_file), st)
    first = checker.check(stub.url("/login"))
    assert not first.cached
    assert set(first.timings) == {"lookup", "fetch", "render", "predict", "store"}
    assert len(Store(tmp_path / "home")) == 1
    assert (st.root / first.image_path).read_bytes() == bytevis.encode_png(bytevis.render(PAGE))
    assert dict(checker.counters) == {"fetch": 1, "render": 1, "predict": 1}

    second = checker.check(stub.url("/login#again"))
    assert second.cached
    assert second.verdict == first.verdict
    assert second.image_path == first.image_path
    assert set(second.timings) == {"lookup"}
    assert stub.log == ["/login"]
    assert dict(checker.counters) == {"fetch": 1, "render": 1, "predict": 1}


def test_force_recheck_is_pure(tmp_path, stub, model_file):
    stub.add("/p", PAGE)
    st = Store(tmp_path)
    checker = Checker(classifier.load_model(model_file), st)
    a = checker.check(stub.url("/p"))
    png_a = (st.root / a.image_path).read_bytes()
    b = checker.check(stub.url("/p"), force=True)
    assert not b.cached and b.verdict == a.verdict
    assert (st.root / b.image_path).read_bytes() == png_a
    assert len(stub.log) == 2 and len(st) == 2


def test_check_url_function(tmp_path, stub, model_file):
    stub.add("/", PAGE)
    res = check_url(stub.url("/"), model_file, Store(tmp_path))
    assert res.verdict.label in ("legitimate", "phishing")
    assert 0.5 <= res.verdict.confidence <= 1.0


def test_empty_body(tmp_path, stub, model_file):
    stub.add("/empty", b"")
    checker = Checker(classifier.load_model(model_file), Store(tmp_path))
    with pytest.raises(EmptyContent):
        checker.check(stub.url("/empty"))
    assert len(Store(tmp_path)) == 0


def test_cli_check_twice(tmp_path, stub, model_file, capsys):
    stub.add("/login", PAGE)
    home = tmp_path / "home"
    code, out = run(capsys, "check", stub.url("/login"), "--model", model_file, "--home", home, "--json")
    assert code == 0
    first = json.loads(out)
    assert first["cached"] is False
    code, out = run(capsys, "check", stub.url("/login"), "--model", model_file, "--home", home, "--json")
    second = json.loads(out)
    assert code == 0 and second["cached"] is True
    assert (second["label"], second["confidence"]) == (first["label"], first["confidence"])
    assert set(second["timings_ms"]) == {"lookup"}
    assert stub.log == ["/login"]


def test_cli_check_several_urls(tmp_path, stub, model_file, capsys):
    for i in range(3):
        stub.add(f"/p{i}", corpus.gen_page("legitimate", "PayPal", i, 0))
    urls = [stub.url(f"/p{i}") for i in range(3)]
    code, out = run(capsys, "check", *urls, "--model", model_file, "--home", tmp_path, "--json")
    assert code == 0
    results = json.loads(out)
    assert [r["cached"] for r in results] == [False] * 3
    assert sorted(stub.log) == ["/p0", "/p1", "/p2"]
    code, out = run(capsys, "check", *urls, stub.url("/missing"), "--model", model_file,
                    "--home", tmp_path, "--json")
    results = json.loads(out)
    assert code == 10
    assert [r.get("cached") for r in results[:3]] == [True] * 3
    assert results[3]["error"] == "HttpStatus"


def test_cli_check_human_output(tmp_path, stub, model_file, capsys):
    stub.add("/x", PAGE)
    code, out = run(capsys, "check", stub.url("/x"), "--model", model_file, "--home", tmp_path)
    assert code == 0 and "(fresh)" in out


def test_default_model_location(tmp_path, stub, monkeypatch, capsys):
    monkeypatch.setenv("PHISHVIS_HOME", str(tmp_path))
    classifier.save_model(classifier.init_model(classifier.TrainConfig()), tmp_path / "model.pvm")
    stub.add("/x", PAGE)
    code, _ = run(capsys, "check", stub.url("/x"))
    assert code == 0
    assert (tmp_path / "records.jsonl").exists()


@pytest.mark.parametrize("route,body,status,exc", [
    ("/missing", None, None, "HttpStatus"),
    ("/empty", b"", 200, "EmptyContent"),
    ("/big", b"a" * (5 * 1024 * 1024 + 1), 200, "BodyTooLarge"),
])
def test_cli_fetch_errors(tmp_path, stub, model_file, capsys, route, body, status, exc):
    if body is not None:
        stub.add(route, body, status=status)
    code, out = run(capsys, "check", stub.url(route), "--model", model_file, "--home", tmp_path, "--json")
    assert code == 10
    assert json.loads(out)["error"] == exc


def test_cli_unresolvable_host(tmp_path, model_file, capsys):
    code, out = run(capsys, "check", "http://no-such-host.invalid/", "--model", model_file,
                    "--home", tmp_path, "--json")
    assert code == 10
    assert json.loads(out)["error"] == "NameResolution"


def test_cli_usage_errors(tmp_path, model_file, capsys):
    code, _ = run(capsys, "check", "ftp://x.org/", "--model", model_file, "--home", tmp_path)
    assert code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["train"])
    assert exc.value.code == 2


def test_cli_missing_or_bad_model(tmp_path, capsys):
    code, _ = run(capsys, "check", "http://127.0.0.1:9/", "--model", tmp_path / "none.pvm",
                  "--home", tmp_path)
    assert code == 12
    bad = tmp_path / "bad.pvm"
    bad.write_bytes(b"XXXX\x01")
    manifest = tmp_path / "m.jsonl"
    manifest.write_text("")
    code, _ = run(capsys, "evaluate", "--manifest", manifest, "--model", bad)
    assert code == 12


def test_cli_visualize_file(tmp_path, capsys):
    src = tmp_path / "page.html"
    src.write_bytes(PAGE)
    out_png = tmp_path / "out.png"
    code, out = run(capsys, "visualize", src, "-o", out_png, "--json")
    assert code == 0
    assert json.loads(out)["side"] == 128
    assert np.array_equal(bytevis.read_png(out_png), bytevis.render(PAGE))
    empty = tmp_path / "empty.html"
    empty.write_bytes(b"")
    code, _ = run(capsys, "visualize", empty, "-o", tmp_path / "e.png")
    assert code == 10


def test_cli_visualize_url(tmp_path, stub, capsys):
    stub.add("/v", PAGE)
    code, _ = run(capsys, "visualize", stub.url("/v"), "-o", tmp_path / "v.png", "--order", 5)
    assert code == 0
    assert bytevis.read_png(tmp_path / "v.png").shape == (32, 32, 3)


@pytest.fixture
def small_corpus(tmp_path, capsys):
    out = tmp_path / "corpus"
    code, text = run(capsys, "gen-corpus", "--per-category", 3, "--seed", 1, "-o", out, "--json")
    assert code == 0
    info = json.loads(text)
    assert info["samples"] == 30
    return out / "manifest.jsonl"


def test_cli_train_and_evaluate(tmp_path, small_corpus, capsys):
    model = tmp_path / "m.pvm"
    code, out = run(capsys, "train", "--manifest", small_corpus, "--steps", 5, "--batch", 4,
                    "--input-side", 16, "-o", model, "--json")
    assert code == 0
    info = json.loads(out)
    assert info["steps"] == 5 and info["input_side"] == 16
    assert classifier.load_model(model).input_side == 16
    code, out = run(capsys, "evaluate", "--manifest", small_corpus, "--model", model,
                    "--split", "all", "--json")
    assert code == 0
    report = json.loads(out)
    assert report["overall"]["counts"]["tp"] + report["overall"]["counts"]["fn"] == 15
    assert {c["name"] for c in report["per_category"]} == {c for c, _ in corpus.DEFAULT_CATEGORIES}
    code, out = run(capsys, "evaluate", "--manifest", small_corpus, "--model", model)
    assert code == 0 and "accuracy" in out


def test_cli_degenerate_dataset(tmp_path, small_corpus, capsys):
    lines = [l for l in small_corpus.read_text().splitlines() if '"phishing"' in l]
    only_phish = small_corpus.parent / "phish.jsonl"
    only_phish.write_text("\n".join(lines) + "\n")
    code, _ = run(capsys, "train", "--manifest", only_phish, "--steps", 1, "-o", tmp_path / "m.pvm")
    assert code == 13


def test_cli_manifest_parse_error(tmp_path, small_corpus, capsys):
    lines = small_corpus.read_text().splitlines()
    lines[4] = "{broken"
    small_corpus.write_text("\n".join(lines) + "\n")
    code, _ = run(capsys, "train", "--manifest", small_corpus, "--steps", 1, "-o", tmp_path / "m.pvm")
    assert code == 11
