"""Command-line entry point: ``phishvis <command> ...``."""
import argparse
import json
import logging
import sys
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import bytevis, classifier, fetcher, store
from .corpus import CorpusConfig, build_corpus
from .errors import EXIT_OK, EXIT_USAGE, ModelError, PhishvisError
from .pipeline import Checker, evaluate, manifest_root, select_split

log = logging.getLogger("phishvis")


def _emit(args, payload, text):
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _load_model(path):
    try:
        return classifier.load_model(path)
    except FileNotFoundError:
        raise ModelError(f"no model file at {path}") from None


class _LockedChecker(Checker):
    _lock = threading.Lock()

    def fetch(self, url):
        with self._lock:
            self.counters["fetch"] += 1
        return fetcher.fetch(url, self.fetch_config)


def cmd_check(args):
    cfg = fetcher.FetchConfig(timeout=args.timeout, verify_tls=not args.insecure)
    st = store.Store(args.home)
    checker = _LockedChecker(_load_model(args.model), st, cfg)
    urls = [fetcher.normalize_url(u) for u in args.urls]
    # Fetch misses concurrently; verdicts and store writes stay on this thread.
    todo = list(dict.fromkeys(u for u in urls if args.force or st.lookup(u) is None))
    pages = {}
    if len(todo) > 1:
        with ThreadPoolExecutor(max_workers=min(8, len(todo))) as pool:
            pages = {u: pool.submit(checker.fetch, u) for u in todo}
    results, code = [], EXIT_OK
    for url in urls:
        try:
            page = pages.pop(url).result() if url in pages else None
            res = checker.check(url, force=args.force, page=page)
        except PhishvisError as exc:
            code = code or exc.exit_code
            log.error("%s: %s", url, exc)
            results.append({"url": str(url), "error": type(exc).__name__,
                            "message": str(exc), "exit_code": exc.exit_code})
            continue
        results.append(res.to_json())
    if args.json:
        print(json.dumps(results[0] if len(results) == 1 else results, indent=2, sort_keys=True))
    else:
        for r in results:
            if "error" in r:
                print(f"{r['url']}  ERROR {r['error']}: {r['message']}")
            else:
                src = "cache" if r["cached"] else "fresh"
                print(f"{r['url']}  {r['label']}  {r['confidence']:.4f}  ({src})  {r['image']}")
    return code


def cmd_visualize(args):
    src = args.source
    if Path(src).is_file():
        data = Path(src).read_bytes()
        origin = str(Path(src))
    else:
        page = fetcher.fetch(fetcher.normalize_url(src),
                             fetcher.FetchConfig(timeout=args.timeout, verify_tls=not args.insecure))
        data, origin = page.body, str(page.final_url)
    png = bytevis.write_png(args.output, bytevis.render(data, args.order))
    side = 1 << args.order
    _emit(args, {"source": origin, "output": str(args.output), "side": side,
                 "bytes": len(data), "digest": store.content_digest(png)},
          f"wrote {side}x{side} image of {len(data)} bytes from {origin} to {args.output}")
    return EXIT_OK


def _load_split(manifest, split):
    samples = store.load_manifest(manifest)
    if split is None:
        split = "train" if any(s.split for s in samples) else "all"
    return select_split(samples, split)


def cmd_train(args):
    cfg = classifier.TrainConfig(learning_rate=args.lr, steps=args.steps, batch_size=args.batch,
                                 seed=args.seed, input_side=args.input_side)
    samples = _load_split(args.manifest, args.split)
    every = max(1, cfg.steps // 10)

    def progress(step, value):
        if (step + 1) % every == 0:
            log.info("step %d/%d loss %.5f", step + 1, cfg.steps, value)

    model, tlog = classifier.train(samples, cfg, root=manifest_root(args.manifest), progress=progress)
    classifier.save_model(model, args.output)
    head = tlog.losses[:100]
    tail = tlog.losses[-100:]
    _emit(args, {"model": str(args.output), "samples": len(samples), "steps": cfg.steps,
                 "learning_rate": cfg.learning_rate, "batch_size": cfg.batch_size,
                 "seed": cfg.seed, "input_side": cfg.input_side,
                 "final_loss": tlog.losses[-1],
                 "mean_loss_first_100": sum(head) / len(head),
                 "mean_loss_last_100": sum(tail) / len(tail)},
          f"trained on {len(samples)} samples for {cfg.steps} steps; "
          f"final loss {tlog.losses[-1]:.5f}; model written to {args.output}")
    return EXIT_OK


def cmd_evaluate(args):
    model = _load_model(args.model)
    samples = _load_split(args.manifest, args.split)
    report = evaluate(model, samples, root=manifest_root(args.manifest))
    _emit(args, report.to_json(), report.format_table())
    return EXIT_OK


def cmd_gen_corpus(args):
    cfg = CorpusConfig(out_dir=args.output, per_category=args.per_category, seed=args.seed,
                       test_fraction=args.test_fraction)
    manifest = build_corpus(cfg)
    samples = store.load_manifest(manifest)
    n_test = sum(s.split == "test" for s in samples)
    _emit(args, {"manifest": str(manifest), "samples": len(samples),
                 "train": len(samples) - n_test, "test": n_test},
          f"wrote {len(samples)} samples ({len(samples) - n_test} train / {n_test} test) "
          f"to {manifest}")
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    net = argparse.ArgumentParser(add_help=False)
    net.add_argument("--timeout", type=float, default=10.0)
    net.add_argument("--insecure", action="store_true", help="skip TLS certificate checks")

    p = argparse.ArgumentParser(prog="phishvis",
                                description="Phishing detection from HTML byte images.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common, net], help="classify one or more URLs")
    c.add_argument("urls", nargs="+")
    c.add_argument("--model", type=Path, default=None)
    c.add_argument("--home", type=Path, default=None, help="store root (default $PHISHVIS_HOME)")
    c.add_argument("--force", action="store_true", help="ignore cached verdicts")
    c.set_defaults(func=cmd_check)

    v = sub.add_parser("visualize", parents=[common, net], help="render a URL or file to PNG")
    v.add_argument("source")
    v.add_argument("-o", "--output", type=Path, required=True)
    v.add_argument("--order", type=int, default=7)
    v.set_defaults(func=cmd_visualize)

    t = sub.add_parser("train", parents=[common], help="train a model from a manifest")
    t.add_argument("--manifest", type=Path, required=True)
    t.add_argument("--steps", type=int, default=4000)
    t.add_argument("--lr", type=float, default=0.005)
    t.add_argument("--batch", type=int, default=32)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--input-side", type=int, default=64)
    t.add_argument("--split", choices=("train", "test", "all"), default=None,
                   help="default: train when the manifest has split tags, else all")
    t.add_argument("-o", "--output", type=Path, required=True)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("evaluate", parents=[common], help="evaluate a model on a manifest")
    e.add_argument("--manifest", type=Path, required=True)
    e.add_argument("--model", type=Path, required=True)
    e.add_argument("--split", choices=("train", "test", "all"), default="test")
    e.set_defaults(func=cmd_evaluate)

    g = sub.add_parser("gen-corpus", parents=[common], help="generate the synthetic corpus")
    g.add_argument("--per-category", type=int, default=250)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--test-fraction", type=float, default=0.2)
    g.add_argument("-o", "--output", type=Path, required=True)
    g.set_defaults(func=cmd_gen_corpus)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if getattr(args, "model", "") is None:
        args.model = (args.home or store.default_root()) / "model.pvm"
    try:
        return args.func(args)
    except PhishvisError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
