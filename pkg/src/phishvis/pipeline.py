"""URL check flow: dedupe lookup, fetch, render, classify, persist."""
import time
from collections import Counter
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

from . import bytevis, classifier, fetcher
from .errors import EmptyContent
from .hilbert import DEFAULT_ORDER
from .metrics import per_category_report
from .store import Store, UrlRecord, content_digest


@dataclass
class CheckResult:
    url: str
    cached: bool
    verdict: classifier.Verdict
    image_path: str
    timings: dict = field(default_factory=dict)

    def to_json(self):
        return {"url": self.url, "cached": self.cached, "label": self.verdict.label,
                "confidence": self.verdict.confidence, "image": self.image_path,
                "timings_ms": self.timings}


@contextmanager
def _timed(timings, stage):
    start = time.perf_counter()
    yield
    timings[stage] = round((time.perf_counter() - start) * 1e3, 3)


class Checker:
    """Runs URL checks against one store and one model.

    ``counters`` tracks how many fetches, renders and predictions actually ran.
    """

    def __init__(self, model, store, fetch_config=None, order=DEFAULT_ORDER):
        self.model = model
        self.store = store
        self.fetch_config = fetch_config or fetcher.FetchConfig()
        self.order = order
        self.counters = Counter()

    def fetch(self, url):
        self.counters["fetch"] += 1
        return fetcher.fetch(url, self.fetch_config)

    def check(self, url, force=False, page=None):
        """Classify ``url``; a stored verdict is reused unless ``force``.

        ``page`` lets a caller hand over an already-fetched body.
        """
        url = fetcher.normalize_url(url)
        timings = {}
        with _timed(timings, "lookup"):
            hit = None if force else self.store.lookup(url)
        if hit is not None:
            return CheckResult(str(url), True, classifier.Verdict(hit.label, hit.confidence),
                               hit.image_path, timings)
        with _timed(timings, "fetch"):
            if page is None:
                page = self.fetch(url)
        if not page.body:
            raise EmptyContent(f"empty body from {url}")
        with _timed(timings, "render"):
            self.counters["render"] += 1
            img = bytevis.render(page.body, self.order)
            png = bytevis.encode_png(img)
        with _timed(timings, "predict"):
            self.counters["predict"] += 1
            small = classifier.downsample(img, self.model.input_side)
            verdict = classifier.predict(self.model, small)
        with _timed(timings, "store"):
            digest = content_digest(page.body)
            rel = self.store.save_image(digest, png)
            self.store.put(UrlRecord(url=url, content_digest=digest, fetched_at=page.fetched_at,
                                     label=verdict.label, confidence=verdict.confidence,
                                     image_path=rel))
        return CheckResult(str(url), False, verdict, rel, timings)


def check_url(url, model_path, store=None, force=False, fetch_config=None):
    store = store if store is not None else Store()
    model = classifier.load_model(model_path)
    return Checker(model, store, fetch_config).check(url, force=force)


def evaluate(model, samples, root="."):
    """Predict every sample and build the per-category report."""
    images, _ = classifier.load_images(samples, model.input_side, root)
    verdicts = classifier.predict_batch(model, images)
    return per_category_report((v.label, s.label, s.category) for v, s in zip(verdicts, samples))


def select_split(samples, split):
    if split in (None, "all"):
        return list(samples)
    return [s for s in samples if s.split == split]


def manifest_root(manifest_path):
    return Path(manifest_path).resolve().parent
