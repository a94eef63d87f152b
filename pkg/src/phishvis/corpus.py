"""Seeded synthetic HTML corpus.

Legitimate pages are large and varied: navigation, long copy, license
comments, style and script blocks, multi-field forms. Phishing pages are a
small clone with a single login form. Each page is a pure function of
``(label, category, index, seed)``.
"""
import random
import re
from dataclasses import dataclass
from pathlib import Path

from . import bytevis
from .errors import StoreWriteFailed
from .hilbert import DEFAULT_ORDER
from .store import LABELS, Sample, content_digest, write_manifest

KIB = 1024
LEGIT_SIZE = (20 * KIB, 200 * KIB)
PHISH_SIZE = (1 * KIB, 10 * KIB)

BRANDS = {
    "Bank Of America": "bankofamerica.com",
    "PayPal": "paypal.com",
    "ABSA": "absa.co.za",
    "DHL Tracking": "dhl.com",
    "Microsoft Login": "login.microsoftonline.com",
}

DEFAULT_CATEGORIES = (
    ("Bank Of America PHISH", "phishing"),
    ("PayPal Phish", "phishing"),
    ("ABSA Phish", "phishing"),
    ("DHL TRACKING Phish", "phishing"),
    ("Microsoft Login Phish", "phishing"),
    ("Bank Of America", "legitimate"),
    ("PayPal", "legitimate"),
    ("ABSA", "legitimate"),
    ("DHL Tracking", "legitimate"),
    ("Microsoft Login", "legitimate"),
)

WORDS = (
    "account access secure online banking service customer support privacy policy terms "
    "conditions payment transfer balance statement card credit debit mobile app business "
    "personal investment savings mortgage loan insurance rates fees tracking shipment delivery "
    "parcel express international domestic customs schedule pickup location office cloud email "
    "calendar documents storage security verify identity password recovery settings profile "
    "notification preferences language region help center contact community developers "
    "careers press investors sustainability accessibility cookies legal notice copyright "
    "rights reserved license agreement the and for with your our you to of in on by at "
    "from this that is are be will can may all new more about learn sign up today"
).split()
NON_ASCII = ("©", "®", "™", "é", "ü", "–", "—",
             "“", "”", " ", "€", "£")
CSS_PROPS = ("margin", "padding", "color", "background", "font-size", "line-height",
             "border", "display", "width", "max-width", "text-align", "z-index")
JS_SNIPPETS = (
    "window.dataLayer = window.dataLayer || [];\n\tfunction gtag(){{dataLayer.push(arguments);}}\n",
    "document.addEventListener('DOMContentLoaded', function () {{\n\tinit{n}();\n}});\n",
    "var cfg{n} = {{\"endpoint\": \"/api/v{n}\", \"retry\": {n}, \"csrf\": \"{tok}\"}};\n",
    "(function(w, d) {{\r\n\tvar s = d.createElement('script'); s.async = true;\r\n"
    "\ts.src = '/static/js/bundle.{tok}.js';\r\n\td.head.appendChild(s);\r\n}})(window, document);\n",
    "if (!window.crypto || !window.crypto.subtle) {{ console.warn('fallback {n}'); }}\n",
)
LICENSE = (
    "<!--\n  Copyright (c) {year} {brand}. All rights reserved.\n"
    "  Licensed under the Apache License, Version 2.0 (the \"License\");\n"
    "  you may not use this file except in compliance with the License.\n"
    "  Distributed on an \"AS IS\" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND.\n-->\n"
)


def slug(text):
    return re.sub(r"[^a-z0-9]+", "-", text.lower()).strip("-")


def _brand(category):
    for name, domain in BRANDS.items():
        if category.lower().startswith(name.lower()):
            return name, domain
    return category, f"{slug(category) or 'site'}.example"


def _words(rng, lo, hi):
    text = " ".join(rng.choices(WORDS, k=rng.randint(lo, hi)))
    if rng.random() < 0.3:
        text += " " + rng.choice(NON_ASCII)
    return text


def _token(rng, n=16):
    return "".join(rng.choices("0123456789abcdef", k=n))


def _legit_block(rng, brand, domain, n):
    kind = rng.randrange(8)
    if kind == 0:
        links = "".join(
            f'\n\t\t<li><a href="https://www.{domain}/{slug(_words(rng, 1, 3))}?ref=nav{i}">'
            f"{_words(rng, 1, 3)}</a></li>"
            for i in range(rng.randint(8, 30)))
        return f'<nav class="menu-{n}">\n\t<ul>{links}\n\t</ul>\n</nav>\n'
    if kind == 1:
        rules = "".join(
            f"\n.c{n}-{i} {{ {rng.choice(CSS_PROPS)}: {rng.randint(0, 40)}px; "
            f"{rng.choice(CSS_PROPS)}: #{_token(rng, 6)}; }}"
            for i in range(rng.randint(5, 25)))
        return f"<style>{rules}\n</style>\n"
    if kind == 2:
        body = "".join(rng.choice(JS_SNIPPETS).format(n=rng.randint(1, 99), tok=_token(rng))
                       for _ in range(rng.randint(2, 8)))
        return f'<script type="text/javascript">\n{body}</script>\n'
    if kind == 3:
        return LICENSE.format(year=rng.randint(2005, 2024), brand=brand)
    if kind == 4:
        fields = "".join(
            f'\n\t<label for="f{n}_{i}">{_words(rng, 1, 4)}</label>'
            f'\n\t<input id="f{n}_{i}" name="{rng.choice(WORDS)}_{i}" type="'
            f'{rng.choice(("text", "email", "tel", "checkbox", "date"))}" autocomplete="off">'
            for i in range(rng.randint(4, 14)))
        return (f'<form class="detail-form" method="post" action="/forms/{_token(rng, 8)}">'
                f'\n\t<input type="hidden" name="csrf" value="{_token(rng, 32)}">{fields}'
                f'\n\t<button type="submit">{_words(rng, 1, 2)}</button>\n</form>\n')
    if kind == 5:
        rows = "".join(
            "\n\t<tr>" + "".join(f"<td>{_words(rng, 1, 5)}</td>" for _ in range(4)) + "</tr>"
            for _ in range(rng.randint(3, 12)))
        return f'<table class="rates">{rows}\n</table>\n'
    if kind == 6:
        return (f'<footer>\n\t<p>© {rng.randint(2005, 2024)} {brand}. {_words(rng, 10, 30)}</p>'
                f'\n\t<a href="/legal/privacy">Privacy</a> | <a href="/legal/terms">Terms</a>'
                f' | <a href="/legal/cookies">Cookies</a>\n</footer>\n')
    paras = "".join(f"\n\t<p>{_words(rng, 30, 120)}</p>" for _ in range(rng.randint(1, 5)))
    return f'<section id="s{n}">\n\t<h2>{_words(rng, 2, 6)}</h2>{paras}\n</section>\n'


def _phish_filler(rng, n):
    if rng.random() < 0.7:
        return (f'<img src="img/{_token(rng, 8)}.png" alt="" width="{rng.randint(16, 400)}" '
                f'height="{rng.randint(16, 200)}">\n')
    return f"<p>{_words(rng, 5, 40)}</p>\n"


def _legit_page(rng, brand, domain):
    target = rng.randint(LEGIT_SIZE[0], LEGIT_SIZE[1] - 8 * KIB)
    head = (f"<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n"
            f"<title>{brand} | {_words(rng, 2, 5)}</title>\n"
            + "".join(f'<link rel="stylesheet" href="https://static.{domain}/css/{_token(rng, 10)}.css">\n'
                      for _ in range(rng.randint(2, 6)))
            + "</head>\n<body>\n")
    parts = [head]
    size = len(head)
    n = 0
    while size < target:
        block = _legit_block(rng, brand, domain, n)
        parts.append(block)
        size += len(block.encode("utf-8"))
        n += 1
    parts.append("</body>\n</html>\n")
    return "".join(parts)


def _phish_page(rng, brand, domain):
    target = rng.randint(PHISH_SIZE[0], PHISH_SIZE[1] - 2 * KIB)
    action = f"http://{_token(rng, 6)}.{rng.choice(('xyz', 'top', 'info', 'ru'))}/{_token(rng, 5)}.php"
    css = (f'<link rel="stylesheet" href="style.css">\n' if rng.random() < 0.5 else "")
    head = (f"<html>\n<head>\n<title>{brand} - Sign in</title>\n{css}</head>\n<body>\n"
            f'<img src="img/logo.png" alt="{brand}">\n'
            f'<form method="post" action="{action}">\n'
            f'<input type="email" name="user" placeholder="Email">\n'
            f'<input type="password" name="pass" placeholder="Password">\n'
            f'<button type="submit">Log In</button>\n</form>\n'
            + "".join(f'<a href="#">{_words(rng, 1, 3)}</a>\n' for _ in range(rng.randint(0, 3))))
    parts = [head]
    size = len(head.encode("utf-8"))
    n = 0
    while size < target:
        block = _phish_filler(rng, n)
        parts.append(block)
        size += len(block.encode("utf-8"))
        n += 1
    parts.append("</body>\n</html>\n")
    return "".join(parts)


def gen_page(label, category, index, seed):
    """Deterministic synthetic HTML for one corpus sample."""
    if label not in LABELS:
        raise ValueError(f"label must be one of {LABELS}: {label!r}")
    rng = random.Random(f"{seed}|{label}|{category}|{index}")
    brand, domain = _brand(category)
    page = _legit_page(rng, brand, domain) if label == "legitimate" else _phish_page(rng, brand, domain)
    return page.encode("utf-8")


@dataclass
class CorpusConfig:
    out_dir: Path = Path("corpus")
    per_category: int = 250
    categories: tuple = DEFAULT_CATEGORIES
    seed: int = 0
    test_fraction: float = 0.2
    order: int = DEFAULT_ORDER

    def __post_init__(self):
        self.out_dir = Path(self.out_dir)
        if self.per_category < 1:
            raise ValueError("per_category must be >= 1")
        labels = {label for _, label in self.categories}
        if labels != set(LABELS):
            raise ValueError("need at least one category per label")
        if not 0.0 <= self.test_fraction < 1.0:
            raise ValueError("test_fraction must be in [0, 1)")


def split_indices(n, test_fraction, seed, category):
    """Indices of the held-out test samples for one category."""
    rng = random.Random(f"{seed}|split|{category}")
    return set(rng.sample(range(n), round(n * test_fraction)))


def build_corpus(cfg, progress=None):
    """Render every synthetic page to PNG and write ``manifest.jsonl``."""
    samples = []
    try:
        for category, label in cfg.categories:
            test = split_indices(cfg.per_category, cfg.test_fraction, cfg.seed, category)
            rel_dir = Path("images") / slug(category)
            (cfg.out_dir / rel_dir).mkdir(parents=True, exist_ok=True)
            for i in range(cfg.per_category):
                page = gen_page(label, category, i, cfg.seed)
                rel = rel_dir / f"{i:04d}.png"
                png = bytevis.write_png(cfg.out_dir / rel, bytevis.render(page, cfg.order))
                samples.append(Sample(path=rel.as_posix(), label=label, category=category,
                                      source_url=None, digest=content_digest(png),
                                      split="test" if i in test else "train"))
                if progress is not None:
                    progress(len(samples))
    except OSError as exc:
        raise StoreWriteFailed(f"cannot write corpus under {cfg.out_dir}: {exc}") from None
    manifest = cfg.out_dir / "manifest.jsonl"
    write_manifest(manifest, samples)
    return manifest
