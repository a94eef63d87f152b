"""Append-only JSON-lines persistence for URL verdicts and dataset manifests.

Layout under the store root (``$PHISHVIS_HOME``, default ``./phishvis-data``)::

    records.jsonl          one UrlRecord per line, newest last
    images/<digest>.png    rendered pages, keyed by SHA-256 of the page body

A trailing line without a newline is treated as an interrupted write and
dropped with a warning. Any other unparsable line is corruption.
"""
import hashlib
import json
import logging
import os
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .errors import ManifestParse, StoreCorrupt, StoreWriteFailed
from .fetcher import NormalizedUrl, normalize_url

log = logging.getLogger(__name__)

LABELS = ("legitimate", "phishing")
HOME_ENV = "PHISHVIS_HOME"
DEFAULT_HOME = "./phishvis-data"
_HEX64 = re.compile(r"^[0-9a-f]{64}$")


def content_digest(data):
    return hashlib.sha256(bytes(data)).hexdigest()


def default_root():
    return Path(os.environ.get(HOME_ENV) or DEFAULT_HOME)


def format_time(ts):
    return ts.astimezone(timezone.utc).isoformat(timespec="seconds").replace("+00:00", "Z")


def parse_time(text):
    ts = datetime.fromisoformat(text.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        raise ValueError(f"timestamp without zone: {text}")
    return ts.astimezone(timezone.utc)


@dataclass(frozen=True)
class UrlRecord:
    url: NormalizedUrl
    content_digest: str
    fetched_at: datetime
    label: str
    confidence: float
    image_path: str

    def __post_init__(self):
        if not _HEX64.match(self.content_digest or ""):
            raise ValueError(f"digest must be 64 lowercase hex chars: {self.content_digest!r}")
        if self.label not in LABELS:
            raise ValueError(f"label must be one of {LABELS}: {self.label!r}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence outside [0, 1]: {self.confidence}")

    def to_json(self):
        return {
            "url": str(self.url),
            "digest": self.content_digest,
            "fetched_at": format_time(self.fetched_at),
            "label": self.label,
            "confidence": self.confidence,
            "image": self.image_path,
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            url=normalize_url(obj["url"]),
            content_digest=obj["digest"],
            fetched_at=parse_time(obj["fetched_at"]),
            label=obj["label"],
            confidence=float(obj["confidence"]),
            image_path=obj["image"],
        )


def _read_jsonl(path):
    """Yield ``(line_no, obj_or_exception)``; drops a torn final line."""
    try:
        text = Path(path).read_bytes().decode("utf-8")
    except (FileNotFoundError, NotADirectoryError):
        return
    except (OSError, UnicodeDecodeError) as exc:
        raise StoreCorrupt(f"cannot read {path}: {exc}") from None
    lines = text.split("\n")
    torn = lines.pop()  # "" when the file ends with a newline
    for no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            yield no, json.loads(line)
        except json.JSONDecodeError as exc:
            yield no, exc
    if torn.strip():
        try:
            obj = json.loads(torn)
        except json.JSONDecodeError:
            log.warning("%s: dropping incomplete final line %d", path, len(lines) + 1)
        else:
            yield len(lines) + 1, obj


def _append_line(path, obj):
    line = json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        _drop_torn_tail(path)
        with open(path, "a", encoding="utf-8") as f:
            f.write(line)
            f.flush()
            os.fsync(f.fileno())
    except OSError as exc:
        raise StoreWriteFailed(f"cannot append to {path}: {exc}") from None


def _drop_torn_tail(path):
    # An interrupted write leaves a final line without "\n". Cut it off (or
    # terminate it, if it is complete JSON) so the next record starts clean.
    try:
        f = open(path, "r+b")
    except FileNotFoundError:
        return
    with f:
        size = f.seek(0, os.SEEK_END)
        if size == 0:
            return
        f.seek(size - 1)
        if f.read(1) == b"\n":
            return
        f.seek(0)
        data = f.read()
        keep = data.rfind(b"\n") + 1
        try:
            json.loads(data[keep:])
        except ValueError:
            log.warning("%s: truncating incomplete final line", path)
            f.truncate(keep)
        else:
            f.write(b"\n")


class Store:
    """URL -> verdict cache backed by ``records.jsonl``.

    Single writer per root. The index is loaded once on open, and every
    ``put`` updates it, so lookups never reread the file.
    """

    def __init__(self, root=None):
        self.root = Path(root) if root is not None else default_root()
        self.records_path = self.root / "records.jsonl"
        self.images_dir = self.root / "images"
        self._records = []
        self._latest = {}
        for no, obj in _read_jsonl(self.records_path):
            if isinstance(obj, Exception):
                raise StoreCorrupt(f"{self.records_path} line {no}: {obj}")
            try:
                rec = UrlRecord.from_json(obj)
            except (KeyError, TypeError, ValueError) as exc:
                raise StoreCorrupt(f"{self.records_path} line {no}: {exc}") from None
            self._remember(rec)

    def _remember(self, rec):
        self._records.append(rec)
        self._latest[str(rec.url)] = rec

    def __len__(self):
        return len(self._records)

    def records(self):
        return list(self._records)

    def lookup(self, url):
        return self._latest.get(str(normalize_url(url)))

    def put(self, record):
        if not (self.root / record.image_path).is_file():
            raise StoreWriteFailed(f"image {record.image_path} missing under {self.root}")
        _append_line(self.records_path, record.to_json())
        self._remember(record)

    def image_path_for(self, digest):
        return Path("images") / f"{digest}.png"

    def save_image(self, digest, png_bytes):
        rel = self.image_path_for(digest)
        dest = self.root / rel
        try:
            dest.parent.mkdir(parents=True, exist_ok=True)
            tmp = dest.with_suffix(".tmp")
            tmp.write_bytes(png_bytes)
            os.replace(tmp, dest)
        except OSError as exc:
            raise StoreWriteFailed(f"cannot write {dest}: {exc}") from None
        return rel.as_posix()


@dataclass(frozen=True)
class Sample:
    path: str
    label: str
    category: str
    source_url: str | None = None
    digest: str = ""
    split: str | None = None

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"label must be one of {LABELS}: {self.label!r}")
        if self.split not in (None, "train", "test"):
            raise ValueError(f"split must be train or test: {self.split!r}")

    @property
    def target(self):
        return LABELS.index(self.label)

    def to_json(self):
        obj = {"path": self.path, "label": self.label, "category": self.category,
               "source_url": self.source_url, "digest": self.digest}
        if self.split is not None:
            obj["split"] = self.split
        return obj

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict):
            raise TypeError("manifest line is not an object")
        return cls(path=obj["path"], label=obj["label"], category=obj["category"],
                   source_url=obj.get("source_url"), digest=obj.get("digest", ""),
                   split=obj.get("split"))

    def resolve(self, base):
        p = Path(self.path)
        return p if p.is_absolute() else Path(base) / p


def load_manifest(path):
    if not Path(path).is_file():
        raise ManifestParse(0, f"no manifest at {path}")
    samples = []
    for no, obj in _read_jsonl(path):
        if isinstance(obj, Exception):
            raise ManifestParse(no, str(obj))
        try:
            samples.append(Sample.from_json(obj))
        except (KeyError, TypeError, ValueError) as exc:
            raise ManifestParse(no, f"{type(exc).__name__}: {exc}") from None
    return samples


def append_manifest(path, sample):
    _append_line(Path(path), sample.to_json())


def write_manifest(path, samples):
    """Write a whole manifest in one go (replaces any existing file)."""
    path = Path(path)
    text = "".join(json.dumps(s.to_json(), sort_keys=True, separators=(",", ":")) + "\n"
                   for s in samples)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise StoreWriteFailed(f"cannot write {path}: {exc}") from None
