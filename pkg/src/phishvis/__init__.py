"""Phishing page detection from byte-class images of raw HTML."""
from .bytevis import ByteClass, byte_to_rgb, classify_byte, encode_png, render, sample_stream
from .classifier import (Model, TrainConfig, Verdict, downsample, forward, init_model,
                         load_model, predict, save_model, train)
from .fetcher import FetchConfig, fetch, normalize_url
from .hilbert import d2xy, xy2d
from .metrics import accuracy, confusion, f1, per_category_report, precision, recall
from .pipeline import Checker, check_url
from .store import Sample, Store, UrlRecord, content_digest

__version__ = "0.1.0"
