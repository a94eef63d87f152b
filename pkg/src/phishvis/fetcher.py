"""Single-URL raw HTML retrieval.

Only the one GET chain is issued: no rendering, no script execution, no
subresources. Bodies are returned byte-for-byte; oversize bodies are
rejected rather than clipped.
"""
import http.client
import socket
import ssl
from dataclasses import dataclass, field
from datetime import datetime, timezone
from urllib.parse import urljoin, urlsplit, urlunsplit

from .errors import (BodyTooLarge, ConnectionFailed, HttpStatus, InvalidUrl,
                     NameResolution, Timeout, TooManyRedirects, UnsupportedScheme)

DEFAULT_PORTS = {"http": 80, "https": 443}
REDIRECT_CODES = {301, 302, 303, 307, 308}
CHUNK = 64 * 1024


@dataclass(frozen=True)
class NormalizedUrl:
    scheme: str
    host: str
    port: int | None
    path: str
    query: str

    def __str__(self):
        netloc = self.host if ":" not in self.host else f"[{self.host}]"
        if self.port is not None:
            netloc = f"{netloc}:{self.port}"
        return urlunsplit((self.scheme, netloc, self.path, self.query, ""))

    @property
    def effective_port(self):
        return self.port if self.port is not None else DEFAULT_PORTS[self.scheme]

    @property
    def request_target(self):
        target = self.path or "/"
        return f"{target}?{self.query}" if self.query else target


def normalize_url(raw):
    """Lowercase scheme/host, drop the fragment and default port."""
    if isinstance(raw, NormalizedUrl):
        return raw
    if not isinstance(raw, str) or not raw.strip():
        raise InvalidUrl(f"not a URL: {raw!r}")
    try:
        parts = urlsplit(raw.strip())
        port = parts.port
    except ValueError as exc:
        raise InvalidUrl(f"unparsable URL {raw!r}: {exc}") from None
    scheme = parts.scheme.lower()
    if not scheme:
        raise InvalidUrl(f"missing scheme in {raw!r}")
    if scheme not in DEFAULT_PORTS:
        raise UnsupportedScheme(f"unsupported scheme {scheme!r}")
    host = (parts.hostname or "").lower()
    if not host:
        raise InvalidUrl(f"missing host in {raw!r}")
    if port == DEFAULT_PORTS[scheme]:
        port = None
    return NormalizedUrl(scheme, host, port, parts.path, parts.query)


@dataclass
class FetchConfig:
    timeout: float = 10.0
    max_redirects: int = 5
    max_body_bytes: int = 5 * 1024 * 1024
    user_agent: str = "phishvis/1.0"
    verify_tls: bool = True

    def __post_init__(self):
        if self.timeout <= 0 or self.max_redirects <= 0 or self.max_body_bytes <= 0:
            raise ValueError("fetch limits must be strictly positive")


@dataclass
class PageContent:
    body: bytes
    status: int
    final_url: NormalizedUrl
    fetched_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc))


def _connection(url, cfg):
    if url.scheme == "https":
        ctx = ssl.create_default_context()
        if not cfg.verify_tls:
            ctx.check_hostname = False
            ctx.verify_mode = ssl.CERT_NONE
        return http.client.HTTPSConnection(url.host, url.effective_port,
                                           timeout=cfg.timeout, context=ctx)
    return http.client.HTTPConnection(url.host, url.effective_port, timeout=cfg.timeout)


def _read_capped(resp, cap):
    declared = resp.getheader("Content-Length")
    if declared is not None and declared.isdigit() and int(declared) > cap:
        raise BodyTooLarge(f"declared body of {declared} bytes exceeds cap of {cap}")
    parts = []
    total = 0
    while True:
        chunk = resp.read(CHUNK)
        if not chunk:
            break
        total += len(chunk)
        if total > cap:
            raise BodyTooLarge(f"body exceeds cap of {cap} bytes")
        parts.append(chunk)
    return b"".join(parts)


def _get_once(url, cfg):
    conn = _connection(url, cfg)
    try:
        conn.request("GET", url.request_target, headers={
            "User-Agent": cfg.user_agent,
            "Accept": "text/html,*/*",
            "Accept-Encoding": "identity",
            "Connection": "close",
        })
        resp = conn.getresponse()
        if resp.status in REDIRECT_CODES:
            location = resp.getheader("Location")
            resp.read(CHUNK)
            return resp.status, location, None
        if resp.status >= 400:
            raise HttpStatus(resp.status, str(url))
        return resp.status, None, _read_capped(resp, cfg.max_body_bytes)
    except socket.gaierror as exc:
        raise NameResolution(f"cannot resolve {url.host}: {exc}") from None
    except (socket.timeout, TimeoutError):
        raise Timeout(f"timed out after {cfg.timeout}s fetching {url}") from None
    except ssl.SSLError as exc:
        raise ConnectionFailed(f"TLS failure for {url}: {exc}") from None
    except (OSError, http.client.HTTPException) as exc:
        raise ConnectionFailed(f"connection to {url} failed: {exc}") from None
    finally:
        conn.close()


def fetch(url, cfg=None):
    """GET ``url`` and follow up to ``cfg.max_redirects`` redirects."""
    cfg = cfg or FetchConfig()
    url = normalize_url(url)
    seen = {str(url)}
    redirects = 0
    while True:
        status, location, body = _get_once(url, cfg)
        if body is not None:
            if not 200 <= status < 300:
                raise HttpStatus(status, str(url))
            return PageContent(body=body, status=status, final_url=url)
        if not location:
            raise HttpStatus(status, str(url))
        redirects += 1
        if redirects > cfg.max_redirects:
            raise TooManyRedirects(f"more than {cfg.max_redirects} redirects from {url}")
        url = normalize_url(urljoin(str(url), location))
        if str(url) in seen:
            raise TooManyRedirects(f"redirect loop at {url}")
        seen.add(str(url))
