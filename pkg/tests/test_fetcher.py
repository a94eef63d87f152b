import hashlib
import os

import pytest
from hypothesis import given, strategies as st

from phishvis import fetcher
from phishvis.errors import (BodyTooLarge, HttpStatus, InvalidUrl, NameResolution, Timeout,
                             TooManyRedirects, UnsupportedScheme)

from conftest import chunked_handler, slow_handler


def test_normalize_examples():
    assert str(fetcher.normalize_url("HTTP://Example.COM:80/a#frag")) == "http://example.com/a"
    assert str(fetcher.normalize_url("https://x.org/p?q=1")) == "https://x.org/p?q=1"
    assert str(fetcher.normalize_url("https://X.org:443")) == "https://x.org"
    assert str(fetcher.normalize_url("https://x.org:8443/P")) == "https://x.org:8443/P"
    with pytest.raises(UnsupportedScheme):
        fetcher.normalize_url("ftp://x.org/")


@pytest.mark.parametrize("raw", ["", "   ", "example.com/no-scheme", "http:///path",
                                 "http://host:notaport/", None])
def test_normalize_rejects(raw):
    with pytest.raises(InvalidUrl):
        fetcher.normalize_url(raw)


_hosts = st.from_regex(r"[A-Za-z][A-Za-z0-9-]{0,10}(\.[A-Za-z]{2,5}){1,2}", fullmatch=True)
_paths = st.from_regex(r"(/[A-Za-z0-9._~%-]{0,8}){0,3}", fullmatch=True)


@given(st.sampled_from(["http", "HTTP", "https", "Https"]), _hosts,
       st.sampled_from(["", ":80", ":443", ":8080"]), _paths,
       st.sampled_from(["", "?a=1", "?Q=X&y"]), st.sampled_from(["", "#top", "#"]))
def test_normalize_idempotent(scheme, host, port, path, query, frag):
    once = fetcher.normalize_url(f"{scheme}://{host}{port}{path}{query}{frag}")
    assert fetcher.normalize_url(str(once)) == once
    assert "#" not in str(once)
    assert once.host == host.lower()


def test_fetch_echo(stub):
    body = os.urandom(1024)
    stub.add("/page", body, headers={"Content-Type": "text/html; charset=iso-8859-1"})
    page = fetcher.fetch(fetcher.normalize_url(stub.url("/page")))
    assert page.status == 200
    assert hashlib.sha256(page.body).digest() == hashlib.sha256(body).digest()
    assert page.fetched_at.tzinfo is not None
    assert stub.log == ["/page"]


def test_no_subresource_requests(stub):
    stub.add("/p", b'<html><img src="/a.png"><script src="/b.js"></script>'
                   b'<link rel="stylesheet" href="/c.css"></html>')
    fetcher.fetch(stub.url("/p"))
    assert stub.log == ["/p"]


def test_user_agent_sent(stub):
    seen = {}

    def write(handler):
        seen["ua"] = handler.headers.get("User-Agent")
        handler.send_response(200)
        handler.send_header("Content-Length", "2")
        handler.end_headers()
        handler.wfile.write(b"ok")

    stub.add("/ua", write)
    fetcher.fetch(stub.url("/ua"))
    assert seen["ua"] == "phishvis/1.0"
    fetcher.fetch(stub.url("/ua"), fetcher.FetchConfig(user_agent="lab/2"))
    assert seen["ua"] == "lab/2"


def test_http_404(stub):
    with pytest.raises(HttpStatus) as exc:
        fetcher.fetch(stub.url("/missing"))
    assert exc.value.code == 404


def test_body_too_large_declared(stub):
    stub.add("/big", b"a" * (6 * 1024 * 1024))
    with pytest.raises(BodyTooLarge):
        fetcher.fetch(stub.url("/big"))


def test_body_too_large_streamed(stub):
    stub.add("/stream", chunked_handler(6 * 1024 * 1024))
    with pytest.raises(BodyTooLarge):
        fetcher.fetch(stub.url("/stream"))


def test_body_at_cap_is_accepted(stub):
    stub.add("/exact", chunked_handler(4096, chunk=1000))
    page = fetcher.fetch(stub.url("/exact"), fetcher.FetchConfig(max_body_bytes=4096))
    assert len(page.body) == 4096


def test_redirects_followed(stub):
    stub.add("/a", b"", status=302, headers={"Location": "/b"})
    stub.add("/b", b"", status=301, headers={"Location": stub.url("/c#x")})
    stub.add("/c", b"final")
    page = fetcher.fetch(stub.url("/a"))
    assert page.body == b"final"
    assert page.final_url.path == "/c"
    assert stub.log == ["/a", "/b", "/c"]


def test_redirect_limit(stub):
    for i in range(7):
        stub.add(f"/r{i}", b"", status=302, headers={"Location": f"/r{i + 1}"})
    stub.add("/r7", b"end")
    with pytest.raises(TooManyRedirects):
        fetcher.fetch(stub.url("/r0"))
    assert fetcher.fetch(stub.url("/r0"), fetcher.FetchConfig(max_redirects=7)).body == b"end"


def test_redirect_loop(stub):
    stub.add("/x", b"", status=302, headers={"Location": "/y"})
    stub.add("/y", b"", status=302, headers={"Location": "/x"})
    with pytest.raises(TooManyRedirects):
        fetcher.fetch(stub.url("/x"))
    assert len(stub.log) == 2


def test_timeout(stub):
    stub.add("/slow", slow_handler(1.5))
    with pytest.raises(Timeout):
        fetcher.fetch(stub.url("/slow"), fetcher.FetchConfig(timeout=0.3))


def test_name_resolution():
    with pytest.raises(NameResolution):
        fetcher.fetch("http://no-such-host.invalid/", fetcher.FetchConfig(timeout=5))


def test_config_limits_positive():
    with pytest.raises(ValueError):
        fetcher.FetchConfig(timeout=0)
    with pytest.raises(ValueError):
        fetcher.FetchConfig(max_body_bytes=-1)
