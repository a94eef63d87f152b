import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from phishvis import classifier

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or not rep.passed:
        _criteria.setdefault(marker.args[0], []).append(rep.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        outcomes = _criteria[n]
        status = ("FAIL" if "failed" in outcomes
                  else "SKIP" if all(o == "skipped" for o in outcomes) else "PASS")
        terminalreporter.write_line(f"criterion {n}: {status}")


class StubServer:
    """Local HTTP server. ``routes`` maps path -> (status, headers, body).

    ``body`` may be bytes, or a callable taking the handler that writes the
    response itself. Every request path is appended to ``log``.
    """

    def __init__(self):
        self.routes = {}
        self.log = []
        stub = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def do_GET(self):
                stub.log.append(self.path)
                route = stub.routes.get(self.path)
                if route is None:
                    route = (404, {}, b"not found")
                status, headers, body = route
                if callable(body):
                    body(self)
                    return
                self.send_response(status)
                for k, v in headers.items():
                    self.send_header(k, v)
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                try:
                    self.wfile.write(body)
                except OSError:
                    pass  # client hung up, e.g. after rejecting an oversize body

            def log_message(self, *args):
                pass

        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.httpd.daemon_threads = True
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)

    @property
    def base(self):
        host, port = self.httpd.server_address[:2]
        return f"http://{host}:{port}"

    def url(self, path):
        return self.base + path

    def add(self, path, body, status=200, headers=None):
        self.routes[path] = (status, headers or {"Content-Type": "text/html"}, body)


@pytest.fixture
def stub():
    server = StubServer()
    server.thread.start()
    yield server
    server.httpd.shutdown()
    server.httpd.server_close()


def slow_handler(delay, body=b"late"):
    def write(handler):
        time.sleep(delay)
        try:
            handler.send_response(200)
            handler.send_header("Content-Length", str(len(body)))
            handler.end_headers()
            handler.wfile.write(body)
        except OSError:
            pass
    return write


def chunked_handler(total, chunk=64 * 1024):
    def write(handler):
        handler.send_response(200)
        handler.send_header("Transfer-Encoding", "chunked")
        handler.end_headers()
        sent = 0
        try:
            while sent < total:
                n = min(chunk, total - sent)
                handler.wfile.write(f"{n:x}\r\n".encode() + b"a" * n + b"\r\n")
                sent += n
            handler.wfile.write(b"0\r\n\r\n")
        except OSError:
            pass
    return write


@pytest.fixture
def model_file(tmp_path):
    """An untrained default-architecture model on disk."""
    path = tmp_path / "model.pvm"
    classifier.save_model(classifier.init_model(classifier.TrainConfig(seed=7)), path)
    return path
