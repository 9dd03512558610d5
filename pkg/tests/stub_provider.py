"""In-process HTTP stub implementing the provider wire protocol for tests."""

import base64
import hashlib
import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from sceneforge.providers import LabelMask, encode_mask_b64


class StubProvider:
    """Scriptable mask/score/caption endpoints on an ephemeral port."""

    def __init__(self, mask=None, score=0.9, caption_fn=None, sleep_s=0.0,
                 raw_body=None):
        self.mask = mask
        self.score = score
        self.caption_fn = caption_fn or (lambda image_b64: "a building")
        self.sleep_s = sleep_s
        self.raw_body = raw_body  # overrides any JSON response when set
        self.requests = []
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                payload = json.loads(self.rfile.read(length) or b"{}")
                stub.requests.append((self.path, payload))
                if stub.sleep_s:
                    time.sleep(stub.sleep_s)
                if stub.raw_body is not None:
                    body = stub.raw_body
                elif self.path == "/v1/mask":
                    mask = stub.mask
                    if callable(mask):
                        mask = mask(payload)
                    body = json.dumps({"mask": encode_mask_b64(mask)}).encode()
                elif self.path == "/v1/score":
                    scores = [[stub.score for _ in payload["labels"]]
                              for _ in payload["images"]]
                    body = json.dumps({"scores": scores}).encode()
                elif self.path == "/v1/caption":
                    body = json.dumps({"caption": stub.caption_fn(payload["image"])}).encode()
                else:
                    self.send_error(404)
                    return
                try:
                    self.send_response(200)
                    self.send_header("Content-Type", "application/json")
                    self.send_header("Content-Length", str(len(body)))
                    self.end_headers()
                    self.wfile.write(body)
                except (BrokenPipeError, ConnectionResetError):
                    pass  # client gave up (timeout tests)

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def port(self) -> int:
        return self._server.server_address[1]

    def url(self, path: str) -> str:
        return f"http://127.0.0.1:{self.port}{path}"

    def __enter__(self):
        self._thread.start()
        return self

    def __exit__(self, *exc):
        self._server.shutdown()
        self._server.server_close()


def rectangle_mask(width: int, height: int, u0: int, v0: int, u1: int, v1: int) -> LabelMask:
    labels = np.zeros((height, width), dtype=np.uint16)
    labels[v0:v1, u0:u1] = 1
    return LabelMask(labels)


def caption_by_image_hash(captions):
    """Deterministic per-image caption chosen by content hash."""
    def fn(image_b64: str) -> str:
        digest = hashlib.sha256(base64.b64decode(image_b64)).digest()
        return captions[digest[0] % len(captions)]
    return fn
