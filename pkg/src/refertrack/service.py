"""HTTP annotation service backing the web labeler.

Serves the sequences under one dataset directory (``<sequence_id>.json``
files) and exposes the two-click workflow:

    GET    /sequences
    GET    /sequences/{id}/frames/{frame}
    POST   /sequences/{id}/expressions                {"text", "revision"?}
    POST   /sequences/{id}/clicks                     {"expression_id", "object_id",
                                                       "start", "end", "revision"?}
    DELETE /sequences/{id}/expressions/{eid}/referents {"object_id", "frame",
                                                        "revision"?}

Mutations are serialized per sequence and persisted atomically (temp file,
then rename) before the in-memory snapshot is swapped, so a failed write
leaves both disk and memory untouched. Each successful mutation bumps the
sequence's revision; a request carrying a stale ``revision`` is rejected
with 409 so concurrent annotators notice each other. Reads never take the
write lock: they see the last swapped-in snapshot.

Errors use ``{"code", "message", "field"?}`` bodies. No authentication:
this is a trusted-LAN labeling tool.
"""

from __future__ import annotations

import json
import logging
import re
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from . import annotate
from .data import SequenceAnnotation, load_annotation, save_annotation
from .errors import ClickRejected, RevisionConflict, ToolkitError, ValidationError

log = logging.getLogger(__name__)


class NotFound(ToolkitError):
    pass


@dataclass
class _Entry:
    ann: SequenceAnnotation
    revision: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)


class LabelStore:
    """Thread-safe view over the annotation files in one directory."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._entries: dict[str, _Entry] = {}
        for path in sorted(self.root.glob("*.json")):
            ann = load_annotation(path)
            self._entries[ann.sequence_id] = _Entry(ann=ann)

    def _entry(self, sequence_id: str) -> _Entry:
        try:
            return self._entries[sequence_id]
        except KeyError:
            raise NotFound(f"unknown sequence '{sequence_id}'") from None

    def _mutate(self, sequence_id: str, revision: int | None, op) -> tuple[SequenceAnnotation, int]:
        entry = self._entry(sequence_id)
        with entry.lock:
            if revision is not None and revision != entry.revision:
                raise RevisionConflict(
                    f"sequence '{sequence_id}' is at revision {entry.revision}, "
                    f"request expected {revision}"
                )
            new_ann = op(entry.ann)
            save_annotation(new_ann, self.root / f"{sequence_id}.json")
            entry.ann = new_ann
            entry.revision += 1
            return new_ann, entry.revision

    # ---- reads

    def list_sequences(self) -> list[dict]:
        out = []
        for sequence_id in sorted(self._entries):
            entry = self._entries[sequence_id]
            ann = entry.ann
            out.append(
                {
                    "sequence_id": ann.sequence_id,
                    "frame_count": ann.frame_count,
                    "frame_w": ann.frame_w,
                    "frame_h": ann.frame_h,
                    "revision": entry.revision,
                    "expressions": [
                        {
                            "id": expr.expression_id,
                            "text": expr.text,
                            "referent_count": len({r.object_id for r in expr.referents}),
                        }
                        for expr in ann.expressions
                    ],
                }
            )
        return out

    def get_frame(self, sequence_id: str, frame: int) -> dict:
        entry = self._entry(sequence_id)
        ann = entry.ann
        if not 0 <= frame < ann.frame_count:
            raise NotFound(f"frame {frame} outside [0, {ann.frame_count})")
        boxes = [
            {
                "object_id": obj.object_id,
                "category": obj.category,
                "box": list(obj.boxes[frame].as_tuple()),
            }
            for obj in ann.objects
            if frame in obj.boxes
        ]
        referents = {
            str(expr.expression_id): sorted(
                {
                    r.object_id
                    for r in expr.referents
                    if r.contains(frame) and frame in ann.object(r.object_id).boxes
                }
            )
            for expr in ann.expressions
        }
        return {
            "sequence_id": sequence_id,
            "frame": frame,
            "boxes": boxes,
            "referents": referents,
            "revision": entry.revision,
        }

    # ---- mutations

    def create_expression(self, sequence_id: str, text: str, revision: int | None = None) -> dict:
        result: dict = {}

        def op(ann: SequenceAnnotation) -> SequenceAnnotation:
            new_ann, expression_id = annotate.create_expression(ann, text)
            result["expression_id"] = expression_id
            return new_ann

        _, new_revision = self._mutate(sequence_id, revision, op)
        result["revision"] = new_revision
        return result

    def _intervals(self, ann: SequenceAnnotation, expression_id: int) -> list[dict]:
        return [
            {"object_id": r.object_id, "start": r.start, "end": r.end}
            for r in ann.expression(expression_id).referents
        ]

    def apply_click(
        self,
        sequence_id: str,
        expression_id: int,
        object_id: int,
        start: int,
        end: int,
        revision: int | None = None,
    ) -> dict:
        click = annotate.ClickPair(object_id, start, end, expression_id)
        new_ann, new_revision = self._mutate(
            sequence_id, revision, lambda ann: annotate.propagate(ann, click)
        )
        return {
            "expression_id": expression_id,
            "object_id": object_id,
            "intervals": self._intervals(new_ann, expression_id),
            "revision": new_revision,
        }

    def retract_referent(
        self,
        sequence_id: str,
        expression_id: int,
        object_id: int,
        frame: int,
        revision: int | None = None,
    ) -> dict:
        new_ann, new_revision = self._mutate(
            sequence_id,
            revision,
            lambda ann: annotate.retract(ann, expression_id, object_id, frame),
        )
        return {
            "expression_id": expression_id,
            "object_id": object_id,
            "intervals": self._intervals(new_ann, expression_id),
            "revision": new_revision,
        }


_ROUTES = [
    ("GET", re.compile(r"^/sequences$"), "list_sequences"),
    ("GET", re.compile(r"^/sequences/([^/]+)/frames/(\d+)$"), "get_frame"),
    ("POST", re.compile(r"^/sequences/([^/]+)/expressions$"), "create_expression"),
    ("POST", re.compile(r"^/sequences/([^/]+)/clicks$"), "apply_click"),
    (
        "DELETE",
        re.compile(r"^/sequences/([^/]+)/expressions/(\d+)/referents$"),
        "retract_referent",
    ),
]


class _Handler(BaseHTTPRequestHandler):
    store: LabelStore  # set by make_server

    protocol_version = "HTTP/1.1"

    def log_message(self, fmt: str, *args) -> None:
        log.debug("%s - %s", self.address_string(), fmt % args)

    def _send(self, status: int, payload) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _error(self, status: int, code: str, message: str, fieldname: str | None = None) -> None:
        payload = {"code": code, "message": message}
        if fieldname:
            payload["field"] = fieldname
        self._send(status, payload)

    def _body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b"{}"
        try:
            doc = json.loads(raw.decode("utf-8") or "{}")
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ValueError(f"request body is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ValueError("request body must be a JSON object")
        return doc

    def do_OPTIONS(self) -> None:  # CORS preflight for the web labeler
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def _dispatch(self, method: str) -> None:
        path = self.path.split("?", 1)[0].rstrip("/") or "/"
        for verb, pattern, name in _ROUTES:
            if verb != method:
                continue
            match = pattern.match(path)
            if match:
                getattr(self, f"_handle_{name}")(*match.groups())
                return
        self._error(404, "not_found", f"no route for {method} {path}")

    def do_GET(self) -> None:
        self._dispatch("GET")

    def do_POST(self) -> None:
        self._dispatch("POST")

    def do_DELETE(self) -> None:
        self._dispatch("DELETE")

    # ---- endpoint handlers

    def _handle_list_sequences(self) -> None:
        self._send(200, self.store.list_sequences())

    def _handle_get_frame(self, sequence_id: str, frame: str) -> None:
        try:
            self._send(200, self.store.get_frame(sequence_id, int(frame)))
        except NotFound as exc:
            self._error(404, "not_found", str(exc))

    def _handle_create_expression(self, sequence_id: str) -> None:
        try:
            body = self._body()
            text = body.get("text", "")
            if not isinstance(text, str) or not text.strip():
                self._error(400, "bad_request", "expression text is empty", "text")
                return
            result = self.store.create_expression(sequence_id, text, body.get("revision"))
            self._send(201, result)
        except ValueError as exc:
            self._error(400, "bad_request", str(exc))
        except NotFound as exc:
            self._error(404, "not_found", str(exc))
        except RevisionConflict as exc:
            self._error(409, "conflict", str(exc))
        except OSError as exc:
            self._error(500, "storage_error", f"could not persist annotation: {exc}")

    def _handle_apply_click(self, sequence_id: str) -> None:
        try:
            body = self._body()
            result = self.store.apply_click(
                sequence_id,
                expression_id=int(body["expression_id"]),
                object_id=int(body["object_id"]),
                start=int(body["start"]),
                end=int(body["end"]),
                revision=body.get("revision"),
            )
            self._send(200, result)
        except KeyError as exc:
            self._error(400, "bad_request", f"missing field {exc}", str(exc).strip("'"))
        except NotFound as exc:
            self._error(404, "not_found", str(exc))
        except RevisionConflict as exc:
            self._error(409, "conflict", str(exc))
        except (ClickRejected, ValidationError) as exc:
            self._error(422, "invalid_click", str(exc))
        except ValueError as exc:
            self._error(400, "bad_request", str(exc))
        except OSError as exc:
            self._error(500, "storage_error", f"could not persist annotation: {exc}")

    def _handle_retract_referent(self, sequence_id: str, expression_id: str) -> None:
        try:
            body = self._body()
            result = self.store.retract_referent(
                sequence_id,
                expression_id=int(expression_id),
                object_id=int(body["object_id"]),
                frame=int(body["frame"]),
                revision=body.get("revision"),
            )
            self._send(200, result)
        except KeyError as exc:
            self._error(400, "bad_request", f"missing field {exc}", str(exc).strip("'"))
        except NotFound as exc:
            self._error(404, "not_found", str(exc))
        except RevisionConflict as exc:
            self._error(409, "conflict", str(exc))
        except ValidationError as exc:
            self._error(422, "invalid_retract", str(exc))
        except ValueError as exc:
            self._error(400, "bad_request", str(exc))
        except OSError as exc:
            self._error(500, "storage_error", f"could not persist annotation: {exc}")


def make_server(root: str | Path, bind: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    """Build (but do not start) the HTTP server for a dataset directory."""
    store = LabelStore(root)
    handler = type("BoundHandler", (_Handler,), {"store": store})
    server = ThreadingHTTPServer((bind, port), handler)
    return server
