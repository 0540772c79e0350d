"""Local HTTP API over one project, consumed by the review UI and the CLI's
`serve` command. JSON bodies everywhere except the Turtle export endpoint."""

from __future__ import annotations

import json
import os
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from . import pipeline, testkit
from .gateway import GatewayError, ProposalStatus
from .metrics import metrics_report
from .model import extract_snapshot
from .rdf import serialize_turtle

_STATIC_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".svg": "image/svg+xml",
}


class ProjectApp:
    """Holds the served project; mutations are serialized and persisted before
    the response goes out (write-temp-then-rename, so crashes cannot corrupt)."""

    def __init__(self, project_path: str, provider, static_dir: str | None = None):
        self.project_path = project_path
        self.project = pipeline.load_project(project_path)
        self.provider = provider
        self.static_dir = static_dir
        self.lock = threading.Lock()

    def persist(self):
        pipeline.save_project(self.project, self.project_path)

    # -- read views ----------------------------------------------------------

    def project_summary(self) -> dict:
        p = self.project
        by_status: dict[str, int] = {}
        for prop in p.proposals.values():
            by_status[prop.status.value] = by_status.get(prop.status.value, 0) + 1
        return {
            "name": p.name,
            "namespace": p.namespace,
            "prefix_label": p.prefix_label,
            "stage_status": {s.value: p.stage_status[s].value for s in pipeline.STAGE_ORDER},
            "stage_order": [s.value for s in pipeline.STAGE_ORDER],
            "proposal_counts": by_status,
            "glossary_size": len(p.glossary),
            "icqs": [{"id": q.id, "question": q.question, "status": q.status} for q in p.icqs],
            "modelets": [{"id": m.id, "title": m.title, "status": m.status.value,
                          "covered_cq_ids": m.covered_cq_ids,
                          "gate_report": m.gate_report} for m in p.modelets],
            "test_case_count": len(p.test_cases),
            "feedback_count": len(p.feedback_items),
            "triple_count": len(p.graph),
        }

    def proposals_view(self, status: str | None) -> list[dict]:
        out = []
        for prop in self.project.proposals.values():
            if status and prop.status.value != status:
                continue
            out.append(prop.to_dict())
        return out

    def metrics_view(self) -> dict:
        snapshot = extract_snapshot(self.project.graph)
        return metrics_report(self.project.graph, snapshot).to_dict()

    def tests_view(self) -> dict:
        graph = self.project.graph
        snapshot = extract_snapshot(graph)
        model_findings = testkit.run_model_tests(graph, snapshot)
        data_findings = testkit.run_data_tests(graph, snapshot)
        query = testkit.run_query_tests(graph, self.project.test_cases)
        return {
            "model": [f.to_dict() for f in model_findings],
            "data": [f.to_dict() for f in data_findings],
            "query": query.to_dict(),
        }

    def log_view(self, tail: int | None) -> list[dict]:
        entries = self.project.revision_log
        if tail:
            entries = entries[-tail:]
        return [e.to_dict() for e in entries]

    # -- mutations -----------------------------------------------------------

    def apply_decisions(self, decisions) -> dict:
        with self.lock:
            pipeline.apply_decisions(self.project, decisions)
            self.persist()
            return {"applied": len(decisions),
                    "stage_status": {s.value: self.project.stage_status[s].value
                                     for s in pipeline.STAGE_ORDER}}

    def run_stage(self, stage_name: str, body: dict) -> dict:
        stage = pipeline.Stage(stage_name)
        with self.lock:
            stored = pipeline.run_stage(self.project, stage, self.provider,
                                        focus=body.get("focus"),
                                        covered_cq_ids=body.get("covers"),
                                        k=body.get("k", 3))
            self.persist()
            return {"stage": stage.value,
                    "status": self.project.stage_status[stage].value,
                    "proposals": [p.to_dict() for p in stored]}

    def revert_stage(self, stage_name: str) -> dict:
        stage = pipeline.Stage(stage_name)
        with self.lock:
            pipeline.revert_stage(self.project, stage)
            self.persist()
            return {"stage": stage.value,
                    "stage_status": {s.value: self.project.stage_status[s].value
                                     for s in pipeline.STAGE_ORDER}}

    def merge_modelet(self, modelet_id: str) -> dict:
        with self.lock:
            pipeline.merge_modelet(self.project, modelet_id)
            self.persist()
            return {"modelet": modelet_id, "status": "Merged",
                    "triple_count": len(self.project.graph)}


class _Handler(BaseHTTPRequestHandler):
    app: ProjectApp = None  # set by make_server

    # -- plumbing -------------------------------------------------------------

    def log_message(self, *args):
        pass

    def _send(self, status: int, payload, content_type="application/json"):
        data = payload if isinstance(payload, bytes) else \
            json.dumps(payload, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _error(self, status: int, kind: str, message: str, detail=None):
        body = {"error": kind, "message": message}
        if detail is not None:
            body["detail"] = detail
        self._send(status, body)

    def _read_json(self):
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            raise ValueError("empty request body")
        return json.loads(raw.decode("utf-8"))

    # -- routing --------------------------------------------------------------

    def do_GET(self):
        url = urlparse(self.path)
        parts = [p for p in url.path.split("/") if p]
        try:
            if parts[:1] == ["api"]:
                self._api_get(parts[1:], parse_qs(url.query))
            else:
                self._static(url.path)
        except BrokenPipeError:
            pass
        except Exception as exc:  # defensive: a handler bug must not kill the server
            self._error(500, type(exc).__name__, str(exc))

    def do_POST(self):
        url = urlparse(self.path)
        parts = [p for p in url.path.split("/") if p]
        try:
            if parts[:1] == ["api"]:
                self._api_post(parts[1:])
            else:
                self._error(404, "NotFound", f"no route {url.path}")
        except BrokenPipeError:
            pass
        except Exception as exc:
            self._error(500, type(exc).__name__, str(exc))

    def _api_get(self, parts, query):
        app = self.app
        if parts == ["project"]:
            self._send(200, app.project_summary())
        elif parts == ["proposals"]:
            status = (query.get("status") or [None])[0]
            if status is not None:
                try:
                    ProposalStatus(status)
                except ValueError:
                    return self._error(400, "BadRequest", f"unknown status {status!r}")
            self._send(200, app.proposals_view(status))
        elif parts == ["metrics"]:
            self._send(200, app.metrics_view())
        elif parts == ["tests", "report"]:
            self._send(200, app.tests_view())
        elif parts == ["ontology.ttl"]:
            text = serialize_turtle(app.project.graph, app.project.prefixes)
            self._send(200, text.encode("utf-8"), content_type="text/turtle; charset=utf-8")
        elif parts == ["log"]:
            tail = query.get("tail", [None])[0]
            self._send(200, app.log_view(int(tail) if tail else None))
        else:
            self._error(404, "NotFound", "unknown API route " + "/".join(parts))

    def _api_post(self, parts):
        app = self.app
        try:
            if parts == ["decisions"]:
                decisions = self._read_json()
                if not isinstance(decisions, list):
                    return self._error(400, "BadRequest", "decision body must be a list")
                self._send(200, app.apply_decisions(decisions))
            elif len(parts) == 3 and parts[0] == "stages" and parts[2] == "run":
                body = {}
                if int(self.headers.get("Content-Length") or 0):
                    body = self._read_json()
                self._send(200, app.run_stage(parts[1], body))
            elif len(parts) == 3 and parts[0] == "stages" and parts[2] == "revert":
                self._send(200, app.revert_stage(parts[1]))
            elif len(parts) == 3 and parts[0] == "modelets" and parts[2] == "merge":
                self._send(200, app.merge_modelet(parts[1]))
            else:
                self._error(404, "NotFound", "unknown API route " + "/".join(parts))
        except (json.JSONDecodeError, ValueError) as exc:
            self._error(400, "BadRequest", str(exc))
        except (pipeline.UnknownProposalError, pipeline.UnknownModeletError) as exc:
            self._error(404, type(exc).__name__.removesuffix("Error"), str(exc))
        except pipeline.GateFailedError as exc:
            self._error(409, "GateFailed", str(exc), detail=exc.report)
        except (pipeline.StageOrderViolationError, pipeline.AlreadyDecidedError) as exc:
            self._error(409, type(exc).__name__.removesuffix("Error"), str(exc))
        except pipeline.CompileError as exc:
            self._error(409, "CompileError", str(exc))
        except GatewayError as exc:
            # sanitized: error class and message only, never credentials
            self._error(500, type(exc).__name__, str(exc))

    def _static(self, path):
        app = self.app
        if app.static_dir is None:
            if path in ("/", "/index.html"):
                return self._send(200, {"service": "ontoforge", "api": "/api/project"})
            return self._error(404, "NotFound", "no UI bundle configured")
        rel = "index.html" if path == "/" else path.lstrip("/")
        full = os.path.realpath(os.path.join(app.static_dir, rel))
        if not full.startswith(os.path.realpath(app.static_dir)) or not os.path.isfile(full):
            return self._error(404, "NotFound", f"no static file {path}")
        ext = os.path.splitext(full)[1]
        with open(full, "rb") as fh:
            self._send(200, fh.read(), content_type=_STATIC_TYPES.get(ext, "application/octet-stream"))


def make_server(project_path: str, provider, host: str = "127.0.0.1", port: int = 8760,
                static_dir: str | None = None) -> ThreadingHTTPServer:
    app = ProjectApp(project_path, provider, static_dir=static_dir)
    handler = type("BoundHandler", (_Handler,), {"app": app})
    server = ThreadingHTTPServer((host, port), handler)
    server.app = app
    return server


def serve(project_path: str, provider, host: str = "127.0.0.1", port: int = 8760,
          static_dir: str | None = None):
    server = make_server(project_path, provider, host, port, static_dir)
    actual = server.server_address[1]
    import sys
    print(f"listening on http://{host}:{actual}", file=sys.stderr, flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
    return server
