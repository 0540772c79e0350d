"""Command-line entry point. Data goes to stdout, diagnostics to stderr;
exit codes: 0 success, 1 domain error, 2 usage error."""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import docgen, feedback, pipeline, testkit
from .gateway import GatewayError, HttpProvider, MockProvider
from .metrics import metrics_report
from .model import extract_snapshot
from .rdf import TurtleSyntaxError, UnknownPrefixError, serialize_turtle

DOMAIN_ERRORS = (
    pipeline.StageOrderViolationError, pipeline.UnknownProposalError,
    pipeline.AlreadyDecidedError, pipeline.CompileError, pipeline.GateFailedError,
    pipeline.UnknownModeletError, pipeline.DuplicateProjectNameError,
    pipeline.ProjectIoError, pipeline.SchemaVersionMismatchError,
    pipeline.CorruptProjectError, GatewayError, TurtleSyntaxError,
    UnknownPrefixError, feedback.FeedbackParseError, ValueError, OSError,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ontoforge",
        description="Staged, LLM-assisted ontology engineering workbench.")
    parser.add_argument("--project", default="project.json",
                        help="path to the project file (default ./project.json)")
    parser.add_argument("--mock", metavar="DIR",
                        help="use fixture playback from DIR instead of a live provider")
    parser.add_argument("--lenient-mock", action="store_true",
                        help="mock mode answers unknown prompts with an empty stub")
    parser.add_argument("--ui-dir", help="static directory served at / by `serve`")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="create a new project file")
    p.add_argument("path", help="target project file")
    p.add_argument("--name", required=True)
    p.add_argument("--scenario", action="append", required=True, metavar="FILE",
                   help="scenario text file (repeatable)")
    p.add_argument("--namespace", default="http://example.org/onto/ns#")
    p.add_argument("--prefix", default="ns")
    p.add_argument("--seed", metavar="TTL", help="seed Turtle file for the main model")

    p = sub.add_parser("demo", help="materialize a bundled demo project")
    p.add_argument("action", choices=["init"])
    p.add_argument("dir", help="target directory")
    p.add_argument("--dataset", choices=["henri", "table4"], default="henri")
    p.add_argument("--variant", choices=["full", "gatefail", "review", "fresh"],
                   default="full")

    p = sub.add_parser("stage", help="run, inspect or revert pipeline stages")
    stage_sub = p.add_subparsers(dest="stage_command", required=True)
    run_p = stage_sub.add_parser("run")
    run_p.add_argument("stage", choices=[s.value for s in pipeline.STAGE_ORDER])
    run_p.add_argument("--focus", help="focus text for modelet runs")
    run_p.add_argument("--covers", help="comma-separated CQ ids a modelet covers")
    run_p.add_argument("-k", type=int, default=3, help="self-consistency sample count")
    stage_sub.add_parser("status")
    revert_p = stage_sub.add_parser("revert")
    revert_p.add_argument("stage", choices=[s.value for s in pipeline.STAGE_ORDER])

    p = sub.add_parser("review", help="apply a batch decision file")
    p.add_argument("action", choices=["apply"])
    p.add_argument("file")

    p = sub.add_parser("proposals", help="list proposals")
    p.add_argument("action", choices=["list"])
    p.add_argument("--status", choices=["Pending", "Accepted", "Rejected", "Edited"])

    p = sub.add_parser("metrics", help="print the quality-metrics report")
    p.add_argument("--format", choices=["text", "json"], default="text")

    p = sub.add_parser("test", help="run model/data/query tests")
    p.add_argument("tier", nargs="?", choices=["model", "data", "query", "all"],
                   default="all")

    sub.add_parser("docs", help="write docs/ontology.md next to the project file")

    p = sub.add_parser("feedback", help="ingest or summarize stakeholder feedback")
    p.add_argument("action", choices=["ingest", "summarize"])
    p.add_argument("file", nargs="?")

    p = sub.add_parser("modelet", help="merge a modelet into the main model")
    p.add_argument("action", choices=["merge"])
    p.add_argument("id")

    p = sub.add_parser("export", help="print the model as Turtle or docs as Markdown")
    p.add_argument("what", choices=["ttl", "docs"])

    p = sub.add_parser("serve", help="serve the local review API")
    p.add_argument("--port", type=int, default=8760)
    p.add_argument("--host", default="127.0.0.1")
    return parser


class _LazyHttpProvider:
    """Build the live provider on first use, so read-only commands and servers
    never demand credentials."""

    id = "http:env"

    def __init__(self):
        self._provider = None

    def complete(self, request):
        if self._provider is None:
            self._provider = HttpProvider.from_env()
        return self._provider.complete(request)


def _provider(args):
    if args.mock:
        return MockProvider(args.mock, strict=not args.lenient_mock)
    return _LazyHttpProvider()


def _load(args) -> pipeline.Project:
    return pipeline.load_project(args.project)


def _save(args, project):
    pipeline.save_project(project, args.project)


def _print(data):
    sys.stdout.write(data if data.endswith("\n") else data + "\n")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_init(args):
    scenarios = []
    for path in args.scenario:
        with open(path, encoding="utf-8") as fh:
            scenarios.append((os.path.splitext(os.path.basename(path))[0], fh.read().strip()))
    project = pipeline.init_project(args.name, scenarios, namespace=args.namespace,
                                    prefix_label=args.prefix)
    if args.seed:
        with open(args.seed, encoding="utf-8") as fh:
            pipeline.load_seed_model(project, fh.read())
    pipeline.create_project_file(project, args.path)
    _print(f"created {args.path}")
    return 0


def cmd_demo(args):
    from . import fixtures
    if args.dataset == "henri":
        path = fixtures.materialize_demo(args.dir, variant=args.variant)
    else:
        project = fixtures.build_table4_project()
        path = fixtures.write_project(project, args.dir)
    _print(f"created {path}")
    return 0


def cmd_stage(args):
    project = _load(args)
    if args.stage_command == "status":
        for stage in pipeline.STAGE_ORDER:
            _print(f"{stage.value:22} {project.stage_status[stage].value}")
        return 0
    if args.stage_command == "revert":
        pipeline.revert_stage(project, pipeline.Stage(args.stage))
        _save(args, project)
        _print(f"reverted to {args.stage}; downstream stages reset")
        return 0
    covered = args.covers.split(",") if args.covers else None
    stored = pipeline.run_stage(project, pipeline.Stage(args.stage), _provider(args),
                                focus=args.focus, covered_cq_ids=covered, k=args.k)
    _save(args, project)
    _print(f"{args.stage}: {len(stored)} proposal(s) awaiting review")
    return 0


def cmd_review(args):
    project = _load(args)
    with open(args.file, encoding="utf-8") as fh:
        decisions = json.load(fh)
    pipeline.apply_decisions(project, decisions)
    _save(args, project)
    _print(f"applied {len(decisions)} decision(s)")
    return 0


def cmd_proposals(args):
    project = _load(args)
    for prop in project.proposals.values():
        if args.status and prop.status.value != args.status:
            continue
        _print(f"{prop.id}  {prop.kind.value:20} {prop.status.value:9} {prop.display_name()}")
    return 0


def cmd_metrics(args):
    project = _load(args)
    snapshot = extract_snapshot(project.graph)
    report = metrics_report(project.graph, snapshot)
    if args.format == "json":
        _print(json.dumps(report.to_dict(), indent=1))
    else:
        _print(report.to_text())
    return 0


def cmd_test(args):
    project = _load(args)
    graph = project.graph
    snapshot = extract_snapshot(graph)
    failed = False
    if args.tier in ("model", "all"):
        findings = testkit.run_model_tests(graph, snapshot)
        errors = [f for f in findings if f.severity is testkit.Severity.ERROR]
        for f in findings:
            _print(f"model  {f.severity.value:7}  {f.check_id.value:18} {f.subject}  {f.message}")
        _print(f"model tests: {len(errors)} error(s), {len(findings) - len(errors)} warning(s)")
        failed = failed or bool(errors)
    if args.tier in ("data", "all"):
        findings = testkit.run_data_tests(graph, snapshot)
        for f in findings:
            _print(f"data   {f.severity.value:7}  {f.check_id.value:18} {f.subject}  {f.message}")
        _print(f"data tests: {len(findings)} error(s)")
        failed = failed or bool(findings)
    if args.tier in ("query", "all"):
        report = testkit.run_query_tests(graph, project.test_cases)
        _print(report.to_text())
        failed = failed or not report.all_passed()
    return 1 if failed else 0


def cmd_docs(args):
    project = _load(args)
    snapshot = extract_snapshot(project.graph)
    text = docgen.emit_markdown_docs(
        snapshot, [(g.term, g.interpretation) for g in project.glossary],
        title=f"{project.name} ontology")
    out_dir = os.path.join(os.path.dirname(os.path.abspath(args.project)), "docs")
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "ontology.md")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    _print(path)
    return 0


def cmd_feedback(args):
    project = _load(args)
    if args.action == "ingest":
        if not args.file:
            raise ValueError("feedback ingest needs a file")
        with open(args.file, encoding="utf-8") as fh:
            added, warned = feedback.ingest_feedback(project, fh.read())
        _save(args, project)
        _print(f"ingested {added} item(s), skipped {warned} duplicate(s)")
        return 0
    provider = _provider(args)
    pairs = feedback.summarize_feedback(project, provider)
    from .gateway import Provenance
    stored = 0
    for proposal, phash in pairs:
        if proposal.id in project.proposals:
            continue
        prov = Provenance(template_id="feedback-themes", technique="ChainOfThought",
                          prompt_hash=phash, provider_id=getattr(provider, "id", "?"),
                          timestamp=pipeline.utc_now())
        project.proposals[proposal.id] = pipeline.Proposal(
            id=proposal.id, kind=proposal.kind, payload=proposal.payload, provenance=prov)
        project.log("llm", "proposal_added", proposal.id, {"kind": proposal.kind.value})
        stored += 1
    _save(args, project)
    _print(f"stored {stored} theme proposal(s) for review")
    return 0


def cmd_modelet(args):
    project = _load(args)
    pipeline.merge_modelet(project, args.id)
    _save(args, project)
    _print(f"merged {args.id}; main model now has {len(project.graph)} triple(s)")
    return 0


def cmd_export(args):
    project = _load(args)
    if args.what == "ttl":
        _print(serialize_turtle(project.graph, project.prefixes))
    else:
        snapshot = extract_snapshot(project.graph)
        _print(docgen.emit_markdown_docs(
            snapshot, [(g.term, g.interpretation) for g in project.glossary],
            title=f"{project.name} ontology"))
    return 0


def cmd_serve(args):
    from .server import serve
    provider = _provider(args)
    serve(args.project, provider, host=args.host, port=args.port, static_dir=args.ui_dir)
    return 0


COMMANDS = {
    "init": cmd_init,
    "demo": cmd_demo,
    "stage": cmd_stage,
    "review": cmd_review,
    "proposals": cmd_proposals,
    "metrics": cmd_metrics,
    "test": cmd_test,
    "docs": cmd_docs,
    "feedback": cmd_feedback,
    "modelet": cmd_modelet,
    "export": cmd_export,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
