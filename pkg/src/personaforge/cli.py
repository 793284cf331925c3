"""Command-line entry point for the pipeline.

Subcommands follow the four pipeline steps: validate a workspace, apply
design-time personalization, review the diff, compile a bundle, then run or
chat with it. Exit codes are stable: 0 success, 1 validation errors, 2 usage
errors, 3 adapter failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Optional

from .bundle import generate_bundle, read_bundle, write_bundle
from .dsl import load_workspace, parse_agent, serialize
from .errors import AdapterError, PersonaForgeError
from .model import ModelWorkspace, PersonalizationMapping, resolve_mapping
from .personalize import (
    LiveRewriteAdapter,
    MockRewriteAdapter,
    PersonalizationRun,
    apply_design_time,
    plan_aspects,
    run_to_json,
)
from .runtime import LiveGenerationAdapter, MockGenerationAdapter, create_session, step
from .server import AgentService, load_bundles, make_server
from .validate import ModelDiff, ValidationReport, diff_models, validate_workspace

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_ADAPTER = 3


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except AdapterError as exc:
        print(f"adapter error: {exc}", file=sys.stderr)
        return EXIT_ADAPTER
    except PersonaForgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="personaforge",
        description="Model, personalize, compile and run conversational agents.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="check a workspace directory")
    p_validate.add_argument("workspace", help="directory with model files")
    p_validate.add_argument("--format", choices=("text", "json"), default="text")
    p_validate.set_defaults(handler=_cmd_validate)

    p_pers = sub.add_parser(
        "personalize", help="apply design-time personalization for one mapping"
    )
    p_pers.add_argument("workspace")
    p_pers.add_argument("--map", required=True, dest="mapping", metavar="PROFILE",
                        help="user profile id of the mapping to apply")
    p_pers.add_argument("--agent", default="", help="agent id when the profile maps to several")
    p_pers.add_argument("--mock", action="store_true", help="use the deterministic offline adapter")
    p_pers.add_argument("--out", default="", help="output path for the adapted agent")
    p_pers.set_defaults(handler=_cmd_personalize)

    p_diff = sub.add_parser("diff", help="compare a base and an adapted agent file")
    p_diff.add_argument("base")
    p_diff.add_argument("adapted")
    p_diff.add_argument("--format", choices=("text", "json"), default="text")
    p_diff.set_defaults(handler=_cmd_diff)

    p_gen = sub.add_parser("generate", help="compile a personalized agent bundle")
    p_gen.add_argument("workspace")
    p_gen.add_argument("--map", required=True, dest="mapping", metavar="PROFILE")
    p_gen.add_argument("--agent", default="")
    p_gen.add_argument("--mock", action="store_true",
                       help="run the design-time step with the mock adapter if needed")
    p_gen.add_argument("--adapted", default="",
                       help="adapted agent file (defaults to <agent>.<profile>.agent)")
    p_gen.add_argument("--out", default="", help="output path for the bundle")
    p_gen.set_defaults(handler=_cmd_generate)

    p_run = sub.add_parser("run", help="serve bundles over HTTP with the web chat")
    p_run.add_argument("bundles", nargs="*", help="bundle files (.pab)")
    p_run.add_argument("--bind", default="", help="host:port (default PF_BIND_ADDR or 127.0.0.1:8080)")
    p_run.add_argument("--assets", default="", help="directory with web chat assets")
    p_run.add_argument("--mock", action="store_true", help="use the mock generation adapter")
    p_run.set_defaults(handler=_cmd_run)

    p_chat = sub.add_parser("chat", help="talk to a bundle in the terminal")
    p_chat.add_argument("bundle")
    p_chat.add_argument("--mock", action="store_true")
    p_chat.set_defaults(handler=_cmd_chat)

    return parser


# ---------------------------------------------------------------------------
# Shared helpers


def _load_workspace(path: str) -> tuple[Optional[ModelWorkspace], int]:
    workspace, diagnostics = load_workspace(path)
    for diagnostic in diagnostics:
        print(str(diagnostic), file=sys.stderr)
    if any(d.severity == "error" for d in diagnostics):
        return None, EXIT_VALIDATION
    return workspace, EXIT_OK


def _select_mapping(
    workspace: ModelWorkspace, profile_id: str, agent_id: str
) -> PersonalizationMapping:
    candidates = [m for m in workspace.mappings if m.user_profile == profile_id]
    if agent_id:
        candidates = [m for m in candidates if m.agent == agent_id]
    if not candidates:
        raise PersonaForgeError(f"no mapping found for profile {profile_id!r}")
    if len(candidates) > 1:
        agents = ", ".join(m.agent for m in candidates)
        raise PersonaForgeError(
            f"profile {profile_id!r} maps to several agents ({agents}); use --agent"
        )
    return candidates[0]


def _print_report(report: ValidationReport, fmt: str) -> None:
    if fmt == "json":
        print(
            json.dumps(
                {
                    "passed": report.passed,
                    "findings": [
                        {
                            "code": f.code,
                            "severity": f.severity,
                            "message": f.message,
                            "subject": f.subject,
                        }
                        for f in report.findings
                    ],
                },
                indent=2,
            )
        )
        return
    for finding in report.findings:
        print(str(finding))
    errors = sum(1 for f in report.findings if f.severity == "error")
    warnings = len(report.findings) - errors
    if report.passed:
        print(f"workspace passed ({warnings} warning(s))")
    else:
        print(f"workspace failed: {errors} error(s), {warnings} warning(s)")


def _write_text_atomic(path: Path, text: str) -> None:
    fd, temp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(temp_name, path)
    except BaseException:
        if os.path.exists(temp_name):
            os.unlink(temp_name)
        raise


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_validate(args: argparse.Namespace) -> int:
    workspace, status = _load_workspace(args.workspace)
    if workspace is None:
        return status
    report = validate_workspace(workspace)
    _print_report(report, args.format)
    return EXIT_OK if report.passed else EXIT_VALIDATION


def _personalization_inputs(args: argparse.Namespace):
    workspace, status = _load_workspace(args.workspace)
    if workspace is None:
        return None, status
    report = validate_workspace(workspace)
    if not report.passed:
        _print_report(report, "text")
        return None, EXIT_VALIDATION
    mapping = _select_mapping(workspace, args.mapping, args.agent)
    profile, agent, config = resolve_mapping(workspace, mapping)
    return (workspace, mapping, profile, agent, config), EXIT_OK


def _cmd_personalize(args: argparse.Namespace) -> int:
    inputs, status = _personalization_inputs(args)
    if inputs is None:
        return status
    _, mapping, profile, agent, config = inputs
    adapter = MockRewriteAdapter() if args.mock else LiveRewriteAdapter()
    aspects = plan_aspects(config, profile, agent.language)
    run = apply_design_time(agent, aspects, adapter, configuration_id=config.id)

    out = Path(args.out) if args.out else Path(args.workspace) / f"{agent.id}.{profile.id}.agent"
    audit = out.parent / (out.stem + ".m2m.json")
    _write_text_atomic(out, serialize(run.result))
    _write_text_atomic(audit, json.dumps(run_to_json(run), indent=2) + "\n")
    print(f"wrote {out}")
    print(f"wrote {audit}")
    print(f"applied {len(run.aspect_log)} aspect(s) to {agent.id!r} for {profile.id!r}")
    return EXIT_OK


def _cmd_diff(args: argparse.Namespace) -> int:
    models = []
    for path in (args.base, args.adapted):
        result = parse_agent(Path(path).read_text(encoding="utf-8"), path)
        for diagnostic in result.diagnostics:
            print(str(diagnostic), file=sys.stderr)
        if result.model is None:
            return EXIT_VALIDATION
        models.append(result.model)
    diff = diff_models(models[0], models[1])
    _print_diff(diff, args.format)
    return EXIT_OK


def _print_diff(diff: ModelDiff, fmt: str) -> None:
    if fmt == "json":
        print(
            json.dumps(
                {
                    "text_changes": [
                        {
                            "state": c.state,
                            "action_index": c.action_index,
                            "original": c.original,
                            "adapted": c.adapted,
                        }
                        for c in diff.text_changes
                    ],
                    "added_states": list(diff.added_states),
                    "removed_states": list(diff.removed_states),
                    "added_intents": list(diff.added_intents),
                    "removed_intents": list(diff.removed_intents),
                    "reshaped_states": list(diff.reshaped_states),
                },
                indent=2,
            )
        )
        return
    if diff.is_empty:
        print("models are identical")
        return
    for change in diff.text_changes:
        print(f"state {change.state} (action {change.action_index}):")
        print(f"  - {change.original}")
        print(f"  + {change.adapted}")
    for state in diff.added_states:
        print(f"added state: {state}")
    for state in diff.removed_states:
        print(f"removed state: {state}")
    for intent in diff.added_intents:
        print(f"added intent: {intent}")
    for intent in diff.removed_intents:
        print(f"removed intent: {intent}")
    for state in diff.reshaped_states:
        print(f"state with changed actions: {state}")
    print(f"{len(diff.text_changes)} text change(s)")


def _cmd_generate(args: argparse.Namespace) -> int:
    inputs, status = _personalization_inputs(args)
    if inputs is None:
        return status
    _, mapping, profile, agent, config = inputs

    adapted_path = (
        Path(args.adapted)
        if args.adapted
        else Path(args.workspace) / f"{agent.id}.{profile.id}.agent"
    )
    if adapted_path.is_file():
        result = parse_agent(adapted_path.read_text(encoding="utf-8"), str(adapted_path))
        for diagnostic in result.diagnostics:
            print(str(diagnostic), file=sys.stderr)
        if result.model is None:
            return EXIT_VALIDATION
        run = PersonalizationRun(
            base_agent=agent.id,
            configuration=config.id,
            aspect_log=(),
            result=result.model,
        )
    else:
        adapter = MockRewriteAdapter() if args.mock else LiveRewriteAdapter()
        aspects = plan_aspects(config, profile, agent.language)
        run = apply_design_time(agent, aspects, adapter, configuration_id=config.id)

    bundle = generate_bundle(run, config, profile)
    out = Path(args.out) if args.out else Path(args.workspace) / f"{agent.id}.{profile.id}.pab"
    write_bundle(bundle, out)
    print(f"wrote {out} (digest {bundle.digest[:12]})")
    return EXIT_OK


def _cmd_run(args: argparse.Namespace) -> int:
    from .server import bundle_paths_from_env

    paths = list(args.bundles) or [str(p) for p in bundle_paths_from_env()]
    if not paths:
        print("no bundles given and PF_BUNDLE_DIR is not set", file=sys.stderr)
        return EXIT_USAGE
    bundles = load_bundles(paths)
    adapter = _generation_adapter(args.mock)
    service = AgentService(bundles, adapter, assets_dir=args.assets or None)
    server = make_server(service, args.bind or None)
    host, port = server.server_address[:2]
    print(f"serving {len(service.bundles)} bundle(s) on http://{host}:{port}/")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


def _generation_adapter(mock: bool):
    if mock or not os.environ.get("PF_LLM_URL"):
        if not mock:
            print(
                "note: PF_LLM_URL is not set, using the mock generation adapter",
                file=sys.stderr,
            )
        return MockGenerationAdapter()
    return LiveGenerationAdapter()


def _cmd_chat(args: argparse.Namespace) -> int:
    bundle = read_bundle(args.bundle)
    adapter = _generation_adapter(args.mock)
    session = create_session(bundle, adapter)
    _print_chat_events(session.events)
    print("(type /quit to leave)")
    while True:
        try:
            line = input("you> ")
        except (EOFError, KeyboardInterrupt):
            print()
            return EXIT_OK
        if line.strip() in ("/quit", "/exit"):
            return EXIT_OK
        if not line.strip():
            continue
        events = step(session, line, adapter)
        _print_chat_events(events)


def _print_chat_events(events) -> None:
    for event in events:
        if event.kind == "message":
            print(f"agent> {event.payload['text']}")
        elif event.kind == "typing_started":
            print(f"agent is typing ({event.payload['duration_ms']} ms)...")
        elif event.kind == "modality_hint":
            print(
                f"(speech: voice={event.payload['voice_style']}, "
                f"speed={event.payload['voice_speed']})"
            )
        elif event.kind == "error":
            print(f"error> {event.payload['message']}")


if __name__ == "__main__":
    sys.exit(main())
