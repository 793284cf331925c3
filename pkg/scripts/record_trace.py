#!/usr/bin/env python3
"""Record deterministic event traces for the web client's replay tests.

Runs the same scripted conversation against each fixture profile with the
mock adapters and dumps the full event stream as JSON. Re-run after any
change to the event wire format:

    python3 scripts/record_trace.py
"""

from __future__ import annotations

import json
from pathlib import Path

from personaforge.dsl import load_workspace
from personaforge.model import resolve_mapping
from personaforge.personalize import MockRewriteAdapter, apply_design_time, plan_aspects
from personaforge.bundle import generate_bundle
from personaforge.runtime import MockGenerationAdapter, create_session, step
from personaforge.server import event_to_json

ROOT = Path(__file__).resolve().parent.parent
OUT_DIR = ROOT / "frontend" / "test" / "fixtures"

SCRIPT = ["tell me about muscles", "what should I eat", "what's the weather"]


def record(profile_id: str) -> dict:
    workspace, diagnostics = load_workspace(ROOT / "fixtures" / "gym")
    assert not diagnostics, diagnostics
    mapping = next(m for m in workspace.mappings if m.user_profile == profile_id)
    profile, agent, config = resolve_mapping(workspace, mapping)
    run = apply_design_time(
        agent,
        plan_aspects(config, profile, agent.language),
        MockRewriteAdapter(),
        configuration_id=config.id,
    )
    bundle = generate_bundle(run, config, profile)
    adapter = MockGenerationAdapter()
    session = create_session(bundle, adapter)
    for line in SCRIPT:
        step(session, line, adapter)
    events = [event_to_json(e) for e in session.events]
    for event in events:
        event["ts"] = 0.0  # timestamps are not part of the replay contract
    return {"profile": profile_id, "script": SCRIPT, "events": events}


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for profile_id in ("elderly", "paraplegic"):
        trace = record(profile_id)
        path = OUT_DIR / f"trace_{profile_id}.json"
        path.write_text(json.dumps(trace, indent=2) + "\n")
        print(f"wrote {path} ({len(trace['events'])} events)")


if __name__ == "__main__":
    main()
