"""Loading a workspace directory of model files.

File kinds are recognized by extension: .uprof (user profile), .agent
(agent), .aconf (configuration), .map (mappings). Files are read in sorted
name order so loading is deterministic. Derived artifacts use dotted stems
(gym.elderly.agent, gym.elderly.pab); they keep the base model's id, so the
loader skips them to avoid duplicate-id clashes with their source.
"""

from __future__ import annotations

from pathlib import Path

from ..model import ModelWorkspace
from .lexer import SourceSpan
from .parser import (
    ParseDiagnostic,
    parse_agent,
    parse_configuration,
    parse_mapping_file,
    parse_profile,
)

EXTENSIONS = (".uprof", ".agent", ".aconf", ".map")


def load_workspace(directory: str | Path) -> tuple[ModelWorkspace, list[ParseDiagnostic]]:
    """Parse every model file under a directory into one workspace.

    Duplicate mappings are kept so the validator can report them; duplicate
    model ids across files become error diagnostics.
    """
    root = Path(directory)
    workspace = ModelWorkspace()
    diagnostics: list[ParseDiagnostic] = []
    if not root.is_dir():
        diagnostics.append(
            ParseDiagnostic(
                "error",
                f"workspace directory not found: {root}",
                SourceSpan(str(root), 1, 1),
            )
        )
        return workspace, diagnostics

    for path in sorted(root.iterdir()):
        if path.suffix not in EXTENSIONS or "." in path.stem:
            continue
        source = path.read_text(encoding="utf-8")
        name = str(path)
        if path.suffix == ".uprof":
            result = parse_profile(source, name)
            if result.model is not None:
                _add(workspace.profiles, result.model.id, result.model, name, diagnostics)
        elif path.suffix == ".agent":
            result = parse_agent(source, name)
            if result.model is not None:
                _add(workspace.agents, result.model.id, result.model, name, diagnostics)
        elif path.suffix == ".aconf":
            result = parse_configuration(source, name)
            if result.model is not None:
                _add(
                    workspace.configurations,
                    result.model.id,
                    result.model,
                    name,
                    diagnostics,
                )
        else:
            result = parse_mapping_file(source, name)
            if result.model is not None:
                workspace.mappings.extend(result.model)
        diagnostics.extend(result.diagnostics)
    return workspace, diagnostics


def _add(collection, model_id, model, file, diagnostics) -> None:
    if model_id in collection:
        diagnostics.append(
            ParseDiagnostic(
                "error",
                f"duplicate id {model_id!r} already declared in another file",
                SourceSpan(file, 1, 1),
            )
        )
        return
    collection[model_id] = model
