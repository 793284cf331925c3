"""Textual syntaxes and structured interchange for the model kinds."""

from .interchange import export_interchange, import_interchange
from .lexer import SourceSpan
from .parser import (
    ParseDiagnostic,
    ParseResult,
    parse_agent,
    parse_configuration,
    parse_mapping_file,
    parse_profile,
)
from .serializer import serialize, serialize_mapping_file
from .workspace import load_workspace

__all__ = [
    "SourceSpan",
    "ParseDiagnostic",
    "ParseResult",
    "parse_agent",
    "parse_configuration",
    "parse_mapping_file",
    "parse_profile",
    "serialize",
    "serialize_mapping_file",
    "export_interchange",
    "import_interchange",
    "load_workspace",
]
