"""
Formatter modules for output artifacts
"""

from .artifact_writer import TRACE_COLUMNS, ArtifactWriter, emit_trace, format_float, read_trace

__all__ = ["ArtifactWriter", "TRACE_COLUMNS", "emit_trace", "format_float", "read_trace"]
