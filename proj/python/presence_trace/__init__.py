"""Analysis of hand-drawn presence traces.

Thin wrapper over the C++ core. Documents are plain dicts in the same JSON
schema the command-line tool reads and writes.
"""

import json

from . import _core
from ._core import SCHEMA_VERSION, PresenceError

__all__ = [
    "SCHEMA_VERSION",
    "PresenceError",
    "build_template",
    "validate",
    "ingest",
    "segment",
    "analyze",
    "aggregate",
    "detection_csv",
    "render_template",
    "render_overlay",
    "render_boxplot",
    "store_latest",
    "run",
]


def _dump(doc):
    if doc is None:
        return ""
    return json.dumps(doc)


def _events(events):
    if events is None:
        return ""
    if isinstance(events, list):
        events = {"schema_version": SCHEMA_VERSION, "events": events}
    return json.dumps(events)


def build_template(template=None):
    """Complete template document with defaults filled in and ticks sorted."""
    return json.loads(_core.build_template(json.dumps(template or {})))


def validate(trace_file, config=None):
    """List of {severity, code, message} for a trace file document."""
    return json.loads(_core.validate(json.dumps(trace_file), _dump(config)))


def ingest(trace_file, config=None):
    """Provisional session record for one trace file."""
    return json.loads(_core.ingest(json.dumps(trace_file), _dump(config)))


def segment(samples, config=None):
    """Phases of a normalized trace given as (t, p) pairs."""
    return json.loads(_core.segment([tuple(s) for s in samples], _dump(config)))


def analyze(record, events=None, config=None):
    """Session record with its descriptive model, breaks and conformance."""
    return json.loads(_core.analyze(json.dumps(record), _events(events), _dump(config)))


def aggregate(records, events=None):
    return json.loads(_core.aggregate([json.dumps(r) for r in records], _events(events)))


def detection_csv(records, events=None):
    return _core.detection_csv([json.dumps(r) for r in records], _events(events))


def render_template(template=None):
    return _core.render_template(json.dumps(template or {}))


def render_overlay(records, template=None, mark_points=False):
    return _core.render_overlay(
        [json.dumps(r) for r in records], _dump(template), mark_points
    )


def render_boxplot(records, events=None):
    return _core.render_boxplot([json.dumps(r) for r in records], _events(events))


def store_latest(path):
    """Latest revision of every session in a store file."""
    return [json.loads(r) for r in _core.store_latest(str(path))]


def run(command, config=None, store="", events="", out="", files=()):
    """Runs a command-line subcommand in process.

    Returns (written paths, messages). Failures raise PresenceError whose
    args are (error code, exit code, message).
    """
    return _core.run_command(
        command,
        _dump(config),
        str(store),
        str(events),
        str(out),
        [str(f) for f in files],
    )
