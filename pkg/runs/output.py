"""Result files.

Every file starts with a header naming the tool version, the hash of the
validated configuration and the seed. CSV files carry the header as `# key: value`
comment lines, JSON files under a "header" key. Floats are written with 17
significant digits in CSV and as shortest round-trip reprs in JSON, keys are
sorted, and nothing depends on timing unless asked for.
"""

import csv
import hashlib
import io
import json
import logging
import math
import os

import numpy as np
from django.conf import settings
from rest_framework.utils.encoders import JSONEncoder

logger = logging.getLogger(__name__)

HEADER_KEYS = ("tool_version", "config_hash", "seed")


def canonical_json(data):
    return json.dumps(
        data,
        cls=JSONEncoder,
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
        allow_nan=False,
    )


def config_hash(config):
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()


def header(config, seed):
    return {
        "tool_version": settings.SCHOTTKYDIM_VERSION,
        "config_hash": config_hash(config),
        "seed": seed,
    }


def format_value(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return f"{value:.17g}" if math.isfinite(value) else str(value)
    return str(value)


def render_csv(columns, rows, head):
    buffer = io.StringIO()
    for key in HEADER_KEYS:
        buffer.write(f"# {key}: {head[key]}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(column)) for column in columns])
    return buffer.getvalue()


def render_json(payload, head):
    text = json.dumps(
        {"header": head, **payload},
        cls=JSONEncoder,
        sort_keys=True,
        indent=2,
        ensure_ascii=False,
        allow_nan=False,
    )
    return text + "\n"


class ResultFiles:
    """Files of one run, written together once the run has succeeded."""

    def __init__(self, prefix, head):
        self.prefix = prefix
        self.head = head
        self.files = {}

    def path(self, suffix):
        return f"{self.prefix}{suffix}"

    def add_csv(self, suffix, columns, rows):
        self.files[self.path(suffix)] = render_csv(columns, rows, self.head)

    def add_json(self, suffix, payload):
        self.files[self.path(suffix)] = render_json(payload, self.head)

    def write(self):
        for path, text in self.files.items():
            directory = os.path.dirname(path)
            if directory:
                os.makedirs(directory, exist_ok=True)
            with open(path, "w", encoding="utf-8", newline="") as f:
                f.write(text)
            logger.info(f"wrote {path}")
        return list(self.files)
