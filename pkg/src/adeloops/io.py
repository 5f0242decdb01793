"""JSON/CSV output, run manifests and config files.

Floats are written in their shortest round-trip form and keys are sorted, so the
same inputs produce byte-identical files.
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

SCHEMA_VERSION = "1.0"
TOOL_VERSION = "0.1.0"


class ConfigError(ValueError):
    pass


def _float(v: float) -> str:
    if not math.isfinite(v):
        return "null"
    return repr(v)  # shortest round-trip form


def _enc(obj, out: list):
    if obj is None or isinstance(obj, (bool, np.bool_)):
        out.append("null" if obj is None else ("true" if obj else "false"))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_float(float(obj)))
    elif isinstance(obj, (complex, np.complexfloating)):
        _enc({"re": obj.real, "im": obj.imag}, out)
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, k in enumerate(sorted(obj, key=str)):
            if i:
                out.append(",")
            out.append(json.dumps(str(k)) + ":")
            _enc(obj[k], out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for i, v in enumerate(obj.tolist() if isinstance(obj, np.ndarray) else obj):
            if i:
                out.append(",")
            _enc(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj) -> str:
    """Deterministic JSON text."""
    out = []
    _enc(obj, out)
    return "".join(out)


def checksum(obj) -> str:
    return hashlib.sha256(dumps(obj).encode()).hexdigest()


@dataclass
class RunManifest:
    subcommand: str
    parameters: dict
    seed: int | None = None
    graph: dict | None = None
    timing: dict | None = None
    tool_version: str = TOOL_VERSION

    @property
    def checksum(self) -> str:
        """Hash of everything that determines the output (timing excluded)."""
        return checksum({"tool_version": self.tool_version, "subcommand": self.subcommand,
                         "parameters": self.parameters, "seed": self.seed, "graph": self.graph})

    def to_dict(self) -> dict:
        d = {"tool_version": self.tool_version, "subcommand": self.subcommand,
             "parameters": self.parameters, "seed": self.seed, "graph": self.graph,
             "checksum": self.checksum}
        if self.timing is not None:
            d["timing"] = self.timing
        return d


@dataclass
class Report:
    kind: str
    manifest: RunManifest
    body: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "report": self.kind,
                "manifest": self.manifest.to_dict(), **self.body}

    def dumps(self) -> str:
        return dumps(self.to_dict())


# required top-level keys per report kind; used by tests and `validate_report`
REPORT_KEYS = {
    "spectra": {"kind", "nodes", "eigenvalues", "lambda", "S", "h", "exponents", "kappa_dilute", "kappa_dense"},
    "enumerate": {"Z_height", "Z_loop", "relative_error", "configurations"},
    "oracle": {"Z", "loop_histogram"},
    "sample": {"summary"},
    "sle": {"kappa", "stderr", "curves", "t_max"},
    "clusters": {"loops", "paths", "odd_vertices"},
    "annulus": {"Z", "Z_factorized", "relative_error", "law_N", "side_law"},
    "arch": {"probabilities", "topology_ratio", "eta"},
    "selftest": {"checks", "passed"},
}


def validate_report(d: dict) -> None:
    for k in ("schema_version", "report", "manifest"):
        if k not in d:
            raise ValueError(f"report lacks {k!r}")
    missing = REPORT_KEYS.get(d["report"], set()) - set(d)
    if missing:
        raise ValueError(f"{d['report']} report lacks {sorted(missing)}")
    if "checksum" not in d["manifest"]:
        raise ValueError("manifest lacks a checksum")


def write_csv(fh, rows: list[dict], columns: list[str]):
    """Observable streams as CSV (floats in shortest round-trip form)."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_float(float(r[c])) if isinstance(r[c], (float, np.floating)) else r[c] for c in columns])


def load_config(path) -> dict:
    """Read an INI-style file into {section: {key: str}}.

    Keys in ``[common]`` apply to every subcommand; a section named after a
    subcommand applies to that subcommand only.
    """
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    cp.optionxform = lambda s: s.strip().replace("-", "_")
    try:
        with open(path) as fh:
            cp.read_file(fh, source=str(path))
    except configparser.MissingSectionHeaderError as err:
        raise ConfigError(f"{path}:{err.lineno}: expected a [section] header, got {err.line.strip()!r}") from None
    except configparser.ParsingError as err:
        lineno, line = err.errors[0]  # configparser stores repr(line)
        raise ConfigError(f"{path}:{lineno}: cannot parse {line.strip()}") from None
    except configparser.DuplicateSectionError as err:
        raise ConfigError(f"{path}:{err.lineno}: duplicate section [{err.section}]") from None
    except configparser.DuplicateOptionError as err:
        raise ConfigError(f"{path}:{err.lineno}: duplicate key {err.option!r} in [{err.section}]") from None
    return {s: dict(cp[s]) for s in cp.sections()}
