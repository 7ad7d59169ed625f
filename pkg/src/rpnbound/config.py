"""TOML run configurations.

Every physical quantity carries its unit in the key name. Unknown sections
and keys are rejected with the file line where they appear. The schema is
documented in README.md; ``SCHEMA`` below is the normative copy.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SCHEMA_VERSION = 1
REQUIRED = object()

_RATES = {f"{k}_per_s": (float, 0.0) for k in ("gamma1", "gamma2", "gamma11", "gamma12", "gamma22")}
_RATES3 = {f"{k}_per_s": (float, 0.0) for k in ("gamma111", "gamma112", "gamma122", "gamma222")}
_STAGE = {"chi_rad_per_s": (float, 0.0), "chi_tilde_rad_per_s": (float, 0.0), **_RATES, **_RATES3}

# section -> key -> (type, default)
SCHEMA: dict[str, dict[str, tuple]] = {
    "model": {"N": (float, REQUIRED), **_RATES},
    "rpn": {"n_particles": (int, 2), "superselect": (bool, True)},
    "solver": {"gap_tol": (float, 1e-9), "max_iter": (int, 200)},
    "system": {"kind": (str, "two_mode"), "noise": (str, "transversal"), "rate_per_s": (float, 1.0)},
    "bound": {"method": (str, "sdp"), "N_values": (list, None)},
    "scaling": {"source": (str, "model"), "k_body": (int, None), "l_body": (int, None)},
    "qec": {
        "N_values": (list, [6, 8, 10, 12, 14, 16, 18, 20]),
        "T_s": (float, 1.0),
        "certificate_N": (int, 8),
        "rate_triples_per_s": (list, [[1.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [1.0, 1.0, 1.0]]),
        "trials": (int, 10_000),
    },
    "trap": {
        "kind": (str, "harmonic_tf"),
        "preset": (str, None),
        "K_m3_per_s": (list, None),
        "omega_rad_per_s": (float, None),
        "volume_m3": (float, None),
        "scattering_length_m": (float, None),
        "mass_kg": (float, None),
    },
    "curve": {
        "N_min": (float, REQUIRED),
        "N_max": (float, REQUIRED),
        "points": (int, 9),
        "gamma1_per_s": (float, 0.0),
        "gamma2_per_s": (float, 0.0),
        "method": (str, "sdp"),
    },
    "protocol": {
        "N_mean": (float, REQUIRED),
        "distribution": (str, "fixed"),
        "omega_rad_per_s": (float, 0.0),
        "rotation_rad": (None, "auto"),
    },
    "protocol.prep": _STAGE,
    "protocol.ramsey": _STAGE,
    "simulation": {
        "trajectories": (int, 1000),
        "T_values_s": (list, REQUIRED),
        "mode": (str, "short_segments"),
        "prep_grid_s": (list, [0.0]),
        "t_grid_points": (int, 8),
        "bootstrap": (int, 32),
        "refine": (bool, True),
        "decay_samples": (int, 11),
    },
}

COMMAND_SECTIONS = {
    "check-hls": {"system", "model", "rpn"},
    "bound": {"model", "rpn", "solver", "bound"},
    "scaling": {"model", "rpn", "scaling"},
    "qec": {"qec"},
    "curve": {"trap", "curve", "rpn"},
    "simulate": {"protocol", "protocol.prep", "protocol.ramsey", "simulation"},
    "compare": {"protocol", "protocol.prep", "protocol.ramsey", "simulation", "rpn", "solver"},
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    sections: dict[str, dict]
    path: str = "<string>"

    def __getitem__(self, name: str) -> dict:
        return self.sections[name]

    def has(self, name: str) -> bool:
        return name in self.sections


def _line_of(text: str, key: str) -> int | None:
    pat = re.compile(rf"^\s*(\[+\s*)?[\"']?{re.escape(key)}[\"']?\s*(=|\]|\.)", re.M)
    m = pat.search(text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _where(path: str, text: str, key: str) -> str:
    line = _line_of(text, key.split(".")[-1])
    return f"{path}:{line}" if line else path


def _coerce(value, typ, where, key):
    if typ is None:
        return value
    if typ is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if typ is bool and not isinstance(value, bool):
        raise ConfigError(f"{where}: key '{key}' must be true or false")
    if typ in (int, float) and isinstance(value, bool):
        raise ConfigError(f"{where}: key '{key}' must be a number")
    if not isinstance(value, typ):
        raise ConfigError(f"{where}: key '{key}' must be of type {typ.__name__}, got {type(value).__name__}")
    return value


def _flatten(doc: dict) -> dict[str, dict]:
    out = {}
    for name, body in doc.items():
        if not isinstance(body, dict):
            out.setdefault("", {})[name] = body
            continue
        flat, sub = {}, {}
        for k, v in body.items():
            (sub if isinstance(v, dict) else flat)[k] = v
        out[name] = flat
        for k, v in sub.items():
            out[f"{name}.{k}"] = v
    return out


def parse_config(text: str, command: str, path: str = "<string>") -> RunConfig:
    if command not in COMMAND_SECTIONS:
        raise ConfigError(f"unknown command {command!r}")
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from None
    flat = _flatten(doc)
    top = flat.pop("", {})
    version = top.pop("schema_version", None)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"{_where(path, text, 'schema_version')}: schema_version must be {SCHEMA_VERSION}")
    for k in top:
        raise ConfigError(f"{_where(path, text, k)}: unknown top-level key '{k}'")

    allowed = COMMAND_SECTIONS[command]
    sections = {}
    for name, body in flat.items():
        if name not in allowed:
            raise ConfigError(f"{_where(path, text, name)}: section [{name}] is not used by '{command}'")
        spec = SCHEMA[name]
        for k in body:
            if k not in spec:
                raise ConfigError(f"{_where(path, text, k)}: unknown key '{k}' in [{name}]")
    for name in sorted(allowed):
        body = flat.get(name, {})
        spec = SCHEMA[name]
        vals = {}
        for k, (typ, default) in spec.items():
            if k in body:
                vals[k] = _coerce(body[k], typ, _where(path, text, k), f"{name}.{k}")
            elif default is REQUIRED:
                if name in flat or _required_section(command, name):
                    raise ConfigError(f"{path}: missing required key '{k}' in [{name}]")
                vals = None
                break
            else:
                vals[k] = default
        if vals is not None and (name in flat or not _has_required(spec)):
            sections[name] = vals
    return RunConfig(command, sections, path)


def _has_required(spec) -> bool:
    return any(d is REQUIRED for _, d in spec.values())


def _required_section(command: str, name: str) -> bool:
    needed = {
        "bound": {"model"},
        "curve": {"curve"},
        "simulate": {"protocol", "simulation"},
        "compare": {"protocol", "simulation"},
    }
    return name in needed.get(command, set())


def load_config(path: str | Path, command: str) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"{path}: {e.strerror}") from None
    return parse_config(text, command, str(path))
