"""Key-value experiment configs: sections in brackets, one pair per line.

Strings are quoted, numbers bare, booleans true/false; `#` starts a
comment outside quotes.  Every key has a typed default, so a minimal
config is just the values that differ.  parse -> echo -> parse is exact
because floats are echoed through repr.
"""

from __future__ import annotations

from .errors import ConfigError

KINDS = (
    "simulate",
    "peakon-verify",
    "blowup-study",
    "picard",
    "besov-audit",
    "transport-test",
)

# schema: section -> key -> (type tag, default)
SCHEMAS: dict[str, dict[str, dict[str, tuple[str, object]]]] = {
    "simulate": {
        "grid": {"L": ("float", 40.0), "n": ("int", 4096)},
        "run": {
            "T": ("float", 1.0),
            "rhs_form": ("str", "spectral_form"),
            "cfl_sigma": ("float", 0.3),
            "dt": ("float", 0.0),
            "monitor_every": ("int", 10),
            "tail_threshold": ("float", 1e-3),
            "dealias": ("bool", True),
        },
        "data": {
            "kind": ("str", "gaussian"),
            "amplitude": ("float", 1.0),
            "width": ("float", 1.0),
            "center": ("float", 0.0),
            "speed": ("float", 1.0),
            "decay": ("float", 2.0),
            "seed": ("int", 0),
        },
        "output": {"plot": ("bool", True), "timestamp": ("bool", False)},
    },
    "peakon-verify": {
        "grid": {"L": ("float", 40.0), "n": ("int", 4096)},
        "wave": {"speed": ("float", 1.0)},
        "run": {
            "T": ("float", 1.0),
            "cfl_sigma": ("float", 0.3),
            "monitor_every": ("int", 10),
            "rel_tol": ("float", 1e-2),
        },
        "residual": {
            "x0": ("float", 0.5),
            "sigma": ("float", 1.5),
            "nx0": ("int", 32),
            "nt0": ("int", 32),
            "levels": ("int", 4),
            "crest_split": ("bool", True),
            "p0": ("float", 1.0),
            "p1": ("float", 0.5),
            "p2": ("float", -0.25),
            "p3": ("float", 0.0),
            "tol": ("float", 1e-4),
            "order_min": ("float", 1.5),
        },
        "output": {"plot": ("bool", True), "timestamp": ("bool", False)},
    },
    "blowup-study": {
        "grid": {"L": ("float", 5.0), "n": ("int", 4096)},
        "run": {
            "T": ("float", 0.05),
            # small sigma buys dense monitoring near the singular time; the
            # tight tail cut stops the run before curvature ringing can leak
            # into the a-priori-bound checks
            "cfl_sigma": ("float", 0.05),
            "monitor_every": ("int", 1),
            "tail_threshold": ("float", 1e-4),
        },
        "data": {
            "amplitude": ("float", 0.5),
            "width": ("float", 0.025),
            "center": ("float", 0.0),
        },
        "estimate": {
            "window": ("int", 20),
            "ceiling_factor": ("float", 2.0),
        },
        "sweep": {"amplitudes": ("str", "")},
        "output": {"plot": ("bool", True), "timestamp": ("bool", False)},
    },
    "picard": {
        "grid": {"L": ("float", 20.0), "n": ("int", 1024)},
        "run": {
            "T": ("float", 0.25),
            "n_iter": ("int", 6),
            "s": ("float", 1.5),
            "n_slices": ("int", 17),
            "dt": ("float", 0.0),
        },
        "data": {
            "kind": ("str", "gaussian"),
            "amplitude": ("float", 0.2),
            "width": ("float", 1.0),
            "center": ("float", 0.0),
            "decay": ("float", 2.0),
            "seed": ("int", 0),
        },
        "check": {
            "ratio_max": ("float", 0.75),
            "ratio_from": ("int", 3),
            "direct_tol": ("float", 1e-4),
        },
        "output": {"plot": ("bool", True), "timestamp": ("bool", False)},
    },
    "besov-audit": {
        "grid": {"L": ("float", 20.0), "n": ("int", 512)},
        "corpus": {
            "count": ("int", 100),
            "seed": ("int", 0),
            "frac": ("float", 0.33),
            "decay": ("float", 2.0),
        },
        "audits": {"which": ("str", "all")},
        "output": {"plot": ("bool", False), "timestamp": ("bool", False)},
    },
    "transport-test": {
        "grid": {"L": ("float", 3.141592653589793), "n": ("int", 512)},
        # dt0 keeps the whole ladder above the cubic-interpolation floor
        "run": {"T": ("float", 1.0), "levels": ("int", 4), "dt0": ("float", 0.5)},
        "check": {"order_min": ("float", 3.0), "exact_tol": ("float", 1e-8)},
        "audit": {"s": ("float", 0.5), "dt": ("float", 0.01), "seed": ("int", 0)},
        "output": {"plot": ("bool", True), "timestamp": ("bool", False)},
    },
}


def _strip_comment(line: str) -> str:
    out = []
    in_str = False
    for ch in line:
        if ch == '"':
            in_str = not in_str
        elif ch == "#" and not in_str:
            break
        out.append(ch)
    return "".join(out)


def _parse_value(raw: str, ty: str, key: str, ln: int):
    raw = raw.strip()
    where = f"line {ln}: key '{key}'"
    if ty == "str":
        if len(raw) < 2 or raw[0] != '"' or raw[-1] != '"':
            raise ConfigError(f"{where} expects a quoted string, got {raw!r}")
        inner = raw[1:-1]
        if '"' in inner:
            raise ConfigError(f"{where}: embedded quotes are not supported")
        return inner
    if ty == "bool":
        if raw == "true":
            return True
        if raw == "false":
            return False
        raise ConfigError(f"{where} expects true or false, got {raw!r}")
    if ty == "int":
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{where} expects an integer, got {raw!r}") from None
    if ty == "float":
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{where} expects a number, got {raw!r}") from None
    raise ConfigError(f"internal: unknown type tag {ty!r}")


def parse_config(text: str, kind: str) -> dict:
    """Parse one config document against the schema for `kind`."""
    if kind not in SCHEMAS:
        raise ConfigError(f"unknown experiment kind {kind!r}; choose from {KINDS}")
    schema = SCHEMAS[kind]
    cfg = {sec: {k: d for k, (_, d) in keys.items()} for sec, keys in schema.items()}
    section = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"line {ln}: unterminated section header {raw!r}")
            name = line[1:-1].strip()
            if name not in schema:
                raise ConfigError(
                    f"line {ln}: unknown section [{name}] for kind {kind!r}; "
                    f"known: {sorted(schema)}"
                )
            section = name
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected 'key = value', got {raw!r}")
        if section is None:
            raise ConfigError(f"line {ln}: key outside any [section]")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in schema[section]:
            raise ConfigError(
                f"line {ln}: unknown key '{key}' in [{section}]; "
                f"known: {sorted(schema[section])}"
            )
        ty, _ = schema[section][key]
        cfg[section][key] = _parse_value(val, ty, key, ln)
    return cfg


def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return f'"{v}"'
    if isinstance(v, float):
        return repr(v)
    return str(v)


def canonical_echo(cfg: dict, kind: str) -> str:
    """Deterministic text form in schema order; parses back to cfg."""
    schema = SCHEMAS[kind]
    lines = [f"# kind = {kind}"]
    for sec, keys in schema.items():
        lines.append(f"[{sec}]")
        for key, (ty, _) in keys.items():
            v = cfg[sec][key]
            if ty == "float" and isinstance(v, int):
                v = float(v)
            lines.append(f"{key} = {_fmt_value(v)}")
        lines.append("")
    return "\n".join(lines)


def load_config(path: str, kind: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), kind)


def default_config(kind: str) -> dict:
    return parse_config("", kind)
