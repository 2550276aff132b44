"""Experiment configuration files.

A config is flat ``key = value`` text. Keys before the first ``[section]``
header apply to every section; each section describes one scenario run and
its header names the scenario unless a ``scenario`` key is given. A text
without headers is a single run.
"""

import configparser
import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ParseError, ValidationError
from .model import make_grid

MODELS = {"coupled-wave": "coupled-wave", "cw": "coupled-wave",
          "coupled-wave-linear": "coupled-wave-linear", "linear": "coupled-wave-linear",
          "gross-neveu": "gross-neveu", "gn": "gross-neveu"}
SCHEMES = ("se", "me", "lf")
STARTUPS = ("se", "me", "rk4")
BCS = ("periodic", "nonreflecting")
TRUE = ("1", "true", "yes", "on")
FALSE = ("0", "false", "no", "off")


@dataclass(frozen=True)
class ScenarioConfig:
    """Parameters of one run. ``None`` means "use the scenario default"."""

    name: str = "custom"
    scenario: str = "custom"
    model: str = None
    scheme: str = None
    startup: str = None
    bc: str = None
    L: float = None
    h: float = None
    L_list: tuple = None
    h_list: tuple = None
    t_final: float = None
    periods: int = None
    sample_every: float = None
    noise: float = None
    seed: int = None
    realizations: int = None
    m_ave: int = None
    m_ave_near: int = None
    m_ave_away: int = None
    kh: float = None
    alpha_min: float = None
    alpha_max: float = None
    n_points: int = None
    windowed: bool = None
    omega: float = None

    def as_dict(self):
        return {k: (list(v) if isinstance(v, tuple) else v)
                for k, v in dataclasses.asdict(self).items()}

    def merged(self, defaults):
        """Fill unset fields from ``defaults`` (a dict)."""
        upd = {k: v for k, v in defaults.items() if getattr(self, k) is None}
        return dataclasses.replace(self, **upd)


FIELDS = {f.name for f in dataclasses.fields(ScenarioConfig)} - {"name"}


def _float(text):
    v = float(text)
    if not math.isfinite(v):
        raise ValueError("must be finite")
    return v


def _floats(text):
    vals = tuple(_float(t) for t in text.replace(",", " ").split())
    if not vals:
        raise ValueError("empty list")
    return vals


def _int(text):
    return int(text, 0)


def _bool(text):
    t = text.strip().lower()
    if t in TRUE:
        return True
    if t in FALSE:
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _choice(options):
    def conv(text):
        t = text.strip().lower()
        if t not in options:
            raise ValueError(f"unknown value {text!r}; expected one of {', '.join(sorted(options))}")
        return options[t] if isinstance(options, dict) else t
    return conv


CONVERTERS = {
    "scenario": str.strip, "model": _choice(MODELS), "scheme": _choice(SCHEMES),
    "startup": _choice(STARTUPS), "bc": _choice(BCS),
    "L": _float, "h": _float, "L_list": _floats, "h_list": _floats,
    "t_final": _float, "periods": _int, "sample_every": _float, "noise": _float, "seed": _int,
    "realizations": _int, "m_ave": _int, "m_ave_near": _int, "m_ave_away": _int,
    "kh": _float, "alpha_min": _float, "alpha_max": _float, "n_points": _int,
    "windowed": _bool, "omega": _float,
}


def _multiple(t, h):
    n = round(t / h)
    return n >= 1 and abs(n * h - t) <= 1e-9 * max(1.0, abs(t))


def validate(cfg, defaults=None):
    """Return a list of ``(key, message)`` problems of a config."""
    errs = []
    c = cfg.merged(defaults or {})
    for key in ("L", "h", "t_final", "sample_every"):
        v = getattr(c, key)
        if v is not None and v <= 0:
            errs.append((key, "must be positive"))
    for key in ("L_list", "h_list"):
        v = getattr(c, key)
        if v is not None and any(x <= 0 for x in v):
            errs.append((key, "entries must be positive"))
    if c.noise is not None and c.noise < 0:
        errs.append(("noise", "must be non-negative"))
    if c.seed is not None and not 0 <= c.seed < 2**64:
        errs.append(("seed", "must fit in 64 unsigned bits"))
    for key in ("realizations", "periods"):
        v = getattr(c, key)
        if v is not None and v < 1:
            errs.append((key, "must be at least 1"))
    for key in ("m_ave", "m_ave_near", "m_ave_away"):
        v = getattr(c, key)
        if v is not None and v < 0:
            errs.append((key, "must be non-negative"))
    if c.n_points is not None and c.n_points < 3:
        errs.append(("n_points", "must be at least 3"))
    if c.kh is not None and not 0 <= c.kh <= np.pi:
        errs.append(("kh", "must lie in [0, pi]"))
    if c.omega is not None and not 0 < c.omega < 1:
        errs.append(("omega", "must lie in (0, 1)"))
    lo, hi = c.alpha_min, c.alpha_max
    if lo is not None and lo < np.sqrt(2) - 1e-12:
        errs.append(("alpha_min", "must be at least sqrt(2)"))
    if hi is not None and hi > 1.5 + 1e-12:
        errs.append(("alpha_max", "must be at most 3/2"))
    if lo is not None and hi is not None and lo >= hi:
        errs.append(("alpha_min", "must be below alpha_max"))
    if errs:
        return errs
    Ls = [c.L] if c.L is not None else list(c.L_list or [])
    hs = [c.h] if c.h is not None else list(c.h_list or [])
    for L in Ls:
        for h in hs:
            try:
                make_grid(L, h)
            except ConfigError as exc:
                errs.append(("h" if c.h is not None else "h_list", f"L = {L:g}, h = {h:g}: {exc}"))
    for key in ("t_final", "sample_every"):
        v = getattr(c, key)
        if v is not None:
            bad = [h for h in hs if not _multiple(v, h)]
            if bad:
                errs.append((key, f"{v:g} is not a multiple of h = {bad[0]:g}"))
    return errs


def _registry_defaults(scenario):
    from .scenarios import SCENARIOS

    if scenario not in SCENARIOS:
        return None
    return SCENARIOS[scenario].defaults


def _section_config(name, items, lines):
    errs = []
    vals = {}
    for key, raw in items:
        if key not in FIELDS:
            errs.append((key, f"unknown key (line {lines.get(key, '?')})"))
            continue
        try:
            vals[key] = CONVERTERS[key](raw)
        except ValueError as exc:
            errs.append((key, f"{exc} (line {lines.get(key, '?')})"))
    if "scenario" not in vals:
        vals["scenario"] = name if _registry_defaults(name) is not None else "custom"
    defaults = _registry_defaults(vals["scenario"])
    if defaults is None and vals["scenario"] != "custom":
        errs.append(("scenario", f"unknown scenario {vals['scenario']!r}"))
    cfg = ScenarioConfig(name=name, **{k: v for k, v in vals.items()})
    if not errs:
        errs.extend(validate(cfg, defaults))
    return cfg, errs


def _key_lines(text):
    """Map ``(section, key) -> line number`` for error messages."""
    out = {}
    section = None
    for i, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            section = s[1:-1].strip()
        elif "=" in s and not s.startswith(("#", ";")):
            out[(section, s.split("=", 1)[0].strip())] = i
    return out


def parse_configs(text):
    """Parse config text into a list of :class:`ScenarioConfig`.

    Raises
    ------
    ParseError
        Malformed lines, with their line numbers.
    ValidationError
        All invalid keys and values across every section.
    """
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",),
                                   comment_prefixes=("#", ";"), inline_comment_prefixes=("#",))
    cp.optionxform = str
    # keys ahead of any header land in DEFAULT; the header shifts line numbers by one
    try:
        cp.read_string("[DEFAULT]\n" + text)
    except configparser.ParsingError as exc:
        raise ParseError([(ln - 1, f"cannot parse {line.strip()!r}") for ln, line in exc.errors])
    except configparser.DuplicateOptionError as exc:
        raise ParseError([(exc.lineno - 1, f"duplicate key {exc.option!r}")])
    except configparser.DuplicateSectionError as exc:
        raise ParseError([(exc.lineno - 1, f"duplicate section {exc.section!r}")])
    except configparser.Error as exc:
        raise ParseError([(0, str(exc))])
    lines = _key_lines(text)
    sections = cp.sections() or [None]
    configs, errs = [], []
    for sec in sections:
        if sec is None:
            items = list(cp.defaults().items())
            name = "custom"
            where = {k: lines.get((None, k)) for k, _ in items}
        else:
            items = list(cp.items(sec))
            name = sec
            where = {k: lines.get((sec, k), lines.get((None, k))) for k, _ in items}
        cfg, e = _section_config(name, items, where)
        prefix = "" if sec is None else f"[{sec}] "
        errs.extend((prefix + k, m) for k, m in e)
        configs.append(cfg)
    if errs:
        raise ValidationError(errs)
    return configs


def parse_config(text):
    """Parse text holding exactly one run (see :func:`parse_configs`)."""
    configs = parse_configs(text)
    if len(configs) != 1:
        raise ValidationError([("section", f"expected one section, found {len(configs)}")])
    return configs[0]
