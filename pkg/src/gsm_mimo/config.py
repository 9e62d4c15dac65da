"""Plain-text ``key = value`` configuration files.

One parameter per line, ``#`` starts a comment. Keys (units in brackets)::

    n_t n_m n_k n_rf k              antenna / group / RF-chain / user counts
    p_max [W]  gamma  p_rf [W]  p_each_switch [W]
    p_rf_mw [mW]  p_each_switch_mw [mW]   (alternatives to the Watt keys)
    w [Hz]  u [symbols]  tau  p_cod [W per bit/s]  l_bs [flop/W]  p_fix [W]
    d_bar  alpha  d_min [m]  d_max [m]
    noise_var [W]                   default: thermal noise over w
    trials  seed  mode              mode is gsm or baseline

Floats may be written as ``10^-3.53``. Missing keys take the reference
defaults; ``n_t`` defaults to ``n_m * n_k``.
"""

import re
from dataclasses import fields

from .channel import ChannelModel
from .power import PowerParams
from .sim import ConfigError, SystemConfig

__all__ = ["KEYS", "load_config", "parse_config", "write_config", "config_to_dict"]

_SYSTEM_INT = ("n_t", "n_m", "n_k", "n_rf", "k", "trials", "seed")
_POWER = tuple(f.name for f in fields(PowerParams))
_CHANNEL = tuple(f.name for f in fields(ChannelModel))
_MILLIWATT = {"p_rf_mw": "p_rf", "p_each_switch_mw": "p_each_switch"}
KEYS = _SYSTEM_INT + _POWER + _CHANNEL + ("noise_var", "mode") + tuple(_MILLIWATT)

_POWER_OF_TEN = re.compile(r"^10\s*\^\s*([-+]?[0-9.]+(?:[eE][-+]?\d+)?)$")


def _parse_float(text):
    m = _POWER_OF_TEN.match(text)
    if m:
        return 10.0 ** float(m.group(1))
    return float(text)


def _parse_value(key, text):
    if key == "mode":
        return text
    if key in _SYSTEM_INT:
        return int(text)
    return _parse_float(text)


def parse_config(text, source="<config>"):
    """Parse config text into a :class:`SystemConfig`."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = _parse_value(key, value)
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: bad value {value!r} for {key!r}") from None

    for mw_key, w_key in _MILLIWATT.items():
        if mw_key in values:
            if w_key in values:
                raise ConfigError(f"{source}: both {w_key!r} and {mw_key!r} given")
            values[w_key] = values.pop(mw_key) / 1000.0
    return from_dict(values)


def from_dict(values):
    values = dict(values)
    try:
        power = PowerParams(**{k: values.pop(k) for k in _POWER if k in values})
        channel = ChannelModel(**{k: values.pop(k) for k in _CHANNEL if k in values})
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if "n_t" not in values:
        defaults = SystemConfig.__dataclass_fields__
        n_m = values.get("n_m", defaults["n_m"].default)
        n_k = values.get("n_k", defaults["n_k"].default)
        values["n_t"] = n_m * n_k
    return SystemConfig(power=power, channel=channel, **values)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), source=str(path))


def config_to_dict(config):
    """Every resolved parameter as a flat ``{key: value}`` mapping."""
    out = {name: getattr(config, name) for name in _SYSTEM_INT}
    out.update({name: getattr(config.power, name) for name in _POWER})
    out.update({name: getattr(config.channel, name) for name in _CHANNEL})
    out["noise_var"] = config.noise_var
    out["mode"] = config.mode
    return out


def format_value(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_config(config, path=None):
    """Serialize ``config`` in the file format; writes to ``path`` if given and returns the text."""
    lines = [f"{key} = {format_value(value)}" for key, value in config_to_dict(config).items()]
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
