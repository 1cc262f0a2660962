"""Flat ``key = value`` experiment config files feeding click's default_map."""

from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple, Union

import click

from mixfm.core.errors import DataIOError, ParseError


def normalize_key(key: str) -> str:
    return key.strip().lower().replace('-', '_')


def parse_config(lines: Iterable[str], source: Optional[str] = None) -> Dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment, later keys win."""
    values: Dict[str, str] = {}
    for line_number, line in enumerate(lines, 1):
        text = line.split('#', 1)[0].strip()
        if not text:
            continue
        key, sep, value = text.partition('=')
        if not sep or not key.strip():
            raise ParseError("expected 'key = value'", source=source, line=line_number)
        values[normalize_key(key)] = value.strip()
    return values


def load_config(path: Union[str, Path]) -> Dict[str, str]:
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise DataIOError(f"Failed to read config {path}: {e}")
    return parse_config(text.splitlines(), source=str(path))


def param_aliases(command: click.Command) -> Dict[str, str]:
    """Config key -> parameter name; both ``--train`` and ``train_path`` name one option."""
    aliases: Dict[str, str] = {}
    for param in command.params:
        if not param.name:
            continue
        aliases[param.name] = param.name
        for opt in getattr(param, 'opts', []):
            if opt.startswith('--'):
                aliases[normalize_key(opt[2:])] = param.name
    return aliases


def known_keys(group: click.Group) -> List[str]:
    """Config keys accepted by any subcommand of ``group``."""
    return sorted({key for command in group.commands.values() for key in param_aliases(command)})


def build_default_map(group: click.Group, values: Dict[str, str]) -> Tuple[Dict[str, Dict[str, str]], List[str]]:
    """Per-subcommand default maps and the list of keys no subcommand knows."""
    unknown = sorted(set(values) - set(known_keys(group)))
    default_map = {}
    for name, command in group.commands.items():
        aliases = param_aliases(command)
        default_map[name] = {aliases[k]: v for k, v in values.items() if k in aliases}
    return default_map, unknown


class CommaList(click.ParamType):
    """Comma separated numbers, e.g. ``0,0.5,1,2``."""

    def __init__(self, item_type=float):
        self.item_type = item_type
        self.name = f"{item_type.__name__}-list"

    def convert(self, value, param, ctx):
        if isinstance(value, (list, tuple)):
            return tuple(self.item_type(v) for v in value)
        try:
            return tuple(self.item_type(v.strip()) for v in str(value).split(',') if v.strip())
        except ValueError:
            self.fail(f"'{value}' is not a comma separated list of {self.item_type.__name__}", param, ctx)


FLOAT_LIST = CommaList(float)
INT_LIST = CommaList(int)
