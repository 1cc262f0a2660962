"""Output formatting for experiment results (curves, sweeps, reports)."""

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import click
import numpy as np


FORMAT_EXTENSIONS = {
    '.json': 'json',
    '.jsonl': 'jsonl',
    '.ndjson': 'jsonl',
    '.csv': 'csv',
    '.tsv': 'table',
    '.md': 'records',
    '.txt': 'records',
}

OUTPUT_FORMATS = ['records', 'table', 'json', 'jsonl', 'csv']

# Digits kept for floats in text outputs; reruns must be byte-identical.
FLOAT_DIGITS = 10


def format_value(value: Any) -> str:
    """Convert a result cell into a printable string."""
    if value is None:
        return ''
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return 'nan'
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return f"{value:.{FLOAT_DIGITS}g}"
    if isinstance(value, (list, tuple)):
        return ', '.join(format_value(v) for v in value if v is not None)
    if isinstance(value, dict):
        return json.dumps(value, ensure_ascii=False, sort_keys=True)
    return str(value)


def json_ready(value: Any) -> Any:
    """Make numpy scalars and non-finite floats JSON serializable."""
    if isinstance(value, np.ndarray):
        value = value.tolist()
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {str(k): json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_ready(v) for v in value]
    return value


def determine_format(explicit_format: Optional[str], output_path: Optional[Path]) -> str:
    """Determine output format from explicit option or file extension."""
    if explicit_format:
        return explicit_format
    if output_path:
        return FORMAT_EXTENSIONS.get(output_path.suffix.lower(), 'records')
    return 'records'


def render(format_name: str, fields: Sequence[str], results: Sequence[Dict[str, Any]]) -> str:
    """Render results as text in the requested format."""
    if format_name == 'json':
        payload = [{field: json_ready(item.get(field)) for field in fields} for item in results]
        return json.dumps(payload, ensure_ascii=False, indent=2) + '\n'

    if format_name == 'jsonl':
        return ''.join(
            json.dumps({field: json_ready(item.get(field)) for field in fields}, ensure_ascii=False) + '\n'
            for item in results
        )

    rows = [[format_value(item.get(field)) for field in fields] for item in results]

    if format_name == 'csv':
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(fields)
        writer.writerows(rows)
        return buffer.getvalue()

    if format_name == 'records':
        blocks = ['\n'.join(f"{field}: {cell}".rstrip() for field, cell in zip(fields, row)) for row in rows]
        return '\n\n'.join(blocks) + ('\n' if blocks else '')

    # table
    widths = [max([len(field)] + [len(row[idx]) for row in rows]) for idx, field in enumerate(fields)]

    def _format_row(cells: List[str]) -> str:
        return '  '.join(cell.ljust(widths[idx]) for idx, cell in enumerate(cells)).rstrip()

    lines = [_format_row(list(fields)), '  '.join('-' * width for width in widths)]
    lines.extend(_format_row(row) for row in rows)
    return '\n'.join(lines) + '\n'


def write_output(format_name: str,
                 fields: Sequence[str],
                 results: Sequence[Dict[str, Any]],
                 output_path: Optional[Path] = None) -> None:
    """Write results to stdout or file in requested format.

    Args:
        format_name: One of 'json', 'jsonl', 'csv', 'records', 'table'
        fields: Field names to include, in column order
        results: Dictionaries containing the data
        output_path: Optional path to write to (otherwise stdout)
    """
    text = render(format_name, fields, results)
    if output_path:
        output_path.parent.mkdir(parents=True, exist_ok=True)
        output_path.write_text(text, encoding='utf-8')
    else:
        click.echo(text, nl=False)


def write_json(payload: Dict[str, Any], output_path: Optional[Path] = None) -> None:
    """Write a single JSON object with sorted keys."""
    text = json.dumps(json_ready(payload), ensure_ascii=False, indent=2, sort_keys=True) + '\n'
    if output_path:
        output_path.parent.mkdir(parents=True, exist_ok=True)
        output_path.write_text(text, encoding='utf-8')
    else:
        click.echo(text, nl=False)
