"""SQLite persistence: model checkpoints and the experiment run store."""

import hashlib
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

import numpy as np
import sqlite_utils

from mixfm.core.errors import DataIOError, ValidationError
from mixfm.core.model import FmParams
from mixfm.utils.logger import Logger


FORMAT_VERSION = '1'
BLOB_DTYPE = '<f8'
RESERVED_KEYS = ('format_version', 'm', 'd', 'w0', 'checksum')


def _blob(array: np.ndarray) -> bytes:
    return np.ascontiguousarray(array, dtype=BLOB_DTYPE).tobytes()


def params_checksum(params: FmParams) -> str:
    """SHA-256 over (m, d, w0, w, V) in their stored byte form."""
    digest = hashlib.sha256()
    digest.update(f"{params.m}:{params.d}:{float(params.w0).hex()}".encode('ascii'))
    digest.update(_blob(params.w))
    digest.update(_blob(params.V))
    return digest.hexdigest()


def get_checkpoint_metadata(db: sqlite_utils.Database) -> Dict[str, str]:
    """Read checkpoint_metadata key-value table as a dict."""
    if 'checkpoint_metadata' not in db.table_names():
        return {}
    return {row['key']: row['value'] for row in db['checkpoint_metadata'].rows}


def save_checkpoint(path: Union[str, Path], params: FmParams,
                    metadata: Optional[Dict[str, Any]] = None,
                    logger: Optional[Logger] = None) -> Path:
    """Write params (and free-form training metadata) to a checkpoint file."""
    if logger is None:
        logger = Logger(verbose=False)
    path = Path(path)
    if not params.is_finite():
        raise ValidationError("refusing to save non-finite parameters")

    logger.progress(f"   Writing checkpoint {path.name}...", nl=False)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        db = sqlite_utils.Database(path)
        for table in ('checkpoint_metadata', 'parameters'):
            db[table].drop(ignore=True)

        records = [
            {'key': 'format_version', 'value': FORMAT_VERSION},
            {'key': 'm', 'value': str(params.m)},
            {'key': 'd', 'value': str(params.d)},
            {'key': 'w0', 'value': float(params.w0).hex()},
            {'key': 'checksum', 'value': params_checksum(params)},
        ]
        for key, value in sorted((metadata or {}).items()):
            if key in RESERVED_KEYS:
                raise ValidationError(f"metadata key '{key}' is reserved")
            records.append({'key': key, 'value': str(value)})
        db['checkpoint_metadata'].insert_all(records, pk='key')

        db['parameters'].insert_all([
            {'name': 'w', 'rows': params.m, 'cols': 1, 'data': _blob(params.w)},
            {'name': 'V', 'rows': params.m, 'cols': params.d, 'data': _blob(params.V)},
        ], pk='name')
        db.conn.close()
    except OSError as e:
        logger.progress_fail()
        raise DataIOError(f"Failed to write checkpoint {path}: {e}")
    logger.progress_done()
    return path


def load_checkpoint(path: Union[str, Path]) -> Tuple[FmParams, Dict[str, str]]:
    """Read a checkpoint; the checksum and format version are verified.

    Returns the parameters and the checkpoint metadata.
    """
    path = Path(path)
    if not path.exists():
        raise DataIOError(f"Checkpoint not found: {path}")
    try:
        db = sqlite_utils.Database(path)
        metadata = get_checkpoint_metadata(db)
        blocks = {row['name']: row for row in db['parameters'].rows} if 'parameters' in db.table_names() else {}
    except Exception as e:
        raise DataIOError(f"Failed to read checkpoint {path}: {e}")

    if metadata.get('format_version') != FORMAT_VERSION:
        raise ValidationError(
            f"{path}: unsupported checkpoint format {metadata.get('format_version')!r}")
    if 'w' not in blocks or 'V' not in blocks:
        raise ValidationError(f"{path}: checkpoint has no parameter blocks")
    m, d = int(metadata['m']), int(metadata['d'])
    w = np.frombuffer(blocks['w']['data'], dtype=BLOB_DTYPE).astype(np.float64)
    V = np.frombuffer(blocks['V']['data'], dtype=BLOB_DTYPE).astype(np.float64)
    if w.size != m or V.size != m * d:
        raise ValidationError(f"{path}: parameter blocks do not match m={m}, d={d}")
    params = FmParams(float.fromhex(metadata['w0']), w, V.reshape(m, d))
    if params_checksum(params) != metadata.get('checksum'):
        raise ValidationError(f"{path}: checkpoint checksum mismatch")
    return params, metadata


# ---------------------------------------------------------------------------
# Run store
# ---------------------------------------------------------------------------

RUN_COLUMNS = {
    'experiment': str,
    'method': str,
    'x': float,
    'seed': int,
    'auc': float,
    'logloss': float,
    'gamma': float,
    'seconds': float,
}


def record_runs(path: Union[str, Path], runs: Iterable[Dict[str, Any]]) -> int:
    """Append trial rows to the ``runs`` table; returns the number written."""
    path = Path(path)
    rows: List[Dict[str, Any]] = [{k: run.get(k) for k in RUN_COLUMNS} for run in runs]
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        db = sqlite_utils.Database(path)
        table = db['runs']
        if not table.exists():
            table.create(RUN_COLUMNS)
        table.insert_all(rows)
        db.conn.close()
    except OSError as e:
        raise DataIOError(f"Failed to write run store {path}: {e}")
    return len(rows)


def read_runs(path: Union[str, Path], experiment: Optional[str] = None) -> List[Dict[str, Any]]:
    path = Path(path)
    if not path.exists():
        raise DataIOError(f"Run store not found: {path}")
    db = sqlite_utils.Database(path)
    if 'runs' not in db.table_names():
        return []
    if experiment is None:
        return list(db['runs'].rows)
    return list(db['runs'].rows_where('experiment = ?', [experiment]))
