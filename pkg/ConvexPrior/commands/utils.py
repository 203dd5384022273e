"""
Field file I/O for the command-line surface.

CSV: first line "H,W", then H lines of W comma-separated reals with 17 significant
digits, which round-trips 64-bit floats exactly.
PGM: P2 (ASCII) and P5 (binary) are read and P5 with maxval 255 is written, both
through Pillow. Values are quantized as round(u * 255), so PGM output is lossy
unless u is already 8-bit.

Writes go to a temporary file that replaces the target under a file lock.
"""

import io
import logging
import os
from typing import Iterable, List, Optional, Sequence

import numpy as np
from filelock import FileLock
from PIL import Image

from ..core.ConvexPriorErrors import FieldFormatError
from ..core.ScalarField import ScalarField

logger = logging.getLogger('convex_prior')
debug_logger = logging.getLogger('debug_convex_prior')

PGM_MAXVAL = 255
# Pillow widens samples to the full range of the mode
_PGM_SCALES = {'L': 255.0, 'I': 65535.0, 'I;16': 65535.0}


def format_real(value: float) -> str:
    return '%.17g' % value


def detect_format(path: str, fmt: Optional[str] = None) -> str:
    """Explicit format wins; otherwise .pgm means PGM and anything else CSV"""
    if fmt:
        return fmt
    return 'pgm' if path.lower().endswith('.pgm') else 'csv'


def _atomic_write_bytes(file_path: str, payload: bytes):
    """Write through a temporary file and replace the target while holding its lock"""
    directory = os.path.dirname(os.path.abspath(file_path))
    os.makedirs(directory, exist_ok=True)
    temp_path = f"{file_path}.temp"
    with FileLock(f"{file_path}.lock"):
        with open(temp_path, 'wb') as f:
            f.write(payload)
            f.flush()
            os.fsync(f.fileno())
        os.replace(temp_path, file_path)
    debug_logger.debug(f"Wrote {len(payload)} bytes to {file_path}")


def write_text_lines(file_path: str, lines: Iterable[str]):
    _atomic_write_bytes(file_path, ''.join(f"{line}\n" for line in lines).encode('utf-8'))


def write_rows_csv(file_path: str, header: Sequence[str], rows: Iterable[Sequence]):
    """Small tables (iteration histories, metrics); floats keep full precision"""
    lines = [','.join(header)]
    for row in rows:
        lines.append(','.join(format_real(v) if isinstance(v, float) else str(v) for v in row))
    write_text_lines(file_path, lines)


def field_to_csv(u: ScalarField) -> str:
    lines = [f"{u.height},{u.width}"]
    for row in u.data:
        lines.append(','.join(format_real(v) for v in row))
    return '\n'.join(lines) + '\n'


def field_from_csv(text: str, source: str = '<csv>') -> ScalarField:
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines:
        raise FieldFormatError(f"{source}: empty CSV field")
    try:
        h, w = (int(token) for token in lines[0].split(','))
    except ValueError:
        raise FieldFormatError(f"{source}: first line must be 'H,W', got '{lines[0]}'")
    if h < 1 or w < 1:
        raise FieldFormatError(f"{source}: invalid size {h}x{w}")
    if len(lines) - 1 != h:
        raise FieldFormatError(f"{source}: expected {h} rows, found {len(lines) - 1}")
    rows: List[List[float]] = []
    for index, line in enumerate(lines[1:], start=2):
        tokens = line.split(',')
        if len(tokens) != w:
            raise FieldFormatError(f"{source}: line {index} has {len(tokens)} values, expected {w}")
        try:
            rows.append([float(token) for token in tokens])
        except ValueError:
            raise FieldFormatError(f"{source}: line {index} holds a non-numeric value")
    values = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise FieldFormatError(f"{source}: non-finite value")
    return ScalarField(values)


def quantize(u: ScalarField) -> np.ndarray:
    return np.rint(np.clip(u.data, 0.0, 1.0) * PGM_MAXVAL).astype(np.uint8)


def field_to_pgm(u: ScalarField) -> bytes:
    buffer = io.BytesIO()
    Image.fromarray(quantize(u), mode='L').save(buffer, format='PPM')
    return buffer.getvalue()


def field_from_pgm(payload: bytes, source: str = '<pgm>') -> ScalarField:
    """Decode a P2 or P5 greymap; samples are scaled to [0,1] by the image's full range"""
    try:
        with Image.open(io.BytesIO(payload)) as img:
            if img.format != 'PPM' or img.mode not in _PGM_SCALES:
                raise FieldFormatError(f"{source}: not a greymap (format {img.format}, mode {img.mode})")
            img.load()
            values = np.asarray(img, dtype=np.float64) / _PGM_SCALES[img.mode]
    except FieldFormatError:
        raise
    except (OSError, ValueError, SyntaxError) as e:
        raise FieldFormatError(f"{source}: unreadable PGM: {str(e)}")
    return ScalarField(values)


def read_field(file_path: str, fmt: Optional[str] = None) -> ScalarField:
    """
    Read a field from CSV or PGM.

    Raises:
        OSError: When the file cannot be read
        FieldFormatError: When the content is malformed or truncated
    """
    fmt = detect_format(file_path, fmt)
    with open(file_path, 'rb') as f:
        payload = f.read()
    if fmt == 'pgm':
        u = field_from_pgm(payload, file_path)
    else:
        try:
            u = field_from_csv(payload.decode('utf-8'), file_path)
        except UnicodeDecodeError:
            raise FieldFormatError(f"{file_path}: CSV field is not UTF-8 text")
    debug_logger.debug(f"Read {u.height}x{u.width} field from {file_path} ({fmt})")
    return u


def write_field(file_path: str, u: ScalarField, fmt: Optional[str] = None):
    fmt = detect_format(file_path, fmt)
    if fmt == 'pgm':
        _atomic_write_bytes(file_path, field_to_pgm(u))
    else:
        _atomic_write_bytes(file_path, field_to_csv(u).encode('utf-8'))
    logger.info(f"Wrote {u.height}x{u.width} field to {file_path}")


def sibling_path(file_path: str, suffix: str, extension: str) -> str:
    """report.txt + ('_magnitude', 'csv') -> report_magnitude.csv"""
    stem, _ = os.path.splitext(file_path)
    return f"{stem}{suffix}.{extension}"
