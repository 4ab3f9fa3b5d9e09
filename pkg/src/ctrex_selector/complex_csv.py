"""Complex-valued CSV tables and result documents."""

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from .cnum import ComplexMatrix

PathLike = Union[str, Path]

BENCH_COLUMNS = ["snr", "trials", "fdr", "tpr", "exact", "runtime_ms"]
SELECT_COLUMNS = ["index", "phi", "selected"]
TABLE_FIELDS = ("selected", "phi", "rows")


# Custom exceptions
class ComplexTableError(ValueError):
    """Raised when a complex table cannot be read."""
    pass


class UnpairedColumnError(ComplexTableError):
    """Raised when header columns do not form <name>.re / <name>.im pairs."""
    pass


class NonNumericCellError(ComplexTableError):
    """Raised when a cell is not a finite decimal number."""
    pass


class RaggedRowsError(ComplexTableError):
    """Raised when a row does not have as many cells as the header."""
    pass


@dataclass
class ComplexTable:
    names: List[str]
    values: ComplexMatrix


def _pair_header(header: Sequence[str]) -> List[str]:
    header = [h.strip() for h in header]
    if len(header) % 2:
        raise UnpairedColumnError(
            f"Column '{header[-1]}' has no partner; expected <name>.re,<name>.im pairs"
        )
    names = []
    for re_col, im_col in zip(header[::2], header[1::2]):
        if not re_col.endswith(".re"):
            raise UnpairedColumnError(f"Column '{re_col}' should be a '<name>.re' column")
        base = re_col[:-len(".re")]
        if im_col != f"{base}.im":
            raise UnpairedColumnError(
                f"Column '{im_col}' does not pair with '{re_col}'; expected '{base}.im'"
            )
        names.append(base)
    return names


def read_complex_table(path: PathLike) -> ComplexTable:
    """
    Read a CSV whose columns come in adjacent <name>.re, <name>.im pairs.

    Raises:
        UnpairedColumnError: header columns do not pair up
        RaggedRowsError: a row has the wrong number of cells
        NonNumericCellError: a cell is not a finite decimal
    """
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if not header:
            raise ComplexTableError("File is empty; expected a header row")
        names = _pair_header(header)
        header = [h.strip() for h in header]

        rows = []
        for row in reader:
            if not row or all(not cell.strip() for cell in row):
                continue
            line = reader.line_num
            if len(row) != len(header):
                raise RaggedRowsError(
                    f"Line {line} has {len(row)} cells, expected {len(header)}"
                )
            parsed = []
            for column, cell in zip(header, row):
                try:
                    value = float(cell)
                except ValueError:
                    raise NonNumericCellError(
                        f"Column '{column}', line {line}: '{cell}' is not a number"
                    ) from None
                if not math.isfinite(value):
                    raise NonNumericCellError(
                        f"Column '{column}', line {line}: '{cell}' is not finite"
                    )
                parsed.append(value)
            rows.append(parsed)

    if not rows:
        raise ComplexTableError("Table has a header but no data rows")
    real = np.asarray(rows, dtype=np.float64)
    values = real[:, ::2] + 1j * real[:, 1::2]
    return ComplexTable(names=names, values=np.asfortranarray(values))


def parse_complex_csv(path: PathLike) -> ComplexMatrix:
    """n x p complex matrix from a paired-column CSV."""
    return read_complex_table(path).values


def write_complex_csv(path: PathLike, values: ComplexMatrix,
                      names: Optional[Sequence[str]] = None) -> None:
    """Write a matrix (or vector) with shortest round-trip decimals."""
    values = np.asarray(values, dtype=np.complex128)
    if values.ndim == 1:
        values = values[:, np.newaxis]
    if names is None:
        names = [f"x{j + 1}" for j in range(values.shape[1])]
    if len(names) != values.shape[1]:
        raise ValueError(f"Got {len(names)} names for {values.shape[1]} columns")

    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow([f"{name}.{part}" for name in names for part in ("re", "im")])
        for row in values:
            writer.writerow([repr(float(part)) for z in row for part in (z.real, z.imag)])


def _cell(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _plain_csv(columns: List[str], rows: List[Dict]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row[c]) for c in columns])
    return buffer.getvalue()


def metadata_path(path: PathLike) -> Path:
    """Sidecar holding the config and scalar fields of a CSV result: result.csv -> result.meta.json."""
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def document_metadata(document: Dict) -> Dict:
    """Fields of a result document that do not fit its CSV table."""
    return {key: value for key, value in document.items() if key not in TABLE_FIELDS}


def render_result_document(document: Dict, fmt: str = "json") -> str:
    """
    Render a select result ({config, selected, v_star, T_star, fdp_hat, phi})
    or a benchmark result ({config, rows}).

    The JSON form holds the whole document. The CSV form is the bare table,
    header first: one row per variable (index, phi, selected) or one row per
    SNR level (snr, trials, fdr, tpr, exact, runtime_ms). Everything else
    goes to the metadata sidecar written by write_result_document.
    """
    if fmt == "json":
        return json.dumps(document, indent=2) + "\n"
    if fmt != "csv":
        raise ValueError(f"Unknown result format '{fmt}'")
    if "rows" in document:
        return _plain_csv(BENCH_COLUMNS, document["rows"])
    chosen = set(document["selected"])
    rows = [{'index': j, 'phi': float(phi), 'selected': j in chosen}
            for j, phi in enumerate(document["phi"])]
    return _plain_csv(SELECT_COLUMNS, rows)


def write_result_document(path: PathLike, document: Dict, fmt: str = "json") -> List[Path]:
    """Write a result document; the CSV form also writes its metadata sidecar."""
    path = Path(path)
    path.write_text(render_result_document(document, fmt), encoding="utf-8")
    if fmt != "csv":
        return [path]
    sidecar = metadata_path(path)
    sidecar.write_text(json.dumps(document_metadata(document), indent=2) + "\n", encoding="utf-8")
    return [path, sidecar]


def parse_result_document(text: str, metadata: Optional[Dict] = None) -> Dict:
    """
    Parse a rendered JSON or CSV result document into the same dictionary shape.

    A CSV table is merged with ``metadata`` (the sidecar content) when given.
    """
    header = text.partition("\n")[0].strip().split(",")
    if header not in (SELECT_COLUMNS, BENCH_COLUMNS):
        return json.loads(text)

    document = dict(metadata or {})
    reader = csv.DictReader(text.splitlines())
    if header == SELECT_COLUMNS:
        records = list(reader)
        document["selected"] = [int(r["index"]) for r in records if r["selected"] == "1"]
        document["phi"] = [float(r["phi"]) for r in records]
        return document

    document["rows"] = [
        {
            'snr': float(r["snr"]),
            'trials': int(r["trials"]),
            'fdr': float(r["fdr"]),
            'tpr': float(r["tpr"]),
            'exact': int(r["exact"]),
            'runtime_ms': float(r["runtime_ms"]),
        }
        for r in reader
    ]
    return document


def read_result_document(path: PathLike) -> Dict:
    """Read a JSON result, or a CSV result together with its sidecar when present."""
    text = Path(path).read_text(encoding="utf-8")
    sidecar = metadata_path(path)
    metadata = None
    if sidecar.is_file():
        metadata = json.loads(sidecar.read_text(encoding="utf-8"))
    return parse_result_document(text, metadata)
