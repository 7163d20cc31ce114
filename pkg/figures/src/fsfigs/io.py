"""CSV access for the documented experiment schemas."""

import csv
import sys

PROFILE_COLUMNS = ("ensemble", "sample", "cut", "entropy_bits", "entropy_frac")
SPECTRUM_COLUMNS = ("ensemble", "sample", "cut", "index", "eigenvalue",
                    "scaled_eigenvalue")


class SchemaError(ValueError):
    """Input file does not conform to the documented CSV schema."""


def read_rows(path, required_columns):
    """Parse a CSV into dict rows, insisting on the required columns."""
    try:
        fh = open(path, encoding="ascii", newline="")
    except OSError as exc:
        raise SchemaError(f"{path}: {exc}")
    with fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in required_columns:
            if column not in header:
                raise SchemaError(f"{path}: missing column '{column}' "
                                  f"(found {', '.join(header) or 'nothing'})")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            for column in required_columns:
                if row[column] is None:
                    raise SchemaError(f"{path}: row {lineno} is short")
            rows.append(row)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def parse_float(row, column, path):
    try:
        return float(row[column])
    except (TypeError, ValueError):
        raise SchemaError(
            f"{path}: cannot parse {column}={row[column]!r} as a number")


def exit_on_schema_error(fn):
    """Wrap a script main(): schema violations exit with status 2."""
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except SchemaError as exc:
            print(f"error: {exc}", file=sys.stderr)
            sys.exit(2)
    return wrapper
