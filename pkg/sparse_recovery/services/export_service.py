"""Export service for writing result rows and solver traces."""
import csv
import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, TextIO

from sparse_recovery.core.schemas.experiment_models import OutputFormat, ResultRow

logger = logging.getLogger(__name__)


@contextmanager
def _open_target(out: Optional[str]) -> Iterator[TextIO]:
    """Yield a text stream for `out`, or stdout when no path is given."""
    if out is None or out == "-":
        yield sys.stdout
        sys.stdout.flush()
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        yield handle


def _cell(value) -> str:
    if value is None:
        return ""
    return str(value)


class ExportService:
    """Writes ResultRow records as CSV or JSON lines."""

    def write_rows(self, rows: Sequence[ResultRow], out: Optional[str] = None, fmt: OutputFormat = OutputFormat.CSV) -> int:
        """Write rows with one header line (CSV) or one JSON object per line; returns the row count."""
        with _open_target(out) as stream:
            if fmt == OutputFormat.JSONL:
                for row in rows:
                    stream.write(row.model_dump_json() + "\n")
            else:
                columns = ResultRow.columns()
                writer = csv.writer(stream, lineterminator="\n")
                writer.writerow(columns)
                for row in rows:
                    data = row.model_dump()
                    writer.writerow([_cell(data[column]) for column in columns])
        logger.info(f"Wrote {len(rows)} {fmt.value} rows to {out or 'stdout'}")
        return len(rows)

    def write_trace(self, trace_rows: List[dict], out: str) -> int:
        """Write per-iteration trace rows (from AmpTrace/AdmmTrace.to_rows()) as CSV."""
        if not trace_rows:
            logger.warning(f"Empty trace; nothing written to {out}")
            return 0
        columns = list(trace_rows[0])
        with _open_target(out) as stream:
            writer = csv.DictWriter(stream, fieldnames=columns, lineterminator="\n")
            writer.writeheader()
            for row in trace_rows:
                writer.writerow({key: _cell(row.get(key)) for key in columns})
        logger.info(f"Wrote {len(trace_rows)} trace rows to {out}")
        return len(trace_rows)
