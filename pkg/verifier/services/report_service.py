"""
Report service: schema validation and byte-stable JSON/CSV emission
"""
import json
import logging
from functools import lru_cache
from pathlib import Path
from typing import Optional

import jsonschema
import orjson
import pandas as pd

from ..config import settings
from ..errors import ConfigError, IoError
from ..models.schemas import RunReport

logger = logging.getLogger(__name__)

SCHEMA_PATH = Path(__file__).resolve().parent.parent / "models" / "run_report.schema.json"
CSV_COLUMNS = ["experiment", "check", "value_S", "value_Sperp", "gap", "tolerance", "status"]
CURVE_COLUMNS = ["side", "branch", "theta", "x1", "x2", "x3", "x4", "integrand"]
FORMATS = ("json", "csv")


@lru_cache(maxsize=1)
def load_schema() -> dict:
    with SCHEMA_PATH.open("r", encoding="utf-8") as f:
        return json.load(f)


class ReportService:
    """Service for validating, rendering and writing run reports"""

    def to_document(self, report: RunReport) -> dict:
        return report.model_dump(mode="json")

    def validate(self, report: RunReport) -> dict:
        """Report as a plain document, checked against the shipped schema"""
        document = self.to_document(report)
        jsonschema.validate(document, load_schema())
        return document

    def emit(self, report: RunReport, format: str = "json") -> bytes:
        """Render a report; identical reports give identical bytes.

        Raises:
            ConfigError: for an unknown format
        """
        if format not in FORMATS:
            raise ConfigError(f"Unknown report format '{format}' (expected one of {', '.join(FORMATS)})")
        document = self.validate(report)
        if format == "json":
            return orjson.dumps(document, option=orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2) + b"\n"

        rows = [
            {
                "experiment": report.experiment,
                "check": check["name"],
                "value_S": check["value_S"],
                "value_Sperp": check["value_Sperp"],
                "gap": check["gap"],
                "tolerance": check["tolerance"],
                "status": check["status"],
            }
            for check in document["checks"]
        ]
        frame = pd.DataFrame(rows, columns=CSV_COLUMNS)
        body = frame.to_csv(index=False, lineterminator="\n", float_format="%.17g")
        return f"# {settings.report_schema}\n{body}".encode("utf-8")

    def write(self, report: RunReport, format: str = "json", path: Optional[str] = None) -> bytes:
        """Emit the report and write it to path when given"""
        payload = self.emit(report, format)
        if path is not None:
            self._write_bytes(path, payload)
            logger.info(f"✅ Wrote {format} report to {path}")
        return payload

    def dump_curves(self, rows: list[dict], path: str) -> None:
        """CSV of sampled conic points and integrand values for external plotting"""
        frame = pd.DataFrame(rows, columns=CURVE_COLUMNS)
        payload = frame.to_csv(index=False, lineterminator="\n", float_format="%.17g").encode("utf-8")
        self._write_bytes(path, payload)
        logger.info(f"✅ Wrote {len(rows)} curve samples to {path}")

    def _write_bytes(self, path: str, payload: bytes) -> None:
        try:
            target = Path(path)
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(payload)
        except OSError as e:
            logger.error(f"❌ Error writing {path}: {e}")
            raise IoError(f"Could not write {path}: {e}") from e


report_service = ReportService()
