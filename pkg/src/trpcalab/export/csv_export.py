"""Append-only CSV output with a JSON sidecar holding each run's configuration."""

import json
import logging
from pathlib import Path

import pandas as pd

from ..errors import TrpcaLabError
from ..experiments.config import ExperimentConfig

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


class CsvSchemaError(TrpcaLabError):
    """Raised when an existing CSV file has a different header."""
    pass


def sidecar_path(csv_path: str | Path) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.name + ".json")


def _existing_header(path: Path) -> str | None:
    if not path.exists() or path.stat().st_size == 0:
        return None
    with path.open("r", encoding="utf-8", newline="") as handle:
        return handle.readline().rstrip("\r\n")


def write_records(records: pd.DataFrame, path: str | Path, config: ExperimentConfig | None = None) -> None:
    """Append records to a CSV file, writing the header only for a new file.

    Floats are written with 17 significant digits. When config is given,
    its flat form is appended to the "runs" list of the JSON sidecar
    next to the CSV.

    Raises:
        CsvSchemaError: If the file exists with a different header.
        OSError: If the file cannot be written.
    """
    path = Path(path)
    header = ",".join(records.columns)
    existing = _existing_header(path)
    if existing is not None and existing != header:
        raise CsvSchemaError(f"{path} has header '{existing}', expected '{header}'")

    records.to_csv(path, mode="a", header=existing is None, index=False,
                   float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info("Wrote %d records to %s", len(records), path)

    if config is not None:
        sidecar = sidecar_path(path)
        runs = json.loads(sidecar.read_text(encoding="utf-8"))["runs"] if sidecar.exists() else []
        runs.append({"config": config.to_flat(), "columns": list(records.columns)})
        sidecar.write_text(json.dumps({"runs": runs}, indent=2, sort_keys=True) + "\n",
                           encoding="utf-8")


def deterministic_view(path: str | Path, timing_columns=("runtime_s", "timestamp")) -> str:
    """CSV text with the timing columns removed, for reproducibility checks."""
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    return frame.drop(columns=[c for c in timing_columns if c in frame.columns]).to_csv(
        index=False, lineterminator="\n"
    )
