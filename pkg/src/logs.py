"""Logger setup and the JSON-lines experiment record."""

import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional

LOGGER_NAME = "vqcbench"
LOG_FORMAT = "%(asctime)s  %(levelname)s  %(message)s"

logger = logging.getLogger(LOGGER_NAME)


def get_logger(log_dir: Optional[Path] = None, level: int = logging.INFO) -> logging.Logger:
    """Configure the package logger once; add a pipeline.log file handler per log_dir."""
    logger.setLevel(level)
    formatter = logging.Formatter(LOG_FORMAT)
    if not any(getattr(h, "_vqcbench_stream", False) for h in logger.handlers):
        stream = logging.StreamHandler()
        stream.setFormatter(formatter)
        stream._vqcbench_stream = True
        logger.addHandler(stream)
    if log_dir is not None:
        log_dir = Path(log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        target = str((log_dir / "pipeline.log").resolve())
        if not any(
            isinstance(h, logging.FileHandler) and h.baseFilename == target
            for h in logger.handlers
        ):
            fh = logging.FileHandler(target)
            fh.setFormatter(formatter)
            logger.addHandler(fh)
    return logger


def log_jsonl(path: Path, record: Dict[str, Any]) -> None:
    """Append one structured record, stamped with the current UTC time."""
    line = {"timestamp": datetime.now(timezone.utc).isoformat(), **record}
    try:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "a", encoding="utf-8") as f:
            f.write(json.dumps(line, sort_keys=True) + "\n")
    except OSError:
        logger.warning("Could not write to %s", path)
