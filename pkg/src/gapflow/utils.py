"""Helper functions."""
import hashlib
import json
import logging
import math
import os
from decimal import Decimal
from typing import Any
from typing import Dict

from dotenv import load_dotenv

load_dotenv()


def get_logger(name: str) -> logging.Logger:
    """gapflow logger

    Returns a logger that logs to file. The name arg
    should be the current file name. For example:
    _ = get_logger(name=__name__)
    """
    logger = logging.getLogger(name)
    if not logger.handlers:
        log_format = "%(asctime)s | %(levelname)-7s | %(name)s | %(message)s"
        fh = logging.FileHandler(os.getenv("GAPFLOW_LOG_FILE", "gapflowLog.txt"))
        formatter = logging.Formatter(log_format, datefmt="%Y-%m-%d %H:%M:%S")
        fh.setFormatter(formatter)
        logger.addHandler(fh)
    logger.setLevel(logging.DEBUG)
    return logger


def canonical_json(obj: Any) -> str:
    """Deterministic JSON text: sorted keys, no whitespace."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_json_default)


def _json_default(obj: Any) -> Any:
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"object of type {type(obj).__name__} is not JSON serializable")


def sha256_hex(obj: Any) -> str:
    """SHA-256 of the canonical JSON of obj."""
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


def finite_or_none(val: float) -> Any:
    """JSON has no inf/nan; map them to None."""
    if isinstance(val, float) and not math.isfinite(val):
        return None
    return val


def clean_for_json(obj: Any) -> Any:
    """Recursively replace non-finite floats by None."""
    if isinstance(obj, dict):
        return {k: clean_for_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean_for_json(v) for v in obj]
    if hasattr(obj, "tolist"):
        return clean_for_json(obj.tolist())
    return finite_or_none(obj)


def format_values(val: Any) -> Any:
    """shorten values for cli display"""
    if isinstance(val, float):
        if not math.isfinite(val):
            return str(val)
        return Decimal(f"{val:.10g}")
    elif len(str(val)) > 24:
        return f"{str(val)[:10]}...{str(val)[-9:]}"
    else:
        return val


def with_header(payload: Dict[str, Any], schema: str, config_hash: str) -> Dict[str, Any]:
    """Prefix a JSON report with the schema tag and config hash."""
    return {"schema": schema, "config_hash": config_hash, **payload}
