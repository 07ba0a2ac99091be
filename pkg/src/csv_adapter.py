"""
CSV Adapter Module

Reads raw `group,value` observation files into a Dataset and writes trace and
sweep tables. Column names are matched case-insensitively; anything else in
the file is reported rather than guessed at.
"""
import logging
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from .config import RAW_CSV_COLUMNS, SWEEP_CSV_COLUMNS
from .core_model import Dataset, build_dataset
from .errors import DataValidationError
from .samplers import Trace, trace_to_dataframe

logger = logging.getLogger(__name__)


def detect_csv_columns(headers: Sequence[str]) -> Dict[str, str]:
    """Map the required column names to the file's actual header spelling."""
    headers_lower = {str(h).lower().strip(): h for h in headers}
    return {name: headers_lower[name] for name in RAW_CSV_COLUMNS if name in headers_lower}


def read_raw_groups(path: str) -> List[List[float]]:
    """
    Read a raw observation file into per-group value lists.

    Groups must be labelled 1..K; every label in that range needs at least
    one row.
    """
    frame = pd.read_csv(path)
    mapping = detect_csv_columns(frame.columns)
    missing = [name for name in RAW_CSV_COLUMNS if name not in mapping]
    if missing:
        raise DataValidationError(
            f"raw data file is missing column(s): {', '.join(missing)}",
            {"path": path, "columns": [str(c) for c in frame.columns]},
        )

    groups = pd.to_numeric(frame[mapping["group"]], errors="coerce")
    values = pd.to_numeric(frame[mapping["value"]], errors="coerce")
    bad = frame.index[groups.isna() | values.isna() | ~np.isfinite(values.fillna(0.0))]
    if len(bad):
        raise DataValidationError(
            f"non-numeric or non-finite entries in rows {[int(i) + 2 for i in bad[:5]]}",
            {"path": path, "rows": len(bad)},
        )
    if not np.all(groups == np.round(groups)):
        raise DataValidationError("group labels must be integers", {"path": path})

    labels = groups.astype(int)
    K = int(labels.max()) if len(labels) else 0
    if len(labels) and int(labels.min()) < 1:
        raise DataValidationError("group labels must start at 1", {"path": path})

    by_group = values.groupby(labels)
    out = []
    for label in range(1, K + 1):
        out.append(by_group.get_group(label).tolist() if label in by_group.groups else [])
    logger.debug("read %d observations in %d groups from %s", len(values), K, path)
    return out


def read_raw_csv(path: str) -> Dataset:
    """Read a raw observation file and reduce it to sufficient statistics."""
    return build_dataset(read_raw_groups(path))


def write_raw_csv(groups: Sequence[Sequence[float]], path: str) -> None:
    """Write grouped observations in `group,value` form, groups labelled from 1."""
    rows = [(i, float(v)) for i, group in enumerate(groups, start=1) for v in group]
    pd.DataFrame(rows, columns=RAW_CSV_COLUMNS).to_csv(path, index=False, float_format="%.17g")


def write_trace_csv(trace: Trace, path: str) -> None:
    trace_to_dataframe(trace).to_csv(path, index=False, float_format="%.17g")


def sweep_frame(rows: List[Dict[str, object]]) -> pd.DataFrame:
    """Sweep rows as a frame; n_star kept as a decimal string."""
    frame = pd.DataFrame(rows, columns=SWEEP_CSV_COLUMNS)
    frame["n_star"] = frame["n_star"].astype(str)
    return frame


def write_sweep_csv(frame: pd.DataFrame, path: Optional[str] = None) -> str:
    """Write the sweep table; returns the CSV text as well."""
    text = frame.to_csv(index=False, float_format="%.17g")
    if path is not None:
        with open(path, "w", newline="") as handle:
            handle.write(text)
    return text
