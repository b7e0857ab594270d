from common.imports import pd, np, os, json, logging, Path, datetime, Dict, List, Optional, Any
from timing_logger import log as tlog
from constants import (
    RESULT_COLUMNS, REPLAY_REQUIRED_COLUMNS, COL_EXPERIMENT, COL_PARAMS, COL_ESTIMATE, COL_ESTIMATE_HEX,
    COL_STDERR, COL_N_SAMPLES, COL_SEED, COL_CONTRACT, COL_TIMESTAMP,
)
from exceptions import ReplayError


def _to_jsonable(value):
    """json.dumps fallback for numpy scalars/arrays and objects exposing to_dict()."""
    if isinstance(value, np.ndarray):
        if np.iscomplexobj(value):
            return {"re": value.real.tolist(), "im": value.imag.tolist()}
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if hasattr(value, "to_dict"):
        return value.to_dict()
    if isinstance(value, (set, tuple)):
        return list(value)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def encode_params(params: Dict[str, Any]) -> str:
    """Canonical JSON for a parameter table (sorted keys, so equal tables give equal strings)."""
    return json.dumps(params, sort_keys=True, default=_to_jsonable)


class ResultsStore:
    """
    Append-only store for experiment results.

    Rows go to one CSV file (header written on first use); structured reports go
    to JSON files next to it. Estimates are also stored as float.hex() so a row can
    be replayed and compared bit for bit.
    """

    def __init__(self, output_dir, results_file: str = "results.csv"):
        self.output_dir = Path(output_dir)
        self.results_path = self.output_dir / results_file
        self._written: List[Path] = []

    def append_rows(self, experiment: str, rows: List[Dict[str, Any]], seed: int, contract_ok: bool) -> Path:
        """
        Append estimate rows for one run.

        Args:
            experiment: Registered experiment name
            rows: Dicts with keys params, estimate, stderr, n_samples
            seed: Seed the run was started with
            contract_ok: Whether the run satisfied its contract

        Returns:
            Path of the CSV file
        """
        if not rows:
            logging.debug(f"RESULTS_STORE: No rows to append for {experiment}")
            return self.results_path
        self.output_dir.mkdir(parents=True, exist_ok=True)
        timestamp = datetime.datetime.now().isoformat(timespec="seconds")
        records = []
        for row in rows:
            estimate = float(row["estimate"])
            records.append({
                COL_EXPERIMENT: experiment,
                COL_PARAMS: encode_params(row["params"]),
                COL_ESTIMATE: estimate,
                COL_ESTIMATE_HEX: estimate.hex(),
                COL_STDERR: float(row.get("stderr", 0.0)),
                COL_N_SAMPLES: int(row.get("n_samples", 1)),
                COL_SEED: int(seed),
                COL_CONTRACT: "ok" if contract_ok else "violated",
                COL_TIMESTAMP: timestamp,
            })
        df = pd.DataFrame.from_records(records, columns=RESULT_COLUMNS)
        header = not self.results_path.exists()
        with tlog(f"ResultsStore.append_rows n={len(df)}"):
            df.to_csv(self.results_path, mode="a", header=header, index=False)
        logging.debug(f"RESULTS_STORE: Appended {len(df)} rows for {experiment} to {self.results_path.name}")
        self._written.append(self.results_path)
        return self.results_path

    def write_report(self, experiment: str, seed: int, report: Dict[str, Any]) -> Optional[Path]:
        """Write a JSON report as <experiment>_seed<seed>_<timestamp>.json; None when the report is empty."""
        if not report:
            return None
        self.output_dir.mkdir(parents=True, exist_ok=True)
        stamp = datetime.datetime.now().strftime("%Y%m%d_%H%M%S_%f")
        path = self.output_dir / f"{experiment}_seed{seed}_{stamp}.json"
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(report, handle, indent=2, default=_to_jsonable)
        logging.debug(f"RESULTS_STORE: Wrote report {path.name}")
        self._written.append(path)
        return path

    def get_written_files(self) -> List[Path]:
        return self._written.copy()


def read_row(csv_path, index: int) -> Dict[str, Any]:
    """
    Read one result row for replay.

    Args:
        csv_path: Results CSV written by ResultsStore
        index: Zero-based data row index

    Returns:
        Dict with experiment, params (decoded), seed, estimate_hex

    Raises:
        ReplayError: Missing file, missing columns, bad index or undecodable params
    """
    if not os.path.exists(csv_path):
        raise ReplayError(f"results file not found: {csv_path}")
    df = pd.read_csv(csv_path, dtype={COL_ESTIMATE_HEX: str, COL_PARAMS: str, COL_EXPERIMENT: str})
    missing = REPLAY_REQUIRED_COLUMNS - set(df.columns)
    if missing:
        raise ReplayError(f"results file lacks required columns {sorted(missing)}")
    if not 0 <= index < len(df):
        raise ReplayError(f"row index {index} out of range for {len(df)} rows")
    record = df.iloc[index]
    try:
        params = json.loads(record[COL_PARAMS])
    except (TypeError, json.JSONDecodeError) as exc:
        raise ReplayError(f"row {index} has undecodable params: {exc}") from None
    if not isinstance(params, dict):
        raise ReplayError(f"row {index} params must be a JSON object")
    if pd.isna(record[COL_SEED]):
        raise ReplayError(f"row {index} has no seed")
    return {
        "experiment": str(record[COL_EXPERIMENT]),
        "params": params,
        "seed": int(record[COL_SEED]),
        "estimate_hex": str(record[COL_ESTIMATE_HEX]),
    }
