"""Prediction-log parsing and validation.

A log is one model evaluated on one dataset: a sequence of (maxprob, correct)
records. Two on-disk formats are accepted:

* CSV with header ``model,dataset,maxprob,correct[,sample_id]``;
  ``correct`` is one of ``0, 1, true, false``.
* JSONL, one object per line with keys ``model``, ``dataset``, ``maxprob``
  (number), ``correct`` (boolean) and optional ``sample_id`` (string).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Iterable, NamedTuple, Optional, Union

FORMATS = ("csv", "jsonl")
REQUIRED_COLUMNS = ("model", "dataset", "maxprob", "correct")
OPTIONAL_COLUMNS = ("sample_id",)

_TRUE = {"1", "true"}
_FALSE = {"0", "false"}


class IngestError(ValueError):
    """Malformed or invalid prediction log input."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class PredictionRecord:
    model_id: str
    dataset_id: str
    maxprob: float
    correct: bool
    sample_id: Optional[str] = None

    def __post_init__(self):
        if not self.model_id:
            raise IngestError("model_id must be non-empty")
        if not self.dataset_id:
            raise IngestError("dataset_id must be non-empty")
        if not isinstance(self.correct, bool):
            raise IngestError(f"correct must be a boolean, got {self.correct!r}")
        mp = self.maxprob
        if isinstance(mp, bool) or not isinstance(mp, (int, float)):
            raise IngestError(f"maxprob must be a number, got {mp!r}")
        # a softmax maximum is never 0; a 0 here is a logging bug, not something to clamp
        if not math.isfinite(mp) or not 0.0 < mp <= 1.0:
            raise IngestError(f"maxprob {mp!r} outside (0, 1]")


@dataclass(frozen=True)
class PredictionLog:
    records: tuple
    model_id: str
    dataset_id: str

    def __post_init__(self):
        if not self.records:
            raise IngestError(f"log {self.model_id}/{self.dataset_id} is empty")
        for r in self.records:
            if r.model_id != self.model_id or r.dataset_id != self.dataset_id:
                raise IngestError(
                    f"record for {r.model_id}/{r.dataset_id} in log "
                    f"{self.model_id}/{self.dataset_id}"
                )

    @classmethod
    def from_arrays(cls, model_id: str, dataset_id: str, maxprob, correct, sample_ids=None):
        if sample_ids is None:
            sample_ids = [None] * len(maxprob)
        records = tuple(
            PredictionRecord(model_id, dataset_id, float(m), bool(c), s)
            for m, c, s in zip(maxprob, correct, sample_ids)
        )
        return cls(records, model_id, dataset_id)

    def __len__(self):
        return len(self.records)

    @property
    def maxprobs(self) -> list:
        return [r.maxprob for r in self.records]

    @property
    def corrects(self) -> list:
        return [r.correct for r in self.records]

    @property
    def accuracy(self) -> float:
        return sum(self.corrects) / len(self.records)


class LogPair(NamedTuple):
    iid: PredictionLog
    ood: PredictionLog


def _parse_correct(value: str, line: int) -> bool:
    v = value.strip().lower()
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    raise IngestError(f"correct must be one of 0, 1, true, false; got {value!r}", line)


def _parse_maxprob(value: str, line: int) -> float:
    try:
        mp = float(value)
    except ValueError:
        raise IngestError(f"maxprob is not a number: {value!r}", line) from None
    if not math.isfinite(mp) or not 0.0 < mp <= 1.0:
        raise IngestError(f"maxprob {value} outside (0, 1]", line)
    return mp


def _record(line: int, **fields) -> PredictionRecord:
    try:
        return PredictionRecord(**fields)
    except IngestError as exc:
        raise IngestError(str(exc), line) from None


def _iter_csv(text: str):
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("empty input") from None
    header = [h.strip() for h in header]
    missing = [c for c in REQUIRED_COLUMNS if c not in header]
    if missing:
        raise IngestError(f"missing required column(s): {', '.join(missing)}", 1)
    unknown = [c for c in header if c not in REQUIRED_COLUMNS + OPTIONAL_COLUMNS]
    if unknown or len(set(header)) != len(header):
        raise IngestError(f"unexpected header {','.join(header)}", 1)
    idx = {name: i for i, name in enumerate(header)}

    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise IngestError(f"expected {len(header)} fields, got {len(row)}", line)
        sample_id = row[idx["sample_id"]] if "sample_id" in idx else None
        yield _record(
            line,
            model_id=row[idx["model"]].strip(),
            dataset_id=row[idx["dataset"]].strip(),
            maxprob=_parse_maxprob(row[idx["maxprob"]], line),
            correct=_parse_correct(row[idx["correct"]], line),
            sample_id=sample_id or None,
        )


def _iter_jsonl(text: str):
    for line, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise IngestError(f"invalid JSON: {exc.msg}", line) from None
        if not isinstance(obj, dict):
            raise IngestError("expected a JSON object", line)
        missing = [c for c in REQUIRED_COLUMNS if c not in obj]
        if missing:
            raise IngestError(f"missing required column(s): {', '.join(missing)}", line)
        unknown = sorted(set(obj) - set(REQUIRED_COLUMNS + OPTIONAL_COLUMNS))
        if unknown:
            raise IngestError(f"unexpected key(s): {', '.join(unknown)}", line)
        model, dataset = obj["model"], obj["dataset"]
        if not isinstance(model, str) or not isinstance(dataset, str):
            raise IngestError("model and dataset must be strings", line)
        if not isinstance(obj["correct"], bool):
            raise IngestError(f"correct must be a boolean, got {obj['correct']!r}", line)
        mp = obj["maxprob"]
        if isinstance(mp, bool) or not isinstance(mp, (int, float)):
            raise IngestError(f"maxprob must be a number, got {mp!r}", line)
        if not math.isfinite(mp) or not 0.0 < mp <= 1.0:
            raise IngestError(f"maxprob {mp} outside (0, 1]", line)
        sample_id = obj.get("sample_id")
        if sample_id is not None and not isinstance(sample_id, str):
            raise IngestError("sample_id must be a string", line)
        yield _record(
            line,
            model_id=model,
            dataset_id=dataset,
            maxprob=float(mp),
            correct=obj["correct"],
            sample_id=sample_id,
        )


def parse_log(source: Union[bytes, str, BinaryIO], fmt: str = "csv") -> list:
    """Parse a CSV or JSONL prediction log into one PredictionLog per (model, dataset).

    Groups appear in order of first occurrence; record order within a group
    follows the input.
    """
    if fmt not in FORMATS:
        raise IngestError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    if isinstance(source, str):
        text = source
    else:
        data = source if isinstance(source, bytes) else source.read()
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise IngestError(f"input is not valid UTF-8: {exc}") from None
    if text.startswith("\ufeff"):
        text = text[1:]
    if not text.strip():
        raise IngestError("empty input")

    groups: dict = {}
    rows = _iter_csv(text) if fmt == "csv" else _iter_jsonl(text)
    for rec in rows:
        groups.setdefault((rec.model_id, rec.dataset_id), []).append(rec)
    if not groups:
        raise IngestError("input contains no records")
    return [PredictionLog(tuple(recs), m, d) for (m, d), recs in groups.items()]


def infer_format(path: Union[str, Path]) -> str:
    return "jsonl" if Path(path).suffix.lower() in (".jsonl", ".ndjson") else "csv"


def read_logs(path: Union[str, Path], fmt: Optional[str] = None) -> list:
    path = Path(path)
    with path.open("rb") as fh:
        return parse_log(fh, fmt or infer_format(path))


def write_log(logs: Iterable[PredictionLog], fmt: str = "csv") -> bytes:
    """Serialize logs; maxprob is written with repr() so re-parsing is exact."""
    if fmt not in FORMATS:
        raise IngestError(f"unknown format {fmt!r}")
    out = io.StringIO(newline="")
    if fmt == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(REQUIRED_COLUMNS + OPTIONAL_COLUMNS)
        for log in logs:
            for r in log.records:
                writer.writerow(
                    [r.model_id, r.dataset_id, repr(r.maxprob), int(r.correct), r.sample_id or ""]
                )
    else:
        for log in logs:
            for r in log.records:
                obj = {"model": r.model_id, "dataset": r.dataset_id,
                       "maxprob": r.maxprob, "correct": r.correct}
                if r.sample_id is not None:
                    obj["sample_id"] = r.sample_id
                out.write(json.dumps(obj) + "\n")
    return out.getvalue().encode("utf-8")


def validate_pair(iid: PredictionLog, ood: PredictionLog) -> LogPair:
    """Check that two logs are the same model on different datasets."""
    if iid.model_id != ood.model_id:
        raise IngestError(f"model mismatch: {iid.model_id!r} vs {ood.model_id!r}")
    if iid.dataset_id == ood.dataset_id:
        raise IngestError(f"IID and OOD logs share dataset {iid.dataset_id!r}")
    return LogPair(iid, ood)
