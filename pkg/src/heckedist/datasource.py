"""Ingestion of Hecke eigenvalue data: bundled fixtures, a local cache, and
an optional REST client for the LMFDB-style API.

Raw eigenvalues are normalized to lambda_p = a_p / N(p)^((k-1)/2), which the
Deligne bound keeps inside [-2, 2]; any value escaping the bound signals
corrupted data or a wrong normalization and is rejected.  Endpoint paths
and response field names live in ApiConfig rather than code because the
upstream schema drifts; the test suite runs entirely from recorded
fixtures with networking disabled.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .errors import (
    CacheMiss,
    MissingEigenvalue,
    NetworkError,
    RamanujanViolation,
    SchemaError,
    TotalWeightZero,
)
from .equidist import DataPoint, Dataset
from .measures import MeasureSpec

RAMANUJAN_SLACK = 1e-6
CACHE_ENV_VAR = "HECKEDIST_CACHE_DIR"
OFFLINE_ENV_VAR = "HECKEDIST_OFFLINE"
FIXTURE_DIR = os.path.join(os.path.dirname(__file__), "fixtures")


@dataclass(frozen=True)
class EigenvalueRecord:
    """One automorphic object: label, weight data, prime -> eigenvalue map.

    `eigenvalues` maps a prime key ("2" over Q; "2.1" etc. for a quadratic
    base field) to (raw a_p, prime norm).  For forms with a quadratic Hecke
    eigenvalue field there is one record per real embedding.
    """

    label: str
    degree: int
    field_disc: Optional[int]  # None = rational base field
    weight: int
    level_norm: int
    eigenvalues: dict[str, tuple[float | int, int]]  # key -> (raw a_p, prime norm)
    embedding_index: int = 0
    hecke_field: Optional[int] = None
    synthetic: bool = False
    weight_factor: float = 1.0

    def normalized(self, prime_key: str) -> float:
        return normalize(self, prime_key)


def normalize(record: EigenvalueRecord, prime_key: str) -> float:
    """lambda_p = a_p / N(p)^((k-1)/2), Deligne-checked."""
    key = str(prime_key)
    if key not in record.eigenvalues:
        raise MissingEigenvalue(f"{record.label} has no eigenvalue at {key}")
    a_p, norm = record.eigenvalues[key]
    lam = a_p / norm ** ((record.weight - 1) / 2.0)
    if abs(lam) > 2.0 + RAMANUJAN_SLACK:
        raise RamanujanViolation(
            f"{record.label}: lambda = {lam} at {key} violates the bound"
        )
    return lam


# ---------------------------------------------------------------------------
# Parsing


def _require(obj: dict, key: str, label: str = "?"):
    if key not in obj:
        raise SchemaError(f"record {label}: missing field {key!r}")
    return obj[key]


def parse_record_json(obj: dict) -> list[EigenvalueRecord]:
    """Parse one JSON object into records (one per Hecke-field embedding)."""
    label = _require(obj, "label")
    degree = int(_require(obj, "degree", label))
    field_spec = _require(obj, "field", label)
    field_disc = None if field_spec == "rational" else int(field_spec)
    weight = int(_require(obj, "weight", label))
    level = int(_require(obj, "level_norm", label))
    ap = _require(obj, "ap", label)
    hecke = obj.get("hecke_field")
    synthetic = bool(obj.get("synthetic", False))

    def prime_norm(key: str, entry) -> int:
        if isinstance(entry, dict) and "norm" in entry:
            return int(entry["norm"])
        if degree == 1:
            return int(key)
        raise SchemaError(f"record {label}: no norm for prime {key}")

    embeddings: list[tuple[float, float]] = [(1.0, 0.0)]
    if hecke is not None:
        D = int(hecke)
        r = math.sqrt(D)
        w1 = (1 + r) / 2 if D % 4 == 1 else r
        w2 = (1 - r) / 2 if D % 4 == 1 else -r
        embeddings = [(1.0, w1), (1.0, w2)]

    out = []
    for idx, (one, wemb) in enumerate(embeddings):
        eigs = {}
        for key, entry in ap.items():
            norm = prime_norm(key, entry)
            if isinstance(entry, dict):
                raw = entry.get("ap", entry.get("coeffs"))
            else:
                raw = entry
            if isinstance(raw, int):
                value = raw  # keep exact; integers can exceed float precision
            elif isinstance(raw, float):
                value = raw
            elif isinstance(raw, (list, tuple)) and len(raw) == 2:
                value = float(raw[0]) * one + float(raw[1]) * wemb
            else:
                raise SchemaError(f"record {label}: bad eigenvalue at {key}")
            eigs[str(key)] = (value, norm)
        out.append(
            EigenvalueRecord(
                label=label if len(embeddings) == 1 else f"{label}.e{idx}",
                degree=degree,
                field_disc=field_disc,
                weight=weight,
                level_norm=level,
                eigenvalues=eigs,
                embedding_index=idx,
                hecke_field=hecke,
                synthetic=synthetic,
                weight_factor=float(obj.get("weight_factor", 1.0)),
            )
        )
    return out


def _record_to_json(rec_obj: dict) -> str:
    return json.dumps(rec_obj, sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# Queries and cache


@dataclass(frozen=True)
class Query:
    degree: int = 1
    level_min: int = 1
    level_max: int = 1
    weight_min: int = 2
    weight_max: int = 12
    primes_up_to: int = 100

    def canonical(self) -> str:
        return json.dumps(
            {
                "degree": self.degree,
                "level": [self.level_min, self.level_max],
                "weight": [self.weight_min, self.weight_max],
                "primes_up_to": self.primes_up_to,
            },
            sort_keys=True,
            separators=(",", ":"),
        )

    def key(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    def matches(self, obj: dict) -> bool:
        return (
            int(obj.get("degree", -1)) == self.degree
            and self.level_min <= int(obj.get("level_norm", -1)) <= self.level_max
            and self.weight_min <= int(obj.get("weight", -1)) <= self.weight_max
        )


@dataclass(frozen=True)
class ApiConfig:
    """Endpoint layout; data, not code, because the upstream schema drifts."""

    base_url: str = "https://www.lmfdb.org/api"
    newforms_path: str = "/mf_newforms/"
    response_list_key: str = "data"
    next_page_key: str = "next"  # absolute URL of the next page, if any
    field_map: tuple[tuple[str, str], ...] = (
        ("label", "label"),
        ("weight", "weight"),
        ("level_norm", "level"),
        ("ap", "traces"),
    )
    rate_limit_seconds: float = 1.0
    max_retries: int = 3
    timeout_seconds: float = 30.0
    retry_base_delay: float = 1.0
    max_pages: int = 50


class DataClient:
    """Fetcher with content-addressed JSON-lines cache and rate limiting."""

    def __init__(
        self,
        cache_dir: Optional[str] = None,
        config: Optional[ApiConfig] = None,
        fixture_dir: Optional[str] = None,
        transport: Optional[Callable[[str, dict], dict]] = None,
    ):
        self.cache_dir = cache_dir or os.environ.get(CACHE_ENV_VAR) or os.path.join(
            os.path.expanduser("~"), ".cache", "heckedist"
        )
        self.config = config or ApiConfig()
        self.fixture_dir = fixture_dir or FIXTURE_DIR
        self.transport = transport or self._http_get
        self.request_count = 0
        self._last_request = 0.0

    # --- cache -------------------------------------------------------------

    def _cache_path(self, query: Query) -> str:
        return os.path.join(self.cache_dir, query.key() + ".jsonl")

    def cache_lookup(self, query: Query) -> Optional[list[dict]]:
        path = self._cache_path(query)
        if not os.path.exists(path):
            return None
        with open(path, "r", encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]

    def cache_store(self, query: Query, rows: list[dict]):
        os.makedirs(self.cache_dir, exist_ok=True)
        path = self._cache_path(query)
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(_record_to_json(row) + "\n")
        os.replace(tmp, path)

    # --- transports ----------------------------------------------------------

    def _http_get(self, url: str, params: dict) -> dict:
        import requests

        wait = self.config.rate_limit_seconds - (time.monotonic() - self._last_request)
        if wait > 0:
            time.sleep(wait)
        delay = self.config.retry_base_delay
        last_exc: Optional[Exception] = None
        for _ in range(self.config.max_retries):
            try:
                self._last_request = time.monotonic()
                resp = requests.get(url, params=params, timeout=self.config.timeout_seconds)
                if resp.status_code >= 500:
                    raise NetworkError(f"server error {resp.status_code}")
                resp.raise_for_status()
                return resp.json()
            except NetworkError as exc:
                last_exc = exc
            except Exception as exc:  # connection errors, bad JSON
                last_exc = exc
            time.sleep(delay)
            delay *= 2
        raise NetworkError(f"giving up on {url}: {last_exc}")

    def _network_rows(self, query: Query) -> list[dict]:
        if os.environ.get(OFFLINE_ENV_VAR):
            raise NetworkError("networking disabled by environment")
        cfg = self.config
        fmap = dict(cfg.field_map)
        params = {
            fmap["level_norm"]: f"{query.level_min}..{query.level_max}",
            fmap["weight"]: f"{query.weight_min}..{query.weight_max}",
            "_format": "json",
        }
        rows_raw: list[dict] = []
        url = cfg.base_url + cfg.newforms_path
        for page in range(cfg.max_pages):
            self.request_count += 1
            payload = self.transport(url, params)
            chunk = payload.get(cfg.response_list_key)
            if chunk is None:
                raise SchemaError(f"response is missing {cfg.response_list_key!r}")
            rows_raw.extend(chunk)
            nxt = payload.get(cfg.next_page_key)
            if not nxt or not isinstance(nxt, str):
                break
            url, params = nxt, {}
        rows = []
        for raw in rows_raw:
            row = {
                "label": raw.get(fmap["label"]),
                "degree": query.degree,
                "field": "rational" if query.degree == 1 else raw.get("field", "rational"),
                "weight": raw.get(fmap["weight"]),
                "level_norm": raw.get(fmap["level_norm"]),
                "ap": raw.get(fmap["ap"]),
            }
            if row["label"] is None:
                raise SchemaError(f"row is missing {fmap['label']!r}")
            if row["ap"] is None:
                raise SchemaError(f"row {row['label']} is missing {fmap['ap']!r}")
            rows.append(row)
        return rows

    def _fixture_rows(self, query: Query) -> list[dict]:
        rows = []
        for name in sorted(os.listdir(self.fixture_dir)):
            if not name.endswith(".jsonl"):
                continue
            with open(os.path.join(self.fixture_dir, name), "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    obj = json.loads(line)
                    if query.matches(obj):
                        rows.append(obj)
        return rows

    # --- main entry ----------------------------------------------------------

    def fetch_records(self, query: Query, mode: str = "fixture") -> list[EigenvalueRecord]:
        """Fetch, cache and parse; idempotent, sorted by label."""
        if mode not in ("network", "cache_only", "fixture"):
            raise ValueError(f"unknown mode {mode!r}")
        if mode == "fixture":
            rows = self._fixture_rows(query)
        else:
            rows = self.cache_lookup(query)
            if rows is None:
                if mode == "cache_only":
                    raise CacheMiss(f"no cache entry for {query.canonical()}")
                rows = self._network_rows(query)
                self.cache_store(query, rows)
        records: list[EigenvalueRecord] = []
        for obj in rows:
            records.extend(parse_record_json(obj))
        records.sort(key=lambda r: r.label)
        return records


def fetch_records(query: Query, mode: str = "fixture", **client_kwargs) -> list[EigenvalueRecord]:
    return DataClient(**client_kwargs).fetch_records(query, mode)


# ---------------------------------------------------------------------------
# Dataset assembly


def to_dataset(
    records: Iterable[EigenvalueRecord],
    prime_key: str,
    ord: int = 0,
    weights: str = "unit",
) -> Dataset:
    """Dataset of normalized eigenvalues at one prime, ordered by label."""
    pts = []
    for rec in sorted(records, key=lambda r: r.label):
        lam = normalize(rec, prime_key)
        w = 1.0 if weights == "unit" else rec.weight_factor
        pts.append(DataPoint(rec.label, lam, w))
    if pts and sum(p.weight for p in pts) <= 0:
        raise TotalWeightZero("provided weights sum to zero")
    meta = (("prime", str(prime_key)), ("ord", ord), ("weights", weights))
    return Dataset(tuple(pts), MeasureSpec.phi(ord), meta)
