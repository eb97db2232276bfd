import math
import os

import pytest

from heckedist.datasource import (
    ApiConfig,
    DataClient,
    EigenvalueRecord,
    Query,
    normalize,
    parse_record_json,
    to_dataset,
)
from heckedist.equidist import ks_distance
from heckedist.errors import (
    CacheMiss,
    EmptyDataset,
    MissingEigenvalue,
    NetworkError,
    RamanujanViolation,
    SchemaError,
    TotalWeightZero,
)
from heckedist.numberfield import make_field
from oracles import ec11_ap, level_one_eigenform


# --- fixture corpus ---------------------------------------------------------


def test_fixture_weight_12_is_delta():
    recs = DataClient().fetch_records(
        Query(level_min=1, level_max=1, weight_min=12, weight_max=12), mode="fixture"
    )
    assert [r.label for r in recs] == ["1.12.a.a"]
    rec = recs[0]
    a2, norm = rec.eigenvalues["2"]
    assert a2 == -24 and norm == 2
    lam2 = normalize(rec, "2")
    assert abs(lam2 - (-24 / 2**5.5)) < 1e-9


def test_fixture_matches_qexpansion_oracle():
    # every bundled classical level-one record agrees with a fresh
    # brute-force q-expansion at every stored prime
    recs = DataClient().fetch_records(
        Query(level_min=1, level_max=1, weight_min=12, weight_max=26), mode="fixture"
    )
    assert len(recs) == 6
    for rec in recs:
        series = level_one_eigenform(rec.weight, 97)
        for key, (a_p, norm) in rec.eigenvalues.items():
            assert a_p == series[int(key)], (rec.label, key)
            assert norm == int(key)


def test_fixture_level_11_matches_point_count():
    recs = DataClient().fetch_records(
        Query(level_min=11, level_max=11, weight_min=2, weight_max=2), mode="fixture"
    )
    assert [r.label for r in recs] == ["11.2.a.a"]
    rec = recs[0]
    for p in (2, 3, 5, 7, 13, 97):
        assert rec.eigenvalues[str(p)][0] == ec11_ap(p)
    assert abs(normalize(rec, "5") - 1 / math.sqrt(5)) < 1e-12
    assert "11" not in rec.eigenvalues  # bad prime excluded


def test_whole_corpus_passes_ramanujan():
    recs = DataClient().fetch_records(
        Query(degree=1, level_min=1, level_max=100, weight_min=2, weight_max=26),
        mode="fixture",
    )
    assert recs
    for rec in recs:
        for key in rec.eigenvalues:
            lam = normalize(rec, key)
            assert abs(lam) <= 2.0 + 1e-6


def test_hilbert_fixture_embeddings():
    recs = DataClient().fetch_records(
        Query(degree=2, level_min=31, level_max=31, weight_min=2, weight_max=2),
        mode="fixture",
    )
    assert len(recs) == 2  # one record per real embedding
    assert all(r.synthetic for r in recs)
    F5 = make_field(5)
    w1, w2 = F5.omega_embeddings()
    # prime 2.1 carries coefficients (-1, 1): embeddings -1 + w_j
    for rec, w in zip(sorted(recs, key=lambda r: r.embedding_index), (w1, w2)):
        a, norm = rec.eigenvalues["2.1"]
        assert abs(a - (-1 + w)) < 1e-12 and norm == 4
        assert abs(normalize(rec, "2.1")) <= 2.0


# --- normalization ----------------------------------------------------------


def test_normalize_zero_and_missing():
    rec = EigenvalueRecord("t", 1, None, 12, 1, {"2": (0.0, 2)})
    assert normalize(rec, "2") == 0.0
    with pytest.raises(MissingEigenvalue):
        normalize(rec, "3")


def test_normalize_ramanujan_violation():
    rec = EigenvalueRecord("t", 1, None, 2, 1, {"2": (100.0, 2)})
    with pytest.raises(RamanujanViolation):
        normalize(rec, "2")


# --- schema ------------------------------------------------------------------


def test_schema_error_names_field():
    with pytest.raises(SchemaError) as err:
        parse_record_json({"label": "x", "degree": 1, "field": "rational", "weight": 2})
    assert "level_norm" in str(err.value)
    with pytest.raises(SchemaError) as err:
        parse_record_json(
            {"label": "x", "degree": 1, "field": "rational", "weight": 2,
             "level_norm": 1, "ap": {"2": [1, 2, 3]}}
        )
    assert "bad eigenvalue" in str(err.value)


# --- datasets ------------------------------------------------------------------


def _toy_records():
    return [
        EigenvalueRecord(f"r{i}", 1, None, 12, 1, {"2": (float(i), 2)})
        for i in range(3)
    ]


def test_to_dataset_unit_weights():
    ds = to_dataset(_toy_records(), "2")
    assert len(ds) == 3
    assert ds.total_weight == 3.0
    assert [p.label for p in ds.points] == ["r0", "r1", "r2"]


def test_to_dataset_empty_then_ks_raises():
    ds = to_dataset([], "2")
    with pytest.raises(EmptyDataset):
        ks_distance(ds)


def test_to_dataset_zero_provided_weights():
    recs = [
        EigenvalueRecord("a", 1, None, 12, 1, {"2": (1.0, 2)}, weight_factor=0.0),
        EigenvalueRecord("b", 1, None, 12, 1, {"2": (2.0, 2)}, weight_factor=0.0),
    ]
    with pytest.raises(TotalWeightZero):
        to_dataset(recs, "2", weights="provided")


# --- cache and network ----------------------------------------------------------


def _fake_rows():
    return {
        "data": [
            {"label": "7.4.a.a", "weight": 4, "level": 7, "traces": {"2": -1, "3": -2}},
            {"label": "7.4.a.b", "weight": 4, "level": 7, "traces": {"2": 1, "3": 0}},
        ]
    }


def test_network_fetch_caches_and_warm_cache_hits(tmp_path, monkeypatch):
    monkeypatch.delenv("HECKEDIST_OFFLINE", raising=False)
    calls = []

    def transport(url, params):
        calls.append((url, params))
        return _fake_rows()

    client = DataClient(cache_dir=str(tmp_path), transport=transport)
    q = Query(level_min=7, level_max=7, weight_min=4, weight_max=4)
    recs = client.fetch_records(q, mode="network")
    assert [r.label for r in recs] == ["7.4.a.a", "7.4.a.b"]
    assert client.request_count == 1
    assert os.path.exists(os.path.join(str(tmp_path), q.key() + ".jsonl"))

    # warm cache: zero further network calls
    recs2 = client.fetch_records(q, mode="network")
    assert client.request_count == 1
    assert [r.label for r in recs2] == [r.label for r in recs]
    # structural cache round-trip
    assert [r.eigenvalues for r in recs2] == [r.eigenvalues for r in recs]

    # cache_only works warm, and fails cold
    recs3 = client.fetch_records(q, mode="cache_only")
    assert [r.label for r in recs3] == [r.label for r in recs]
    cold = DataClient(cache_dir=str(tmp_path / "empty"), transport=transport)
    with pytest.raises(CacheMiss):
        cold.fetch_records(q, mode="cache_only")


def test_network_pagination_follows_next_links(tmp_path, monkeypatch):
    monkeypatch.delenv("HECKEDIST_OFFLINE", raising=False)
    pages = {
        "first": {
            "data": [{"label": "7.4.a.a", "weight": 4, "level": 7, "traces": {"2": -1}}],
            "next": "http://example.invalid/page2",
        },
        "http://example.invalid/page2": {
            "data": [{"label": "7.4.a.b", "weight": 4, "level": 7, "traces": {"2": 1}}],
        },
    }

    def transport(url, params):
        return pages["first"] if url not in pages else pages[url]

    client = DataClient(cache_dir=str(tmp_path), transport=transport)
    recs = client.fetch_records(Query(level_min=7, level_max=7, weight_min=4,
                                      weight_max=4), mode="network")
    assert [r.label for r in recs] == ["7.4.a.a", "7.4.a.b"]
    assert client.request_count == 2


def test_offline_env_blocks_network(tmp_path):
    client = DataClient(cache_dir=str(tmp_path), transport=lambda u, p: _fake_rows())
    with pytest.raises(NetworkError):
        client.fetch_records(Query(level_min=3, level_max=3), mode="network")


def test_network_schema_error(tmp_path, monkeypatch):
    monkeypatch.delenv("HECKEDIST_OFFLINE", raising=False)
    client = DataClient(cache_dir=str(tmp_path), transport=lambda u, p: {"nope": []})
    with pytest.raises(SchemaError):
        client.fetch_records(Query(level_min=3, level_max=3), mode="network")


def test_http_retries_then_gives_up(monkeypatch):
    import requests

    attempts = []

    def failing_get(url, params=None, timeout=None):
        attempts.append(url)
        raise requests.ConnectionError("refused")

    monkeypatch.setattr(requests, "get", failing_get)
    cfg = ApiConfig(rate_limit_seconds=0.0, max_retries=3, retry_base_delay=0.001)
    client = DataClient(config=cfg)
    with pytest.raises(NetworkError):
        client._http_get("http://example.invalid/api", {})
    assert len(attempts) == 3
