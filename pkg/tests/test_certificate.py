"""Certificate assembly, canonical serialization, and schema validation."""

import json
import random

import pytest

from trisketch.certificate import (
    deserialize,
    emit_certificate,
    log_pairs,
    serialize,
)
from trisketch.errors import SchemaError, TraceMismatch
from trisketch.graphio import build_graph, gen_triangle_free, orient
from trisketch.pipeline import run
from trisketch.query import gate_class
from trisketch.seedrand import Params, SeedBundle
from trisketch.sketch import build_sketches

from conftest import K3_SEED, random_graph, random_master


def k3_run(k3_oriented, k3_params):
    return run(k3_oriented, K3_SEED, k3_params)


def test_empty_graph_certificate():
    og = orient(build_graph(4, []))
    result = run(og, "77" * 32, Params.make(4, preset="reduced"))
    cert = result.certificate
    assert result.outcome is None
    assert not cert.class_logs and not cert.slot_logs and not cert.adj_logs
    assert cert.outcome is None


def test_k3_fixture_certificate(k3_oriented, k3_params):
    cert = k3_run(k3_oriented, k3_params).certificate
    assert cert.outcome is not None
    assert len(cert.adj_logs) == 1
    assert cert.adj_logs[0].adjacent
    assert log_pairs(cert) == {(1, 0, 0, 0, 1, 2)}
    # Slot logs cover exactly the two witness slots.
    assert [(e.i, e.x) for e in cert.slot_logs] == [(1, 0), (1, 0)]


def test_triangle_free_certificates_have_no_adjacent_bits():
    rng = random.Random(41)
    for _ in range(10):
        og = orient(gen_triangle_free(30, 60, seed=rng.randrange(2**31)))
        cert = run(og, random_master(rng), Params.make(30, preset="reduced")).certificate
        assert cert.outcome is None
        assert all(not e.adjacent for e in cert.adj_logs)


def test_serialization_round_trip_and_idempotence(k3_oriented, k3_params):
    cert = k3_run(k3_oriented, k3_params).certificate
    blob = serialize(cert)
    again = serialize(deserialize(blob))
    assert again == blob


def test_round_trip_on_random_corpus():
    rng = random.Random(42)
    for _ in range(15):
        n = rng.randrange(8, 40)
        og = orient(random_graph(rng, n))
        cert = run(og, random_master(rng), Params.make(n, preset="reduced")).certificate
        blob = serialize(cert)
        assert serialize(deserialize(blob)) == blob


def test_repeat_runs_serialize_identically(k3_oriented, k3_params):
    blobs = {serialize(k3_run(k3_oriented, k3_params).certificate) for _ in range(5)}
    assert len(blobs) == 1


def test_counters_do_not_affect_certificate(k3_oriented, k3_params):
    with_ctr = run(k3_oriented, K3_SEED, k3_params, with_counters=True).certificate
    without = run(k3_oriented, K3_SEED, k3_params, with_counters=False).certificate
    assert serialize(with_ctr) == serialize(without)


def test_class_logs_cover_all_active_classes_with_recomputable_bits():
    rng = random.Random(43)
    og = orient(random_graph(rng, 32))
    params = Params.make(32, preset="reduced")
    bundle = SeedBundle(random_master(rng), params)
    result = run(og, bundle.master_hex, params)
    state = build_sketches(og, bundle)
    assert {e.key for e in result.certificate.class_logs} == set(state.sigma)
    for entry in result.certificate.class_logs:
        assert entry.pass_class == gate_class(entry.sigma, params.p_field)


def test_slot_log_bits_recomputable_from_stored_triples():
    from trisketch.ffield import one_sparse_test

    rng = random.Random(44)
    checked = 0
    while checked < 5:
        n = rng.randrange(10, 40)
        og = orient(random_graph(rng, n))
        params = Params.make(n, preset="reduced")
        cert = run(og, random_master(rng), params).certificate
        for entry in cert.slot_logs:
            decoded = one_sparse_test(entry.triple, params.p_field)
            assert entry.pass_slot == (decoded is not None)
            assert entry.decoded == (decoded or 0)
            checked += 1


def test_log_pairs_dedups_injected_duplicates(k3_oriented, k3_params):
    cert = k3_run(k3_oriented, k3_params).certificate
    entry = cert.class_logs[0]
    doubled = entry.collisions + entry.collisions
    cert.class_logs[0] = type(entry)(
        i=entry.i, x=entry.x, r=entry.r, b=entry.b,
        sigma=entry.sigma, pass_class=entry.pass_class, collisions=doubled,
    )
    assert log_pairs(cert) == {(1, 0, 0, 0, 1, 2)}


def test_log_pairs_empty_for_empty_logs():
    og = orient(build_graph(4, []))
    cert = run(og, "77" * 32, Params.make(4, preset="reduced")).certificate
    assert log_pairs(cert) == set()


def test_pinned_group_count_refused_at_emission(k3_oriented):
    from trisketch.errors import InfeasibleParams
    from trisketch.seedrand import with_overrides

    params = with_overrides(Params.make(3, preset="reduced"), groups_override=1)
    with pytest.raises(InfeasibleParams):
        run(k3_oriented, K3_SEED, params)


def test_trace_mismatch_rejected(k3_oriented, k3_params):
    result = k3_run(k3_oriented, k3_params)
    other = run(k3_oriented, "8" * 64, k3_params)
    with pytest.raises(TraceMismatch):
        emit_certificate(result.state, result.outcome, other.trace, result.bundle)


def _mutate_obj(blob, fn):
    obj = json.loads(blob)
    fn(obj)
    return (json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n").encode()


def test_schema_rejects_unknown_version(k3_oriented, k3_params):
    blob = serialize(k3_run(k3_oriented, k3_params).certificate)

    def bump(obj):
        obj["schema"] = "trisketch-cert/2"

    with pytest.raises(SchemaError):
        deserialize(_mutate_obj(blob, bump))


def test_schema_rejects_structural_damage(k3_oriented, k3_params):
    blob = serialize(k3_run(k3_oriented, k3_params).certificate)
    cases = [
        lambda obj: obj.pop("slot_logs"),
        lambda obj: obj["seeds"].pop("master_seed"),
        lambda obj: obj["class_logs"][0].pop("sigma"),
        lambda obj: obj["class_logs"][0].__setitem__("sigma", ["05", "1", "2"]),
        lambda obj: obj["class_logs"][0].__setitem__("b", "01x"),
        lambda obj: obj["outcome"].__setitem__("kind", "MAYBE"),
        lambda obj: obj["seeds"].__setitem__("master_seed", "zz" * 32),
        lambda obj: obj["seeds"]["params"].__setitem__("c_m", "3"),  # contradicts preset
        lambda obj: obj["seeds"].__setitem__("preset", "custom"),  # constants match 'reduced'
    ]
    for fn in cases:
        with pytest.raises(SchemaError):
            deserialize(_mutate_obj(blob, fn))


def test_schema_rejects_duplicate_keys(k3_oriented, k3_params):
    blob = serialize(k3_run(k3_oriented, k3_params).certificate)

    def dup_class(obj):
        obj["class_logs"].append(obj["class_logs"][0])

    def dup_collision(obj):
        recs = obj["class_logs"][0]["collisions"]
        recs.append(recs[0])

    def dup_adj(obj):
        obj["adj_logs"].append(obj["adj_logs"][0])

    for fn in (dup_class, dup_collision, dup_adj):
        with pytest.raises(SchemaError):
            deserialize(_mutate_obj(blob, fn))


def test_value_lies_pass_deserialization(k3_oriented, k3_params):
    # A flipped field value is structurally fine; only the verifier's
    # replay is supposed to catch it.
    blob = serialize(k3_run(k3_oriented, k3_params).certificate)

    def lie(obj):
        obj["slot_logs"][0]["triple"][0] = "123456"

    deserialize(_mutate_obj(blob, lie))
