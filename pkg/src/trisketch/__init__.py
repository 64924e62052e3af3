"""Local sketch-based triangle detection with auditable NO-certificates."""

from .certificate import (
    Certificate,
    deserialize,
    emit_certificate,
    log_pairs,
    read_certificate,
    serialize,
    write_certificate,
)
from .graphio import (
    UndirectedGraph,
    OrientedGraph,
    gen_er_sparse,
    gen_planted_triangle,
    gen_triangle_free,
    orient,
    parse_graph,
    read_graph,
    write_graph,
)
from .metrics import Counters, accounting_audit, hit_rate_experiment, keep_concentration_audit, scaling_bench
from .oracle import enumerate_triangles, has_triangle, naive_sketch_replay
from .pipeline import RunResult, detect, run
from .query import GateTrace, Triangle, query_triangle
from .seedrand import Params, SeedBundle, complement, with_overrides
from .sketch import SketchState, build_sketches, class_load, collisions_of
from .verifier import VerifyVerdict, reconstruct_should_check_domain, verify_no, verify_yes

__version__ = "0.1.0"

__all__ = [
    "Certificate",
    "Counters",
    "GateTrace",
    "OrientedGraph",
    "Params",
    "RunResult",
    "SeedBundle",
    "SketchState",
    "Triangle",
    "UndirectedGraph",
    "VerifyVerdict",
    "accounting_audit",
    "build_sketches",
    "class_load",
    "collisions_of",
    "complement",
    "deserialize",
    "detect",
    "emit_certificate",
    "enumerate_triangles",
    "gen_er_sparse",
    "gen_planted_triangle",
    "gen_triangle_free",
    "has_triangle",
    "hit_rate_experiment",
    "keep_concentration_audit",
    "log_pairs",
    "naive_sketch_replay",
    "orient",
    "parse_graph",
    "query_triangle",
    "read_certificate",
    "read_graph",
    "reconstruct_should_check_domain",
    "run",
    "scaling_bench",
    "serialize",
    "verify_no",
    "verify_yes",
    "with_overrides",
    "write_certificate",
    "write_graph",
]
