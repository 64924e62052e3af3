"""End-to-end run assembly: seeds -> build -> query -> certificate."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from .certificate import Certificate, emit_certificate
from .graphio import OrientedGraph
from .metrics import Counters
from .query import GateTrace, Triangle, query_triangle
from .seedrand import Params, SeedBundle
from .sketch import SketchState, build_sketches


@dataclass
class RunResult:
    graph: OrientedGraph
    bundle: SeedBundle
    state: SketchState
    outcome: Optional[Triangle]
    trace: GateTrace
    certificate: Certificate

    @property
    def counters(self) -> Optional[Counters]:
        return self.state.counters


def run(
    g: OrientedGraph,
    master_seed_hex: str,
    params: Params,
    early_stop: bool = True,
    with_counters: bool = True,
    instrument: bool = False,
) -> RunResult:
    """One full detection run with certificate emission."""
    bundle = SeedBundle(master_seed_hex, params)
    state = build_sketches(g, bundle, with_counters=with_counters, instrument=instrument)
    outcome, trace = query_triangle(state, g, bundle, early_stop=early_stop)
    cert = emit_certificate(state, outcome, trace, bundle)
    return RunResult(
        graph=g,
        bundle=bundle,
        state=state,
        outcome=outcome,
        trace=trace,
        certificate=cert,
    )


def detect(
    g: OrientedGraph,
    master_seed_hex: str,
    params: Params,
    early_stop: bool = True,
) -> Tuple[Optional[Triangle], GateTrace]:
    """Detection without certificate assembly (experiment fast path)."""
    bundle = SeedBundle(master_seed_hex, params)
    state = build_sketches(g, bundle, with_counters=False)
    return query_triangle(state, g, bundle, early_stop=early_stop)
