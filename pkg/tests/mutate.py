"""Single-field certificate mutation fuzzer shared by tests and acceptance.

Mutations operate on the parsed canonical JSON object: one scalar leaf is
rewritten (or one array element deleted), the object is re-serialized
canonically, and only mutations that change the canonical bytes count.
"""

from __future__ import annotations

import json
import random
from typing import List, Tuple

_ALT_STRINGS = {
    "schema": "trisketch-cert/0",
    "prf": "blake2b-kdf/2",
    "scan_order": "arcs-yx-descending/1",
    "preset": {"full": "reduced", "reduced": "full", "custom": "full"},
    "kind": {"NO": "YES", "YES": "NO"},
    "coin_mode": {"prf": "kwise", "kwise": "prf"},
}


def _leaf_sites(node, path) -> List[Tuple]:
    sites = []
    if isinstance(node, dict):
        for key, value in node.items():
            sites.extend(_leaf_sites(value, path + (key,)))
    elif isinstance(node, list):
        for idx, value in enumerate(node):
            if isinstance(value, (dict, list)):
                sites.append(("delete", path + (idx,)))
            sites.extend(_leaf_sites(value, path + (idx,)))
    else:
        sites.append(("scalar", path))
    return sites


def _get_parent(obj, path):
    node = obj
    for part in path[:-1]:
        node = node[part]
    return node, path[-1]


def _mutate_scalar(rng: random.Random, key, value: str) -> str:
    if key in ("schema", "prf", "scan_order"):
        return _ALT_STRINGS[key]
    if key in ("preset", "kind", "coin_mode"):
        table = _ALT_STRINGS[key]
        return table.get(value, "full")
    if key == "master_seed":
        pos = rng.randrange(len(value))
        repl = rng.choice([c for c in "0123456789abcdef" if c != value[pos]])
        return value[:pos] + repl + value[pos + 1 :]
    if key == "b":
        if not value:
            return value  # empty prefix has no bits to flip; no-op
        pos = rng.randrange(len(value))
        return value[:pos] + ("1" if value[pos] == "0" else "0") + value[pos + 1 :]
    if value == "":
        return "1"
    if set(value) <= set("0123456789"):
        choice = rng.randrange(3)
        if choice == 0:
            return str(int(value) + 1)
        if choice == 1:
            return str(max(0, int(value) - 1))
        return str(rng.randrange(1_000_000))
    if set(value) <= set("0123456789.e-+"):
        return "0.5"
    return value + "x"


def mutate_certificate_bytes(original: bytes, rng: random.Random) -> bytes:
    """One content-changing single-field mutation; retries no-op draws."""
    obj = json.loads(original)
    sites = _leaf_sites(obj, ())
    for _ in range(200):
        fresh = json.loads(original)
        action, path = rng.choice(sites)
        if action == "delete":
            parent, last = _get_parent(fresh, path)
            del parent[last]
        else:
            parent, last = _get_parent(fresh, path)
            parent[last] = _mutate_scalar(rng, last, parent[last])
        mutated = (json.dumps(fresh, sort_keys=True, separators=(",", ":")) + "\n").encode()
        if mutated != original:
            return mutated
    raise AssertionError("could not produce a content-changing mutation")
