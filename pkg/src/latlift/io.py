"""Fixture files: lookup, loading and deterministic JSON output."""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .diagram import LatDiagram, SemDiagram
from .lattice import FiniteLattice, JoinSemilattice0, LatticeHom, ValidationError
from .poset import FinitePoset, PosetError

BUNDLED = Path(__file__).parent / "fixtures"


class Fixtures:
    """Resolves fixture references: explicit paths first, then an optional
    override directory, then the bundled corpus. Loaded files are remembered
    with their sha256 so runs can report exactly what they read."""

    def __init__(self, override=None):
        self.dirs = ([Path(override)] if override else []) + [BUNDLED]
        self.hashes = {}
        self._cache = {}

    def path(self, ref, base=None):
        ref = str(ref)
        cands = []
        p = Path(ref)
        for stem in (p, p.with_name(p.name + ".json")):
            if base is not None and not stem.is_absolute():
                cands.append(Path(base) / stem)
            cands.append(stem)
        name = p.name if p.suffix == ".json" else p.name + ".json"
        cands += [d / name for d in self.dirs]
        for c in cands:
            if c.is_file():
                return c
        raise ValidationError(f"fixture not found: {ref}")

    def record(self, ref, base=None):
        path = self.path(ref, base)
        key = str(path.resolve())
        if key not in self._cache:
            data = path.read_bytes()
            self.hashes[path.stem] = hashlib.sha256(data).hexdigest()
            try:
                self._cache[key] = (path, json.loads(data))
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path.name}: not valid JSON ({exc})") from exc
        return self._cache[key]

    def lattice(self, ref, base=None):
        path, rec = self.record(ref, base)
        try:
            L = FiniteLattice.from_record(rec)
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"{path.name}: malformed lattice record") from exc
        except ValidationError as exc:
            raise ValidationError(f"{path.name}: {exc}") from exc
        L.name = rec.get("name") or path.stem
        return L

    def diagram(self, ref, base=None):
        path, rec = self.record(ref, base)
        try:
            index = FinitePoset.from_record(rec["index"])
            kind = rec.get("kind", "lattice")
            nodes, loaded = {}, {}
            for i, r in rec["nodes"].items():
                if r not in loaded:
                    L = self.lattice(r, path.parent)
                    loaded[r] = JoinSemilattice0.of(L) if kind == "semilattice" else L
                nodes[i] = loaded[r]
            edges = {}
            for e in rec["edges"]:
                a, b = e["from"], e["to"]
                edges[a, b] = LatticeHom.from_ids(nodes[a], nodes[b], e["map"], kind=kind)
        except (KeyError, TypeError, PosetError) as exc:
            raise ValidationError(f"{path.name}: malformed diagram ({exc})") from exc
        cls = SemDiagram if kind == "semilattice" else LatDiagram
        return cls(index, nodes, edges, name=rec.get("name") or path.stem)

    def variety(self, ref, base=None):
        from .variety import VarietySpec

        path, rec = self.record(ref, base)
        if "generators" in rec:
            gens = [self.lattice(g, path.parent) for g in rec["generators"]]
        elif "elements" in rec:
            # a lattice file stands for the variety it generates
            gens = [self.lattice(ref, base)]
        else:
            raise ValidationError(f"{path.name}: neither a variety nor a lattice record")
        return VarietySpec(gens, name=rec.get("name") or path.stem)


def dumps(obj):
    """Byte-stable JSON."""
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def digest(obj):
    return hashlib.sha256(dumps(obj).encode()).hexdigest()


def diagram_record(D):
    nodes = {i: L.name or f"<{L.n}>" for i, L in D.nodes.items()}
    return {
        "kind": D.kind,
        "index": D.index.to_record(),
        "nodes": nodes,
        "lattices": {nodes[i]: L.to_record() for i, L in D.nodes.items()},
        "edges": [{"from": a, "to": b, "map": D.edges[a, b].as_dict()} for a, b in sorted(D.edges)],
    }
