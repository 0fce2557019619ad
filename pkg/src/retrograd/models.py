"""World definitions: expansion models, feasibility models and inventories.

Two expansion models ship with the package: :class:`SyntheticWorld`, a seeded
procedural reaction world over tokens ``m<int>``, and :class:`TableModel`, a
lookup table loaded from a reaction file. The reaction-file schema is::

    {
      "reactions": {"<product>": [{"reactants": ["A", "B"], "rank": 1, "score": 0.3}]},
      "purchasable": ["A", "B"]
    }

``score`` is optional and is ignored by both built-in feasibility models.
"""

from __future__ import annotations

import json
import re
import warnings
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Protocol

import numpy as np

from .errors import InvalidInputError

DEFAULT_TOP_K = 50


@dataclass(frozen=True)
class Candidate:
    reactants: tuple[str, ...]
    rank: int
    score: Optional[float] = None


class ExpansionModel(Protocol):
    def expand(self, molecule: str) -> list[Candidate]: ...


class Inventory(Protocol):
    def purchasable(self, molecule: str) -> bool: ...


FeasibilityModel = Callable[..., float]


def constant_feasibility(rank: int, score: Optional[float] = None) -> float:
    if rank < 1:
        raise InvalidInputError(f"rank must be >= 1, got {rank}")
    return 0.5


def rank_feasibility(rank: int, score: Optional[float] = None) -> float:
    if rank < 1:
        raise InvalidInputError(f"rank must be >= 1, got {rank}")
    return 0.75 / (1.0 + rank / 10.0)


FEASIBILITY_MODELS: dict[str, FeasibilityModel] = {
    "constant": constant_feasibility,
    "rank": rank_feasibility,
}


def feasibility_model(name: str) -> FeasibilityModel:
    try:
        return FEASIBILITY_MODELS[name]
    except KeyError:
        raise InvalidInputError(
            f"unknown feasibility model {name!r}; choose from {sorted(FEASIBILITY_MODELS)}"
        ) from None


@dataclass(frozen=True)
class SetInventory:
    items: frozenset[str] = frozenset()

    def purchasable(self, molecule: str) -> bool:
        return molecule in self.items

    def __contains__(self, molecule: str) -> bool:
        return molecule in self.items


# --- synthetic worlds ---------------------------------------------------------

_TOKEN = re.compile(r"^m(\d+)$")


def parse_token(molecule: str) -> int:
    m = _TOKEN.match(molecule) if isinstance(molecule, str) else None
    if m is None:
        raise InvalidInputError(f"not a synthetic token: {molecule!r}")
    return int(m.group(1))


@dataclass(frozen=True)
class SyntheticWorld:
    """Seeded procedural reaction world.

    Token ``m<n>`` sits on level ``n // width``; levels at or beyond ``depth``
    are always purchasable and earlier levels become purchasable with a
    probability that rises linearly from ``buy_first`` (level 1) to
    ``buy_last`` (level ``depth - 1``). Level 0 holds targets and is never
    purchasable. Reactants come from the next one or two levels, except that
    with probability ``back_fraction`` one reactant is drawn from the same or
    an earlier level, which creates shared nodes and cycles. ``back_fraction=0``
    gives acyclic worlds.
    """

    seed: int = 0
    width: int = 40
    depth: int = 6
    branching: int = 5
    max_reactants: int = 3
    back_fraction: float = 0.15
    dead_fraction: float = 0.1
    buy_first: float = 0.15
    buy_last: float = 0.8
    top_k: int = DEFAULT_TOP_K

    def __post_init__(self):
        if self.width < 1 or self.depth < 1 or self.branching < 0:
            raise InvalidInputError("width and depth must be >= 1, branching >= 0")
        if not 1 <= self.max_reactants <= 3:
            raise InvalidInputError("max_reactants must lie in 1..3")
        for name in ("back_fraction", "dead_fraction", "buy_first", "buy_last"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InvalidInputError(f"{name} must lie in [0, 1]")

    def _rng(self, n: int, salt: int) -> np.random.Generator:
        return np.random.default_rng([self.seed & 0xFFFFFFFFFFFFFFFF, n, salt])

    def level(self, molecule: str) -> int:
        return parse_token(molecule) // self.width

    def token(self, level: int, slot: int) -> str:
        return f"m{level * self.width + slot}"

    def purchasable(self, molecule: str) -> bool:
        n = parse_token(molecule)
        lvl = n // self.width
        if lvl == 0:
            return False
        if lvl >= self.depth:
            return True
        if self.depth <= 2:
            prob = self.buy_last
        else:
            prob = self.buy_first + (self.buy_last - self.buy_first) * (lvl - 1) / (self.depth - 2)
        return bool(self._rng(n, 1).random() < prob)

    def expand(self, molecule: str) -> list[Candidate]:
        n = parse_token(molecule)
        lvl = n // self.width
        rng = self._rng(n, 2)
        if rng.random() < self.dead_fraction:
            return []
        k = int(rng.integers(1, self.branching + 1)) if self.branching else 0
        out: list[Candidate] = []
        seen = set()
        for _ in range(k):
            size = int(rng.integers(1, self.max_reactants + 1))
            back = rng.random() < self.back_fraction
            names = []
            for j in range(size):
                if back and j == 0:
                    target_lvl = int(rng.integers(0, lvl + 1))
                else:
                    target_lvl = lvl + int(rng.integers(1, 3))
                names.append(self.token(target_lvl, int(rng.integers(0, self.width))))
            names = tuple(dict.fromkeys(n_ for n_ in names if n_ != molecule))
            key = tuple(sorted(names))
            if not names or key in seen:
                continue
            seen.add(key)
            out.append(Candidate(names, len(out) + 1, None))
            if len(out) >= self.top_k:
                break
        return out

    @property
    def inventory(self) -> "SyntheticWorld":
        return self

    def manifest(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def reachable_reactions(model: ExpansionModel, inventory, targets: Iterable[str],
                        limit: int = 1_000_000) -> dict[str, list[Candidate]]:
    """Breadth-first closure of ``model.expand`` from ``targets``."""
    table: dict[str, list[Candidate]] = {}
    queue = deque(targets)
    seen = set(queue)
    while queue:
        mol = queue.popleft()
        if inventory.purchasable(mol):
            continue
        cands = model.expand(mol)
        table[mol] = cands
        if len(table) > limit:
            raise InvalidInputError(f"reachable world exceeds {limit} molecules")
        for c in cands:
            for r in c.reactants:
                if r not in seen:
                    seen.add(r)
                    queue.append(r)
    return table


def solvable(model: ExpansionModel, inventory, target: str) -> bool:
    """Least-fixed-point check that some route exists when every reaction works."""
    table = reachable_reactions(model, inventory, [target])
    molecules = set(table)
    for cands in table.values():
        for c in cands:
            molecules.update(c.reactants)
    ok = {m for m in molecules if inventory.purchasable(m)}
    changed = True
    while changed:
        changed = False
        for mol, cands in table.items():
            if mol not in ok and any(all(r in ok for r in c.reactants) for c in cands):
                ok.add(mol)
                changed = True
    return target in ok


# --- reaction files -----------------------------------------------------------

@dataclass
class TableModel:
    reactions: dict[str, list[Candidate]] = field(default_factory=dict)
    top_k: int = DEFAULT_TOP_K

    def expand(self, molecule: str) -> list[Candidate]:
        return list(self.reactions.get(molecule, []))[: self.top_k]


def _pairs_last_wins(pairs):
    out = {}
    for key, value in pairs:
        if key in out:
            warnings.warn(f"duplicate entry {key!r} in reaction file; keeping the last one",
                          stacklevel=2)
        out[key] = value
    return out


def _field_error(where: str, msg: str) -> InvalidInputError:
    return InvalidInputError(f"{where}: {msg}")


def parse_reaction_document(doc) -> tuple[TableModel, SetInventory]:
    if not isinstance(doc, dict):
        raise _field_error("$", "expected a JSON object")
    reactions = doc.get("reactions", {})
    purchasable = doc.get("purchasable", [])
    if not isinstance(reactions, dict):
        raise _field_error("$.reactions", "expected an object mapping product -> list")
    if not isinstance(purchasable, list) or not all(isinstance(m, str) and m for m in purchasable):
        raise _field_error("$.purchasable", "expected a list of non-empty strings")
    table: dict[str, list[Candidate]] = {}
    for product, entries in reactions.items():
        where = f"$.reactions[{product!r}]"
        if not product:
            raise _field_error(where, "empty product identifier")
        if not isinstance(entries, list):
            raise _field_error(where, "expected a list of reactions")
        cands = []
        for i, entry in enumerate(entries):
            w = f"{where}[{i}]"
            if not isinstance(entry, dict):
                raise _field_error(w, "expected an object")
            reactants = entry.get("reactants")
            if (not isinstance(reactants, list) or not reactants
                    or not all(isinstance(r, str) and r for r in reactants)):
                raise _field_error(f"{w}.reactants", "expected a non-empty list of strings")
            rank = entry.get("rank", i + 1)
            if not isinstance(rank, int) or isinstance(rank, bool) or rank < 1:
                raise _field_error(f"{w}.rank", f"expected a positive integer, got {rank!r}")
            score = entry.get("score")
            if score is not None and (not isinstance(score, (int, float)) or isinstance(score, bool)):
                raise _field_error(f"{w}.score", f"expected a number, got {score!r}")
            cands.append(Candidate(tuple(reactants), rank, None if score is None else float(score)))
        cands.sort(key=lambda c: c.rank)
        table[product] = cands
    return TableModel(table), SetInventory(frozenset(purchasable))


def load_reaction_file(path) -> tuple[TableModel, SetInventory]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidInputError(f"cannot read reaction file {path}: {exc}") from None
    try:
        doc = json.loads(text, object_pairs_hook=_pairs_last_wins)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    try:
        return parse_reaction_document(doc)
    except InvalidInputError as exc:
        raise InvalidInputError(f"{path}: {exc}") from None


def reaction_document(table: dict[str, list[Candidate]], purchasable: Iterable[str]) -> dict:
    reactions = {}
    for product in table:
        entries = []
        for c in table[product]:
            entry = {"reactants": list(c.reactants), "rank": c.rank}
            if c.score is not None:
                entry["score"] = c.score
            entries.append(entry)
        reactions[product] = entries
    return {"reactions": reactions, "purchasable": sorted(set(purchasable))}


def export_reaction_file(model: ExpansionModel, inventory, targets: Iterable[str], path) -> dict:
    """Write the part of a world reachable from ``targets`` as a reaction file."""
    table = reachable_reactions(model, inventory, targets)
    molecules = set(table)
    for cands in table.values():
        for c in cands:
            molecules.update(c.reactants)
    doc = reaction_document(table, (m for m in molecules if inventory.purchasable(m)))
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True))
    return doc


def sample_targets(world: SyntheticWorld, count: int, seed: int,
                   require_solvable: bool = True, max_tries: int = 100_000) -> list[str]:
    """Deterministic list of distinct level-0 targets, optionally all solvable."""
    rng = np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, 7])
    slots = rng.permutation(world.width)
    out = []
    tries = 0
    for slot in slots:
        tok = world.token(0, int(slot))
        tries += 1
        if require_solvable and not solvable(world, world, tok):
            continue
        out.append(tok)
        if len(out) == count or tries >= max_tries:
            break
    if len(out) < count:
        raise InvalidInputError(
            f"world has only {len(out)} suitable targets, {count} requested; raise width")
    return out


def expansion_fingerprint(model: ExpansionModel, molecule: str) -> str:
    return json.dumps([[list(c.reactants), c.rank, c.score] for c in model.expand(molecule)])

