"""A small semi-naive forward-chaining engine over ground facts.

Rules are Horn clauses whose atoms hold constants and :class:`Var` placeholders.
Every head variable must occur in the body, so saturation only ever creates
facts over the constants already present and always terminates.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Iterator, Mapping

Bindings = dict["Var", Any]


class Var:
    """A rule variable. Interned by name, so equality is identity."""

    __slots__ = ("name",)
    _pool: dict[str, Var] = {}

    def __new__(cls, name: str) -> Var:
        obj = cls._pool.get(name)
        if obj is None:
            obj = super().__new__(cls)
            object.__setattr__(obj, "name", name)
            cls._pool[name] = obj
        return obj

    def __setattr__(self, name: str, value: Any) -> None:
        raise AttributeError("Var is immutable")

    def __reduce__(self) -> tuple:
        return (Var, (self.name,))

    def __repr__(self) -> str:
        return f"?{self.name}"


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple

    def __repr__(self) -> str:
        return f"{self.predicate}({', '.join(map(repr, self.args))})"


def atom(predicate: str, *args: Any) -> Atom:
    return Atom(predicate, args)


@dataclass(frozen=True)
class Rule:
    name: str
    head: tuple[Atom, ...]
    body: tuple[Atom, ...] = ()
    guard: Callable[[Mapping[Var, Any]], bool] | None = None

    def __post_init__(self) -> None:
        bound = {a for b in self.body for a in b.args if isinstance(a, Var)}
        for h in self.head:
            free = {a for a in h.args if isinstance(a, Var)} - bound
            if free:
                raise ValueError(f"rule {self.name}: head variables {free} not bound by the body")


class _Index:
    """Facts by predicate, plus by (predicate, position, value) for bound lookups."""

    def __init__(self) -> None:
        self.by_pred: dict[str, set[tuple]] = defaultdict(set)
        self.by_arg: dict[tuple[str, int, Any], list[tuple]] = defaultdict(list)

    def add(self, predicate: str, args: tuple) -> bool:
        bucket = self.by_pred[predicate]
        if args in bucket:
            return False
        bucket.add(args)
        for i, a in enumerate(args):
            self.by_arg[(predicate, i, a)].append(args)
        return True

    def candidates(self, pattern: Atom, bindings: Bindings) -> Iterable[tuple]:
        for i, p in enumerate(pattern.args):
            if isinstance(p, Var):
                if p not in bindings:
                    continue
                p = bindings[p]
            return self.by_arg.get((pattern.predicate, i, p), ())
        return self.by_pred.get(pattern.predicate, ())


def _match(pattern: Atom, args: tuple, bindings: Bindings) -> Bindings | None:
    if len(pattern.args) != len(args):
        return None
    out = dict(bindings)
    for p, a in zip(pattern.args, args):
        if isinstance(p, Var):
            if p in out:
                if out[p] != a or type(out[p]) is not type(a):
                    return None
            else:
                out[p] = a
        elif p != a or type(p) is not type(a):
            return None
    return out


def _join(atoms: tuple[Atom, ...], bindings: Bindings, index: _Index) -> Iterator[Bindings]:
    if not atoms:
        yield bindings
        return
    first, rest = atoms[0], atoms[1:]
    for args in index.candidates(first, bindings):
        b = _match(first, args, bindings)
        if b is not None:
            yield from _join(rest, b, index)


def _instantiate(a: Atom, bindings: Bindings) -> tuple:
    return tuple(bindings[x] if isinstance(x, Var) else x for x in a.args)


def saturate_facts(
    facts: Iterable[tuple[str, tuple]], rules: Iterable[Rule]
) -> set[tuple[str, tuple]]:
    """Least fixpoint of ``facts`` under ``rules`` as a set of (predicate, args)."""
    rules = list(rules)
    index = _Index()
    delta: list[tuple[str, tuple]] = []
    for pred, args in facts:
        if index.add(pred, args):
            delta.append((pred, args))
    for rule in rules:
        if not rule.body and (rule.guard is None or rule.guard({})):
            for h in rule.head:
                if index.add(h.predicate, h.args):
                    delta.append((h.predicate, h.args))
    # Each body atom is a trigger: a new fact matching it joins with the rest.
    triggers: dict[str, list[tuple[Rule, Atom, tuple[Atom, ...]]]] = defaultdict(list)
    for rule in rules:
        for i, pattern in enumerate(rule.body):
            triggers[pattern.predicate].append((rule, pattern, rule.body[:i] + rule.body[i + 1 :]))
    while delta:
        produced: dict[tuple[str, tuple], None] = {}
        for pred, args in delta:
            for rule, pattern, others in triggers.get(pred, ()):
                start = _match(pattern, args, {})
                if start is None:
                    continue
                for b in _join(others, start, index):
                    if rule.guard is not None and not rule.guard(b):
                        continue
                    for h in rule.head:
                        produced[(h.predicate, _instantiate(h, b))] = None
        delta = [(pred, args) for pred, args in produced if index.add(pred, args)]
    return {(pred, args) for pred, bucket in index.by_pred.items() for args in bucket}
