"""Threshold access trees and the policy language.

A policy is a tree whose interior nodes are k-of-n threshold gates and whose
leaves name attributes.  AND is n-of-n, OR is 1-of-n, and T(k; ...) writes an
explicit threshold.  The text form, e.g.

    clearance:high AND (dept:research OR T(2; audit, legal, board))

parses into an immutable tree whose nodes are numbered in preorder; those
ids key the per-leaf ciphertext components and the per-node share
polynomials, so two structurally identical trees always agree on ids.

satisfies() returns the cheapest way to meet the tree: the selection with
the fewest chosen leaves, tie-broken toward lower child indices, since each
chosen leaf later costs two pairings.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Union

from .errors import ParameterError, PolicySyntaxError, SerializationError

ATTRIBUTE_RE = re.compile(r"[A-Za-z0-9_:-]+\Z")
_IDENT_RE = re.compile(r"[A-Za-z0-9_:-]+")
_KEYWORDS = frozenset({"AND", "OR"})


def _check_attribute(label: str) -> None:
    if not isinstance(label, str) or not ATTRIBUTE_RE.match(label):
        raise ParameterError("invalid attribute label %r" % (label,))
    if label in _KEYWORDS:
        raise ParameterError("%r is a reserved keyword" % (label,))


@dataclass(frozen=True)
class Leaf:
    node_id: int
    attribute: str

    def __post_init__(self):
        _check_attribute(self.attribute)

    @property
    def threshold(self) -> int:
        return 1

    @property
    def children(self) -> tuple:
        return ()

    is_leaf = True


@dataclass(frozen=True)
class Gate:
    node_id: int
    threshold: int
    children: "tuple[PolicyNode, ...]"

    def __post_init__(self):
        if not self.children:
            raise ParameterError("gate must have at least one child")
        if not 1 <= self.threshold <= len(self.children):
            raise ParameterError(
                "threshold %d out of range for %d children"
                % (self.threshold, len(self.children))
            )

    is_leaf = False


PolicyNode = Union[Leaf, Gate]


@dataclass(frozen=True)
class AccessTree:
    root: PolicyNode
    level_hint: int | None = None

    def __post_init__(self):
        for expected, node in enumerate(self.nodes()):
            if node.node_id != expected:
                raise ParameterError(
                    "node ids must be preorder indices (found %d, expected %d)"
                    % (node.node_id, expected)
                )

    def nodes(self) -> Iterator[PolicyNode]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    @cached_property
    def leaves(self) -> tuple[Leaf, ...]:
        return tuple(n for n in self.nodes() if n.is_leaf)

    @cached_property
    def _by_id(self) -> dict:
        return {n.node_id: n for n in self.nodes()}

    def node(self, node_id: int) -> PolicyNode:
        return self._by_id[node_id]

    @property
    def leaf_count(self) -> int:
        return len(self.leaves)

    def attributes(self) -> frozenset:
        return frozenset(leaf.attribute for leaf in self.leaves)

    def __str__(self) -> str:
        return format_policy(self)


# --------------------------------------------------------------------------
# parsing

class _Token:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind, text, pos):
        self.kind = kind
        self.text = text
        self.pos = pos


def _tokenize(text: str) -> list[_Token]:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "();,":
            out.append(_Token(ch, ch, i))
            i += 1
            continue
        m = _IDENT_RE.match(text, i)
        if m is None:
            raise PolicySyntaxError("unexpected character %r" % ch, i)
        word = m.group()
        out.append(_Token(word if word in _KEYWORDS else "IDENT", word, i))
        i = m.end()
    out.append(_Token("EOF", "", len(text)))
    return out


class _Parser:
    """Recursive descent; AND binds tighter than OR, chains flatten to one
    n-ary gate, parentheses force explicit structure."""

    def __init__(self, tokens: list[_Token]):
        self._tokens = tokens
        self._i = 0

    def _peek(self) -> _Token:
        return self._tokens[self._i]

    def _next(self) -> _Token:
        tok = self._tokens[self._i]
        self._i += 1
        return tok

    def _expect(self, kind: str) -> _Token:
        tok = self._next()
        if tok.kind != kind:
            raise PolicySyntaxError(
                "expected %r, found %r" % (kind, tok.text or "end of input"),
                tok.pos,
            )
        return tok

    def or_expr(self):
        parts = [self.and_expr()]
        while self._peek().kind == "OR":
            self._next()
            parts.append(self.and_expr())
        if len(parts) == 1:
            return parts[0]
        return ("gate", 1, parts)

    def and_expr(self):
        parts = [self.primary()]
        while self._peek().kind == "AND":
            self._next()
            parts.append(self.primary())
        if len(parts) == 1:
            return parts[0]
        return ("gate", len(parts), parts)

    def primary(self):
        tok = self._next()
        if tok.kind == "(":
            inner = self.or_expr()
            self._expect(")")
            return inner
        if tok.kind == "IDENT":
            if tok.text == "T" and self._peek().kind == "(":
                return self._threshold()
            return ("leaf", tok.text)
        raise PolicySyntaxError(
            "expected attribute, 'T(', or '('; found %r"
            % (tok.text or "end of input"),
            tok.pos,
        )

    def _threshold(self):
        self._expect("(")
        k_tok = self._expect("IDENT")
        if not k_tok.text.isdigit():
            raise PolicySyntaxError(
                "threshold must be a positive integer, found %r" % k_tok.text,
                k_tok.pos,
            )
        k = int(k_tok.text)
        self._expect(";")
        if self._peek().kind == ")":
            raise PolicySyntaxError("empty child list", self._peek().pos)
        children = [self.or_expr()]
        while self._peek().kind == ",":
            self._next()
            children.append(self.or_expr())
        self._expect(")")
        if k < 1:
            raise PolicySyntaxError("threshold must be at least 1", k_tok.pos)
        if k > len(children):
            raise PolicySyntaxError(
                "threshold %d exceeds arity %d" % (k, len(children)), k_tok.pos
            )
        return ("gate", k, children)


def _materialize(raw, counter: list) -> PolicyNode:
    node_id = counter[0]
    counter[0] += 1
    if raw[0] == "leaf":
        return Leaf(node_id, raw[1])
    _, k, raw_children = raw
    return Gate(node_id, k, tuple(_materialize(c, counter) for c in raw_children))


def parse_policy(text: str, level_hint: int | None = None) -> AccessTree:
    parser = _Parser(_tokenize(text))
    raw = parser.or_expr()
    parser._expect("EOF")
    return AccessTree(_materialize(raw, [0]), level_hint)


# --------------------------------------------------------------------------
# printing

_PREC_ATOM, _PREC_AND, _PREC_OR = 3, 2, 1


def _fmt(node: PolicyNode) -> tuple[str, int]:
    if node.is_leaf:
        return node.attribute, _PREC_ATOM
    n = len(node.children)
    if node.threshold == n and n >= 2:
        op, prec = " AND ", _PREC_AND
    elif node.threshold == 1 and n >= 2:
        op, prec = " OR ", _PREC_OR
    else:
        inner = ", ".join(_fmt(c)[0] for c in node.children)
        return "T(%d; %s)" % (node.threshold, inner), _PREC_ATOM
    rendered = []
    for child in node.children:
        text, child_prec = _fmt(child)
        if child_prec <= prec:
            text = "(%s)" % text
        rendered.append(text)
    return op.join(rendered), prec


def format_policy(tree: AccessTree) -> str:
    """Canonical text form; parsing it back yields a structurally identical
    tree (same shape, thresholds, labels, and therefore node ids)."""
    return _fmt(tree.root)[0]


# --------------------------------------------------------------------------
# canonical JSON

def node_to_json(node: PolicyNode) -> dict:
    if node.is_leaf:
        return {"kind": "leaf", "attribute": node.attribute}
    return {
        "kind": "gate",
        "threshold": node.threshold,
        "children": [node_to_json(c) for c in node.children],
    }


def tree_to_json(tree: AccessTree) -> dict:
    out = {"root": node_to_json(tree.root)}
    if tree.level_hint is not None:
        out["level"] = tree.level_hint
    return out


def _node_from_json(obj, counter: list) -> PolicyNode:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise SerializationError("malformed policy node: %r" % (obj,))
    node_id = counter[0]
    counter[0] += 1
    if obj["kind"] == "leaf":
        return Leaf(node_id, obj.get("attribute"))
    if obj["kind"] == "gate":
        raw_children = obj.get("children")
        if not isinstance(raw_children, list):
            raise SerializationError("gate node lacks a child list")
        children = tuple(_node_from_json(c, counter) for c in raw_children)
        threshold = obj.get("threshold")
        if not isinstance(threshold, int):
            raise SerializationError("gate threshold must be an integer")
        return Gate(node_id, threshold, children)
    raise SerializationError("unknown policy node kind %r" % (obj["kind"],))


def tree_from_json(obj) -> AccessTree:
    if not isinstance(obj, dict) or "root" not in obj:
        raise SerializationError("malformed policy tree: %r" % (obj,))
    level = obj.get("level")
    if level is not None and not isinstance(level, int):
        raise SerializationError("level hint must be an integer")
    try:
        return AccessTree(_node_from_json(obj["root"], [0]), level)
    except ParameterError as exc:
        raise SerializationError("invalid policy tree: %s" % exc) from None


# --------------------------------------------------------------------------
# satisfiability

@dataclass(frozen=True)
class SatisfyingSet:
    """The minimal selection proving a tree satisfied.

    chosen_leaves / chosen_interior hold node ids; gate_selections maps each
    chosen gate to the 1-based child indices it relies on (exactly k_x of
    them), which double as the Lagrange interpolation points.
    """

    chosen_leaves: frozenset
    chosen_interior: frozenset
    gate_selections: tuple

    @cached_property
    def _selection_map(self) -> dict:
        return dict(self.gate_selections)

    def selected_children(self, gate_id: int) -> tuple:
        return self._selection_map[gate_id]

    @property
    def leaf_count(self) -> int:
        return len(self.chosen_leaves)


def satisfies(tree: AccessTree, attrs: Iterable[str]):
    """Minimal satisfying selection, or None when the attributes fall short.

    Bottom-up: each node reports its cheapest leaf count; a gate keeps its
    k_x cheapest satisfied children (lowest index wins ties).  Absence is a
    value, not an error.
    """
    holder = frozenset(attrs)
    picks: dict[int, tuple] = {}

    def solve(node: PolicyNode):
        if node.is_leaf:
            return 1 if node.attribute in holder else None
        ranked = []
        for position, child in enumerate(node.children, start=1):
            child_cost = solve(child)
            if child_cost is not None:
                ranked.append((child_cost, position))
        if len(ranked) < node.threshold:
            return None
        ranked.sort()
        chosen = ranked[: node.threshold]
        picks[node.node_id] = tuple(sorted(pos for _, pos in chosen))
        return sum(cost for cost, _ in chosen)

    if solve(tree.root) is None:
        return None

    leaves, interior, selections = set(), set(), []

    def collect(node: PolicyNode):
        if node.is_leaf:
            leaves.add(node.node_id)
            return
        interior.add(node.node_id)
        indices = picks[node.node_id]
        selections.append((node.node_id, indices))
        for position in indices:
            collect(node.children[position - 1])

    collect(tree.root)
    return SatisfyingSet(
        frozenset(leaves), frozenset(interior), tuple(sorted(selections))
    )
