"""Newick reading and writing, plain and annotated.

Two dialects are supported:

* plain newick, used for the tree field of the JSON format:
  ``((x:1,y:2):0.5,z:3);``. Square-bracket comments are skipped.

* annotated newick, the self-contained single-file format. A header
  comment carries the budget (and optionally a name and a seed), and every
  leaf label is followed by its taxon data::

      [&budget=4,name=demo,seed=7]
      ((x[&a=0.1,b=0.9,c=2]:1,y[&a=0,b=1,c=3]:2):0.5,z[&a=0.2,b=0.7,c=1]:3);

Writers are canonical: children are ordered by the smallest leaf label in
their subtree, floats are rendered with 12 significant digits, and the
top-level length is written only when it is positive. Parsing a written
file reproduces the written values exactly whenever the instance's floats
already sit on the 12-digit grid (see :func:`round12`).
"""

from __future__ import annotations

import re

from .errors import InputError, ParseError
from .model import Instance, PhyloTree, Taxon, TreeNode

__all__ = [
    "parse_newick",
    "parse_annotated",
    "format_newick",
    "format_annotated",
    "fmt_float",
    "round12",
]

_LABEL_RE = re.compile(r"[A-Za-z0-9_.\-|]+")
_NUMBER_RE = re.compile(r"[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?")
_KEY_RE = re.compile(r"[A-Za-z_]+")
_VALUE_RE = re.compile(r"[^,\]\s]+")
_NAME_RE = re.compile(r"[A-Za-z0-9_.\-]+")


def fmt_float(x: float) -> str:
    """Canonical text form of a float: 12 significant digits."""
    return f"{float(x):.12g}"


def round12(x: float) -> float:
    """Snap a float onto the 12-significant-digit grid used by writers."""
    return float(fmt_float(x))


# ------------------------------------------------------------------------- #
#  Scanner
# ------------------------------------------------------------------------- #

class _Scanner:
    """Character cursor with line and column tracking for error messages."""

    __slots__ = ("text", "pos", "line", "col")

    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def eof(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.text[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def match(self, regex: re.Pattern) -> str | None:
        m = regex.match(self.text, self.pos)
        if m is None or not m.group(0):
            return None
        self.advance(len(m.group(0)))
        return m.group(0)

    def expect(self, literal: str, what: str | None = None) -> None:
        if not self.text.startswith(literal, self.pos):
            self.fail(f"expected {what or literal!r}")
        self.advance(len(literal))

    def fail(self, message: str):
        raise ParseError(message, line=self.line, column=self.col)


def _skip_trivia(sc: _Scanner, skip_comments: bool) -> None:
    while not sc.eof():
        ch = sc.peek()
        if ch in " \t\r\n":
            sc.advance()
        elif skip_comments and ch == "[":
            while not sc.eof() and sc.peek() != "]":
                sc.advance()
            sc.expect("]", "closing ']' of comment")
        else:
            return


# ------------------------------------------------------------------------- #
#  Parsing
# ------------------------------------------------------------------------- #

def _parse_annotation(sc: _Scanner) -> dict[str, str]:
    """Read one ``[&key=value,...]`` block into a string map."""
    sc.expect("[&", "'[&' annotation")
    out: dict[str, str] = {}
    while True:
        _skip_trivia(sc, False)
        key = sc.match(_KEY_RE)
        if key is None:
            sc.fail("expected an annotation key")
        _skip_trivia(sc, False)
        sc.expect("=")
        _skip_trivia(sc, False)
        val = sc.match(_VALUE_RE)
        if val is None:
            sc.fail(f"missing value for annotation key {key!r}")
        if key in out:
            sc.fail(f"duplicate annotation key {key!r}")
        out[key] = val
        _skip_trivia(sc, False)
        if sc.peek() == ",":
            sc.advance()
            continue
        sc.expect("]", "closing ']' of annotation")
        return out


def _leaf_taxon(sc: _Scanner, label: str, ann: dict[str, str],
                line: int, col: int) -> Taxon:
    if set(ann) != {"a", "b", "c"}:
        raise ParseError(
            f"leaf {label!r}: annotation must have exactly the keys a, b, c",
            line=line, column=col)
    try:
        a = float(ann["a"])
        b = float(ann["b"])
        c = int(ann["c"])
    except ValueError as exc:
        raise ParseError(f"leaf {label!r}: {exc}", line=line, column=col) from exc
    return Taxon(id=label, a=a, b=b, c=c)


def _decorate(sc: _Scanner, node: TreeNode, annotated: bool,
              taxa: dict[str, Taxon]) -> TreeNode:
    """Consume the optional label, annotation and length after a subtree."""
    if node.taxon is None:
        _read_and_discard_internal_label(sc)
    _skip_trivia(sc, not annotated)
    if annotated and sc.peek() == "[":
        line, col = sc.line, sc.col
        ann = _parse_annotation(sc)
        if node.taxon is None:
            raise ParseError("annotation on an interior edge", line=line, column=col)
        if node.taxon in taxa:
            raise ParseError(f"duplicate leaf label {node.taxon!r}",
                             line=line, column=col)
        taxa[node.taxon] = _leaf_taxon(sc, node.taxon, ann, line, col)
    elif annotated and node.taxon is not None:
        sc.fail(f"leaf {node.taxon!r} is missing its [&a=...,b=...,c=...] annotation")
    _skip_trivia(sc, not annotated)
    if sc.peek() == ":":
        sc.advance()
        _skip_trivia(sc, not annotated)
        num = sc.match(_NUMBER_RE)
        if num is None:
            sc.fail("expected a branch length after ':'")
        node.length = float(num)
    return node


def _read_and_discard_internal_label(sc: _Scanner) -> None:
    sc.match(_LABEL_RE)


def _parse_tree_body(sc: _Scanner, annotated: bool) -> tuple[TreeNode, dict[str, Taxon]]:
    taxa: dict[str, Taxon] = {}
    stack: list[list[TreeNode]] = []
    current: TreeNode | None = None
    while True:
        _skip_trivia(sc, not annotated)
        ch = sc.peek()
        if ch == "":
            sc.fail("unexpected end of input")
        elif ch == "(":
            if current is not None:
                sc.fail("unexpected '(' after a complete subtree")
            sc.advance()
            stack.append([])
        elif ch == ",":
            if current is None:
                sc.fail("expected a subtree before ','")
            if not stack:
                sc.fail("',' outside any group")
            sc.advance()
            stack[-1].append(current)
            current = None
        elif ch == ")":
            if current is None:
                sc.fail("expected a subtree before ')'")
            if not stack:
                sc.fail("unbalanced ')'")
            sc.advance()
            children = stack.pop()
            children.append(current)
            current = _decorate(sc, TreeNode(children=children), annotated, taxa)
        elif ch == ";":
            if stack:
                sc.fail("unbalanced '(': group never closed")
            if current is None:
                sc.fail("empty tree")
            sc.advance()
            _skip_trivia(sc, not annotated)
            if not sc.eof():
                sc.fail("trailing text after ';'")
            return current, taxa
        else:
            if current is not None:
                sc.fail(f"unexpected {ch!r} after a complete subtree")
            label = sc.match(_LABEL_RE)
            if label is None:
                sc.fail(f"unexpected character {ch!r}")
            current = _decorate(sc, TreeNode(taxon=label), annotated, taxa)


def parse_newick(text: str) -> TreeNode:
    """Parse a plain newick string into builder nodes.

    Bracket comments are ignored. Interior labels are accepted and
    discarded. Raises :class:`ParseError` with line and column on any
    syntax problem.
    """
    sc = _Scanner(text)
    top, _ = _parse_tree_body(sc, annotated=False)
    return top


def parse_annotated(text: str) -> tuple[TreeNode, dict[str, Taxon], dict]:
    """Parse the annotated single-file format.

    Returns the tree's builder nodes, the taxon table collected from leaf
    annotations, and a header mapping with keys ``budget`` (int), ``name``
    (str or None) and ``seed`` (int or None).
    """
    sc = _Scanner(text)
    _skip_trivia(sc, False)
    if sc.peek() != "[":
        sc.fail("expected a [&budget=...] header")
    line, col = sc.line, sc.col
    ann = _parse_annotation(sc)
    unknown = sorted(set(ann) - {"budget", "name", "seed"})
    if unknown:
        raise ParseError("unknown header keys: " + ", ".join(unknown),
                         line=line, column=col)
    if "budget" not in ann:
        raise ParseError("header is missing the budget", line=line, column=col)
    try:
        budget = int(ann["budget"])
        seed = int(ann["seed"]) if "seed" in ann else None
    except ValueError as exc:
        raise ParseError(f"header: {exc}", line=line, column=col) from exc
    name = ann.get("name")
    if name is not None and not _NAME_RE.fullmatch(name):
        raise ParseError(f"header: name {name!r} has characters outside "
                         "[A-Za-z0-9_.-]", line=line, column=col)
    top, taxa = _parse_tree_body(sc, annotated=True)
    return top, taxa, {"budget": budget, "name": name, "seed": seed}


# ------------------------------------------------------------------------- #
#  Writing
# ------------------------------------------------------------------------- #

def _check_label(label: str) -> str:
    if not _LABEL_RE.fullmatch(label):
        raise InputError(f"leaf label {label!r} has characters outside "
                         "[A-Za-z0-9_.|-] and cannot be written")
    return label


def _render(tree: PhyloTree, taxa: dict[str, Taxon] | None) -> str:
    """Canonical tree text: children ordered by smallest leaf label."""
    n = len(tree.edges)
    minlab = [""] * n
    text = [""] * n
    for e in tree.edges:
        if e.taxon is not None:
            label = _check_label(e.taxon)
            minlab[e.eid] = label
            ann = ""
            if taxa is not None:
                tx = taxa[label]
                ann = (f"[&a={fmt_float(tx.a)},b={fmt_float(tx.b)},"
                       f"c={int(tx.c)}]")
            text[e.eid] = f"{label}{ann}:{fmt_float(e.length)}"
        else:
            kids = sorted(e.children, key=lambda c: minlab[c])
            minlab[e.eid] = minlab[kids[0]]
            body = "(" + ",".join(text[k] for k in kids) + ")"
            if e.eid == tree.root:
                tail = f":{fmt_float(e.length)}" if e.length > 0 else ""
            else:
                tail = f":{fmt_float(e.length)}"
            text[e.eid] = body + tail
    return text[tree.root] + ";"


def format_newick(tree: PhyloTree) -> str:
    """Canonical plain newick for a tree, without a trailing newline."""
    return _render(tree, None)


def format_annotated(instance: Instance, *, name: str | None = None,
                     seed: int | None = None) -> str:
    """Full annotated-file content for an instance, newline-terminated."""
    parts = [f"budget={int(instance.budget)}"]
    if name is not None:
        if not _NAME_RE.fullmatch(name):
            raise InputError(f"name {name!r} has characters outside [A-Za-z0-9_.-]")
        parts.append(f"name={name}")
    if seed is not None:
        parts.append(f"seed={int(seed)}")
    header = "[&" + ",".join(parts) + "]"
    return header + "\n" + _render(instance.tree, instance.taxa) + "\n"
