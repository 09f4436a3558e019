"""S-expression DSL for languages, relation sets, and instances.

Surface grammar (comments run from ';' to end of line):

    (lang (def <name> <arity> (piece <term> (and <atom>*))+ )*)
    (rels (rel <name> <arity> <formula>)*)
    (inst (vars <n>) (sum (app <name> <idx>+)*) (threshold <rational>|inf|none))

    term     := (var <idx>) | (scale <rational> <term>) | (const <laurent>)
    atom     := (lt <term> <term>) | (eq <term> <term>) | true | false
    formula  := atom | (and <formula>*) | (or <formula>*) | (not <formula>)
              | (exists <idx> <formula>) | (forall <idx> <formula>)
    laurent  := <rational> | (eps <exponent> <rational>) | (+ <laurent-term>*)

Printing is canonical and deterministic, so parse . print is the identity
on ASTs and print . parse is the identity on canonically formatted files.
"""

from __future__ import annotations

import re
from fractions import Fraction

from . import syntax as sx
from .errors import ParseError
from .laurent import Laurent

_RATIONAL = re.compile(r"^[+-]?\d+(/\d+)?$")
_INT = re.compile(r"^[+-]?\d+$")


class _Tok:
    __slots__ = ("text", "line", "col")

    def __init__(self, text, line, col):
        self.text = text
        self.line = line
        self.col = col


class _Node:
    """A parenthesized list, remembering where it started."""

    __slots__ = ("items", "line", "col")

    def __init__(self, items, line, col):
        self.items = items
        self.line = line
        self.col = col


def _tokenize(text):
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            col += 1
            i += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            yield _Tok(ch, line, col)
            col += 1
            i += 1
        else:
            start = i
            startcol = col
            while i < n and text[i] not in " \t\r\n();":
                i += 1
                col += 1
            yield _Tok(text[start:i], line, startcol)


def _read(text):
    """Parse the whole text into a single s-expression tree."""
    stack = []
    top = None
    last = None
    for tok in _tokenize(text):
        last = tok
        if tok.text == "(":
            node = _Node([], tok.line, tok.col)
            if stack:
                stack[-1].items.append(node)
            stack.append(node)
        elif tok.text == ")":
            if not stack:
                raise ParseError("unbalanced ')'", tok.line, tok.col)
            node = stack.pop()
            if not stack:
                if top is not None:
                    raise ParseError("trailing content after expression", tok.line, tok.col)
                top = node
        else:
            if not stack:
                raise ParseError("expected '('", tok.line, tok.col)
            stack[-1].items.append(tok)
    if stack:
        raise ParseError("unbalanced '('", stack[-1].line, stack[-1].col)
    if top is None:
        where = (last.line, last.col) if last else (1, 1)
        raise ParseError("empty input", *where)
    return top


def _fail(node, message):
    raise ParseError(message, node.line, node.col)


def _expect_symbol(node, what="a symbol"):
    if not isinstance(node, _Tok):
        _fail(node, "expected %s" % what)
    return node.text


def _expect_int(node, what="an integer"):
    text = _expect_symbol(node, what)
    if not _INT.match(text):
        _fail(node, "expected %s, got %r" % (what, text))
    return int(text)


def _expect_rational(node):
    text = _expect_symbol(node, "a rational")
    if not _RATIONAL.match(text):
        _fail(node, "expected a rational, got %r" % text)
    return Fraction(text)


def _head(node):
    if not isinstance(node, _Node) or not node.items:
        return None
    first = node.items[0]
    return first.text if isinstance(first, _Tok) else None


# --------------------------------------------------------------------------
# laurent literals


def parse_laurent(node) -> Laurent:
    if isinstance(node, _Tok):
        if not _RATIONAL.match(node.text):
            _fail(node, "expected a rational or (eps ...) or (+ ...), got %r" % node.text)
        return Laurent(Fraction(node.text))
    head = _head(node)
    if head == "eps":
        if len(node.items) != 3:
            _fail(node, "(eps <exponent> <coefficient>) takes two arguments")
        exp = _expect_int(node.items[1], "an exponent")
        coeff = _expect_rational(node.items[2])
        return Laurent.monomial(exp, coeff)
    if head == "+":
        total = Laurent()
        for item in node.items[1:]:
            total = total + parse_laurent(item)
        return total
    _fail(node, "expected a Laurent literal")


def parse_laurent_text(text: str) -> Laurent:
    """Parse a standalone Laurent literal (possibly a bare rational)."""
    stripped = text.strip()
    if _RATIONAL.match(stripped):
        return Laurent(Fraction(stripped))
    return parse_laurent(_read(text))


def format_laurent(value: Laurent) -> str:
    terms = value.terms
    if not terms:
        return "0"
    if len(terms) == 1:
        exp, coeff = terms[0]
        if exp == 0:
            return str(coeff)
        return "(eps %d %s)" % (exp, coeff)
    parts = []
    for exp, coeff in terms:
        parts.append(str(coeff) if exp == 0 else "(eps %d %s)" % (exp, coeff))
    return "(+ %s)" % " ".join(parts)


# --------------------------------------------------------------------------
# terms, atoms, formulas


def parse_term(node) -> sx.Term:
    head = _head(node)
    if head == "var":
        if len(node.items) != 2:
            _fail(node, "(var <idx>) takes one argument")
        return sx.Scaled(Fraction(1), _expect_int(node.items[1], "a variable index"))
    if head == "scale":
        if len(node.items) != 3:
            _fail(node, "(scale <rational> <term>) takes two arguments")
        coeff = _expect_rational(node.items[1])
        inner = parse_term(node.items[2])
        # Composed scalings flatten immediately; scaling a constant folds in.
        if isinstance(inner, sx.Scaled):
            return sx.Scaled(coeff * inner.coeff, inner.var)
        return sx.Const(inner.value.scale(coeff))
    if head == "const":
        if len(node.items) != 2:
            _fail(node, "(const <laurent>) takes one argument")
        return sx.Const(parse_laurent(node.items[1]))
    _fail(node, "expected a term: (var i), (scale q t), or (const v)")


def format_term(t: sx.Term) -> str:
    if isinstance(t, sx.Scaled):
        if t.coeff == 1:
            return "(var %d)" % t.var
        return "(scale %s (var %d))" % (t.coeff, t.var)
    return "(const %s)" % format_laurent(t.value)


def parse_atom(node):
    if isinstance(node, _Tok):
        if node.text == "true":
            return sx.TRUE
        if node.text == "false":
            return sx.FALSE
        _fail(node, "expected an atom, got %r" % node.text)
    head = _head(node)
    if head in ("lt", "eq"):
        if len(node.items) != 3:
            _fail(node, "(%s <term> <term>) takes two arguments" % head)
        lhs = parse_term(node.items[1])
        rhs = parse_term(node.items[2])
        return sx.normalize_atom(sx.Atom(lhs, head, rhs))
    _fail(node, "expected an atom: (lt t t), (eq t t), true, or false")


def format_atom(atom) -> str:
    if isinstance(atom, sx.BoolAtom):
        return "true" if atom.value else "false"
    if atom.op == sx.LEQ:
        raise ParseError("weak inequalities have no surface syntax")
    return "(%s %s %s)" % (atom.op, format_term(atom.lhs), format_term(atom.rhs))


_FORMULA_HEADS = {"and", "or", "not", "exists", "forall"}


def parse_formula(node):
    head = _head(node) if isinstance(node, _Node) else None
    if head not in _FORMULA_HEADS:
        return sx.Leaf(parse_atom(node))
    if head == "and":
        return sx.And(tuple(parse_formula(p) for p in node.items[1:]))
    if head == "or":
        return sx.Or(tuple(parse_formula(p) for p in node.items[1:]))
    if head == "not":
        if len(node.items) != 2:
            _fail(node, "(not <formula>) takes one argument")
        return sx.Not(parse_formula(node.items[1]))
    if len(node.items) != 3:
        _fail(node, "(%s <idx> <formula>) takes two arguments" % head)
    v = _expect_int(node.items[1], "a variable index")
    body = parse_formula(node.items[2])
    cls = sx.Exists if head == "exists" else sx.Forall
    return cls(v, body)


def format_formula(f) -> str:
    if isinstance(f, sx.Leaf):
        return format_atom(f.atom)
    if isinstance(f, sx.And):
        return "(and %s)" % " ".join(format_formula(p) for p in f.parts)
    if isinstance(f, sx.Or):
        return "(or %s)" % " ".join(format_formula(p) for p in f.parts)
    if isinstance(f, sx.Not):
        return "(not %s)" % format_formula(f.body)
    if isinstance(f, sx.Exists):
        return "(exists %d %s)" % (f.var, format_formula(f.body))
    if isinstance(f, sx.Forall):
        return "(forall %d %s)" % (f.var, format_formula(f.body))
    raise ParseError("not a formula: %r" % (f,))


# --------------------------------------------------------------------------
# top-level objects


def parse_language(node) -> sx.Language:
    if _head(node) != "lang":
        _fail(node, "expected (lang ...)")
    functions = {}
    for d in node.items[1:]:
        if _head(d) != "def":
            _fail(d, "expected (def <name> <arity> <piece>+)")
        if len(d.items) < 4:
            _fail(d, "(def ...) needs a name, an arity, and at least one piece")
        name = _expect_symbol(d.items[1], "a function name")
        arity = _expect_int(d.items[2], "an arity")
        if arity < 1:
            _fail(d.items[2], "arity must be positive")
        if name in functions:
            _fail(d, "duplicate definition of %r" % name)
        pieces = []
        for p in d.items[3:]:
            if _head(p) != "piece":
                _fail(p, "expected (piece <term> (and <atom>*))")
            if len(p.items) != 3:
                _fail(p, "(piece ...) takes a value term and a guard")
            value = parse_term(p.items[1])
            guard_node = p.items[2]
            if _head(guard_node) != "and":
                _fail(guard_node, "piece guard must be (and <atom>*)")
            atoms = [parse_atom(a) for a in guard_node.items[1:]]
            pieces.append(sx.make_piece(value, atoms))
        try:
            functions[name] = sx.make_function(name, arity, pieces)
        except Exception as exc:
            _fail(d, str(exc))
    return sx.Language(functions)


def parse_relations(node) -> dict:
    if _head(node) != "rels":
        _fail(node, "expected (rels ...)")
    relations = {}
    for r in node.items[1:]:
        if _head(r) != "rel":
            _fail(r, "expected (rel <name> <arity> <formula>)")
        if len(r.items) != 4:
            _fail(r, "(rel ...) takes a name, an arity, and a formula")
        name = _expect_symbol(r.items[1], "a relation name")
        arity = _expect_int(r.items[2], "an arity")
        if arity < 1:
            _fail(r.items[2], "arity must be positive")
        if name in relations:
            _fail(r, "duplicate definition of %r" % name)
        raw = parse_formula(r.items[3])
        highest = max([arity - 1] + [v for v in _all_var_indices(raw)])
        defn = sx.alpha_rename(raw, highest + 1)
        free = sx.formula_vars(defn)
        if any(v >= arity for v in free):
            _fail(r, "relation %r of arity %d has free variable %d"
                  % (name, arity, max(free)))
        relations[name] = sx.Relation(name, arity, defn)
    return relations


def _all_var_indices(f):
    out = set()

    def walk(g):
        if isinstance(g, sx.Leaf):
            out.update(sx.atom_vars(g.atom))
        elif isinstance(g, (sx.And, sx.Or)):
            for p in g.parts:
                walk(p)
        elif isinstance(g, sx.Not):
            walk(g.body)
        elif isinstance(g, (sx.Exists, sx.Forall)):
            out.add(g.var)
            walk(g.body)

    walk(f)
    return out


def parse_instance(node) -> sx.VcspInstance:
    if _head(node) != "inst":
        _fail(node, "expected (inst ...)")
    num_vars = None
    summands = None
    threshold = None
    for part in node.items[1:]:
        head = _head(part)
        if head == "vars":
            if len(part.items) != 2:
                _fail(part, "(vars <n>) takes one argument")
            num_vars = _expect_int(part.items[1], "a variable count")
            if num_vars < 1:
                _fail(part.items[1], "variable count must be positive")
        elif head == "sum":
            summands = []
            for app in part.items[1:]:
                if _head(app) != "app":
                    _fail(app, "expected (app <name> <idx>+)")
                if len(app.items) < 3:
                    _fail(app, "(app ...) takes a name and variable indices")
                name = _expect_symbol(app.items[1], "a function name")
                scope = tuple(_expect_int(i, "a variable index") for i in app.items[2:])
                summands.append((name, scope))
        elif head == "threshold":
            if len(part.items) != 2:
                _fail(part, "(threshold ...) takes one argument")
            arg = part.items[1]
            text = _expect_symbol(arg, "a rational, inf, or none")
            if text == "none":
                threshold = None
            elif text == "inf":
                threshold = sx.INF
            elif _RATIONAL.match(text):
                threshold = Fraction(text)
            else:
                _fail(arg, "threshold must be a rational, inf, or none")
        else:
            _fail(part, "expected (vars ...), (sum ...), or (threshold ...)")
    if num_vars is None:
        _fail(node, "instance is missing (vars <n>)")
    if summands is None:
        _fail(node, "instance is missing (sum ...)")
    return sx.VcspInstance(num_vars, tuple(summands), threshold)


def parse(text: str, kind: str):
    """Parse a whole file.  kind is 'language', 'relation-set', or 'instance'."""
    node = _read(text)
    if kind == "language":
        return parse_language(node)
    if kind == "relation-set":
        return parse_relations(node)
    if kind == "instance":
        return parse_instance(node)
    raise ValueError("unknown kind %r" % kind)


def parse_auto(text: str):
    """Parse a file, dispatching on its head symbol."""
    node = _read(text)
    head = _head(node)
    if head == "lang":
        return parse_language(node)
    if head == "rels":
        return parse_relations(node)
    if head == "inst":
        return parse_instance(node)
    _fail(node, "expected (lang ...), (rels ...), or (inst ...)")


# --------------------------------------------------------------------------
# canonical printing


def format_language(lang: sx.Language) -> str:
    lines = ["(lang"]
    for f in lang.functions.values():
        lines.append("  (def %s %d" % (f.name, f.arity))
        for p in f.pieces:
            guard = " ".join(format_atom(a) for a in p.guard)
            guard = "(and %s)" % guard if guard else "(and true)"
            lines.append("    (piece %s %s)" % (format_term(p.value), guard))
        lines[-1] += ")"
    return "\n".join(lines) + ")\n"


def format_relations(relations: dict) -> str:
    lines = ["(rels"]
    for r in relations.values():
        lines.append("  (rel %s %d %s)" % (r.name, r.arity, format_formula(r.defn)))
    return "\n".join(lines) + ")\n"


def format_instance(inst: sx.VcspInstance) -> str:
    apps = " ".join(
        "(app %s %s)" % (name, " ".join(str(v) for v in scope))
        for name, scope in inst.summands
    )
    if inst.threshold is None:
        thr = "none"
    elif inst.threshold is sx.INF:
        thr = "inf"
    else:
        thr = str(inst.threshold)
    return "(inst (vars %d) (sum %s) (threshold %s))\n" % (inst.num_vars, apps, thr)
