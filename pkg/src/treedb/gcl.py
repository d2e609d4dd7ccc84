"""Minimal guarded-command model language.

A model file declares bounded integer variables, optional extra initial
states, an optional process layout, and guarded update commands:

    # counters
    var x : 0..3 = 0;
    var y : 0..2 = 0;
    cmd x < 3 -> x := x + 1;
    cmd y < 2 -> y := y + 1;

Guards are comparisons combined with ``&&`` and ``||``; expressions use
``+ - *`` over variables and integer literals, with parentheses. Each
``cmd`` whose guard holds contributes one successor, in declaration
order; all updates of a command read the pre-state (simultaneous
assignment). Each ``init a=1, b=2;`` line adds one initial state,
defaulting unlisted variables to their declared initializer; without
``init`` lines the declared initializers form the single initial
state. ``layout 2,2,2;`` partitions the slots into contiguous process
blocks for process-table storage. ``#`` and ``//`` start comments.

Updates are checked against the declared domain during exploration; an
out-of-range value raises :class:`~treedb.errors.DomainError`.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError, DomainError, ModelParseError
from .model import MAX_SLOT_VALUE, Model, Vector

_PUNCT2 = ("..", "->", ":=", "<=", ">=", "==", "!=", "&&", "||")
_PUNCT1 = ":;,=<>()+-*"
_UNICODE = {"∧": "&&", "∨": "||", "→": "->"}


@dataclass(frozen=True)
class _Tok:
    kind: str  # 'ident' | 'int' | 'punct' | 'eof'
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#" or text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c in _UNICODE:
            toks.append(_Tok("punct", _UNICODE[c], line, col))
            i += 1
            col += 1
            continue
        two = text[i : i + 2]
        if two in _PUNCT2:
            toks.append(_Tok("punct", two, line, col))
            i += 2
            col += 2
            continue
        if c in _PUNCT1:
            toks.append(_Tok("punct", c, line, col))
            i += 1
            col += 1
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(_Tok("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(_Tok("ident", text[i:j], line, col))
            col += j - i
            i = j
            continue
        raise ModelParseError(f"unexpected character {c!r}", line, col)
    toks.append(_Tok("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0
        self.vars: dict[str, int] = {}  # name -> slot index
        self.domains: list[tuple[int, int]] = []
        self.defaults: list[int] = []
        self.inits: list[dict[str, int]] = []
        self.layout: tuple[int, ...] | None = None
        # each command: (guard fn, [(slot, update fn)], source line)
        self.commands: list[tuple] = []

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def next(self) -> _Tok:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def error(self, msg: str, tok: _Tok | None = None):
        t = tok or self.peek()
        raise ModelParseError(msg, t.line, t.col)

    def expect(self, text: str) -> _Tok:
        t = self.next()
        if t.text != text:
            self.error(f"expected {text!r}, found {t.text!r}", t)
        return t

    def expect_int(self) -> int:
        t = self.next()
        if t.kind != "int":
            self.error(f"expected an integer, found {t.text!r}", t)
        return int(t.text)

    def expect_ident(self) -> str:
        t = self.next()
        if t.kind != "ident":
            self.error(f"expected a name, found {t.text!r}", t)
        return t.text

    def slot_of(self, name: str, tok: _Tok) -> int:
        if name not in self.vars:
            self.error(f"undeclared variable {name!r}", tok)
        return self.vars[name]

    # -- statements --------------------------------------------------

    def parse(self):
        while self.peek().kind != "eof":
            t = self.next()
            if t.text == "var":
                self.vardecl()
            elif t.text == "init":
                self.initdecl()
            elif t.text == "layout":
                self.layoutdecl()
            elif t.text == "cmd":
                self.command(t)
            else:
                self.error(f"expected var/init/layout/cmd, found {t.text!r}", t)

    def vardecl(self):
        tok = self.peek()
        name = self.expect_ident()
        if name in self.vars:
            self.error(f"variable {name!r} declared twice", tok)
        if self.commands or self.inits:
            self.error("variable declarations must precede init/cmd", tok)
        self.expect(":")
        lo = self.expect_int()
        self.expect("..")
        hi = self.expect_int()
        self.expect("=")
        init = self.expect_int()
        self.expect(";")
        if lo > hi:
            self.error(f"empty domain {lo}..{hi} for {name!r}", tok)
        if hi > MAX_SLOT_VALUE:
            self.error(f"domain bound {hi} exceeds the {MAX_SLOT_VALUE} slot maximum", tok)
        if not lo <= init <= hi:
            self.error(f"initial value {init} outside {lo}..{hi} for {name!r}", tok)
        self.vars[name] = len(self.domains)
        self.domains.append((lo, hi))
        self.defaults.append(init)

    def initdecl(self):
        assigns: dict[str, int] = {}
        while True:
            tok = self.peek()
            name = self.expect_ident()
            slot = self.slot_of(name, tok)
            self.expect("=")
            val = self.expect_int()
            lo, hi = self.domains[slot]
            if not lo <= val <= hi:
                self.error(f"init value {val} outside {lo}..{hi} for {name!r}", tok)
            assigns[name] = val
            if self.peek().text == ",":
                self.next()
                continue
            break
        self.expect(";")
        self.inits.append(assigns)

    def layoutdecl(self):
        tok = self.peek()
        sizes = [self.expect_int()]
        while self.peek().text == ",":
            self.next()
            sizes.append(self.expect_int())
        self.expect(";")
        if self.layout is not None:
            self.error("layout declared twice", tok)
        self.layout = tuple(sizes)

    def command(self, tok: _Tok):
        guard = self.disjunction()
        self.expect("->")
        updates: list[tuple[int, object]] = []
        targets: set[int] = set()
        while True:
            t = self.peek()
            name = self.expect_ident()
            slot = self.slot_of(name, t)
            if slot in targets:
                self.error(f"variable {name!r} assigned twice in one command", t)
            targets.add(slot)
            self.expect(":=")
            updates.append((slot, self.expression()))
            if self.peek().text == ",":
                self.next()
                continue
            break
        self.expect(";")
        self.commands.append((guard, updates, tok.line))

    # -- guard / expression grammar, compiled to closures ------------

    def disjunction(self):
        fn = self.conjunction()
        while self.peek().text == "||":
            self.next()
            rhs = self.conjunction()
            lhs = fn
            fn = lambda s, a=lhs, b=rhs: a(s) or b(s)
        return fn

    def conjunction(self):
        fn = self.comparison()
        while self.peek().text == "&&":
            self.next()
            rhs = self.comparison()
            lhs = fn
            fn = lambda s, a=lhs, b=rhs: a(s) and b(s)
        return fn

    def comparison(self):
        if self.peek().text == "(":
            # Either a boolean group or a parenthesized arithmetic
            # operand; try the boolean reading first and backtrack.
            save = self.pos
            try:
                self.next()
                inner = self.disjunction()
                self.expect(")")
                return inner
            except ModelParseError:
                self.pos = save
        left = self.expression()
        op = self.next()
        ops = {
            "<": lambda a, b: a < b,
            "<=": lambda a, b: a <= b,
            ">": lambda a, b: a > b,
            ">=": lambda a, b: a >= b,
            "==": lambda a, b: a == b,
            "!=": lambda a, b: a != b,
        }
        if op.text not in ops:
            self.error(f"expected a comparison operator, found {op.text!r}", op)
        right = self.expression()
        cmp = ops[op.text]
        return lambda s, l=left, r=right, c=cmp: c(l(s), r(s))

    def expression(self):
        fn = self.term()
        while self.peek().text in ("+", "-"):
            op = self.next().text
            rhs = self.term()
            lhs = fn
            if op == "+":
                fn = lambda s, a=lhs, b=rhs: a(s) + b(s)
            else:
                fn = lambda s, a=lhs, b=rhs: a(s) - b(s)
        return fn

    def term(self):
        fn = self.factor()
        while self.peek().text == "*":
            self.next()
            rhs = self.factor()
            lhs = fn
            fn = lambda s, a=lhs, b=rhs: a(s) * b(s)
        return fn

    def factor(self):
        t = self.next()
        if t.kind == "int":
            v = int(t.text)
            return lambda s, v=v: v
        if t.kind == "ident":
            slot = self.slot_of(t.text, t)
            return lambda s, i=slot: s[i]
        if t.text == "(":
            fn = self.expression()
            self.expect(")")
            return fn
        if t.text == "-":
            inner = self.factor()
            return lambda s, f=inner: -f(s)
        self.error(f"expected a value, found {t.text!r}", t)


def load_model(text: str, name: str = "model") -> Model:
    """Parse a guarded-command model description into a Model."""
    parser = _Parser(text)
    parser.parse()
    if not parser.vars:
        raise ModelParseError("model declares no variables", 1, 1)
    k = len(parser.domains)
    names = [None] * k
    for var, slot in parser.vars.items():
        names[slot] = var

    if parser.inits:
        initial = []
        for assigns in parser.inits:
            state = list(parser.defaults)
            for var, val in assigns.items():
                state[parser.vars[var]] = val
            initial.append(tuple(state))
    else:
        initial = [tuple(parser.defaults)]

    if parser.layout is not None and sum(parser.layout) != k:
        raise ConfigError(
            f"layout {parser.layout} covers {sum(parser.layout)} slots, model has {k}"
        )

    commands = parser.commands
    domains = parser.domains

    def next_state(state: Vector) -> list[Vector]:
        succs = []
        for guard, updates, line in commands:
            if guard(state):
                new = list(state)
                for slot, expr in updates:
                    val = expr(state)
                    lo, hi = domains[slot]
                    if not lo <= val <= hi:
                        raise DomainError(
                            f"command at line {line}: {names[slot]} := {val} "
                            f"outside {lo}..{hi}"
                        )
                    new[slot] = val
                succs.append(tuple(new))
        return succs

    return Model(
        k=k,
        initial_states=tuple(dict.fromkeys(initial)),
        next_state=next_state,
        process_layout=parser.layout,
        name=name,
    )


def load_model_file(path) -> Model:
    from pathlib import Path

    p = Path(path)
    return load_model(p.read_text(encoding="utf-8"), name=p.stem)
