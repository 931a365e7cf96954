"""Line-oriented parser for ``.snp`` source.

One statement per line, clauses indented by exactly four spaces per level,
``#`` starts a comment. Subprograms for composite programs are written as
``def name:`` blocks ahead of the main program.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import (COMPARISONS, AddConst, Assign, BinaryOp, Call, Const,
                  ForLoop, If, MulConst, Operand, Program, Return, Statement,
                  UnaryCmp, Var, VarDecl)

INDENT_WIDTH = 4
KEYWORDS = {"input", "int", "bool", "for", "if", "else", "return", "def"}

_IDENT = r"[A-Za-z_][A-Za-z_0-9]*"
_TOKEN_RE = re.compile(rf"\s*(?:(?P<num>[0-9]+)|(?P<name>{_IDENT})|(?P<op>==|<=|>=|,\.\.\.,|[-+*<>(),=:]))")


class SNPSyntaxError(ValueError):
    """Raised for malformed source; carries 1-based ``line`` and ``col``."""

    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.msg = msg
        self.line = line
        self.col = col
        super().__init__(f"line {line}, col {col}: {msg}" if line else msg)


@dataclass
class _Line:
    no: int
    level: int
    text: str
    col: int  # 1-based column where ``text`` starts


def _split_lines(source: str) -> list[_Line]:
    out = []
    for no, raw in enumerate(source.splitlines(), start=1):
        code = raw.split("#", 1)[0].rstrip()
        if not code.strip():
            continue
        if "\t" in code[: len(code) - len(code.lstrip())]:
            raise SNPSyntaxError("tabs are not allowed for indentation", no, 1)
        pad = len(code) - len(code.lstrip(" "))
        if pad % INDENT_WIDTH:
            raise SNPSyntaxError(f"indentation must be a multiple of {INDENT_WIDTH} spaces", no, pad + 1)
        out.append(_Line(no, pad // INDENT_WIDTH, code.strip(), pad + 1))
    return out


def _tokenize(ln: _Line) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    text = ln.text
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise SNPSyntaxError(f"unexpected character {text[pos]!r}", ln.no, ln.col + pos)
        kind = m.lastgroup
        val = m.group(kind)
        toks.append((kind, val, ln.col + m.start(kind)))
        pos = m.end()
    return toks


class _Cursor:
    def __init__(self, ln: _Line):
        self.ln = ln
        self.toks = _tokenize(ln)
        self.i = 0

    def error(self, msg: str, tok=None) -> SNPSyntaxError:
        if tok is None:
            tok = self.toks[self.i] if self.i < len(self.toks) else None
        col = tok[2] if tok else self.ln.col + len(self.ln.text)
        return SNPSyntaxError(msg, self.ln.no, col)

    def peek(self, k: int = 0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def take(self, kind=None, val=None):
        tok = self.peek()
        if tok is None:
            raise self.error("unexpected end of line")
        if (kind and tok[0] != kind) or (val and tok[1] != val):
            want = val or kind
            raise self.error(f"expected {want!r}, found {tok[1]!r}", tok)
        self.i += 1
        return tok

    def accept(self, val) -> bool:
        tok = self.peek()
        if tok and tok[0] == "op" and tok[1] == val:
            self.i += 1
            return True
        return False

    def name(self) -> str:
        tok = self.take("name")
        if tok[1] in KEYWORDS:
            raise self.error(f"{tok[1]!r} is a keyword", tok)
        return tok[1]

    def number(self) -> int:
        tok = self.peek()
        if tok and tok[0] == "op" and tok[1] == "-":
            raise self.error("negative literals are not allowed", tok)
        return int(self.take("num")[1])

    def operand(self) -> Operand:
        tok = self.peek()
        if tok and tok[0] == "num":
            return Const(self.number())
        if tok and tok[0] == "op" and tok[1] == "-":
            raise self.error("negative literals are not allowed", tok)
        return Var(self.name())

    def end(self):
        tok = self.peek()
        if tok is not None:
            raise self.error(f"unexpected {tok[1]!r}", tok)


def _parse_decl(cur: _Cursor) -> VarDecl:
    kw = cur.take("name")[1]
    line = cur.ln.no
    if kw == "input":
        name = cur.name()
        cur.end()
        return VarDecl(name, "input", None, line=line)
    name = cur.name()
    cur.take("op", "=")
    tok = cur.peek()
    if tok and tok[1] == "-":
        raise cur.error(f"initializer of {name!r} must be a nonnegative integer", tok)
    if tok is None or tok[0] != "num":
        raise cur.error(f"initializer of {name!r} must be an integer literal")
    value = cur.number()
    cur.end()
    return VarDecl(name, kw, value, line=line)


def _parse_expr(cur: _Cursor, target: str, line: int) -> Statement:
    # comparison in parentheses: (a op b)
    tok = cur.peek()
    if tok and tok[1] == "(":
        cur.take()
        stmt = _parse_comparison(cur, target, line)
        cur.take("op", ")")
        cur.end()
        return stmt
    # call: name(args)
    t1 = cur.peek(1)
    if tok and tok[0] == "name" and t1 and t1[1] == "(":
        fname = cur.name()
        cur.take()
        args = []
        if not cur.accept(")"):
            while True:
                args.append(cur.name())
                if cur.accept(")"):
                    break
                cur.take("op", ",")
        cur.end()
        return Call(target, fname, tuple(args), line=line)
    first = cur.operand()
    nxt = cur.peek()
    if nxt is None:
        return Assign(target, first, line=line)
    if nxt[0] == "name" and nxt[1] == "if":
        cur.take()
        cond = cur.name()
        cur.take("name", "else")
        other = cur.operand()
        cur.end()
        return If(target, cond, first, other, line=line)
    op = cur.take("op")[1]
    if op == "*":
        if not isinstance(first, Const):
            raise cur.error("multiplication must be written <constant> * <operand>", nxt)
        src = cur.operand()
        cur.end()
        return MulConst(target, first.value, src, line=line)
    if op in ("+", "-"):
        second = cur.operand()
        cur.end()
        if isinstance(first, Var) and isinstance(second, Var):
            return BinaryOp(target, op, first.name, second.name, line=line)
        if isinstance(second, Const):
            return AddConst(target, first, second.value if op == "+" else -second.value, line=line)
        if op == "+":  # constant + variable
            return AddConst(target, second, first.value, line=line)
        raise cur.error("cannot subtract a variable from a constant", nxt)
    if op in COMPARISONS:
        raise cur.error("comparisons must be parenthesised", nxt)
    raise cur.error(f"unexpected operator {op!r}", nxt)


def _parse_comparison(cur: _Cursor, target: str, line: int) -> Statement:
    left = cur.operand()
    tok = cur.take("op")
    op = tok[1]
    if op not in COMPARISONS:
        raise cur.error(f"expected a comparison operator, found {op!r}", tok)
    if not isinstance(left, Var):
        raise cur.error("left side of a comparison must be a variable", tok)
    right = cur.operand()
    if isinstance(right, Const):
        return UnaryCmp(target, op, left.name, right.value, line=line)
    return BinaryOp(target, op, left.name, right.name, line=line)


def _parse_statement(cur: _Cursor) -> Statement:
    tok = cur.peek()
    line = cur.ln.no
    if tok[0] == "name" and tok[1] == "return":
        cur.take()
        name = cur.name()
        cur.end()
        return Return(name, line=line)
    if tok[0] == "name" and tok[1] in ("input", "int", "bool"):
        raise cur.error("declarations must come before all statements", tok)
    if tok[0] != "name" or tok[1] in KEYWORDS:
        raise cur.error(f"unknown statement form starting with {tok[1]!r}", tok)
    target = cur.name()
    cur.take("op", "=")
    return _parse_expr(cur, target, line)


def _parse_for_header(cur: _Cursor):
    cur.take("name", "for")
    counter = cur.name()
    cur.take("op", "=")
    start = cur.operand()
    cur.take("op", ",...,")
    end = cur.operand()
    cur.take("op", ":")
    cur.end()
    return counter, start, end


class _Parser:
    def __init__(self, lines: list[_Line]):
        self.lines = lines
        self.pos = 0

    def peek(self) -> _Line | None:
        return self.lines[self.pos] if self.pos < len(self.lines) else None

    def block(self, level: int) -> list[Statement]:
        body: list[Statement] = []
        while (ln := self.peek()) is not None and ln.level >= level:
            if ln.level > level:
                raise SNPSyntaxError("unexpected indentation", ln.no, ln.col)
            self.pos += 1
            cur = _Cursor(ln)
            first = cur.peek()
            if first[0] == "name" and first[1] == "for":
                counter, start, end = _parse_for_header(cur)
                nxt = self.peek()
                if nxt is None or nxt.level != level + 1:
                    raise SNPSyntaxError("loop clause must be an indented non-empty block", ln.no, ln.col)
                clause = self.block(level + 1)
                body.append(ForLoop(counter, start, end, tuple(clause), line=ln.no))
            elif first[0] == "name" and first[1] == "def":
                raise SNPSyntaxError("'def' is only allowed at top level before the main program", ln.no, ln.col)
            else:
                body.append(_parse_statement(cur))
        return body

    def program(self, level: int, name: str | None, library=()) -> Program:
        decls: list[VarDecl] = []
        while (ln := self.peek()) is not None and ln.level == level:
            cur = _Cursor(ln)
            first = cur.peek()
            if not (first[0] == "name" and first[1] in ("input", "int", "bool")):
                break
            self.pos += 1
            decls.append(_parse_decl(cur))
        body = self.block(level)
        ln = self.peek()
        if ln is not None and ln.level > level:
            raise SNPSyntaxError("unexpected indentation", ln.no, ln.col)
        return Program(tuple(decls), tuple(body), name=name, library=tuple(library))


def parse(source: str, name: str | None = None) -> Program:
    """Parse SNP source text into a :class:`Program`.

    Raises :class:`SNPSyntaxError` with line and column on malformed input.
    Semantic checks (declared names, loop discipline) live in
    :func:`snpc.lang.validate`.
    """
    lines = _split_lines(source)
    if not lines:
        raise SNPSyntaxError("empty program")
    p = _Parser(lines)
    library: list[Program] = []
    while (ln := p.peek()) is not None and (ln.text == "def" or ln.text.startswith("def ")):
        if ln.level != 0:
            raise SNPSyntaxError("unexpected indentation", ln.no, ln.col)
        cur = _Cursor(ln)
        cur.take("name", "def")
        sub_name = cur.name()
        cur.take("op", ":")
        cur.end()
        p.pos += 1
        nxt = p.peek()
        if nxt is None or nxt.level != 1:
            raise SNPSyntaxError(f"body of {sub_name!r} must be indented", ln.no, ln.col)
        if any(q.name == sub_name for q in library):
            raise SNPSyntaxError(f"subprogram {sub_name!r} defined twice", ln.no, ln.col)
        library.append(p.program(1, sub_name))
    main = p.program(0, name, library)
    if (ln := p.peek()) is not None:
        raise SNPSyntaxError(f"unexpected {ln.text!r}", ln.no, ln.col)
    return main


def parse_file(path) -> Program:
    from pathlib import Path

    path = Path(path)
    return parse(path.read_text(encoding="utf-8"), name=path.stem)
