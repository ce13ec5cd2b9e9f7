"""PatchScript: a tiny metaprogramming DSL whose programs build patches.

The language is the smallest one exhibiting the "rich code" delta over
direct JSON generation: numeric lets, arithmetic, ``random(lo, hi)``,
``for`` loops over integer ranges, ``place``/``connect`` to assemble a
patch and ``emit()`` to finish it.

    let fundamental = 440
    let mix = place("gain", 0.2)
    let out = place("dac")
    for i in 0..4 {
        let p = place("osc", fundamental * (i + 1) + random(-15, 15))
        connect(p.out[0], mix.in[0])
    }
    connect(mix.out[0], out.in[0])
    connect(mix.out[0], out.in[1])
    emit()

Interpretation is deterministic: identical (program, seed) pairs yield
identical graphs.  ``..`` ranges are half-open (``1..4`` is 1, 2, 3).
A step budget and a loop bound guard keep hostile programs from running
away; every failure marks the sample not well-formed.
"""

from __future__ import annotations

import random as _random
import shlex
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from .graph import (
    Edge,
    GraphError,
    Node,
    PatchGraph,
    check_params,
    kind_info,
    make_node,
    validate,
)

STEP_LIMIT = 1_000_000
LOOP_LIMIT = 100_000
SOURCE_SUFFIX = ".psc"


class ScriptSyntaxError(Exception):
    code = "syntax-error"

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class ScriptRuntimeError(Exception):
    code = "runtime-error"

    def __init__(self, reason: str, message: str):
        super().__init__(message)
        self.reason = reason


class ExternalRunError(Exception):
    """Failure of an external metalanguage runner."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# lexer
# ---------------------------------------------------------------------------

_PUNCT = {"(", ")", "{", "}", "[", "]", ",", "+", "-", "*", "/", "%", "=", "."}
_KEYWORDS = {"let", "for", "in"}


@dataclass(frozen=True)
class Token:
    type: str  # NUMBER IDENT STRING KEYWORD PUNCT RANGE EOF
    value: str
    line: int
    col: int


def _tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and source[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch == "." and i + 1 < n and source[i + 1] == ".":
            tokens.append(Token("RANGE", "..", start_line, start_col))
            i += 2
            col += 2
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (source[j].isdigit() or (source[j] == "." and not seen_dot)):
                if source[j] == ".":
                    # leave ".." for the range token
                    if j + 1 < n and source[j + 1] == ".":
                        break
                    seen_dot = True
                j += 1
            tokens.append(Token("NUMBER", source[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            tokens.append(Token("KEYWORD" if word in _KEYWORDS else "IDENT", word, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch == '"':
            j = i + 1
            while j < n and source[j] != '"':
                if source[j] == "\n":
                    raise ScriptSyntaxError("unterminated string", start_line, start_col)
                j += 1
            if j >= n:
                raise ScriptSyntaxError("unterminated string", start_line, start_col)
            tokens.append(Token("STRING", source[i + 1:j], start_line, start_col))
            col += j - i + 1
            i = j + 1
            continue
        if ch in _PUNCT:
            tokens.append(Token("PUNCT", ch, start_line, start_col))
            i += 1
            col += 1
            continue
        raise ScriptSyntaxError(f"unexpected character {ch!r}", start_line, start_col)
    tokens.append(Token("EOF", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

Pos = tuple[int, int]


@dataclass(frozen=True)
class Num:
    value: float
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class RandomCall:
    lo: "Expr"
    hi: "Expr"
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class PlaceCall:
    kind: str
    args: tuple["Expr", ...]
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class PortRef:
    name: str
    direction: str  # "out" | "in"
    index: "Expr"
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class ConnectCall:
    src: PortRef
    dst: PortRef
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class EmitCall:
    pos: Pos = field(default=(0, 0), compare=False)


Expr = Union[Num, Var, BinOp, Neg, RandomCall, PlaceCall, ConnectCall, EmitCall, PortRef]


@dataclass(frozen=True)
class Let:
    name: str
    value: Expr
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class For:
    var: str
    lo: Expr
    hi: Expr
    body: tuple["Stmt", ...]
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class ExprStmt:
    expr: Expr
    pos: Pos = field(default=(0, 0), compare=False)


Stmt = Union[Let, For, ExprStmt]


@dataclass(frozen=True)
class Program:
    statements: tuple[Stmt, ...]


# ---------------------------------------------------------------------------
# parser (recursive descent)
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, type_: str, value: str | None = None) -> Token:
        tok = self.peek()
        if tok.type != type_ or (value is not None and tok.value != value):
            want = value if value is not None else type_
            raise ScriptSyntaxError(f"expected {want!r}, found {tok.value or tok.type!r}",
                                    tok.line, tok.col)
        return self.advance()

    def at_punct(self, value: str) -> bool:
        tok = self.peek()
        return tok.type == "PUNCT" and tok.value == value

    def program(self) -> Program:
        stmts = []
        while self.peek().type != "EOF":
            stmts.append(self.statement())
        return Program(tuple(stmts))

    def statement(self) -> Stmt:
        tok = self.peek()
        if tok.type == "KEYWORD" and tok.value == "let":
            self.advance()
            name = self.expect("IDENT")
            self.expect("PUNCT", "=")
            return Let(name.value, self.expression(), pos=(tok.line, tok.col))
        if tok.type == "KEYWORD" and tok.value == "for":
            self.advance()
            var = self.expect("IDENT")
            self.expect("KEYWORD", "in")
            lo = self.expression()
            self.expect("RANGE")
            hi = self.expression()
            self.expect("PUNCT", "{")
            body = []
            while not self.at_punct("}"):
                if self.peek().type == "EOF":
                    raise ScriptSyntaxError("unterminated block", tok.line, tok.col)
                body.append(self.statement())
            self.expect("PUNCT", "}")
            return For(var.value, lo, hi, tuple(body), pos=(tok.line, tok.col))
        return ExprStmt(self.expression(), pos=(tok.line, tok.col))

    def expression(self) -> Expr:
        return self.additive()

    def additive(self) -> Expr:
        left = self.multiplicative()
        while self.peek().type == "PUNCT" and self.peek().value in "+-":
            op = self.advance()
            right = self.multiplicative()
            left = BinOp(op.value, left, right, pos=(op.line, op.col))
        return left

    def multiplicative(self) -> Expr:
        left = self.unary()
        while self.peek().type == "PUNCT" and self.peek().value in "*/%":
            op = self.advance()
            right = self.unary()
            left = BinOp(op.value, left, right, pos=(op.line, op.col))
        return left

    def unary(self) -> Expr:
        if self.at_punct("-"):
            tok = self.advance()
            return Neg(self.unary(), pos=(tok.line, tok.col))
        return self.postfix()

    def postfix(self) -> Expr:
        expr = self.primary()
        if isinstance(expr, Var) and self.at_punct("."):
            return self.port_suffix(expr)
        return expr

    def port_suffix(self, var: Var) -> PortRef:
        self.expect("PUNCT", ".")
        tok = self.peek()
        # "in" lexes as a keyword (for-loops) but is also a port direction
        if tok.value not in ("out", "in") or tok.type not in ("IDENT", "KEYWORD"):
            raise ScriptSyntaxError(f"expected 'out' or 'in', found {tok.value or tok.type!r}",
                                    tok.line, tok.col)
        self.advance()
        self.expect("PUNCT", "[")
        index = self.expression()
        self.expect("PUNCT", "]")
        return PortRef(var.name, tok.value, index, pos=var.pos)

    def port(self) -> PortRef:
        tok = self.expect("IDENT")
        return self.port_suffix(Var(tok.value, pos=(tok.line, tok.col)))

    def primary(self) -> Expr:
        tok = self.peek()
        if tok.type == "NUMBER":
            self.advance()
            return Num(float(tok.value), pos=(tok.line, tok.col))
        if tok.type == "PUNCT" and tok.value == "(":
            self.advance()
            inner = self.expression()
            self.expect("PUNCT", ")")
            return inner
        if tok.type == "IDENT":
            if tok.value in ("random", "place", "connect", "emit"):
                return self.call(tok.value)
            self.advance()
            return Var(tok.value, pos=(tok.line, tok.col))
        # "in" is a keyword but also a port direction; only valid after "."
        raise ScriptSyntaxError(f"unexpected {tok.value or tok.type!r}", tok.line, tok.col)

    def call(self, name: str) -> Expr:
        tok = self.advance()
        self.expect("PUNCT", "(")
        pos = (tok.line, tok.col)
        if name == "emit":
            self.expect("PUNCT", ")")
            return EmitCall(pos=pos)
        if name == "random":
            lo = self.expression()
            self.expect("PUNCT", ",")
            hi = self.expression()
            self.expect("PUNCT", ")")
            return RandomCall(lo, hi, pos=pos)
        if name == "connect":
            src = self.port()
            self.expect("PUNCT", ",")
            dst = self.port()
            self.expect("PUNCT", ")")
            return ConnectCall(src, dst, pos=pos)
        kind = self.expect("STRING")
        args = []
        while self.at_punct(","):
            self.advance()
            args.append(self.expression())
        self.expect("PUNCT", ")")
        return PlaceCall(kind.value, tuple(args), pos=pos)


def parse_script(source: str) -> Program:
    """Parse PatchScript source; raises ScriptSyntaxError with line/col."""
    return _Parser(_tokenize(source)).program()


# ---------------------------------------------------------------------------
# pretty printer (canonical formatting; parse ∘ pretty == identity on ASTs)
# ---------------------------------------------------------------------------

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "%": 2}


def _format_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _pretty_expr(expr: Expr, parent_prec: int = 0, right_side: bool = False) -> str:
    if isinstance(expr, Num):
        return _format_number(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Neg):
        inner = _pretty_expr(expr.operand, 3)
        return f"-{inner}"
    if isinstance(expr, BinOp):
        prec = _PRECEDENCE[expr.op]
        left = _pretty_expr(expr.left, prec)
        right = _pretty_expr(expr.right, prec, right_side=True)
        text = f"{left} {expr.op} {right}"
        # parenthesize when precedence demands it, or for right operands of
        # non-associative positions at equal precedence
        if prec < parent_prec or (right_side and prec == parent_prec):
            return f"({text})"
        return text
    if isinstance(expr, RandomCall):
        return f"random({_pretty_expr(expr.lo)}, {_pretty_expr(expr.hi)})"
    if isinstance(expr, PlaceCall):
        args = "".join(f", {_pretty_expr(a)}" for a in expr.args)
        return f'place("{expr.kind}"{args})'
    if isinstance(expr, ConnectCall):
        return f"connect({_pretty_expr(expr.src)}, {_pretty_expr(expr.dst)})"
    if isinstance(expr, PortRef):
        return f"{expr.name}.{expr.direction}[{_pretty_expr(expr.index)}]"
    if isinstance(expr, EmitCall):
        return "emit()"
    raise TypeError(f"unknown expression {expr!r}")


def _pretty_stmt(stmt: Stmt, indent: int) -> list[str]:
    pad = "  " * indent
    if isinstance(stmt, Let):
        return [f"{pad}let {stmt.name} = {_pretty_expr(stmt.value)}"]
    if isinstance(stmt, For):
        lines = [f"{pad}for {stmt.var} in {_pretty_expr(stmt.lo)}..{_pretty_expr(stmt.hi)} {{"]
        for inner in stmt.body:
            lines.extend(_pretty_stmt(inner, indent + 1))
        lines.append(f"{pad}}}")
        return lines
    return [f"{pad}{_pretty_expr(stmt.expr)}"]


def pretty_print(program: Program) -> str:
    lines: list[str] = []
    for stmt in program.statements:
        lines.extend(_pretty_stmt(stmt, 0))
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# interpreter
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NodeHandle:
    node_id: str
    kind_text: str


@dataclass(frozen=True)
class _Port:
    handle: NodeHandle
    direction: str
    index: int


Value = Union[float, NodeHandle]


class _Interp:
    def __init__(self, seed: int):
        self.rng = _random.Random(seed & 0xFFFFFFFFFFFFFFFF)
        self.env: dict[str, Value] = {}
        self.loop_vars: set[str] = set()
        self.nodes: list[Node] = []
        self.edges: list[Edge] = []
        self.emitted: PatchGraph | None = None
        self.steps = 0

    def tick(self, pos: Pos) -> None:
        self.steps += 1
        if self.steps > STEP_LIMIT:
            raise ScriptRuntimeError("step-budget", f"{pos[0]}:{pos[1]}: step budget exceeded")

    def run(self, program: Program) -> PatchGraph:
        for stmt in program.statements:
            self.exec_stmt(stmt)
        if self.emitted is None:
            raise ScriptRuntimeError("missing-emit", "program finished without emit()")
        return self.emitted

    def exec_stmt(self, stmt: Stmt) -> None:
        self.tick(stmt.pos)
        if isinstance(stmt, Let):
            if stmt.name in self.loop_vars:
                raise ScriptRuntimeError(
                    "immutable-loop-var",
                    f"{stmt.pos[0]}:{stmt.pos[1]}: loop variable {stmt.name!r} is immutable",
                )
            self.env[stmt.name] = self.eval(stmt.value)
            return
        if isinstance(stmt, For):
            self.exec_for(stmt)
            return
        self.eval(stmt.expr)

    def exec_for(self, stmt: For) -> None:
        lo = self.number(self.eval(stmt.lo), stmt.pos, "loop bound")
        hi = self.number(self.eval(stmt.hi), stmt.pos, "loop bound")
        if lo != int(lo) or hi != int(hi):
            raise ScriptRuntimeError(
                "non-integer-bound", f"{stmt.pos[0]}:{stmt.pos[1]}: loop bounds must be integers"
            )
        count = max(0, int(hi) - int(lo))
        if count > LOOP_LIMIT:
            raise ScriptRuntimeError(
                "loop-bound", f"{stmt.pos[0]}:{stmt.pos[1]}: loop spans {count} iterations (limit {LOOP_LIMIT})"
            )
        if stmt.var in self.loop_vars:
            raise ScriptRuntimeError(
                "immutable-loop-var",
                f"{stmt.pos[0]}:{stmt.pos[1]}: loop variable {stmt.var!r} already active",
            )
        shadowed = self.env.get(stmt.var)
        had_binding = stmt.var in self.env
        self.loop_vars.add(stmt.var)
        try:
            for i in range(int(lo), int(hi)):
                self.env[stmt.var] = float(i)
                for inner in stmt.body:
                    self.exec_stmt(inner)
        finally:
            self.loop_vars.discard(stmt.var)
            if had_binding:
                self.env[stmt.var] = shadowed
            else:
                self.env.pop(stmt.var, None)

    def number(self, value, pos: Pos, what: str) -> float:
        if isinstance(value, NodeHandle):
            raise ScriptRuntimeError(
                "type-error", f"{pos[0]}:{pos[1]}: {what} must be a number, got a node handle"
            )
        if value is None:
            raise ScriptRuntimeError("type-error", f"{pos[0]}:{pos[1]}: {what} has no value")
        return float(value)

    def eval(self, expr: Expr):
        self.tick(expr.pos)
        if isinstance(expr, Num):
            return expr.value
        if isinstance(expr, Var):
            if expr.name not in self.env:
                raise ScriptRuntimeError(
                    "unknown-name", f"{expr.pos[0]}:{expr.pos[1]}: unknown name {expr.name!r}"
                )
            return self.env[expr.name]
        if isinstance(expr, Neg):
            return -self.number(self.eval(expr.operand), expr.pos, "operand")
        if isinstance(expr, BinOp):
            left = self.number(self.eval(expr.left), expr.pos, "operand")
            right = self.number(self.eval(expr.right), expr.pos, "operand")
            if expr.op == "+":
                return left + right
            if expr.op == "-":
                return left - right
            if expr.op == "*":
                return left * right
            if right == 0:
                raise ScriptRuntimeError(
                    "division-by-zero", f"{expr.pos[0]}:{expr.pos[1]}: division by zero"
                )
            return left / right if expr.op == "/" else left % right
        if isinstance(expr, RandomCall):
            lo = self.number(self.eval(expr.lo), expr.pos, "random bound")
            hi = self.number(self.eval(expr.hi), expr.pos, "random bound")
            return lo + (hi - lo) * self.rng.random()
        if isinstance(expr, PlaceCall):
            return self.do_place(expr)
        if isinstance(expr, ConnectCall):
            self.do_connect(expr)
            return None
        if isinstance(expr, EmitCall):
            self.do_emit(expr)
            return None
        if isinstance(expr, PortRef):
            raise ScriptRuntimeError(
                "type-error",
                f"{expr.pos[0]}:{expr.pos[1]}: port references only make sense inside connect()",
            )
        raise TypeError(f"unknown expression {expr!r}")

    def do_place(self, expr: PlaceCall) -> NodeHandle:
        args = [self.number(self.eval(a), expr.pos, "place parameter") for a in expr.args]
        node_id = f"obj-{len(self.nodes) + 1}"
        try:
            node = make_node(expr.kind, args, node_id=node_id)
        except GraphError as err:
            raise ScriptRuntimeError(
                err.code, f"{expr.pos[0]}:{expr.pos[1]}: {err}"
            ) from err
        problems = check_params(node.kind, node.params)
        if problems:
            raise ScriptRuntimeError(
                "bad-params", f"{expr.pos[0]}:{expr.pos[1]}: {problems[0]}"
            )
        self.nodes.append(node)
        return NodeHandle(node_id=node_id, kind_text=str(node.kind))

    def resolve_port(self, ref: PortRef, want_direction: str) -> tuple[NodeHandle, int]:
        value = self.env.get(ref.name)
        if value is None:
            raise ScriptRuntimeError(
                "connect-before-place",
                f"{ref.pos[0]}:{ref.pos[1]}: {ref.name!r} is not a placed node",
            )
        if not isinstance(value, NodeHandle):
            raise ScriptRuntimeError(
                "connect-before-place",
                f"{ref.pos[0]}:{ref.pos[1]}: {ref.name!r} is not a node handle",
            )
        if ref.direction != want_direction:
            raise ScriptRuntimeError(
                "bad-port-direction",
                f"{ref.pos[0]}:{ref.pos[1]}: expected .{want_direction}[...] here",
            )
        index = self.number(self.eval(ref.index), ref.pos, "port index")
        if index != int(index):
            raise ScriptRuntimeError(
                "port-out-of-range", f"{ref.pos[0]}:{ref.pos[1]}: port index must be an integer"
            )
        node = next(n for n in self.nodes if n.id == value.node_id)
        info = kind_info(node.kind)
        assert info is not None
        ports = info.outlets if want_direction == "out" else info.inlets
        if not 0 <= int(index) < len(ports):
            raise ScriptRuntimeError(
                "port-out-of-range",
                f"{ref.pos[0]}:{ref.pos[1]}: {value.kind_text} has no .{want_direction}[{int(index)}]",
            )
        return value, int(index)

    def do_connect(self, expr: ConnectCall) -> None:
        src, outlet = self.resolve_port(expr.src, "out")
        dst, inlet = self.resolve_port(expr.dst, "in")
        self.edges.append(Edge(src.node_id, outlet, dst.node_id, inlet))

    def do_emit(self, expr: EmitCall) -> None:
        graph = PatchGraph(nodes=tuple(self.nodes), edges=tuple(self.edges))
        report = validate(graph)
        if not report.well_formed:
            first = report.violations[0]
            raise ScriptRuntimeError(
                "invalid-graph",
                f"{expr.pos[0]}:{expr.pos[1]}: emitted graph is not well-formed: {first.message}",
            )
        self.emitted = graph


def run_script(program: Program, seed: int) -> PatchGraph:
    """Interpret a parsed program; the graph emitted last wins.

    Deterministic under a fixed 64-bit seed: ``random(lo, hi)`` draws
    uniformly from [lo, hi) out of a private seeded generator.  No invalid
    graph ever escapes — ``emit()`` validates and raises otherwise.
    """
    return _Interp(seed).run(program)


# ---------------------------------------------------------------------------
# external metalanguage runners
# ---------------------------------------------------------------------------

def run_external(command_template: str, code_file: Path | str,
                 timeout: float = 30.0) -> Path:
    """Run an external metaprogramming toolchain on ``code_file``.

    ``command_template`` must contain ``{code}`` and ``{out}`` placeholders;
    it runs in a fresh scratch directory and must write the patch file to
    ``{out}``.  The caller owns the returned file (and its parent scratch
    directory) and should read it promptly.
    """
    if "{code}" not in command_template or "{out}" not in command_template:
        raise ValueError("command template must contain {code} and {out} placeholders")
    scratch = Path(tempfile.mkdtemp(prefix="patchbench-run-"))
    out_path = scratch / "patch.out.maxpat"
    argv = [
        token.replace("{code}", str(Path(code_file).resolve())).replace("{out}", str(out_path))
        for token in shlex.split(command_template)
    ]
    try:
        proc = subprocess.run(
            argv, cwd=scratch, capture_output=True, text=True, timeout=timeout
        )
    except subprocess.TimeoutExpired as err:
        raise ExternalRunError("timeout", f"runner exceeded {timeout}s") from err
    except OSError as err:
        raise ExternalRunError("nonzero-exit", f"runner failed to start: {err}") from err
    if proc.returncode != 0:
        tail = (proc.stderr or proc.stdout or "").strip()[-300:]
        raise ExternalRunError("nonzero-exit", f"runner exited {proc.returncode}: {tail}")
    if not out_path.exists():
        raise ExternalRunError("no-output-file", "runner produced no output file")
    return out_path
