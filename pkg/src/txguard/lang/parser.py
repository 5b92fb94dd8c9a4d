"""Recursive-descent parser for the Solidity-like core language.

The grammar is documented in ``docs/grammar.md``. Parsing desugars on the
fly: ``require`` becomes ``assume``, ``revert()`` becomes ``assume(false)``,
``for`` loops become labelled ``while`` loops, compound assignments are
expanded, and globals are zero-initialised at the top of the constructor.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

from txguard.lang.ast import (
    ArrAssign,
    Assert,
    Assign,
    Assume,
    Call,
    Contract,
    Function,
    GlobalDecl,
    If,
    QueryMeta,
    SKIP,
    Stmt,
    While,
    seq,
)
from txguard.lang.errors import ContractSyntaxError, ContractTypeError, ScopeError
from txguard.logic import (
    FALSE,
    TRUE,
    ArraySort,
    Atom,
    BinOp,
    BitVec,
    Const,
    Expr,
    Formula,
    Select,
    Sort,
    Sum,
    Term,
    Var,
    conj,
    disj,
    neg,
)

SUPPORTED_WIDTHS = (4, 8, 16, 32, 64, 128, 256)


# ---------------------------------------------------------------------------
# Source-level types

@dataclass(frozen=True)
class Ty:
    kind: str  # uint | address | bool | mapping | array
    key: "Ty | None" = None
    val: "Ty | None" = None

    def __str__(self) -> str:
        if self.kind == "mapping":
            return f"mapping({self.key}=>{self.val})"
        if self.kind == "array":
            return f"{self.val}[]"
        return self.kind

    @property
    def scalar(self) -> bool:
        return self.kind in ("uint", "address", "bool")


UINT = Ty("uint")
ADDRESS = Ty("address")
BOOL = Ty("bool")
LITERAL = Ty("literal")  # integer literal, adapts to uint or address


# ---------------------------------------------------------------------------
# Lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<hex>0[xX][0-9a-fA-F]+)
  | (?P<num>\d+)
  | (?P<str>"[^"\n]*"|'[^'\n]*')
  | (?P<id>[A-Za-z_$][A-Za-z_0-9$]*)
  | (?P<op>:=|==|!=|<=|>=|&&|\|\||\+=|-=|\*=|/=|%=|\+\+|--|=>|[{}()\[\];,.=<>+\-*/%!])
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass(frozen=True)
class Token:
    kind: str  # id | num | str | op | eof
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    out: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ContractSyntaxError(
                f"unexpected character {source[pos]!r}", line, pos - line_start + 1
            )
        kind = m.lastgroup
        text = m.group()
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "comment":
            nls = text.count("\n")
            if nls:
                line += nls
                line_start = pos + text.rfind("\n") + 1
        elif kind == "hex":
            out.append(Token("num", str(int(text, 16)), line, col))
        elif kind != "ws":
            out.append(Token(kind, text, line, col))
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


# ---------------------------------------------------------------------------
# Parser

_VISIBILITY = {"public", "external", "internal", "private"}
_IGNORED_MODIFIERS = {"payable", "view", "pure", "constant", "nonpayable"}
_UINT_NAMES = {"uint", "uint256"}
_COMPOUND = {"+=": "+", "-=": "-", "*=": "*", "/=": "/", "%=": "%"}


@dataclass
class _Sym:
    var: Var
    ty: Ty
    is_global: bool


class Parser:
    def __init__(self, source: str, width: int = 256, address_width: int = 160):
        if width not in SUPPORTED_WIDTHS:
            raise ValueError(f"unsupported bit-width {width}")
        self.toks = tokenize(source)
        self.i = 0
        self.width = width
        self.address_width = address_width
        self.globals: dict[str, _Sym] = {}
        self.scope: dict[str, _Sym] = {}
        self.locals: list[Var] = []
        self.fn_name = ""
        self.loop_counter = 0
        self.user_queries = 0
        self.function_names: set[str] = set()
        self.ret_var: Var | None = None

    # -- token helpers ------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("op", "id") and t.text in texts

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}")
        return self.advance()

    def ident(self) -> Token:
        if self.tok.kind != "id":
            self.fail("expected identifier")
        return self.advance()

    def fail(self, message: str, tok: Token | None = None):
        t = tok or self.tok
        found = t.text or "end of input"
        raise ContractSyntaxError(f"{message}, found {found!r}", t.line, t.col)

    # -- sorts --------------------------------------------------------------

    def sort(self, ty: Ty) -> Sort:
        if ty.kind == "uint":
            return BitVec(self.width)
        if ty.kind == "address":
            return BitVec(self.address_width)
        if ty.kind == "bool":
            return BitVec(1)
        if ty.kind == "mapping":
            return ArraySort(self.sort(ty.key), self.sort(ty.val))
        if ty.kind == "array":
            return ArraySort(BitVec(self.width), self.sort(ty.val))
        raise AssertionError(ty)

    def const(self, value: int, ty: Ty, tok: Token) -> Const:
        w = self.sort(ty).width  # type: ignore[union-attr]
        if value >= 1 << w:
            raise ContractTypeError(f"constant {value} does not fit in {ty}", tok.line, tok.col)
        return Const(value, w)

    # -- contract -----------------------------------------------------------

    def parse_contract(self) -> Contract:
        self.expect("contract")
        name = self.ident().text
        self.expect("{")
        ctor: Function | None = None
        ctor_tok: Token | None = None
        pending: list[tuple[Token, str, list[Token]]] = []
        decls: list[GlobalDecl] = []
        inits: dict[str, tuple[int, int, list[Token]]] = {}
        # First pass: globals and function headers, so bodies may call forward.
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.fail("unterminated contract")
            if self.at("function", "constructor"):
                kw = self.advance()
                start = self.i
                self._skip_function()
                pending.append((kw, "f", self.toks[start:self.i]))
                if kw.text == "function":
                    fname = self.toks[start].text
                    if fname in self.function_names or fname == "constructor":
                        raise ContractSyntaxError(
                            f"duplicate function {fname!r}", kw.line, kw.col
                        )
                    self.function_names.add(fname)
                else:
                    if ctor_tok is not None:
                        raise ContractSyntaxError("more than one constructor", kw.line, kw.col)
                    ctor_tok = kw
            else:
                decl, init_span = self.parse_global()
                decls.append(decl)
                if init_span is not None:
                    inits[decl.name] = init_span
        self.expect("}")
        if self.tok.kind != "eof":
            self.fail("expected end of input")

        functions: list[Function] = []
        end = self.i
        for kw, _, _ in pending:
            # Re-enter the token stream at the header.
            self.i = self.toks.index(kw) + 1
            if kw.text == "constructor":
                ctor = self.parse_function(is_ctor=True, decls=decls, inits=inits)
            else:
                functions.append(self.parse_function(is_ctor=False))
        self.i = end
        if ctor is None:
            self.scope = dict(self.globals)
            self.locals = []
            ctor = Function(
                "constructor", (), seq(*self._prologue(decls, inits)), "public", True
            )
        return Contract(
            name, tuple(decls), ctor, tuple(functions), self.width, self.address_width
        )

    def _skip_function(self) -> None:
        depth = 0
        while True:
            t = self.advance()
            if t.kind == "eof":
                self.fail("unterminated function", t)
            if t.text == "{" and t.kind == "op":
                depth += 1
            elif t.text == "}" and t.kind == "op":
                depth -= 1
                if depth == 0:
                    return

    def parse_type(self) -> Ty:
        t = self.tok
        if t.text in _UINT_NAMES:
            self.advance()
            ty = UINT
        elif t.text == "address":
            self.advance()
            ty = ADDRESS
        elif t.text == "bool":
            self.advance()
            ty = BOOL
        elif t.text == "mapping":
            self.advance()
            self.expect("(")
            key = self.parse_type()
            if key.kind not in ("uint", "address"):
                raise ContractTypeError(f"unsupported mapping key {key}", t.line, t.col)
            self.expect("=>")
            val = self.parse_type()
            self.expect(")")
            ty = Ty("mapping", key, val)
        else:
            self.fail("expected a type")
        if self.at("["):
            self.advance()
            self.expect("]")
            if not ty.scalar:
                raise ContractTypeError("arrays of non-scalar types are unsupported", t.line, t.col)
            ty = Ty("array", UINT, ty)
        return ty

    def _is_type_start(self) -> bool:
        return self.tok.kind == "id" and (
            self.tok.text in _UINT_NAMES or self.tok.text in ("address", "bool", "mapping")
        ) and not (self.tok.text == "address" and self.peek().text == "(")

    def parse_global(self):
        t = self.tok
        ty = self.parse_type()
        if ty.kind == "array":
            raise ContractTypeError("array state variables are unsupported", t.line, t.col)
        while self.at(*_VISIBILITY, "constant"):
            self.advance()
        name_tok = self.ident()
        name = name_tok.text
        if name in self.globals:
            raise ScopeError(f"duplicate global {name!r}", name_tok.line, name_tok.col)
        var = Var(name, self.sort(ty))
        self.globals[name] = _Sym(var, ty, True)
        init = None
        if self.at("=", ":="):
            self.advance()
            start = self.i
            depth = 0
            while not (self.at(";") and depth == 0):
                if self.tok.kind == "eof":
                    self.fail("expected ';'")
                if self.at("(", "["):
                    depth += 1
                elif self.at(")", "]"):
                    depth -= 1
                self.advance()
            init = (start, self.i, name_tok)
        self.expect(";")
        return GlobalDecl(var, str(ty)), init

    def _prologue(self, decls: list[GlobalDecl], inits, skip=frozenset()) -> list[Stmt]:
        """Solidity zero-initialises state; explicit initialisers run first.

        Scalars in ``skip`` are overwritten by the constructor before any
        read, so their zero-initialisation is dropped.
        """
        self.scope = dict(self.globals)
        out: list[Stmt] = []
        for d in decls:
            sym = self.globals[d.name]
            if d.name in inits:
                start, stop, name_tok = inits[d.name]
                saved = self.i
                self.i = start
                value = self.value_of(self.parse_expr(), sym.ty, name_tok)
                if self.i != stop:
                    self.fail("malformed initialiser")
                self.i = saved
                out.append(Assign(sym.var, value, (name_tok.line, name_tok.col)))
            elif sym.ty.scalar and d.name not in skip:
                out.append(Assign(sym.var, Const(0, sym.var.sort.width)))  # type: ignore[union-attr]
            elif sym.ty.kind == "mapping" and sym.ty.val == UINT:
                zero = Const(0, self.width)
                out.append(Assume(Atom("=", Sum(sym.var), zero)))
        return out

    # -- functions ----------------------------------------------------------

    def parse_function(self, is_ctor: bool, decls=(), inits=None) -> Function:
        head = self.toks[self.i - 1]
        name = "constructor" if is_ctor else self.ident().text
        self.fn_name = name
        self.scope = dict(self.globals)
        self.locals = []
        self.loop_counter = 0
        self.expect("(")
        params: list[Var] = []
        while not self.at(")"):
            if params:
                self.expect(",")
            ty = self.parse_type()
            while self.at("memory", "calldata", "storage"):
                self.advance()
            pname = self.ident()
            params.append(self.declare(pname, ty))
            if ty.kind == "array":
                self.declare_length(pname)
        self.expect(")")
        visibility = "public"
        self.ret_var = None
        ret_ty: Ty | None = None
        while not self.at("{"):
            t = self.advance()
            if t.text in _VISIBILITY:
                visibility = t.text
            elif t.text in _IGNORED_MODIFIERS:
                pass
            elif t.text == "returns":
                self.expect("(")
                ret_ty = self.parse_type()
                if self.tok.kind == "id":
                    self.advance()
                self.expect(")")
            else:
                self.fail("unexpected token in function header", t)
        if ret_ty is not None:
            self.ret_var = Var(f"{name}.ret", self.sort(ret_ty))
        stmts = self.parse_block(top=True)
        prologue: list[Stmt] = []
        if is_ctor:
            saved = self.scope
            prologue = self._prologue(list(decls), inits or {}, _assigned_first(stmts))
            self.scope = saved
        body = seq(*prologue, *stmts)
        return Function(
            name,
            tuple(params),
            body,
            "public" if is_ctor else visibility,
            is_ctor,
            self.ret_var,
            tuple(self.locals),
            (head.line, head.col),
        )

    def declare(self, tok: Token, ty: Ty) -> Var:
        name = tok.text
        if name in self.scope or name in ("msg", "this"):
            raise ScopeError(f"{name!r} is already declared", tok.line, tok.col)
        var = Var(name, self.sort(ty))
        for other in self.locals:
            if other.name == name and other.sort != var.sort:
                raise ScopeError(f"{name!r} redeclared with another type", tok.line, tok.col)
        self.scope[name] = _Sym(var, ty, False)
        if var not in self.locals:
            self.locals.append(var)
        return var

    def declare_length(self, tok: Token) -> None:
        var = Var(f"{tok.text}.length", BitVec(self.width))
        self.scope[var.name] = _Sym(var, UINT, False)

    # -- statements ---------------------------------------------------------

    def parse_block(self, top: bool = False) -> list[Stmt]:
        self.expect("{")
        saved = dict(self.scope)
        out: list[Stmt] = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.fail("expected '}'")
            if self.at("return"):
                out.append(self.parse_return(top))
                continue
            out.append(self.parse_stmt())
        self.expect("}")
        self.scope = saved
        return out

    def parse_return(self, top: bool) -> Stmt:
        t = self.advance()
        stmt: Stmt = SKIP
        if not self.at(";"):
            value = self.parse_expr()
            if self.ret_var is None:
                raise ContractTypeError("return value in a function without returns", t.line, t.col)
            ret_ty = self._type_of_sort(self.ret_var.sort)
            stmt = Assign(self.ret_var, self.value_of(value, ret_ty, t), (t.line, t.col))
        self.expect(";")
        if not (top and self.at("}")):
            raise ContractSyntaxError(
                "return is only supported as the last statement of a function", t.line, t.col
            )
        return stmt

    def _type_of_sort(self, s: Sort) -> Ty:
        if s == BitVec(1):
            return BOOL
        if s == BitVec(self.width):
            return UINT
        return ADDRESS

    def parse_stmt(self) -> Stmt:
        t = self.tok
        loc = (t.line, t.col)
        if self.at("{"):
            return seq(*self.parse_block())
        if self.at("if"):
            self.advance()
            self.expect("(")
            cond = self.cond_of(self.parse_expr(), t)
            self.expect(")")
            then = self.parse_stmt()
            orelse: Stmt = SKIP
            if self.at("else"):
                self.advance()
                orelse = self.parse_stmt()
            return If(cond, then, orelse, loc)
        if self.at("while"):
            self.advance()
            self.expect("(")
            cond = self.cond_of(self.parse_expr(), t)
            self.expect(")")
            label = self.fresh_label()
            body = self.parse_stmt()
            return While(label, cond, body, loc)
        if self.at("for"):
            return self.parse_for()
        if self.at("require", "assume", "assert"):
            kw = self.advance().text
            self.expect("(")
            cond = self.cond_of(self.parse_expr(), t)
            if self.at(","):
                self.advance()
                if self.tok.kind != "str":
                    self.fail("expected a message string")
                self.advance()
            self.expect(")")
            self.expect(";")
            if kw == "assert":
                meta = QueryMeta(self.user_queries, "user", loc)
                self.user_queries += 1
                return Assert(cond, meta, loc)
            return Assume(cond, loc)
        if self.at("revert", "throw"):
            kw = self.advance()
            if kw.text == "revert":
                self.expect("(")
                if self.tok.kind == "str":
                    self.advance()
                self.expect(")")
            self.expect(";")
            return Assume(FALSE, loc)
        if self._is_type_start():
            ty = self.parse_type()
            name = self.ident()
            var = self.declare(name, ty)
            if ty.kind != "uint" and ty.kind not in ("address", "bool"):
                raise ContractTypeError("local mappings/arrays are unsupported", t.line, t.col)
            if self.at("=", ":="):
                self.advance()
                if self._at_call():
                    call = self.parse_call(receiver=var)
                    self.expect(";")
                    return call
                stmt = self.assign_to(var, ty, self.parse_expr(), t)
            else:
                stmt = Assign(var, Const(0, var.sort.width), loc)  # type: ignore[union-attr]
            self.expect(";")
            return stmt
        if self.at("++", "--"):
            op = self.advance().text
            stmt = self.parse_incdec(op, t)
            self.expect(";")
            return stmt
        if self._at_call():
            call = self.parse_call(receiver=None)
            self.expect(";")
            return call
        if self.tok.kind == "id":
            stmt = self.parse_simple(t)
            self.expect(";")
            return stmt
        self.fail("expected a statement")

    def parse_simple(self, t: Token) -> Stmt:
        """Assignment, compound assignment, or postfix ++/-- (no trailing ';')."""
        target = self.parse_lvalue()
        loc = (t.line, t.col)
        if self.at("++", "--"):
            op = self.advance().text
            return self._incdec_stmt(target, op, t)
        if self.at("=", ":="):
            self.advance()
            if self._at_call():
                base, idx, ty = target
                if idx:
                    self.fail("call results can only be assigned to variables")
                return self.parse_call(receiver=base)
            return self._store(target, self.parse_expr(), t)
        if self.tok.text in _COMPOUND:
            op = _COMPOUND[self.advance().text]
            base, idx, ty = target
            if ty.kind != "uint":
                raise ContractTypeError(f"compound assignment on {ty}", t.line, t.col)
            rhs = self.term_of(self.parse_expr(), UINT, t)
            cur = self._read(base, idx)
            return self._store(target, (BinOp(op, cur, rhs, loc), UINT), t)
        self.fail("expected an assignment")

    def parse_incdec(self, op: str, t: Token) -> Stmt:
        target = self.parse_lvalue()
        return self._incdec_stmt(target, op, t)

    def _incdec_stmt(self, target, op: str, t: Token) -> Stmt:
        base, idx, ty = target
        if ty.kind != "uint":
            raise ContractTypeError(f"{op} on {ty}", t.line, t.col)
        one = Const(1, self.width)
        value = BinOp("+" if op == "++" else "-", self._read(base, idx), one, (t.line, t.col))
        return self._store(target, (value, UINT), t)

    def _read(self, base: Var, idx: tuple[Term, ...]) -> Term:
        out: Term = base
        for i in idx:
            out = Select(out, i)
        return out

    def _store(self, target, value: tuple[Expr, Ty], t: Token) -> Stmt:
        base, idx, ty = target
        loc = (t.line, t.col)
        if not idx:
            return self.assign_to(base, ty, value, t)
        if ty.kind == "bool" and isinstance(value[0], (Atom,)) or (
            ty.kind == "bool" and not _is_term(value[0])
        ):
            cond = self.cond_of(value, t)
            return If(
                cond,
                ArrAssign(base, idx, Const(1, 1), loc),
                ArrAssign(base, idx, Const(0, 1), loc),
                loc,
            )
        return ArrAssign(base, idx, self.value_of(value, ty, t), loc)

    def assign_to(self, var: Var, ty: Ty, value: tuple[Expr, Ty], t: Token) -> Stmt:
        loc = (t.line, t.col)
        if ty.kind == "bool" and not _is_term(value[0]):
            cond = self.cond_of(value, t)
            if cond == TRUE:
                return Assign(var, Const(1, 1), loc)
            if cond == FALSE:
                return Assign(var, Const(0, 1), loc)
            return If(cond, Assign(var, Const(1, 1), loc), Assign(var, Const(0, 1), loc), loc)
        return Assign(var, self.value_of(value, ty, t), loc)

    def parse_lvalue(self):
        t = self.ident()
        sym = self.lookup(t)
        if sym.var.name.endswith(".length"):
            raise ContractTypeError("cannot assign to length", t.line, t.col)
        idx: list[Term] = []
        ty = sym.ty
        while self.at("["):
            self.advance()
            if ty.kind not in ("mapping", "array"):
                raise ContractTypeError(f"cannot index {ty}", t.line, t.col)
            key = self.term_of(self.parse_expr(), ty.key, t)
            self.expect("]")
            idx.append(key)
            ty = ty.val
        if not ty.scalar:
            raise ContractTypeError(f"cannot assign a whole {ty}", t.line, t.col)
        return sym.var, tuple(idx), ty

    def _at_call(self) -> bool:
        if self.tok.kind != "id":
            return False
        if self.peek().text == "(" and self.tok.text in self.function_names:
            return True
        if self.tok.text in self.function_names and self.peek().text == "(":
            return True
        return (
            self.peek().text == "."
            and self.peek(2).kind == "id"
            and self.peek(3).text == "("
            and self.tok.text not in ("msg",)
        )

    def parse_call(self, receiver: Var | None) -> Stmt:
        t = self.ident()
        obj = None
        name = t.text
        if self.at("."):
            self.advance()
            obj, name = name, self.ident().text
            if obj not in self.scope:
                raise ScopeError(f"unknown object {obj!r}", t.line, t.col)
        elif name not in self.function_names:
            raise ScopeError(f"unknown function {name!r}", t.line, t.col)
        self.expect("(")
        args: list[Term] = []
        while not self.at(")"):
            if args:
                self.expect(",")
            e = self.parse_expr()
            args.append(self._as_term(e, t))
        self.expect(")")
        return Call(name, tuple(args), receiver, obj, (t.line, t.col))

    def _as_term(self, e: tuple[Expr, Ty], t: Token) -> Term:
        expr, ty = e
        if ty == LITERAL:
            return self.term_of(e, UINT, t)
        if not _is_term(expr):
            raise ContractTypeError("boolean expressions are not supported as call arguments", t.line, t.col)
        return expr

    def parse_for(self) -> Stmt:
        saved = dict(self.scope)
        try:
            return self._parse_for()
        finally:
            self.scope = saved

    def _parse_for(self) -> Stmt:
        t = self.advance()
        loc = (t.line, t.col)
        self.expect("(")
        init: Stmt = SKIP
        if not self.at(";"):
            init = self.parse_stmt()  # consumes ';'
        else:
            self.advance()
        cond: Formula = TRUE
        if not self.at(";"):
            cond = self.cond_of(self.parse_expr(), t)
        self.expect(";")
        update: Stmt = SKIP
        if not self.at(")"):
            ut = self.tok
            if self.at("++", "--"):
                op = self.advance().text
                update = self.parse_incdec(op, ut)
            else:
                update = self.parse_simple(ut)
        self.expect(")")
        label = self.fresh_label()
        body = self.parse_stmt()
        return seq(init, While(label, cond, seq(body, update), loc))

    def fresh_label(self) -> str:
        self.loop_counter += 1
        return f"{self.fn_name}#{self.loop_counter}"

    # -- expressions --------------------------------------------------------

    def lookup(self, tok: Token) -> _Sym:
        sym = self.scope.get(tok.text)
        if sym is None:
            raise ScopeError(f"unresolved identifier {tok.text!r}", tok.line, tok.col)
        return sym

    def parse_expr(self) -> tuple[Expr, Ty]:
        return self.parse_or()

    def parse_or(self):
        t = self.tok
        left = self.parse_and()
        while self.at("||"):
            self.advance()
            right = self.parse_and()
            left = (disj(self.cond_of(left, t), self.cond_of(right, t)), BOOL)
        return left

    def parse_and(self):
        t = self.tok
        left = self.parse_not()
        while self.at("&&"):
            self.advance()
            right = self.parse_not()
            left = (conj(self.cond_of(left, t), self.cond_of(right, t)), BOOL)
        return left

    def parse_not(self):
        t = self.tok
        if self.at("!"):
            self.advance()
            inner = self.parse_not()
            return (neg(self.cond_of(inner, t)), BOOL)
        return self.parse_cmp()

    def parse_cmp(self):
        t = self.tok
        left = self.parse_additive()
        if self.at("==", "!=", "<", "<=", ">", ">="):
            op = self.advance().text
            right = self.parse_additive()
            rel = "=" if op == "==" else op
            lt, rt = left[1], right[1]
            if lt == BOOL or rt == BOOL:
                if rel not in ("=", "!="):
                    raise ContractTypeError("ordering on booleans", t.line, t.col)
                a, b = self.cond_of(left, t), self.cond_of(right, t)
                same = disj(conj(a, b), conj(neg(a), neg(b)))
                return (same if rel == "=" else neg(same), BOOL)
            ty = self._unify(lt, rt, t)
            if ty == ADDRESS and rel not in ("=", "!="):
                raise ContractTypeError("ordering on addresses", t.line, t.col)
            a = self.term_of(left, ty, t)
            b = self.term_of(right, ty, t)
            return (Atom(rel, a, b), BOOL)
        return left

    def _unify(self, a: Ty, b: Ty, t: Token) -> Ty:
        if a == LITERAL and b == LITERAL:
            return UINT
        if a == LITERAL:
            return b
        if b == LITERAL:
            return a
        if a != b:
            raise ContractTypeError(f"type mismatch: {a} vs {b}", t.line, t.col)
        return a

    def parse_additive(self):
        t = self.tok
        left = self.parse_mult()
        while self.at("+", "-"):
            op = self.advance().text
            right = self.parse_mult()
            left = self._arith(op, left, right, t)
        return left

    def parse_mult(self):
        t = self.tok
        left = self.parse_postfix()
        while self.at("*", "/", "%"):
            op = self.advance().text
            right = self.parse_postfix()
            left = self._arith(op, left, right, t)
        return left

    def _arith(self, op, left, right, t: Token):
        for side in (left, right):
            if side[1] not in (UINT, LITERAL):
                raise ContractTypeError(f"arithmetic on {side[1]}", t.line, t.col)
        a = self.term_of(left, UINT, t)
        b = self.term_of(right, UINT, t)
        return (BinOp(op, a, b, (t.line, t.col)), UINT)

    def parse_postfix(self):
        t = self.tok
        base = self.parse_primary()
        while self.at("["):
            self.advance()
            expr, ty = base
            if ty.kind not in ("mapping", "array"):
                raise ContractTypeError(f"cannot index {ty}", t.line, t.col)
            key = self.term_of(self.parse_expr(), ty.key, t)
            self.expect("]")
            base = (Select(expr, key), ty.val)
        return base

    def parse_primary(self):
        t = self.tok
        if t.kind == "num":
            self.advance()
            return (int(t.text), LITERAL)
        if self.at("true"):
            self.advance()
            return (TRUE, BOOL)
        if self.at("false"):
            self.advance()
            return (FALSE, BOOL)
        if self.at("("):
            self.advance()
            e = self.parse_expr()
            self.expect(")")
            return e
        if self.at("address") and self.peek().text == "(":
            self.advance()
            self.advance()
            inner = self.parse_expr()
            self.expect(")")
            if inner[1] == LITERAL:
                return (self.const(inner[0], ADDRESS, t), ADDRESS)  # type: ignore[arg-type]
            if inner[1] != ADDRESS:
                raise ContractTypeError("only literals and addresses convert to address", t.line, t.col)
            return inner
        if t.kind == "id":
            self.advance()
            if t.text == "msg":
                self.expect(".")
                field_tok = self.ident()
                if field_tok.text == "sender":
                    return (Var("msg.sender", BitVec(self.address_width)), ADDRESS)
                if field_tok.text == "value":
                    return (Var("msg.value", BitVec(self.width)), UINT)
                raise ScopeError(f"unsupported msg.{field_tok.text}", field_tok.line, field_tok.col)
            sym = self.lookup(t)
            if self.at(".") and self.peek().text == "length":
                self.advance()
                self.advance()
                if sym.ty.kind != "array":
                    raise ContractTypeError("length of a non-array", t.line, t.col)
                return (self.scope[f"{t.text}.length"].var, UINT)
            return (sym.var, sym.ty)
        self.fail("expected an expression")

    # -- conversions --------------------------------------------------------

    def term_of(self, e: tuple, ty: Ty, t: Token) -> Term:
        expr, ety = e
        if ety == LITERAL:
            if ty not in (UINT, ADDRESS):
                raise ContractTypeError(f"integer literal where {ty} expected", t.line, t.col)
            return self.const(expr, ty, t)
        if ety != ty:
            raise ContractTypeError(f"expected {ty}, got {ety}", t.line, t.col)
        if not _is_term(expr):
            raise ContractTypeError("boolean expression used as a value", t.line, t.col)
        return expr

    def value_of(self, e: tuple, ty: Ty, t: Token) -> Term:
        expr, ety = e
        if ty == BOOL and ety == BOOL and not _is_term(expr):
            if expr == TRUE:
                return Const(1, 1)
            if expr == FALSE:
                return Const(0, 1)
            raise ContractTypeError("boolean expression used as a value", t.line, t.col)
        return self.term_of(e, ty, t)

    def cond_of(self, e: tuple, t: Token) -> Formula:
        expr, ty = e
        if ty != BOOL:
            raise ContractTypeError(f"expected a boolean condition, got {ty}", t.line, t.col)
        if _is_term(expr):
            return Atom("=", expr, Const(1, 1))
        return expr


def _assigned_first(stmts: list[Stmt]) -> frozenset[str]:
    """Variables written by a leading straight-line prefix before being read."""
    from txguard.logic import free_vars

    read: set[str] = set()
    written: set[str] = set()
    for s in stmts:
        if isinstance(s, Assign):
            read |= {v.name for v in free_vars(s.value)}
            if s.target.name not in read:
                written.add(s.target.name)
        elif isinstance(s, ArrAssign):
            for e in (*s.indices, s.value):
                read |= {v.name for v in free_vars(e)}
            read.add(s.target.name)
        else:
            break
    return frozenset(written)


def _is_term(e) -> bool:
    from txguard.logic import BinOp as _B, Store as _St

    return isinstance(e, (Var, Const, _B, Select, _St, Sum))


def parse(source: str, width: int = 256, address_width: int = 160) -> Contract:
    """Parse one contract from source text."""
    return Parser(source, width, address_width).parse_contract()


def parse_file(path, width: int = 256, address_width: int = 160) -> Contract:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read(), width, address_width)


def iter_tokens(source: str) -> Iterator[Token]:
    yield from tokenize(source)
