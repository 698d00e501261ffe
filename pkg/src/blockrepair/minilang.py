"""The bundled demonstration subject language.

A small Java-like statement language: typed declarations, assignments,
calls, if/for/while/return, blocks, classes with methods and fields, and
line comments. Enough surface for end-to-end repair runs without dragging
in a real compiler.

Runnable as a module for subject-project build/test commands:

    python -m blockrepair.minilang check DIR        # parse every *.mj file
    python -m blockrepair.minilang run-tests DIR    # execute DIR/tests.json
"""
from __future__ import annotations

import json
import re
import sys
from pathlib import Path

from .lang import ParseError
from .trees import GenericTree

__all__ = ["MiniJavaLanguage", "Interpreter", "check_project", "run_project_tests"]

_KEYWORDS = {"class", "if", "else", "for", "while", "return", "true", "false"}
_TYPES = {"int", "bool", "str", "void"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\+\+|--|\+=|-=|==|!=|<=|>=|&&|\|\||[-+*/%<>=!(){},;.])
    """,
    re.VERBOSE,
)


class _Token:
    __slots__ = ("kind", "text", "line")

    def __init__(self, kind, text, line):
        self.kind = kind
        self.text = text
        self.line = line

    def __repr__(self):
        return f"{self.kind}:{self.text!r}@{self.line}"


def _lex(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    line = 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line)
        group = m.lastgroup
        value = m.group()
        if group not in ("ws", "comment"):
            tokens.append(_Token(group, value, line))
        line += value.count("\n")
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self, offset: int = 0) -> _Token | None:
        idx = self.i + offset
        return self.tokens[idx] if idx < len(self.tokens) else None

    def at(self, text: str, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok is not None and tok.text == text

    def take(self) -> _Token:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self._last_line())
        self.i += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.peek()
        if tok is None or tok.text != text:
            got = tok.text if tok else "end of input"
            raise ParseError(f"expected {text!r}, got {got!r}",
                             tok.line if tok else self._last_line())
        return self.take()

    def _last_line(self) -> int:
        return self.tokens[-1].line if self.tokens else 1

    # -- declarations --------------------------------------------------

    def parse_program(self) -> GenericTree:
        items = []
        while self.peek() is not None:
            items.append(self.parse_item())
        return GenericTree("program", None, tuple(items))

    def parse_item(self) -> GenericTree:
        if self.at("class"):
            return self.parse_class()
        if self._at_decl_head():
            return self.parse_typed_decl(in_class=False)
        return self.parse_stmt()

    def _at_decl_head(self) -> bool:
        tok = self.peek()
        nxt = self.peek(1)
        return (tok is not None and tok.text in _TYPES
                and nxt is not None and nxt.kind == "ident"
                and nxt.text not in _KEYWORDS)

    def parse_class(self) -> GenericTree:
        self.expect("class")
        name = self.take()
        if name.kind != "ident":
            raise ParseError("class name expected", name.line)
        self.expect("{")
        members = []
        while not self.at("}"):
            if self.peek() is None:
                raise ParseError("unterminated class body", name.line)
            if not self._at_decl_head():
                tok = self.peek()
                raise ParseError(f"class member expected, got {tok.text!r}", tok.line)
            members.append(self.parse_typed_decl(in_class=True))
        self.expect("}")
        return GenericTree("class", name.text, tuple(members))

    def parse_typed_decl(self, in_class: bool) -> GenericTree:
        type_tok = self.take()
        name_tok = self.take()
        if self.at("("):
            return self.parse_func(type_tok.text, name_tok.text)
        kind = "field" if in_class else "var_decl"
        children = [GenericTree("type", type_tok.text)]
        if self.at("="):
            self.take()
            children.append(self.parse_expr())
        self.expect(";")
        return GenericTree(kind, name_tok.text, tuple(children))

    def parse_func(self, rtype: str, name: str) -> GenericTree:
        self.expect("(")
        params = []
        while not self.at(")"):
            if params:
                self.expect(",")
            ptype = self.take()
            pname = self.take()
            if ptype.text not in _TYPES or pname.kind != "ident":
                raise ParseError("parameter expected", ptype.line)
            params.append(GenericTree("param", pname.text,
                                      (GenericTree("type", ptype.text),)))
        self.expect(")")
        body = self.parse_block()
        children = (GenericTree("type", rtype),
                    GenericTree("params", None, tuple(params)), body)
        return GenericTree("func", name, children)

    # -- statements ----------------------------------------------------

    def parse_block(self) -> GenericTree:
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.peek() is None:
                raise ParseError("unterminated block", self._last_line())
            stmts.append(self.parse_block_item())
        self.expect("}")
        return GenericTree("block", None, tuple(stmts))

    def parse_block_item(self) -> GenericTree:
        if self._at_decl_head():
            return self.parse_typed_decl(in_class=False)
        return self.parse_stmt()

    def parse_stmt(self) -> GenericTree:
        if self.at(";"):
            self.take()
            return GenericTree("empty")
        if self.at("{"):
            return self.parse_block()
        if self.at("if"):
            return self.parse_if()
        if self.at("for"):
            return self.parse_for()
        if self.at("while"):
            tok = self.take()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            body = self.parse_body_stmt()
            return GenericTree("while", None, (cond, body))
        if self.at("return"):
            self.take()
            if self.at(";"):
                self.take()
                return GenericTree("return")
            value = self.parse_expr()
            self.expect(";")
            return GenericTree("return", None, (value,))
        expr = self.parse_expr()
        self.expect(";")
        return GenericTree("expr_stmt", None, (expr,))

    def parse_body_stmt(self) -> GenericTree:
        return self.parse_block_item()

    def parse_if(self) -> GenericTree:
        self.expect("if")
        self.expect("(")
        cond = self.parse_expr()
        self.expect(")")
        then = self.parse_body_stmt()
        if self.at("else"):
            self.take()
            other = self.parse_body_stmt()
            return GenericTree("if", None, (cond, then, other))
        return GenericTree("if", None, (cond, then))

    def parse_for(self) -> GenericTree:
        self.expect("for")
        self.expect("(")
        if self.at(";"):
            self.take()
            init = GenericTree("empty")
        elif self._at_decl_head():
            type_tok = self.take()
            name_tok = self.take()
            children = [GenericTree("type", type_tok.text)]
            if self.at("="):
                self.take()
                children.append(self.parse_expr())
            self.expect(";")
            init = GenericTree("var_decl", name_tok.text, tuple(children))
        else:
            init = GenericTree("expr_stmt", None, (self.parse_expr(),))
            self.expect(";")
        cond = GenericTree("true_lit") if self.at(";") else self.parse_expr()
        self.expect(";")
        update = GenericTree("empty") if self.at(")") else \
            GenericTree("expr_stmt", None, (self.parse_expr(),))
        self.expect(")")
        body = self.parse_body_stmt()
        return GenericTree("for", None, (init, cond, update, body))

    # -- expressions ---------------------------------------------------

    def parse_expr(self) -> GenericTree:
        return self.parse_assign()

    def parse_assign(self) -> GenericTree:
        left = self.parse_or()
        tok = self.peek()
        if tok is not None and tok.text in ("=", "+=", "-="):
            if left.kind != "name":
                raise ParseError("assignment target must be a name", tok.line)
            self.take()
            right = self.parse_assign()
            return GenericTree("assign", tok.text, (left, right))
        return left

    def _binop_level(self, sub, ops):
        left = sub()
        while True:
            tok = self.peek()
            if tok is None or tok.text not in ops:
                return left
            self.take()
            right = sub()
            left = GenericTree("binop", tok.text, (left, right))

    def parse_or(self):
        return self._binop_level(self.parse_and, ("||",))

    def parse_and(self):
        return self._binop_level(self.parse_equality, ("&&",))

    def parse_equality(self):
        return self._binop_level(self.parse_relational, ("==", "!="))

    def parse_relational(self):
        return self._binop_level(self.parse_additive, ("<", ">", "<=", ">="))

    def parse_additive(self):
        return self._binop_level(self.parse_multiplicative, ("+", "-"))

    def parse_multiplicative(self):
        return self._binop_level(self.parse_unary, ("*", "/", "%"))

    def parse_unary(self) -> GenericTree:
        tok = self.peek()
        if tok is not None and tok.text in ("!", "-"):
            self.take()
            return GenericTree("unop", tok.text, (self.parse_unary(),))
        return self.parse_postfix()

    def parse_postfix(self) -> GenericTree:
        node = self.parse_primary()
        while True:
            tok = self.peek()
            if tok is None:
                return node
            if tok.text == "(" and node.kind == "name":
                self.take()
                args = []
                while not self.at(")"):
                    if args:
                        self.expect(",")
                    args.append(self.parse_expr())
                self.expect(")")
                node = GenericTree("call", node.value, tuple(args))
            elif tok.text in ("++", "--"):
                self.take()
                node = GenericTree("postfix", tok.text, (node,))
            elif tok.text == ".":
                self.take()
                attr = self.take()
                if attr.kind != "ident":
                    raise ParseError("member name expected", attr.line)
                node = GenericTree("member", attr.text, (node,))
            else:
                return node

    def parse_primary(self) -> GenericTree:
        tok = self.peek()
        if tok is None:
            raise ParseError("expression expected", self._last_line())
        if tok.kind == "num":
            self.take()
            return GenericTree("int_lit", tok.text)
        if tok.kind == "string":
            self.take()
            return GenericTree("str_lit", tok.text)
        if tok.text in ("true", "false"):
            self.take()
            return GenericTree("true_lit" if tok.text == "true" else "false_lit")
        if tok.kind == "ident" and tok.text not in _KEYWORDS and tok.text not in _TYPES:
            self.take()
            return GenericTree("name", tok.text)
        if tok.text == "(":
            self.take()
            inner = self.parse_expr()
            self.expect(")")
            return inner
        raise ParseError(f"expression expected, got {tok.text!r}", tok.line)


# -- printing ----------------------------------------------------------


def _print_expr(t: GenericTree, top: bool = False) -> str:
    k = t.kind
    if k == "int_lit":
        return t.value
    if k == "str_lit":
        return t.value
    if k == "true_lit":
        return "true"
    if k == "false_lit":
        return "false"
    if k == "name":
        return t.value
    if k == "assign":
        rhs = _print_expr(t.children[1], top=True)
        text = f"{t.children[0].value} {t.value} {rhs}"
        return text if top else f"({text})"
    if k == "binop":
        text = f"{_print_expr(t.children[0])} {t.value} {_print_expr(t.children[1])}"
        return text if top else f"({text})"
    if k == "unop":
        return f"{t.value}{_print_expr(t.children[0])}"
    if k == "postfix":
        return f"{_print_expr(t.children[0])}{t.value}"
    if k == "call":
        args = ", ".join(_print_expr(a, top=True) for a in t.children)
        return f"{t.value}({args})"
    if k == "member":
        return f"{_print_expr(t.children[0])}.{t.value}"
    raise ValueError(f"not an expression node: {k}")


def _print_stmt(t: GenericTree, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    k = t.kind
    if k == "empty":
        out.append(pad + ";")
    elif k == "block":
        out.append(pad + "{")
        for child in t.children:
            _print_stmt(child, indent + 1, out)
        out.append(pad + "}")
    elif k == "var_decl" or k == "field":
        rtype = t.children[0].value
        if len(t.children) > 1:
            out.append(f"{pad}{rtype} {t.value} = {_print_expr(t.children[1], top=True)};")
        else:
            out.append(f"{pad}{rtype} {t.value};")
    elif k == "expr_stmt":
        out.append(pad + _print_expr(t.children[0], top=True) + ";")
    elif k == "return":
        if t.children:
            out.append(pad + "return " + _print_expr(t.children[0], top=True) + ";")
        else:
            out.append(pad + "return;")
    elif k == "if":
        out.append(pad + "if (" + _print_expr(t.children[0], top=True) + ")")
        _print_stmt(t.children[1], indent, out)
        if len(t.children) == 3:
            out.append(pad + "else")
            _print_stmt(t.children[2], indent, out)
    elif k == "while":
        out.append(pad + "while (" + _print_expr(t.children[0], top=True) + ")")
        _print_stmt(t.children[1], indent, out)
    elif k == "for":
        init, cond, update, body = t.children
        init_s = _print_for_init(init)
        cond_s = "" if cond.kind == "true_lit" else _print_expr(cond, top=True)
        upd_s = "" if update.kind == "empty" else _print_expr(update.children[0], top=True)
        out.append(f"{pad}for ({init_s}; {cond_s}; {upd_s})")
        _print_stmt(body, indent, out)
    elif k == "func":
        rtype = t.children[0].value
        params = ", ".join(f"{p.children[0].value} {p.value}"
                           for p in t.children[1].children)
        out.append(f"{pad}{rtype} {t.value}({params})")
        _print_stmt(t.children[2], indent, out)
    elif k == "class":
        out.append(pad + "class " + t.value + " {")
        for member in t.children:
            _print_stmt(member, indent + 1, out)
        out.append(pad + "}")
    else:
        raise ValueError(f"not a statement node: {k}")


def _print_for_init(init: GenericTree) -> str:
    if init.kind == "empty":
        return ""
    if init.kind == "var_decl":
        if len(init.children) > 1:
            return (f"{init.children[0].value} {init.value} = "
                    f"{_print_expr(init.children[1], top=True)}")
        return f"{init.children[0].value} {init.value}"
    return _print_expr(init.children[0], top=True)


def print_program(t: GenericTree) -> str:
    out: list[str] = []
    for item in t.children:
        _print_stmt(item, 0, out)
    return "\n".join(out) + ("\n" if out else "")


# -- the language object ----------------------------------------------


class MiniJavaLanguage:
    """SubjectLanguage implementation for the bundled mini language."""

    name = "minijava"

    def tokenize(self, text: str) -> list[str]:
        try:
            return [t.text for t in _lex(text)]
        except ParseError:
            # budget counting must not fail on unlexable text
            return text.split()

    def parse(self, text: str) -> GenericTree:
        return _Parser(_lex(text)).parse_program()

    def normalize(self, text: str) -> str:
        try:
            tree = self.parse(text)
        except ParseError:
            return text
        return print_program(tree)

    def is_comment_line(self, line: str) -> bool:
        return line.strip().startswith("//")

    def is_null_line(self, line: str) -> bool:
        try:
            tree = self.parse(line)
        except ParseError:
            return False
        if len(tree.children) != 1:
            return False
        return _is_null_stmt(tree.children[0])


def _is_null_stmt(stmt: GenericTree) -> bool:
    if stmt.kind == "empty":
        return True
    if stmt.kind == "block":
        return all(_is_null_stmt(s) for s in stmt.children)
    if stmt.kind in ("while", "if") and len(stmt.children) == 2:
        return _is_null_stmt(stmt.children[-1])
    if stmt.kind == "for":
        return _is_null_stmt(stmt.children[3])
    return False


# -- interpreter -------------------------------------------------------


class _Return(Exception):
    def __init__(self, value):
        self.value = value


class MiniRuntimeError(RuntimeError):
    pass


class Interpreter:
    """Evaluates programs of the mini language: functions over ints,
    bools, and strings."""

    MAX_STEPS = 200_000

    def __init__(self, program: GenericTree):
        self.functions: dict[str, GenericTree] = {}
        self.globals: dict[str, object] = {}
        self._steps = 0
        self._load(program)

    def _load(self, program: GenericTree):
        for item in program.children:
            if item.kind == "func":
                self.functions[item.value] = item
            elif item.kind == "class":
                for member in item.children:
                    if member.kind == "func":
                        self.functions[member.value] = member
                    else:
                        self._declare(member, self.globals)
            elif item.kind in ("var_decl", "field"):
                self._declare(item, self.globals)

    def _declare(self, decl: GenericTree, env: dict):
        value = self.eval_expr(decl.children[1], env) if len(decl.children) > 1 else 0
        env[decl.value] = value

    def call(self, name: str, args: list):
        func = self.functions.get(name)
        if func is None:
            raise MiniRuntimeError(f"undefined function {name!r}")
        params = func.children[1].children
        if len(params) != len(args):
            raise MiniRuntimeError(f"{name} expects {len(params)} argument(s)")
        env = dict(self.globals)
        for param, arg in zip(params, args):
            env[param.value] = arg
        try:
            self.exec_stmt(func.children[2], env)
        except _Return as ret:
            return ret.value
        return None

    def call_text(self, call_text: str):
        parser = _Parser(_lex(call_text))
        expr = parser.parse_expr()
        if parser.peek() is not None:
            raise MiniRuntimeError(f"trailing input in call {call_text!r}")
        return self.eval_expr(expr, dict(self.globals))

    def _tick(self):
        self._steps += 1
        if self._steps > self.MAX_STEPS:
            raise MiniRuntimeError("step budget exhausted (possible infinite loop)")

    def exec_stmt(self, stmt: GenericTree, env: dict):
        self._tick()
        k = stmt.kind
        if k in ("empty",):
            return
        if k == "block":
            scope = dict(env)
            for child in stmt.children:
                self.exec_stmt(child, scope)
            for key in env:
                if key in scope:
                    env[key] = scope[key]
        elif k in ("var_decl", "field"):
            self._declare(stmt, env)
        elif k == "expr_stmt":
            self.eval_expr(stmt.children[0], env)
        elif k == "return":
            value = self.eval_expr(stmt.children[0], env) if stmt.children else None
            raise _Return(value)
        elif k == "if":
            if self._truthy(self.eval_expr(stmt.children[0], env)):
                self.exec_stmt(stmt.children[1], env)
            elif len(stmt.children) == 3:
                self.exec_stmt(stmt.children[2], env)
        elif k == "while":
            while self._truthy(self.eval_expr(stmt.children[0], env)):
                self._tick()
                self.exec_stmt(stmt.children[1], env)
        elif k == "for":
            init, cond, update, body = stmt.children
            scope = dict(env)
            self.exec_stmt(init, scope)
            while cond.kind == "true_lit" or self._truthy(self.eval_expr(cond, scope)):
                self._tick()
                self.exec_stmt(body, scope)
                if update.kind != "empty":
                    self.eval_expr(update.children[0], scope)
            for key in env:
                if key in scope:
                    env[key] = scope[key]
        else:
            raise MiniRuntimeError(f"cannot execute node {k}")

    @staticmethod
    def _truthy(value) -> bool:
        return bool(value)

    def eval_expr(self, expr: GenericTree, env: dict):
        self._tick()
        k = expr.kind
        if k == "int_lit":
            return int(expr.value)
        if k == "str_lit":
            return json.loads(expr.value.replace("\\'", "'"))
        if k == "true_lit":
            return True
        if k == "false_lit":
            return False
        if k == "name":
            if expr.value not in env:
                raise MiniRuntimeError(f"undefined variable {expr.value!r}")
            return env[expr.value]
        if k == "assign":
            name = expr.children[0].value
            value = self.eval_expr(expr.children[1], env)
            if expr.value == "+=":
                value = env.get(name, 0) + value
            elif expr.value == "-=":
                value = env.get(name, 0) - value
            env[name] = value
            return value
        if k == "binop":
            return self._binop(expr, env)
        if k == "unop":
            value = self.eval_expr(expr.children[0], env)
            return (not value) if expr.value == "!" else -value
        if k == "postfix":
            name = expr.children[0].value
            old = env.get(name, 0)
            env[name] = old + (1 if expr.value == "++" else -1)
            return old
        if k == "call":
            args = [self.eval_expr(a, env) for a in expr.children]
            return self.call(expr.value, args)
        raise MiniRuntimeError(f"cannot evaluate node {k}")

    def _binop(self, expr: GenericTree, env: dict):
        op = expr.value
        left = self.eval_expr(expr.children[0], env)
        if op == "&&":
            return bool(left) and bool(self.eval_expr(expr.children[1], env))
        if op == "||":
            return bool(left) or bool(self.eval_expr(expr.children[1], env))
        right = self.eval_expr(expr.children[1], env)
        if op == "+":
            return left + right
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        if op == "/":
            if right == 0:
                raise MiniRuntimeError("division by zero")
            return int(left / right) if (left < 0) != (right < 0) else left // right
        if op == "%":
            if right == 0:
                raise MiniRuntimeError("modulo by zero")
            return left - right * (int(left / right) if (left < 0) != (right < 0) else left // right)
        if op == "==":
            return left == right
        if op == "!=":
            return left != right
        if op == "<":
            return left < right
        if op == ">":
            return left > right
        if op == "<=":
            return left <= right
        if op == ">=":
            return left >= right
        raise MiniRuntimeError(f"unknown operator {op!r}")


# -- project-level entry points ----------------------------------------


def check_project(root: str | Path) -> int:
    """Parse every *.mj file under root; 0 when all parse."""
    lang = MiniJavaLanguage()
    failures = 0
    for path in sorted(Path(root).rglob("*.mj")):
        try:
            lang.parse(path.read_text())
        except ParseError as exc:
            print(f"{path}:{exc.line}: {exc}", file=sys.stderr)
            failures += 1
    return 0 if failures == 0 else 1


def run_project_tests(root: str | Path) -> int:
    """Execute tests.json against the project's *.mj sources.

    tests.json is a list of {"call": "expr", "expect": value} records.
    """
    root = Path(root)
    lang = MiniJavaLanguage()
    sources = []
    for path in sorted(root.rglob("*.mj")):
        try:
            sources.append(lang.parse(path.read_text()))
        except ParseError as exc:
            print(f"{path}:{exc.line}: {exc}", file=sys.stderr)
            return 1
    program = GenericTree(
        "program", None,
        tuple(item for tree in sources for item in tree.children))
    tests_path = root / "tests.json"
    if not tests_path.exists():
        print(f"missing {tests_path}", file=sys.stderr)
        return 1
    cases = json.loads(tests_path.read_text())
    failures = 0
    for case in cases:
        interp = Interpreter(program)
        try:
            got = interp.call_text(case["call"])
        except (MiniRuntimeError, ParseError) as exc:
            print(f"FAIL {case['call']}: {exc}", file=sys.stderr)
            failures += 1
            continue
        if got != case["expect"]:
            print(f"FAIL {case['call']}: expected {case['expect']!r}, got {got!r}",
                  file=sys.stderr)
            failures += 1
    return 0 if failures == 0 else 1


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 2 or argv[0] not in ("check", "run-tests"):
        print("usage: python -m blockrepair.minilang {check|run-tests} DIR",
              file=sys.stderr)
        return 2
    if argv[0] == "check":
        return check_project(argv[1])
    return run_project_tests(argv[1])


if __name__ == "__main__":
    sys.exit(main())
