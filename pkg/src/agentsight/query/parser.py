"""Recursive-descent parser for the chain-query DSL.

Grammar (EBNF, frozen per minor version; see docs/query-dsl.md):

    chain      = [ source "|" ] step { "|" step } ;
    source     = "from_node" "(" STRING ")" ;
    step       = selector | filter | search | window | traverse | expand | topk ;
    selector   = "users" | "posts" | "edges" ;            (* first step only *)
    filter     = "filter" "(" IDENT CMP value ")" ;
    search     = "text_search" "(" STRING { "," STRING } ")" ;
    window     = "time_window" "(" DATETIME "," DATETIME ")" ;
    traverse   = "traverse" "(" IDENT [ "," direction ] ")" ;
    expand     = "expand" "(" selector ")" ;
    topk       = "top_k" "(" INT "," IDENT [ "," order ] ")" ;
    direction  = "in" | "out" | "both" ;
    order      = "asc" | "desc" ;
    CMP        = ">" | ">=" | "<" | "<=" | "=" | "!=" ;
    value      = INT | FLOAT | STRING | "true" | "false" ;
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..datastore import EdgeKind, Modality, parse_utc
from ..errors import QuerySyntaxError, QueryValidationError
from .model import Op, QueryChain, QueryStep, SourceAll, SourceNode

_TOKEN_SPEC = [
    ("WS", r"[ \t]+"),
    ("NEWLINE", r"\n"),
    ("DATETIME", r"\d{4}-\d{2}-\d{2}(T\d{2}:\d{2}(:\d{2})?(Z|[+-]\d{2}:\d{2})?)?"),
    ("NUMBER", r"-?\d+(\.\d+)?"),
    ("STRING", r'"(\\.|[^"\\])*"'),
    ("CMP", r">=|<=|!=|>|<|="),
    ("PIPE", r"\|"),
    ("LPAREN", r"\("),
    ("RPAREN", r"\)"),
    ("COMMA", r","),
    ("WORD", r"[A-Za-z_][A-Za-z0-9_]*"),
]
_MASTER = re.compile("|".join(f"(?P<{name}>{pat})" for name, pat in _TOKEN_SPEC))

_SELECTORS = {"users": Modality.T, "posts": Modality.X, "edges": Modality.N}


@dataclass(frozen=True)
class _Token:
    type: str
    text: str
    line: int
    col: int


def _lex(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(text):
        m = _MASTER.match(text, pos)
        if m is None:
            raise QuerySyntaxError(f"unexpected character {text[pos]!r}",
                                   line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "NEWLINE":
            line += 1
            line_start = m.end()
        elif kind != "WS":
            tokens.append(_Token(kind, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    tokens.append(_Token("EOF", "", line, len(text) - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def cur(self) -> _Token:
        return self.tokens[self.i]

    def _fail(self, expected: tuple[str, ...]) -> QuerySyntaxError:
        tok = self.cur
        what = "end of input" if tok.type == "EOF" else repr(tok.text)
        return QuerySyntaxError(f"unexpected {what}", tok.line, tok.col, expected)

    def expect(self, type_: str, *expected_desc: str) -> _Token:
        if self.cur.type != type_:
            raise self._fail(expected_desc or (type_.lower(),))
        tok = self.cur
        self.i += 1
        return tok

    def accept(self, type_: str) -> _Token | None:
        if self.cur.type == type_:
            tok = self.cur
            self.i += 1
            return tok
        return None

    def parse_chain(self) -> QueryChain:
        source = SourceAll()
        steps: list[QueryStep] = []
        first = self._peek_word()
        if first == "from_node":
            self.i += 1
            self.expect("LPAREN", "(")
            node = self.expect("STRING", "node id string")
            self.expect("RPAREN", ")")
            self.expect("PIPE", "|")
            source = SourceNode(_unquote(node.text))
        steps.append(self.parse_step(position=len(steps)))
        while self.accept("PIPE"):
            steps.append(self.parse_step(position=len(steps)))
        self.expect("EOF", "| or end of input")
        return QueryChain(steps=tuple(steps), source=source)

    def _peek_word(self) -> str | None:
        return self.cur.text if self.cur.type == "WORD" else None

    def parse_step(self, position: int) -> QueryStep:
        word = self._peek_word()
        if word in _SELECTORS:
            self.i += 1
            return QueryStep(Op.EXPAND_MODALITY,
                             {"target": _SELECTORS[word], "scope": "universe"})
        handlers = {
            "filter": self._parse_filter,
            "text_search": self._parse_search,
            "time_window": self._parse_window,
            "traverse": self._parse_traverse,
            "expand": self._parse_expand,
            "top_k": self._parse_topk,
        }
        if word not in handlers:
            raise self._fail(tuple(sorted(handlers)) + tuple(sorted(_SELECTORS)))
        self.i += 1
        self.expect("LPAREN", "(")
        step = handlers[word]()
        self.expect("RPAREN", ")")
        return step

    def _parse_filter(self) -> QueryStep:
        attr = self.expect("WORD", "attribute name").text
        cmp_ = self.expect("CMP", ">", ">=", "<", "<=", "=", "!=").text
        value = self._parse_value()
        return self._wrap(Op.FILTER_ATTR, {"attr": attr, "cmp": cmp_, "value": value})

    def _parse_value(self):
        tok = self.cur
        if tok.type == "NUMBER":
            self.i += 1
            return float(tok.text) if "." in tok.text else int(tok.text)
        if tok.type == "STRING":
            self.i += 1
            return _unquote(tok.text)
        if tok.type == "WORD" and tok.text in ("true", "false"):
            self.i += 1
            return tok.text == "true"
        raise self._fail(("number", "string", "true", "false"))

    def _parse_search(self) -> QueryStep:
        terms = [_unquote(self.expect("STRING", "search term string").text)]
        while self.accept("COMMA"):
            terms.append(_unquote(self.expect("STRING", "search term string").text))
        return self._wrap(Op.TEXT_SEARCH, {"terms": tuple(terms)})

    def _parse_window(self) -> QueryStep:
        start = self._parse_datetime()
        self.expect("COMMA", ",")
        end = self._parse_datetime()
        return self._wrap(Op.TIME_WINDOW, {"start": start, "end": end})

    def _parse_datetime(self) -> float:
        tok = self.expect("DATETIME", "ISO-8601 date or datetime")
        return parse_utc(tok.text)

    def _parse_traverse(self) -> QueryStep:
        kind_tok = self.expect("WORD", *(k.value for k in EdgeKind))
        try:
            kind = EdgeKind(kind_tok.text)
        except ValueError:
            raise QuerySyntaxError(f"unknown edge kind {kind_tok.text!r}",
                                   kind_tok.line, kind_tok.col,
                                   tuple(k.value for k in EdgeKind)) from None
        direction = "out"
        if self.accept("COMMA"):
            dir_tok = self.expect("WORD", "in", "out", "both")
            if dir_tok.text not in ("in", "out", "both"):
                raise QuerySyntaxError(f"bad direction {dir_tok.text!r}",
                                       dir_tok.line, dir_tok.col, ("in", "out", "both"))
            direction = dir_tok.text
        return self._wrap(Op.TRAVERSE_EDGE, {"kind": kind, "direction": direction})

    def _parse_expand(self) -> QueryStep:
        tok = self.expect("WORD", "users", "posts", "edges")
        if tok.text not in _SELECTORS:
            raise QuerySyntaxError(f"bad modality {tok.text!r}", tok.line, tok.col,
                                   tuple(sorted(_SELECTORS)))
        return self._wrap(Op.EXPAND_MODALITY, {"target": _SELECTORS[tok.text], "scope": "linked"})

    def _parse_topk(self) -> QueryStep:
        k_tok = self.expect("NUMBER", "positive integer k")
        try:
            k = int(k_tok.text)
        except ValueError:
            raise QuerySyntaxError(f"k must be an integer, got {k_tok.text}",
                                   k_tok.line, k_tok.col, ("integer",)) from None
        self.expect("COMMA", ",")
        key = self.expect("WORD", "order key").text
        descending = True
        if self.accept("COMMA"):
            order = self.expect("WORD", "asc", "desc")
            if order.text not in ("asc", "desc"):
                raise QuerySyntaxError(f"bad order {order.text!r}", order.line, order.col,
                                       ("asc", "desc"))
            descending = order.text == "desc"
        return self._wrap(Op.SAMPLE_TOP_K, {"k": k, "order_key": key, "descending": descending})

    def _wrap(self, op: Op, params: dict) -> QueryStep:
        try:
            return QueryStep(op, params)
        except QueryValidationError as exc:
            tok = self.cur
            raise QuerySyntaxError(str(exc.args[0]), tok.line, tok.col) from None


def _unquote(raw: str) -> str:
    return re.sub(r"\\(.)", r"\1", raw[1:-1])


def parse_query(dsl: str) -> QueryChain:
    """Parse DSL text. Raises :class:`QuerySyntaxError` with line/column and
    the expected-token set, or :class:`QueryValidationError` with the step
    index for statically invalid chains."""
    return _Parser(_lex(dsl)).parse_chain()
