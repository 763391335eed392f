"""Parser for the polynomial expression grammar used by presentation files.

    poly   := term ('+' term)*
    term   := [coeff '*'] factor ('*' factor)*  |  coeff
    factor := name ['^' int]  |  'cup1' '(' poly ',' poly ')'
    coeff  := integer

'*' is the (cup) product; cup1(a, b) is the degree -1 operation and is only
legal when the caller enables it.  Parsing is total: any malformed input
raises ParseError carrying the character position.
"""

from __future__ import annotations

from dataclasses import dataclass


class ParseError(Exception):
    def __init__(self, text: str, pos: int, message: str):
        super().__init__(message)
        self.text = text
        self.pos = pos
        self.message = message

    def __str__(self) -> str:
        return f"column {self.pos + 1}: {self.message} (in {self.text!r})"


@dataclass(frozen=True)
class GenFactor:
    name: str
    power: int
    pos: int


@dataclass(frozen=True)
class Cup1Factor:
    left: list
    right: list
    pos: int


@dataclass(frozen=True)
class Term:
    coeff: int
    factors: tuple


class _Parser:
    def __init__(self, text: str, allow_cup1: bool):
        self.text = text
        self.pos = 0
        self.allow_cup1 = allow_cup1

    def error(self, message: str, pos: int | None = None):
        raise ParseError(self.text, self.pos if pos is None else pos, message)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def integer(self) -> int:
        self.skip_ws()
        start = self.pos
        if self.pos < len(self.text) and self.text[self.pos] == "-":
            self.pos += 1
        if self.pos >= len(self.text) or not self.text[self.pos].isdigit():
            self.error("expected an integer", start)
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        return int(self.text[start:self.pos])

    def name(self) -> tuple[str, int]:
        self.skip_ws()
        start = self.pos
        if self.pos >= len(self.text) or not (
            self.text[self.pos].isalpha() or self.text[self.pos] == "_"
        ):
            self.error("expected a name")
        while self.pos < len(self.text) and (
            self.text[self.pos].isalnum() or self.text[self.pos] in "_'"
        ):
            self.pos += 1
        return self.text[start:self.pos], start

    def factor(self):
        nm, start = self.name()
        if nm == "cup1":
            if not self.allow_cup1:
                self.error("cup1(...) is only allowed in cup1 blocks", start)
            self.expect("(")
            left = self.poly()
            self.expect(",")
            right = self.poly()
            self.expect(")")
            return Cup1Factor(left, right, start)
        power = 1
        if self.peek() == "^":
            self.pos += 1
            power = self.integer()
            if power < 0:
                self.error("negative exponent", start)
        return GenFactor(nm, power, start)

    def term(self) -> Term:
        self.skip_ws()
        coeff = 1
        ch = self.peek()
        if ch.isdigit() or ch == "-":
            coeff = self.integer()
            if self.peek() != "*":
                return Term(coeff, ())
            self.pos += 1
        factors = [self.factor()]
        while self.peek() == "*":
            self.pos += 1
            factors.append(self.factor())
        return Term(coeff, tuple(factors))

    def poly(self) -> list[Term]:
        terms = [self.term()]
        while self.peek() in ("+", "-"):
            negate = self.peek() == "-"
            self.pos += 1
            t = self.term()
            terms.append(Term(-t.coeff, t.factors) if negate else t)
        return terms


def parse_poly(text: str, allow_cup1: bool = False) -> list[Term]:
    parser = _Parser(text, allow_cup1)
    terms = parser.poly()
    parser.skip_ws()
    if parser.pos != len(text):
        parser.error("unexpected trailing input")
    return terms


def poly_to_exponents(text: str, gen_index: dict[str, int], p: int) -> dict[tuple, int]:
    """Parse into {exponent vector: coefficient mod p} over declared generators.

    cup1 factors are rejected; unknown names raise ParseError at their position.
    """
    ngens = len(gen_index)
    out: dict[tuple, int] = {}
    for term in parse_poly(text, allow_cup1=False):
        exps = [0] * ngens
        for f in term.factors:
            if isinstance(f, Cup1Factor):
                raise ParseError(text, f.pos, "cup1(...) not allowed here")
            if f.name not in gen_index:
                raise ParseError(text, f.pos, f"unknown generator {f.name!r}")
            exps[gen_index[f.name]] += f.power
        key = tuple(exps)
        out[key] = (out.get(key, 0) + term.coeff) % p
    return {k: c for k, c in out.items() if c}
