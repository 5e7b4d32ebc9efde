"""Pipeline language: ``source | stage | stage ...`` over the operator catalog."""
from .evaluator import EvalError, Evaluator, evaluate
from .lexer import LexError, Token, tokenize
from .parser import (
    STAGES,
    CommitsSource,
    InlineSource,
    IssuesSource,
    Named,
    ParseError,
    Pipeline,
    SortSpec,
    Stage,
    parse,
    pretty_print,
)


def run_text(text: str, root="."):
    return evaluate(parse(text), root)
