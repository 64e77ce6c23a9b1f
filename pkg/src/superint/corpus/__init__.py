"""Model corpus: grammar, bundled data files and the commutation verifier."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

from .expressions import eval_phase, parse_phase
from .model import (ARBITRARY, IntegralClaim, Model, format_model, parse_model, parse_models,
                    same_model, specialization_residuals)
from .verify import VerifyOutcome, independence_check, summary_json, verify

_SUFFIX = ".model"


def corpus_names() -> list:
    """Names of the bundled models, in a stable order (numeric, then letters)."""
    names = []
    for entry in resources.files(__package__).joinpath("data").iterdir():
        if entry.name.endswith(_SUFFIX):
            names.append(entry.name[: -len(_SUFFIX)])
    return sorted(names, key=model_sort_key)


def model_sort_key(name: str):
    digits = "".join(ch for ch in name if ch.isdigit())
    rest = name[len(digits):] if name.startswith(digits) else name
    return (0 if digits else 1, int(digits) if digits else 0, rest)


def corpus_text(name: str) -> str:
    return resources.files(__package__).joinpath("data", name + _SUFFIX).read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def load_model(name: str) -> Model:
    """Parse a bundled model; parents of special cases resolve through the corpus."""
    return parse_model(corpus_text(name), resolver=load_model)


def load_corpus() -> list:
    return [load_model(n) for n in corpus_names()]


def directory_resolver(path):
    """Resolver reading ``<name>.model`` files from ``path``, falling back to the corpus."""
    import os

    cache = {}

    def resolve(name):
        if name not in cache:
            f = os.path.join(path, name + _SUFFIX)
            if os.path.exists(f):
                with open(f, encoding="utf-8") as fh:
                    cache[name] = parse_model(fh.read(), resolver=resolve)
            else:
                cache[name] = load_model(name)
        return cache[name]

    return resolve


__all__ = [
    "ARBITRARY", "IntegralClaim", "Model", "VerifyOutcome", "corpus_names", "corpus_text",
    "directory_resolver", "eval_phase", "format_model", "independence_check", "load_corpus",
    "load_model", "parse_model", "parse_models", "parse_phase", "same_model",
    "specialization_residuals", "summary_json", "verify",
]
