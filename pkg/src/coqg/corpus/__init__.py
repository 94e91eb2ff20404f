from .types import (
    CorefAnnotation,
    ProcessedExample,
    RawConversation,
    SpanMatch,
    Turn,
)
from .tokenizer import tokenize, tokenize_with_offsets, split_sentences
from .coqa import CorpusError, ParseError, ValidationError, load_coqa, filter_turns, normalize_answer
from .spans import locate_answer_span, token_f1
from .examples import assign_chunks, build_examples
from .coref import (
    PRONOUN_LEXICON,
    CorefFileProvider,
    HeuristicCorefProvider,
    annotate_coreference,
)
from .vocab import Vocabulary, build_vocabulary
from .splits import split_dataset
from .io import (
    read_examples_jsonl,
    write_examples_jsonl,
    write_atomic_text,
)

__all__ = [
    "CorefAnnotation",
    "ProcessedExample",
    "RawConversation",
    "SpanMatch",
    "Turn",
    "tokenize",
    "tokenize_with_offsets",
    "split_sentences",
    "CorpusError",
    "ParseError",
    "ValidationError",
    "load_coqa",
    "filter_turns",
    "normalize_answer",
    "locate_answer_span",
    "token_f1",
    "assign_chunks",
    "build_examples",
    "PRONOUN_LEXICON",
    "CorefFileProvider",
    "HeuristicCorefProvider",
    "annotate_coreference",
    "Vocabulary",
    "build_vocabulary",
    "split_dataset",
    "read_examples_jsonl",
    "write_examples_jsonl",
    "write_atomic_text",
]
