"""Conversational question generation toolkit.

Subpackages:
    corpus    -- CoQA-format ingestion, span location, example building,
                 coreference annotation, vocabulary and splits
    model     -- the multi-source encoder/decoder network
    training  -- loss functions and the training loop
    metrics   -- BLEU/ROUGE, pronoun P/R/F, attention-mass diagnostics

Modules:
    decoding  -- beam search with repetition blocking
    analysis  -- turn-chunk vs passage-chunk flow statistics
    cli       -- command-line entry points
"""

__version__ = "0.1.0"
