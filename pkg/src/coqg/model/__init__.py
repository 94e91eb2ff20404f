from .config import ModelConfig
from .indexing import IndexedExample, index_example
from .network import EncoderOutputs, QuestionGenerator, StepAttention
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint

__all__ = [
    "ModelConfig",
    "IndexedExample",
    "index_example",
    "EncoderOutputs",
    "QuestionGenerator",
    "StepAttention",
    "CheckpointError",
    "load_checkpoint",
    "save_checkpoint",
]
