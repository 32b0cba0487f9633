from .batching import Batch, CorpusTensors, SplitArrays, build_corpus_tensors, build_token_vocab
from .hyper import HyperParams
from .network import LossBreakdown, Network, named_params, sinusoid_table
from .train import TrainConfig, TrainResult, TrainingDiverged, evaluate_loss, rating_mae, train_model
from .vocab import BOS_ID, EOS_ID, PAD_ID, UNK_ID, TokenVocab

__all__ = [
    "BOS_ID",
    "Batch",
    "CorpusTensors",
    "EOS_ID",
    "HyperParams",
    "LossBreakdown",
    "Network",
    "PAD_ID",
    "SplitArrays",
    "TokenVocab",
    "TrainConfig",
    "TrainResult",
    "TrainingDiverged",
    "UNK_ID",
    "build_corpus_tensors",
    "build_token_vocab",
    "evaluate_loss",
    "named_params",
    "rating_mae",
    "sinusoid_table",
    "train_model",
]
