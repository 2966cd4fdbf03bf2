from vpdebug.model.distribution import InvalidDistributionError, TokenDistribution, validate_probs
from vpdebug.model.ngram import NGramModel
from vpdebug.model.remote import (
    MalformedResponseError,
    RemoteError,
    RemoteModel,
    RemoteTimeout,
    TransportError,
    remote_next_distribution,
)
from vpdebug.model.vocab import (
    BUG_CLOSE,
    BUG_OPEN,
    EOS,
    MASKED,
    RESERVED,
    T_CORRECT,
    T_INCORRECT,
    Vocabulary,
    pieces,
)

__all__ = [
    "BUG_CLOSE",
    "BUG_OPEN",
    "EOS",
    "InvalidDistributionError",
    "MASKED",
    "MalformedResponseError",
    "NGramModel",
    "RESERVED",
    "RemoteError",
    "RemoteModel",
    "RemoteTimeout",
    "T_CORRECT",
    "T_INCORRECT",
    "TokenDistribution",
    "TransportError",
    "Vocabulary",
    "pieces",
    "remote_next_distribution",
    "validate_probs",
]
