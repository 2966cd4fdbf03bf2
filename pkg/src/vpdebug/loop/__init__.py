from vpdebug.loop.backends import (
    ConstantCritic,
    OracleCritic,
    OracleRefiner,
    RemoteCritic,
    RemoteRefiner,
    identity_refiner,
    oracle_backends,
    remote_critic,
    remote_refiner,
)
from vpdebug.loop.debug import (
    ACCEPTED,
    MAX_STEPS,
    CriticVerdict,
    DebugEntry,
    DebugSessionAborted,
    DebugSessionConfig,
    DebugTranscript,
    default_loc,
    run_debug_loop,
)
from vpdebug.loop.loccodec import LocCodecError, decode_loc, encode_loc

__all__ = [
    "ACCEPTED",
    "MAX_STEPS",
    "ConstantCritic",
    "CriticVerdict",
    "DebugEntry",
    "DebugSessionAborted",
    "DebugSessionConfig",
    "DebugTranscript",
    "LocCodecError",
    "OracleCritic",
    "OracleRefiner",
    "RemoteCritic",
    "RemoteRefiner",
    "decode_loc",
    "default_loc",
    "encode_loc",
    "identity_refiner",
    "oracle_backends",
    "remote_critic",
    "remote_refiner",
    "run_debug_loop",
]
