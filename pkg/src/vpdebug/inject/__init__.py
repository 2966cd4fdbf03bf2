from vpdebug.inject.categorize import CATEGORIES, categorize_error
from vpdebug.inject.pipeline import (
    DEFAULT_ATTEMPTS,
    InjectionReport,
    error_rate,
    inject_error,
    run_injection,
    train_infill_model,
)
from vpdebug.inject.prompt import build_prompt, load_template, prompt_ids
from vpdebug.inject.records import (
    DatasetRecord,
    PoolEntry,
    RecordInvariantError,
    check_record,
    check_records_jsonl,
    dumps_jsonl,
    loads_jsonl,
    serialize_training_records,
)
from vpdebug.inject.sampling import (
    DegenerateTailError,
    MaskBestConfig,
    greedy_sample,
    mask_best_decode,
    mask_best_sample,
    should_mask,
    tail_distribution,
)

__all__ = [
    "CATEGORIES",
    "DEFAULT_ATTEMPTS",
    "DatasetRecord",
    "DegenerateTailError",
    "InjectionReport",
    "MaskBestConfig",
    "PoolEntry",
    "RecordInvariantError",
    "build_prompt",
    "categorize_error",
    "check_record",
    "check_records_jsonl",
    "dumps_jsonl",
    "error_rate",
    "greedy_sample",
    "inject_error",
    "load_template",
    "loads_jsonl",
    "mask_best_decode",
    "mask_best_sample",
    "prompt_ids",
    "run_injection",
    "serialize_training_records",
    "should_mask",
    "tail_distribution",
    "train_infill_model",
]
