"""HTTP client for external model services (JSON over POST, protocol v1)."""

from __future__ import annotations

import json
from typing import Any, Optional, Sequence

import requests

from vpdebug.model.distribution import InvalidDistributionError, TokenDistribution, validate_probs
from vpdebug.model.vocab import Vocabulary

PROTOCOL_VERSION = 1


class RemoteError(Exception):
    """Base class. ``retryable`` tells callers whether a retry may help."""

    retryable = False


class TransportError(RemoteError):
    retryable = True


class RemoteTimeout(RemoteError):
    retryable = True


class MalformedResponseError(RemoteError):
    retryable = False


def request_json(
    method: str,
    url: str,
    payload: Optional[dict] = None,
    timeout: float = 10.0,
    retries: int = 0,
    session: Optional[requests.Session] = None,
) -> Any:
    """Send one JSON request, retrying transport failures and timeouts."""
    http = session or requests
    last: Optional[RemoteError] = None
    for _ in range(retries + 1):
        try:
            resp = http.request(method, url, json=payload, timeout=timeout)
        except requests.Timeout as e:
            last = RemoteTimeout(f"{method} {url} timed out after {timeout}s: {e}")
            continue
        except requests.RequestException as e:
            last = TransportError(f"{method} {url} failed: {e}")
            continue
        if resp.status_code >= 500:
            last = TransportError(f"{method} {url} returned HTTP {resp.status_code}")
            continue
        if resp.status_code != 200:
            raise MalformedResponseError(f"{method} {url} returned HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()
        except (ValueError, json.JSONDecodeError) as e:
            raise MalformedResponseError(f"{method} {url} returned invalid JSON: {e}") from None
    assert last is not None
    raise last


def expect_field(body: Any, name: str, types) -> Any:
    if not isinstance(body, dict) or name not in body:
        raise MalformedResponseError(f"response lacks field {name!r}")
    value = body[name]
    allowed = types if isinstance(types, tuple) else (types,)
    # bool is an int subclass; only accept it when asked for explicitly
    if not isinstance(value, allowed) or (isinstance(value, bool) and bool not in allowed):
        raise MalformedResponseError(f"field {name!r} has wrong type {type(value).__name__}")
    return value


class RemoteModel:
    """Next-token distributions served by ``POST /v1/next``."""

    def __init__(self, endpoint: str, timeout: float = 10.0, retries: int = 0):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self.retries = retries
        self.session = requests.Session()
        self._vocab: Optional[Vocabulary] = None

    def vocabulary(self) -> Vocabulary:
        if self._vocab is None:
            body = request_json("GET", f"{self.endpoint}/v1/vocab", None, self.timeout, self.retries, self.session)
            tokens = expect_field(body, "tokens", list)
            try:
                self._vocab = Vocabulary(tokens)
            except (ValueError, TypeError) as e:
                raise MalformedResponseError(f"bad vocabulary: {e}") from None
        return self._vocab

    @property
    def vocab_size(self) -> Optional[int]:
        return len(self._vocab) if self._vocab is not None else None

    def next_distribution(self, context: Sequence[int]) -> TokenDistribution:
        body = request_json(
            "POST", f"{self.endpoint}/v1/next", {"context": [int(i) for i in context]},
            self.timeout, self.retries, self.session,
        )
        probs = expect_field(body, "probs", list)
        if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in probs):
            raise MalformedResponseError("probs must be numbers")
        try:
            return TokenDistribution(validate_probs(probs, self.vocab_size))
        except InvalidDistributionError as e:
            raise MalformedResponseError(str(e)) from None


def remote_next_distribution(endpoint: str, context: Sequence[int], timeout: float = 10.0) -> TokenDistribution:
    return RemoteModel(endpoint, timeout).next_distribution(context)
