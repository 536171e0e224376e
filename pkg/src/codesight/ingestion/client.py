"""GitHub REST transport with two interchangeable backends.

HttpBackend performs real authenticated calls; FixtureBackend replays a
recorded directory of responses keyed by canonical request path+query, which
is what every test and offline run uses. The client layer on top adds
pagination, bounded retry with exponential backoff, and rate-limit handling
based on the X-RateLimit headers.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterator, Mapping

import requests

from .store import write_json_atomic

GITHUB_API_BASE = "https://api.github.com"
PAGE_SIZE = 100


class IngestionError(Exception):
    """Base class for fetch failures."""


class CredentialError(IngestionError):
    """401/403 that is not a rate-limit response."""


class RateLimitError(IngestionError):
    """Rate limit exhausted; carries the advertised reset time (epoch seconds)."""

    def __init__(self, message: str, reset_at: int | None) -> None:
        super().__init__(message)
        self.reset_at = reset_at


class NotFoundError(IngestionError):
    """404 for a resource that should exist (unknown PR, unknown commit, ...)."""


class TransportError(IngestionError):
    """Network failure or server error that survived all retry attempts."""


class PayloadError(IngestionError):
    """Response body is not the JSON shape the endpoint documents."""


@dataclass(frozen=True)
class BackendResponse:
    status: int
    headers: Mapping[str, str]
    body: bytes


def canonical_key(path: str, params: Mapping[str, Any] | None = None) -> str:
    """Stable request key shared by the recorder and the replayer."""
    if not params:
        return path
    query = "&".join(f"{k}={params[k]}" for k in sorted(params))
    return f"{path}?{query}"


class HttpBackend:
    def __init__(
        self,
        token: str | None = None,
        base_url: str = GITHUB_API_BASE,
        session: requests.Session | None = None,
        timeout: float = 30.0,
    ) -> None:
        self._base_url = base_url.rstrip("/")
        self._session = session or requests.Session()
        self._timeout = timeout
        self._headers = {"Accept": "application/vnd.github+json"}
        if token:
            self._headers["Authorization"] = f"Bearer {token}"

    def request(self, path: str, params: Mapping[str, Any] | None = None) -> BackendResponse:
        try:
            resp = self._session.get(
                self._base_url + path,
                params=dict(params or {}),
                headers=self._headers,
                timeout=self._timeout,
            )
        except requests.RequestException as exc:
            raise TransportError(f"GET {path}: {exc}") from exc
        return BackendResponse(resp.status_code, dict(resp.headers), resp.content)


class FixtureBackend:
    """Replays responses from a fixture directory.

    Layout: index.json maps canonical request keys to {"status", "body_file"}
    entries; each body lives in its own JSON file beside the index. Read-only
    after construction, so safe to share across fetch threads.
    """

    def __init__(self, root: Path | str) -> None:
        self._root = Path(root)
        index_path = self._root / "index.json"
        if not index_path.is_file():
            raise FileNotFoundError(f"fixture index not found: {index_path}")
        self._index: dict[str, dict[str, Any]] = json.loads(index_path.read_text(encoding="utf-8"))

    def request(self, path: str, params: Mapping[str, Any] | None = None) -> BackendResponse:
        key = canonical_key(path, params)
        entry = self._index.get(key)
        if entry is None:
            raise TransportError(f"no fixture recorded for {key}")
        body = (self._root / entry["body_file"]).read_bytes()
        return BackendResponse(int(entry.get("status", 200)), dict(entry.get("headers", {})), body)


class FixtureWriter:
    """Builds a replayable fixture directory; used by tests and recording tools."""

    def __init__(self, root: Path | str) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._index: dict[str, dict[str, Any]] = {}
        self._counter = 0

    def add(
        self,
        path: str,
        params: Mapping[str, Any] | None,
        body: object,
        status: int = 200,
        headers: Mapping[str, str] | None = None,
    ) -> None:
        key = canonical_key(path, params)
        self._counter += 1
        body_file = f"resp_{self._counter:04d}.json"
        (self.root / body_file).write_text(json.dumps(body, indent=2), encoding="utf-8")
        entry: dict[str, Any] = {"status": status, "body_file": body_file}
        if headers:
            entry["headers"] = dict(headers)
        self._index[key] = entry
        write_json_atomic(self.root / "index.json", self._index)


def _rate_limit_exhausted(resp: BackendResponse) -> bool:
    remaining = resp.headers.get("X-RateLimit-Remaining")
    return remaining is not None and remaining.strip() == "0"


def _reset_time(resp: BackendResponse) -> int | None:
    raw = resp.headers.get("X-RateLimit-Reset")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        return None


class GitHubClient:
    """Backend-agnostic JSON client: retries, rate limits, pagination."""

    def __init__(
        self,
        backend: HttpBackend | FixtureBackend,
        max_attempts: int = 3,
        backoff_base: float = 0.5,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self._backend = backend
        self._max_attempts = max_attempts
        self._backoff_base = backoff_base
        self._sleep = sleep

    def get_json(self, path: str, params: Mapping[str, Any] | None = None) -> Any:
        last_error: Exception | None = None
        for attempt in range(self._max_attempts):
            if attempt:
                self._sleep(self._backoff_base * (2 ** (attempt - 1)))
            try:
                resp = self._backend.request(path, params)
            except TransportError as exc:
                last_error = exc
                continue
            if resp.status in (403, 429) and _rate_limit_exhausted(resp):
                raise RateLimitError(f"rate limit exhausted on {path}", _reset_time(resp))
            if resp.status in (401, 403):
                raise CredentialError(f"GET {path}: HTTP {resp.status} (check token/scopes)")
            if resp.status == 404:
                raise NotFoundError(f"GET {path}: HTTP 404")
            if resp.status >= 500:
                last_error = TransportError(f"GET {path}: HTTP {resp.status}")
                continue
            if resp.status != 200:
                raise TransportError(f"GET {path}: unexpected HTTP {resp.status}")
            try:
                return json.loads(resp.body.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise PayloadError(f"GET {path}: response body is not JSON: {exc}") from exc
        raise TransportError(f"GET {path}: all {self._max_attempts} attempts failed: {last_error}")

    def paginate(
        self,
        path: str,
        params: Mapping[str, Any] | None = None,
        items_key: str | None = None,
    ) -> Iterator[Any]:
        """Yield items across pages until an empty page is returned.

        items_key handles envelope endpoints (e.g. workflow runs return
        {"total_count": n, "workflow_runs": [...]}); list endpoints pass None.
        """
        page = 1
        while True:
            merged = dict(params or {})
            merged["per_page"] = PAGE_SIZE
            merged["page"] = page
            payload = self.get_json(path, merged)
            if items_key is not None:
                if not isinstance(payload, Mapping) or items_key not in payload:
                    raise PayloadError(f"GET {path}: expected object with {items_key!r}")
                items = payload[items_key]
            else:
                items = payload
            if not isinstance(items, list):
                raise PayloadError(f"GET {path}: expected a JSON array page")
            if not items:
                return
            yield from items
            page += 1
