"""Run prompt bundles against an OpenAI-compatible chat-completions endpoint.

Credentials come only from the environment: ``GSNFORGE_API_KEY`` and,
optionally, ``GSNFORGE_API_BASE``.  Offline backends (:class:`MockBackend`,
:class:`EchoBackend`) never touch the network.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import httpx

from .core import GsnError
from .prompts import PromptBundle

log = logging.getLogger(__name__)

API_KEY_ENV = "GSNFORGE_API_KEY"
API_BASE_ENV = "GSNFORGE_API_BASE"
DEFAULT_API_BASE = "https://api.openai.com/v1"


class GatewayError(GsnError):
    pass


class AuthMissing(GatewayError):
    pass


class EndpointUnreachable(GatewayError):
    pass


class RetryableError(GatewayError):
    """Transport failure, 429 or 5xx: worth another attempt."""


@dataclass(frozen=True)
class ModelSpec:
    model_name: str
    temperature: float = 1.0
    max_tokens: int = 4096
    endpoint: str | None = None
    timeout: float = 120.0

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")

    @property
    def slug(self) -> str:
        return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in self.model_name)

    @classmethod
    def from_dict(cls, data) -> "ModelSpec":
        if isinstance(data, str):
            return cls(data)
        return cls(**data)


@dataclass(frozen=True)
class GenerationRecord:
    run_index: int
    raw_text: str
    request_digest: str
    model: str = ""
    system_name: str = ""
    experiment: str = ""
    example_system: str | None = None
    started: float = 0.0
    finished: float = 0.0
    usage: dict | None = None
    error: str | None = None
    attempts: int = 1

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "GenerationRecord":
        return cls(**data)


def request_digest(bundle: PromptBundle, spec: ModelSpec) -> str:
    payload = {
        "system": bundle.system,
        "user": bundle.user,
        "spec": asdict(spec),
    }
    blob = json.dumps(payload, sort_keys=True, ensure_ascii=False).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


# -- backends ---------------------------------------------------------------------


class HttpBackend:
    """Chat-completions over HTTPS with system and user messages."""

    offline = False

    def __init__(self, api_base: str | None = None, transport: httpx.BaseTransport | None = None):
        key = os.environ.get(API_KEY_ENV)
        if not key:
            raise AuthMissing(f"set {API_KEY_ENV} to call a live endpoint")
        self._key = key
        self.api_base = (api_base or os.environ.get(API_BASE_ENV) or DEFAULT_API_BASE).rstrip("/")
        self._transport = transport

    def complete(self, bundle: PromptBundle, spec: ModelSpec) -> tuple[str, dict | None]:
        url = (spec.endpoint or self.api_base).rstrip("/") + "/chat/completions"
        body = {
            "model": spec.model_name,
            "temperature": spec.temperature,
            "max_tokens": spec.max_tokens,
            "messages": [
                {"role": "system", "content": bundle.system},
                {"role": "user", "content": bundle.user},
            ],
        }
        headers = {"Authorization": f"Bearer {self._key}"}
        try:
            with httpx.Client(timeout=spec.timeout, transport=self._transport) as client:
                response = client.post(url, json=body, headers=headers)
        except httpx.TransportError as exc:
            raise RetryableError(f"{type(exc).__name__}: {exc}") from exc
        if response.status_code == 429 or response.status_code >= 500:
            raise RetryableError(f"HTTP {response.status_code}")
        if response.status_code >= 400:
            raise GatewayError(f"HTTP {response.status_code}: {response.text[:200]}")
        data = response.json()
        try:
            text = data["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError):
            raise GatewayError("malformed chat-completions response") from None
        return text, data.get("usage")


class MockBackend:
    """Deterministic offline backend wrapping ``fn(bundle, spec, run_index)``."""

    offline = True

    def __init__(self, fn: Callable[..., str]):
        self._fn = fn

    def complete(self, bundle: PromptBundle, spec: ModelSpec, run_index: int = 1):
        return self._fn(bundle, spec, run_index), None


class EchoBackend(MockBackend):
    """Answers every prompt with the ground-truth prose of the target system."""

    def __init__(self, dataset):
        super().__init__(lambda bundle, spec, run: dataset[bundle.system_name].groundtruth_text)


# -- transcripts ----------------------------------------------------------------------


class TranscriptStore:
    """Append-only JSON-lines transcripts under ``<root>/<experiment>/<system>/<model>/``."""

    FILENAME = "transcripts.jsonl"

    def __init__(self, root):
        self.root = Path(root)
        self._lock = threading.Lock()

    def path(self, experiment: str, system: str, model: str) -> Path:
        return self.root / experiment / system / model / self.FILENAME

    def append(self, records: list[GenerationRecord], model_slug: str, label: str | None = None) -> None:
        """Persist ``records``; ``label`` overrides the experiment directory name."""
        with self._lock:
            for record in records:
                path = self.path(label or record.experiment, record.system_name, model_slug)
                path.parent.mkdir(parents=True, exist_ok=True)
                with path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(record.to_dict(), sort_keys=True, ensure_ascii=False) + "\n")

    def reset(self, experiment: str, system: str, model: str) -> None:
        with self._lock:
            self.path(experiment, system, model).unlink(missing_ok=True)

    def read(self, experiment: str, system: str, model: str) -> list[GenerationRecord]:
        path = self.path(experiment, system, model)
        if not path.is_file():
            return []
        with self._lock:
            lines = path.read_text(encoding="utf-8").splitlines()
        return [GenerationRecord.from_dict(json.loads(line)) for line in lines if line.strip()]

    def count(self) -> int:
        return sum(
            sum(1 for line in p.read_text(encoding="utf-8").splitlines() if line.strip())
            for p in self.root.rglob(self.FILENAME)
        )


# -- gateway -----------------------------------------------------------------------------


@dataclass
class Gateway:
    backend: object
    retries: int = 3
    backoff: float = 0.5
    parallelism: int = 2
    store: TranscriptStore | None = None
    sleep: Callable[[float], None] = field(default=time.sleep, repr=False)

    def _attempt(self, bundle: PromptBundle, spec: ModelSpec, run_index: int):
        if isinstance(self.backend, MockBackend):
            return self.backend.complete(bundle, spec, run_index)
        return self.backend.complete(bundle, spec)

    def _run(self, bundle: PromptBundle, spec: ModelSpec, run_index: int, digest: str) -> GenerationRecord:
        started = time.time()
        attempts = 0
        error = None
        text, usage = "", None
        while True:
            attempts += 1
            try:
                text, usage = self._attempt(bundle, spec, run_index)
                error = None
                break
            except RetryableError as exc:
                error = f"EndpointUnreachable: {exc}"
                if attempts > self.retries:
                    break
                delay = self.backoff * 2 ** (attempts - 1)
                log.info("run %d attempt %d failed (%s); retrying in %.2fs", run_index, attempts, exc, delay)
                self.sleep(delay)
            except GatewayError as exc:
                error = f"{type(exc).__name__}: {exc}"
                break
        return GenerationRecord(
            run_index=run_index,
            raw_text=text if error is None else "",
            request_digest=digest,
            model=spec.model_name,
            system_name=bundle.system_name,
            experiment=bundle.config.id,
            example_system=bundle.example_system,
            started=started,
            finished=time.time(),
            usage=usage,
            error=error,
            attempts=attempts,
        )

    def generate(
        self, bundle: PromptBundle, spec: ModelSpec, k: int = 5, label: str | None = None
    ) -> list[GenerationRecord]:
        """Exactly ``k`` records ordered by run index; failures are recorded, not raised."""
        if k < 1:
            raise ValueError("k must be >= 1")
        digest = request_digest(bundle, spec)
        workers = max(1, min(self.parallelism, k))
        if workers == 1:
            records = [self._run(bundle, spec, i, digest) for i in range(1, k + 1)]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                records = list(pool.map(lambda i: self._run(bundle, spec, i, digest), range(1, k + 1)))
        records.sort(key=lambda r: r.run_index)
        if self.store is not None:
            self.store.append(records, spec.slug, label)
        return records


__all__ = [
    "API_BASE_ENV",
    "API_KEY_ENV",
    "AuthMissing",
    "EchoBackend",
    "EndpointUnreachable",
    "Gateway",
    "GatewayError",
    "GenerationRecord",
    "HttpBackend",
    "MockBackend",
    "ModelSpec",
    "RetryableError",
    "TranscriptStore",
    "request_digest",
]
