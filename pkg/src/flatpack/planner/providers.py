"""Pluggable completion providers.

Four kinds share one request contract (``complete(bundle, item) -> text``):

* ``http`` posts a vendor-neutral chat-completion body with base64 data-URL
  images and returns the assistant text;
* ``oracle_mock`` answers from the item's ground truth (and, for scene
  bundles, emits fetch directives in a feasibility-preserving order);
* ``noisy_mock`` perturbs ground truth with seeded drops and additions;
* ``replay`` serves previously recorded texts keyed by bundle digest and
  fails loudly on a miss.
"""

from __future__ import annotations

import base64
import hashlib
import json
import mimetypes
import os
import random
import time
from dataclasses import dataclass
from pathlib import Path

import requests

from ..corpus import ConnectionSet, FurnitureItem, feasible_order
from ..errors import ContractError
from .parsing import format_connections
from .prompts import PromptBundle, bundle_digest


class ProviderError(Exception):
    """Base class for completion failures."""


class TransportError(ProviderError):
    """HTTP transport failure; carries the status code when there is one."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class ReplayMissError(ProviderError):
    """The replay cache has no record for a bundle digest."""


class ScriptExhaustedError(ProviderError):
    """A scripted provider ran out of canned replies."""


@dataclass(frozen=True)
class ProviderSpec:
    kind: str  # http | oracle_mock | noisy_mock | replay
    endpoint: str | None = None
    model: str | None = None
    auth_env: str | None = None
    drop_rate: float = 0.0
    add_rate: float = 0.0
    seed: int = 0
    cache_path: Path | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("http", "oracle_mock", "noisy_mock", "replay"):
            raise ContractError(f"unknown provider kind {self.kind!r}")
        if not 0.0 <= self.drop_rate <= 1.0 or not 0.0 <= self.add_rate <= 1.0:
            raise ContractError("noise rates must lie in [0, 1]")
        if self.kind == "http" and not self.endpoint:
            raise ContractError("http provider requires an endpoint")
        if self.kind == "replay" and not self.cache_path:
            raise ContractError("replay provider requires a cache path")

    @classmethod
    def from_dict(cls, data: dict) -> "ProviderSpec":
        data = dict(data)
        if "cache_path" in data and data["cache_path"] is not None:
            data["cache_path"] = Path(data["cache_path"])
        return cls(**data)

    @classmethod
    def parse(cls, text: str) -> "ProviderSpec":
        """Parse compact CLI forms: "oracle", "noisy:drop=0.5,add=0.1,seed=3",
        "replay:/path/to/cache", "http:https://host/v1,model=m,auth_env=KEY"."""
        head, _, tail = text.strip().partition(":")
        if head in ("oracle", "oracle_mock"):
            return cls(kind="oracle_mock")
        if head in ("noisy", "noisy_mock"):
            options = dict(part.split("=", 1) for part in tail.split(",") if part)
            return cls(
                kind="noisy_mock",
                drop_rate=float(options.get("drop", 0.0)),
                add_rate=float(options.get("add", 0.0)),
                seed=int(options.get("seed", 0)),
            )
        if head == "replay":
            return cls(kind="replay", cache_path=Path(tail))
        if head == "http":
            endpoint, *rest = tail.split(",")
            options = dict(part.split("=", 1) for part in rest if part)
            return cls(
                kind="http",
                endpoint=endpoint,
                model=options.get("model", "gpt-4o"),
                auth_env=options.get("auth_env"),
            )
        raise ContractError(f"cannot parse provider spec {text!r}")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "endpoint": self.endpoint,
            "model": self.model,
            "auth_env": self.auth_env,
            "drop_rate": self.drop_rate,
            "add_rate": self.add_rate,
            "seed": self.seed,
            "cache_path": str(self.cache_path) if self.cache_path else None,
        }


def _stable_rng(*parts) -> random.Random:
    digest = hashlib.sha256(":".join(str(p) for p in parts).encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "little"))


def _scene_state(bundle: PromptBundle) -> dict | None:
    text = bundle.section("scene")
    if text is None:
        return None
    start = text.find("{")
    return json.loads(text[start:]) if start >= 0 else None


def _next_feasible_part(item: FurnitureItem, scene: dict) -> int | None:
    delivered = {
        int(part_id) for part_id, state in scene["parts"].items() if state["delivered"]
    }
    for part in feasible_order(item.ground_truth, item.part_count):
        if part not in delivered:
            return part
    return None


def _directive_text(part: int | None) -> str:
    if part is None:
        return json.dumps({"action": "complete"})
    return json.dumps({"action": "fetch", "part": part})


class OracleMockProvider:
    """Returns ground truth; for scene bundles, walks a feasible fetch order."""

    def complete(self, bundle: PromptBundle, item: FurnitureItem) -> str:
        scene = _scene_state(bundle)
        if scene is not None:
            return _directive_text(_next_feasible_part(item, scene))
        return format_connections(item.ground_truth)


class NoisyMockProvider:
    """Ground truth with seeded omissions and spurious additions.

    Each ground-truth connection is dropped independently with
    ``drop_rate``; round(add_rate * |GT|) valid non-ground-truth pairs are
    added, sampled without replacement. Seeding mixes the configured seed
    with the item id, so identical (seed, item) always yields identical text.
    Scene bundles fall back to the oracle's feasible-order behavior.
    """

    def __init__(self, drop_rate: float, add_rate: float, seed: int):
        self.drop_rate = drop_rate
        self.add_rate = add_rate
        self.seed = seed

    def complete(self, bundle: PromptBundle, item: FurnitureItem) -> str:
        scene = _scene_state(bundle)
        if scene is not None:
            return _directive_text(_next_feasible_part(item, scene))

        rng = _stable_rng("noisy_mock", self.seed, item.id)
        kept = [c for c in item.ground_truth if rng.random() >= self.drop_rate]

        n = item.part_count
        candidates = [
            (a, b)
            for a in range(n)
            for b in range(a + 1, n)
            if (a, b) not in item.ground_truth
        ]
        extra_count = min(round(self.add_rate * len(item.ground_truth)), len(candidates))
        extras = rng.sample(candidates, extra_count) if extra_count else []
        noisy = ConnectionSet.from_pairs([(c.a, c.b) for c in kept] + extras)
        return format_connections(noisy)


class ReplayCache:
    """Directory of ``<digest>.json`` records: {bundle_digest, raw_text, timestamp}."""

    def __init__(self, root: Path | str):
        self.root = Path(root)

    def lookup(self, digest: str) -> str | None:
        record_path = self.root / f"{digest}.json"
        if not record_path.is_file():
            return None
        return json.loads(record_path.read_text())["raw_text"]

    def store(self, digest: str, raw_text: str) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        record = {"bundle_digest": digest, "raw_text": raw_text, "timestamp": time.time()}
        tmp = self.root / f"{digest}.json.tmp"
        tmp.write_text(json.dumps(record, sort_keys=True))
        os.replace(tmp, self.root / f"{digest}.json")


class ReplayProvider:
    def __init__(self, cache: ReplayCache):
        self.cache = cache

    def complete(self, bundle: PromptBundle, item: FurnitureItem) -> str:
        digest = bundle_digest(bundle)
        raw = self.cache.lookup(digest)
        if raw is None:
            raise ReplayMissError(f"no replay record for bundle {digest} (item {item.id})")
        return raw


class RecordingProvider:
    """Wraps another provider and persists every reply into a replay cache."""

    def __init__(self, inner, cache: ReplayCache):
        self.inner = inner
        self.cache = cache

    def complete(self, bundle: PromptBundle, item: FurnitureItem) -> str:
        raw = self.inner.complete(bundle, item)
        self.cache.store(bundle_digest(bundle), raw)
        return raw


class ScriptedProvider:
    """Replays a fixed list of raw texts in order; used by tests and the CLI."""

    def __init__(self, replies: list[str]):
        self.replies = list(replies)
        self.cursor = 0

    def complete(self, bundle: PromptBundle, item: FurnitureItem) -> str:
        if self.cursor >= len(self.replies):
            raise ScriptExhaustedError(f"script exhausted after {self.cursor} replies")
        raw = self.replies[self.cursor]
        self.cursor += 1
        return raw


def _image_part(caption: str, path: Path) -> dict:
    mime = mimetypes.guess_type(str(path))[0]
    if mime is None:
        mime = "image/x-portable-pixmap" if path.suffix == ".ppm" else "application/octet-stream"
    encoded = base64.b64encode(path.read_bytes()).decode("ascii")
    return {"type": "image_url", "image_url": {"url": f"data:{mime};base64,{encoded}"}}


class HttpProvider:
    """Vendor-neutral chat-completion client with image attachments."""

    def __init__(self, endpoint: str, model: str, auth_env: str | None, timeout: float = 120.0):
        self.endpoint = endpoint
        self.model = model
        self.auth_env = auth_env
        self.timeout = timeout

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.auth_env:
            token = os.environ.get(self.auth_env)
            if not token:
                raise ContractError(f"auth env var {self.auth_env} is not set")
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def _body(self, bundle: PromptBundle) -> dict:
        content: list[dict] = [{"type": "text", "text": bundle.user_text()}]
        content += [_image_part(caption, path) for caption, path in bundle.images]
        return {
            "model": self.model,
            "temperature": bundle.decode_params.temperature,
            "top_p": bundle.decode_params.top_p,
            "max_tokens": bundle.decode_params.max_tokens,
            "messages": [
                {"role": "system", "content": bundle.system_text},
                {"role": "user", "content": content},
            ],
        }

    def complete(self, bundle: PromptBundle, item: FurnitureItem) -> str:
        try:
            response = requests.post(
                self.endpoint, json=self._body(bundle), headers=self._headers(), timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise TransportError(f"request to {self.endpoint} failed: {exc}") from exc
        if not 200 <= response.status_code < 300:
            raise TransportError(
                f"{self.endpoint} returned {response.status_code}", status=response.status_code
            )
        payload = response.json()
        message = payload["choices"][0]["message"]["content"]
        if isinstance(message, list):  # content-part style replies
            message = "".join(part.get("text", "") for part in message)
        return message


def build_provider(spec: ProviderSpec):
    if spec.kind == "oracle_mock":
        return OracleMockProvider()
    if spec.kind == "noisy_mock":
        return NoisyMockProvider(spec.drop_rate, spec.add_rate, spec.seed)
    if spec.kind == "replay":
        return ReplayProvider(ReplayCache(spec.cache_path))
    return HttpProvider(spec.endpoint, spec.model or "gpt-4o", spec.auth_env)


def complete(provider, bundle: PromptBundle, item: FurnitureItem) -> str:
    """Obtain raw completion text; accepts a ProviderSpec or a provider object."""
    if isinstance(provider, ProviderSpec):
        provider = build_provider(provider)
    return provider.complete(bundle, item)
