"""Vector encoders.

``clip`` runs the pretrained ViT-B/32 model in deterministic eval mode
(float32, no dropout) and returns raw 512-dim projection outputs with no
normalization applied. It needs the model weights locally (or a reachable
download mirror); environments without them use ``hash``, a documented
stand-in that derives a seeded 512-dim vector from the content bytes.
Both are deterministic: identical input bytes give identical vectors.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

DIM = 512
CLIP_MODEL = "openai/clip-vit-base-patch32"


class BackendUnavailableError(RuntimeError):
    """The requested encoder cannot run in this environment."""


def _seeded_vector(tag: bytes, content: bytes) -> np.ndarray:
    digest = hashlib.sha256(tag + content).digest()
    rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
    return rng.standard_normal(DIM).astype(np.float32)


class HashBackend:
    """Content-hash encoder for offline tests and fixtures."""

    name = "hash"

    def encode_images(self, paths: list[Path]) -> np.ndarray:
        return np.stack([_seeded_vector(b"coverembed-image-v1:", p.read_bytes()) for p in paths])

    def encode_text(self, query: str) -> np.ndarray:
        return _seeded_vector(b"coverembed-text-v1:", query.encode("utf-8")).reshape(1, DIM)


class ClipBackend:
    """Pretrained CLIP ViT-B/32 image and text encoders."""

    name = "clip"

    def __init__(self, model_name: str = CLIP_MODEL):
        try:
            import torch
            from PIL import Image
            from transformers import CLIPModel, CLIPProcessor
        except ImportError as exc:
            raise BackendUnavailableError(
                f"clip backend needs torch/transformers/Pillow: {exc}"
            ) from exc
        try:
            self._model = CLIPModel.from_pretrained(model_name)
        except Exception as exc:  # weights not cached and no network
            raise BackendUnavailableError(
                f"could not load {model_name} weights: {exc}"
            ) from exc
        self._processor = CLIPProcessor.from_pretrained(model_name)
        self._torch = torch
        self._image_cls = Image
        self._model.eval()

    def encode_images(self, paths: list[Path]) -> np.ndarray:
        images = [self._image_cls.open(p).convert("RGB") for p in paths]
        inputs = self._processor(images=images, return_tensors="pt")
        with self._torch.no_grad():
            features = self._model.get_image_features(**inputs)
        return features.cpu().numpy().astype(np.float32)

    def encode_text(self, query: str) -> np.ndarray:
        inputs = self._processor(text=[query], return_tensors="pt", padding=True, truncation=True)
        with self._torch.no_grad():
            features = self._model.get_text_features(**inputs)
        return features.cpu().numpy().astype(np.float32)


def load_backend(name: str):
    if name == "hash":
        return HashBackend()
    if name == "clip":
        return ClipBackend()
    raise ValueError(f"unknown backend {name!r}")
