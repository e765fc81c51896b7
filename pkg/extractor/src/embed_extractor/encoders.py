"""Image/text embedding backends behind a common protocol.

``clip`` is the CLIP ViT-L/14 336px projection (768-d); ``blip2`` is
the BLIP-2 image-text-contrastive projection (256-d), mean-pooled over
its query tokens so each frame maps to a single vector.  Both run in
eval mode with gradients disabled, so repeated runs over the same
frames are deterministic.

``build_encoder`` is the seam for tests: ``register_encoder`` installs
an alternative constructor for a backend name.
"""
from __future__ import annotations

from typing import Callable, Dict, List, Protocol, Sequence

import numpy as np

from .errors import ModelLoadFailure

CLIP_CHECKPOINT = "openai/clip-vit-large-patch14-336"
BLIP2_CHECKPOINT = "Salesforce/blip2-itm-vit-g"


class ImageTextEncoder(Protocol):
    name: str
    dim: int
    checkpoint: str

    def encode_images(self, frames: Sequence[np.ndarray]) -> np.ndarray: ...

    def encode_texts(self, texts: Sequence[str]) -> np.ndarray: ...


class ClipEncoder:
    name = "clip"
    dim = 768

    def __init__(self, checkpoint: str = CLIP_CHECKPOINT, batch_size: int = 16):
        self.checkpoint = checkpoint
        self.batch_size = batch_size
        try:
            import torch
            from transformers import CLIPModel, CLIPProcessor

            self._torch = torch
            self._model = CLIPModel.from_pretrained(checkpoint).eval()
            self._processor = CLIPProcessor.from_pretrained(checkpoint)
        except Exception as exc:
            raise ModelLoadFailure(f"cannot load CLIP checkpoint {checkpoint!r}: {exc}") from exc

    def encode_images(self, frames: Sequence[np.ndarray]) -> np.ndarray:
        chunks = []
        with self._torch.no_grad():
            for i in range(0, len(frames), self.batch_size):
                inputs = self._processor(
                    images=list(frames[i:i + self.batch_size]), return_tensors="pt"
                )
                chunks.append(self._model.get_image_features(**inputs).cpu().numpy())
        return np.concatenate(chunks).astype(np.float32)

    def encode_texts(self, texts: Sequence[str]) -> np.ndarray:
        with self._torch.no_grad():
            inputs = self._processor(text=list(texts), return_tensors="pt", padding=True)
            return self._model.get_text_features(**inputs).cpu().numpy().astype(np.float32)


class Blip2Encoder:
    name = "blip2"
    dim = 256

    def __init__(self, checkpoint: str = BLIP2_CHECKPOINT, batch_size: int = 4):
        self.checkpoint = checkpoint
        self.batch_size = batch_size
        try:
            import torch
            from transformers import AutoProcessor, Blip2ForImageTextRetrieval

            self._torch = torch
            self._model = Blip2ForImageTextRetrieval.from_pretrained(checkpoint).eval()
            self._processor = AutoProcessor.from_pretrained(checkpoint)
        except Exception as exc:
            raise ModelLoadFailure(f"cannot load BLIP-2 checkpoint {checkpoint!r}: {exc}") from exc

    def encode_images(self, frames: Sequence[np.ndarray]) -> np.ndarray:
        chunks = []
        with self._torch.no_grad():
            for i in range(0, len(frames), self.batch_size):
                inputs = self._processor(
                    images=list(frames[i:i + self.batch_size]), return_tensors="pt"
                )
                vision = self._model.vision_model(**inputs)[0]
                attention = self._torch.ones(vision.shape[:-1], dtype=self._torch.long)
                query = self._model.query_tokens.expand(vision.shape[0], -1, -1)
                qformer = self._model.qformer(
                    query_embeds=query,
                    encoder_hidden_states=vision,
                    encoder_attention_mask=attention,
                )[0]
                projected = self._model.vision_projection(qformer)
                # One vector per frame: mean over the query tokens.
                chunks.append(projected.mean(dim=1).cpu().numpy())
        return np.concatenate(chunks).astype(np.float32)

    def encode_texts(self, texts: Sequence[str]) -> np.ndarray:
        with self._torch.no_grad():
            inputs = self._processor(text=list(texts), return_tensors="pt", padding=True)
            embeds = self._model.embeddings(input_ids=inputs["input_ids"])
            qformer = self._model.qformer(
                query_embeds=embeds,
                query_length=0,
                attention_mask=inputs["attention_mask"],
            )[0]
            projected = self._model.text_projection(qformer[:, 0, :])
            return projected.cpu().numpy().astype(np.float32)


_REGISTRY: Dict[str, Callable[..., ImageTextEncoder]] = {
    "clip": ClipEncoder,
    "blip2": Blip2Encoder,
}


def register_encoder(name: str, factory: Callable[..., ImageTextEncoder]) -> None:
    _REGISTRY[name] = factory


def build_encoder(name: str, checkpoint: str | None = None) -> ImageTextEncoder:
    if name not in _REGISTRY:
        raise ModelLoadFailure(
            f"unknown backend {name!r}; known: {sorted(_REGISTRY)}"
        )
    factory = _REGISTRY[name]
    return factory(checkpoint) if checkpoint else factory()
