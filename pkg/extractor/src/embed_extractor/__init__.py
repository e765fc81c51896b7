"""Video frame sampling and CLIP / BLIP-2 embedding extraction."""
from .encoders import (
    Blip2Encoder,
    ClipEncoder,
    ImageTextEncoder,
    build_encoder,
    register_encoder,
)
from .errors import DecodeFailure, ExtractorError, ModelLoadFailure
from .extract import ExtractionJob, extract
from .frames import probe_duration, sample_frames
from .writer import write_store, write_text_embeddings

__version__ = "0.1.0"

__all__ = [
    "Blip2Encoder",
    "ClipEncoder",
    "DecodeFailure",
    "ExtractionJob",
    "ExtractorError",
    "ImageTextEncoder",
    "ModelLoadFailure",
    "build_encoder",
    "extract",
    "probe_duration",
    "register_encoder",
    "sample_frames",
    "write_store",
    "write_text_embeddings",
]
