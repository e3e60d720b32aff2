"""Field-station upload handling: manifests, resumable content-addressed
storage, camera registry and the lossy-link fleet simulator."""

from .blobstore import AlreadyStored, BlobStore, ImageAsset, UploadSession
from .cameras import CameraSource, load_camera_registry
from .fleet import DeliveryOutcome, DeliveryReport, LinkModel, simulate_fleet
from .manifest import MODALITIES, UploadManifest
from .synth import SyntheticCapture, SyntheticImageSource

__all__ = [
    "AlreadyStored",
    "BlobStore",
    "CameraSource",
    "DeliveryOutcome",
    "DeliveryReport",
    "ImageAsset",
    "LinkModel",
    "MODALITIES",
    "SyntheticCapture",
    "SyntheticImageSource",
    "UploadManifest",
    "UploadSession",
    "load_camera_registry",
    "simulate_fleet",
]
