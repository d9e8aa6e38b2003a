"""Dataset ingestion: the standard IDX container used by MNIST, plus an
offline-friendly Gaussian-blob generator. Images are average-pooled to 4x4
and min-max scaled so the feature dimension matches the desk-scale VQC."""

import struct

import numpy as np

from .fl import LabeledDataset
from .rng import substream

IDX_MAGIC_LABELS = 0x00000801
IDX_MAGIC_IMAGES = 0x00000803


class IdxFormatError(ValueError):
    pass


class IdxTruncatedError(IdxFormatError):
    pass


def parse_idx(data: bytes):
    """Decode one IDX file. Returns ("labels", 1-D uint8 array) or
    ("images", 3-D uint8 array)."""
    if len(data) < 8:
        raise IdxTruncatedError(f"IDX stream too short ({len(data)} bytes)")
    magic = struct.unpack(">I", data[:4])[0]
    if magic == IDX_MAGIC_LABELS:
        kind, ndim = "labels", 1
    elif magic == IDX_MAGIC_IMAGES:
        kind, ndim = "images", 3
    else:
        raise IdxFormatError(f"bad IDX magic 0x{magic:08x}")
    header_len = 4 + 4 * ndim
    if len(data) < header_len:
        raise IdxTruncatedError("IDX header truncated")
    dims = struct.unpack(f">{ndim}I", data[4:header_len])
    expected = int(np.prod(dims, dtype=np.int64))
    payload = data[header_len:]
    if len(payload) < expected:
        raise IdxTruncatedError(f"IDX payload truncated: {len(payload)} < {expected}")
    if len(payload) > expected:
        raise IdxFormatError(f"IDX payload too long: {len(payload)} > {expected}")
    arr = np.frombuffer(payload, dtype=np.uint8).reshape(dims)
    return kind, arr


def write_idx(kind: str, arr: np.ndarray) -> bytes:
    arr = np.asarray(arr, dtype=np.uint8)
    magic = IDX_MAGIC_LABELS if kind == "labels" else IDX_MAGIC_IMAGES
    header = struct.pack(">I", magic) + b"".join(struct.pack(">I", d) for d in arr.shape)
    return header + arr.tobytes()


def avg_pool_images(images: np.ndarray, out_side: int = 4) -> np.ndarray:
    """(n, H, W) uint8 -> (n, out_side*out_side) floats via block averaging."""
    n, h, w = images.shape
    fh, fw = h // out_side, w // out_side
    trimmed = images[:, :fh * out_side, :fw * out_side].astype(float)
    pooled = trimmed.reshape(n, out_side, fh, out_side, fw).mean(axis=(2, 4))
    return pooled.reshape(n, out_side * out_side)


def load_idx_dataset(images_path: str, labels_path: str, classes=None,
                     pool_side: int = 4, max_per_class: int = None) -> LabeledDataset:
    """Pair an IDX image file with an IDX label file into a LabeledDataset.

    Features are pooled to pool_side^2 and min-max scaled to [0, 1]; labels
    are remapped to 0..len(classes)-1 when a class subset is given."""
    with open(images_path, "rb") as f:
        kind_i, images = parse_idx(f.read())
    with open(labels_path, "rb") as f:
        kind_l, labels = parse_idx(f.read())
    if kind_i != "images" or kind_l != "labels":
        raise IdxFormatError("expected an image file and a label file")
    if len(images) != len(labels):
        raise IdxFormatError(f"image/label count mismatch: {len(images)} vs {len(labels)}")
    labels = labels.astype(int)
    if classes is not None:
        classes = list(classes)
        keep = np.isin(labels, classes)
        images, labels = images[keep], labels[keep]
        remap = {c: i for i, c in enumerate(classes)}
        labels = np.array([remap[c] for c in labels])
        num_classes = len(classes)
    else:
        num_classes = int(labels.max()) + 1
    if max_per_class is not None:
        chosen = []
        for c in range(num_classes):
            chosen.extend(np.flatnonzero(labels == c)[:max_per_class])
        chosen = np.sort(np.array(chosen))
        images, labels = images[chosen], labels[chosen]
    feats = avg_pool_images(images, pool_side)
    span = feats.max() - feats.min()
    feats = (feats - feats.min()) / (span if span > 0 else 1.0)
    return LabeledDataset(feats, labels, num_classes)


def synth_blobs(centers, stddev: float, samples_per_class: int, feature_dim: int,
                seed: int) -> LabeledDataset:
    """Gaussian blobs clipped to [0, 1]^dim; one class per center."""
    centers = np.clip(np.asarray(centers, dtype=float), 0.0, 1.0)
    if centers.shape[1] != feature_dim:
        raise ValueError(f"centers have dim {centers.shape[1]}, expected {feature_dim}")
    feats, labels = [], []
    for c, center in enumerate(centers):
        rng = substream(seed, "blobs", c)
        pts = center + stddev * rng.standard_normal((samples_per_class, feature_dim))
        feats.append(np.clip(pts, 0.0, 1.0))
        labels.append(np.full(samples_per_class, c))
    return LabeledDataset(np.vstack(feats), np.concatenate(labels), len(centers))


def default_blob_dataset(feature_dim: int = 16, samples_per_class: int = 1000,
                         stddev: float = 0.08, seed: int = 0,
                         num_classes: int = 2) -> LabeledDataset:
    """Two (or more) well-separated blobs in [0,1]^dim, mimicking a pooled
    two-digit MNIST subset."""
    rng = substream(seed, "blob-centers")
    centers = rng.uniform(0.15, 0.85, (num_classes, feature_dim))
    # push the first two centers apart so the task is cleanly separable
    centers[0] = 0.25
    if num_classes > 1:
        centers[1] = 0.75
    return synth_blobs(centers, stddev, samples_per_class, feature_dim, seed)
