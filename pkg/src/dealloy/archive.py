"""Snapshot archive I/O.

An archive is a directory holding a binary frame stream plus a JSON
manifest:

  frames.bin    magic "PFS1", u32 version, u32 height, u32 width,
                u32 channels (= 3), then one frame after another,
                channel-major (phi, c_A, c_B), row-major float32,
                little-endian throughout.
  manifest.json run metadata and the physical time stamp of every frame.

Values are clamped to [0, 1] when written; everything the pipeline
produces is supposed to live in that range anyway, so clamping only
shaves floating-point overshoot.
"""

import json
import struct
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .errors import ArchiveFormatError
from .fields import FieldState

MAGIC = b"PFS1"
VERSION = 1
CHANNELS = 3
GENERATOR_VERSION = "dealloy-0.1.0"


@dataclass
class ArchiveManifest:
    """Run metadata stored alongside the frames."""

    c_a_ideal: float
    dt_seconds: float
    snapshot_stride: int
    seed: int
    height: int
    width: int
    dx: float = 0.2
    generator_version: str = GENERATOR_VERSION
    extras: dict = field(default_factory=dict)


@dataclass
class SnapshotArchive:
    """An ordered run of field snapshots with their physical times."""

    frames: list
    times_us: np.ndarray
    manifest: ArchiveManifest

    def __post_init__(self):
        self.times_us = np.asarray(self.times_us, dtype=np.float64)
        if len(self.frames) != self.times_us.size:
            raise ValueError(
                f"{len(self.frames)} frames but {self.times_us.size} times"
            )

    def __len__(self):
        return len(self.frames)

    def validate(self):
        m = self.manifest
        if len(self.frames) == 0:
            raise ValueError("archive holds no frames")
        if np.any(np.diff(self.times_us) <= 0):
            raise ValueError("times_us must be strictly increasing")
        for i, f in enumerate(self.frames):
            if (f.height, f.width) != (m.height, m.width):
                raise ValueError(
                    f"frame {i} shape {(f.height, f.width)} does not match "
                    f"manifest dims {(m.height, m.width)}"
                )
        return self


def _frame_bytes(state):
    out = []
    for chan in (state.phi, state.ca, state.cb):
        a = np.clip(chan, 0.0, 1.0).astype("<f4")
        out.append(a.tobytes())
    return b"".join(out)


def write_snapshot_archive(archive, path):
    """Write an archive directory (frames.bin + manifest.json)."""
    archive.validate()
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    m = archive.manifest

    header = MAGIC + struct.pack("<IIII", VERSION, m.height, m.width, CHANNELS)
    with open(path / "frames.bin", "wb") as fh:
        fh.write(header)
        for frame in archive.frames:
            fh.write(_frame_bytes(frame))

    doc = asdict(m)
    doc["times_us"] = [float(t) for t in archive.times_us]
    with open(path / "manifest.json", "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def read_snapshot_archive(path):
    """Read an archive directory back into memory.

    Raises ArchiveFormatError on a bad magic, unknown version, manifest /
    payload disagreement, or a truncated frame stream.
    """
    path = Path(path)
    man_path = path / "manifest.json"
    bin_path = path / "frames.bin"
    if not man_path.is_file() or not bin_path.is_file():
        raise ArchiveFormatError(f"{path} is not a snapshot archive directory")

    with open(man_path) as fh:
        doc = json.load(fh)
    try:
        times = np.asarray(doc.pop("times_us"), dtype=np.float64)
        manifest = ArchiveManifest(**doc)
    except (KeyError, TypeError) as e:
        raise ArchiveFormatError(f"bad manifest in {man_path}: {e}") from e

    raw = bin_path.read_bytes()
    if raw[:4] != MAGIC:
        raise ArchiveFormatError(f"{bin_path}: bad magic {raw[:4]!r}")
    version, h, w, c = struct.unpack("<IIII", raw[4:20])
    if version != VERSION:
        raise ArchiveFormatError(f"{bin_path}: unsupported version {version}")
    if c != CHANNELS:
        raise ArchiveFormatError(f"{bin_path}: expected {CHANNELS} channels, got {c}")
    if (h, w) != (manifest.height, manifest.width):
        raise ArchiveFormatError(
            f"{bin_path}: header dims {(h, w)} disagree with manifest "
            f"{(manifest.height, manifest.width)}"
        )

    frame_bytes = CHANNELS * h * w * 4
    payload = raw[20:]
    n_frames = times.size
    if len(payload) != n_frames * frame_bytes:
        raise ArchiveFormatError(
            f"{bin_path}: payload holds {len(payload)} bytes, manifest "
            f"promises {n_frames} frames of {frame_bytes} bytes"
        )

    frames = []
    for i in range(n_frames):
        block = np.frombuffer(
            payload, dtype="<f4", count=CHANNELS * h * w, offset=i * frame_bytes
        ).reshape(CHANNELS, h, w)
        frames.append(
            FieldState(phi=block[0], ca=block[1], cb=block[2], dx=manifest.dx)
        )
    return SnapshotArchive(frames=frames, times_us=times, manifest=manifest).validate()
