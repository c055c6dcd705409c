"""Click-stream interchange format between the simulator and estimators.

A stream is a struct-of-arrays: detector id (0/1), pulse index (-1 in CW
mode) and timestamp in integer nanoseconds, ordered by (pulse_index,
timestamp).  Two on-disk encodings are supported:

  * CSV with columns detector,pulse_index,timestamp_ns and the metadata
    (config hash, seed, ...) embedded as leading '# key=value' lines
  * packed little-endian binary records <u8 detector><u64 pulse_index>
    <u64 timestamp_ns> with the same metadata in a '<file>.meta' sidecar;
    CW records carry the u64 sentinel 2**64-1 in the pulse_index slot
"""

from dataclasses import dataclass, field

import numpy as np

from .params import ClickRecord, _require

_CW_SENTINEL = np.uint64(2 ** 64 - 1)
# packed little-endian <u8 detector><u64 pulse_index><u64 timestamp_ns>
_RECORD_DTYPE = np.dtype([("detector", "<u1"), ("pulse_index", "<u8"),
                          ("timestamp_ns", "<u8")])


@dataclass(frozen=True)
class ClickStream:
    """Ordered detector clicks plus the provenance needed to regenerate them."""

    detector: np.ndarray         # uint8, 0 or 1
    pulse_index: np.ndarray      # int64, -1 for CW clicks
    timestamp_ns: np.ndarray     # uint64
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        det = np.ascontiguousarray(self.detector, dtype=np.uint8)
        idx = np.ascontiguousarray(self.pulse_index, dtype=np.int64)
        ts = np.ascontiguousarray(self.timestamp_ns, dtype=np.uint64)
        _require(det.shape == idx.shape == ts.shape and det.ndim == 1,
                 "detector, pulse_index and timestamp_ns must be equal-length 1-d")
        _require(det.size == 0 or det.max() <= 1, "detector ids must be 0 or 1")
        object.__setattr__(self, "detector", det)
        object.__setattr__(self, "pulse_index", idx)
        object.__setattr__(self, "timestamp_ns", ts)
        for d in (0, 1):
            t = ts[det == d]
            _require(t.size < 2 or np.all(np.diff(t.astype(np.int64)) >= 0),
                     f"timestamps must be non-decreasing on detector {d}")

    def __len__(self):
        return self.detector.size

    @property
    def mode(self):
        return self.meta.get("mode", "pulsed" if (len(self) == 0 or self.pulse_index[0] >= 0) else "cw")

    def times(self, detector=None):
        """Timestamps in seconds, optionally for a single detector."""
        ts = self.timestamp_ns
        if detector is not None:
            ts = ts[self.detector == detector]
        return ts.astype(float) * 1e-9

    def records(self):
        """Iterate clicks as ClickRecord values (slow path, for inspection)."""
        for d, i, t in zip(self.detector, self.pulse_index, self.timestamp_ns):
            yield ClickRecord(detector=int(d), timestamp=float(t) * 1e-9,
                              pulse_index=None if i < 0 else int(i))


def _meta_lines(meta):
    for key in sorted(meta):
        yield f"# {key}={meta[key]}"


def _parse_meta(lines):
    meta = {}
    for line in lines:
        body = line.lstrip("# ").rstrip("\n")
        if "=" in body:
            key, value = body.split("=", 1)
            meta[key] = value
    return meta


def write_csv(stream: ClickStream, path):
    with open(path, "w", newline="") as f:
        for line in _meta_lines(stream.meta):
            f.write(line + "\n")
        f.write("detector,pulse_index,timestamp_ns\n")
        cw = stream.pulse_index < 0
        for d, i, t, is_cw in zip(stream.detector, stream.pulse_index,
                                  stream.timestamp_ns, cw):
            f.write(f"{d},{'' if is_cw else i},{t}\n")


def read_csv(path) -> ClickStream:
    meta_lines, rows = [], []
    with open(path) as f:
        for line in f:
            if line.startswith("#"):
                meta_lines.append(line)
            elif line.strip() and not line.startswith("detector,"):
                rows.append(line.rstrip("\n").split(","))
    det = np.array([int(r[0]) for r in rows], dtype=np.uint8)
    idx = np.array([int(r[1]) if r[1] else -1 for r in rows], dtype=np.int64)
    ts = np.array([int(r[2]) for r in rows], dtype=np.uint64)
    return ClickStream(det, idx, ts, meta=_parse_meta(meta_lines))


def write_binary(stream: ClickStream, path):
    rec = np.empty(len(stream), dtype=_RECORD_DTYPE)
    rec["detector"] = stream.detector
    rec["pulse_index"] = np.where(stream.pulse_index < 0, _CW_SENTINEL,
                                  stream.pulse_index.astype(np.uint64))
    rec["timestamp_ns"] = stream.timestamp_ns
    with open(path, "wb") as f:
        rec.tofile(f)
    with open(str(path) + ".meta", "w") as f:
        for line in _meta_lines(stream.meta):
            f.write(line + "\n")


def read_binary(path) -> ClickStream:
    rec = np.fromfile(path, dtype=_RECORD_DTYPE)
    idx = np.where(rec["pulse_index"] == _CW_SENTINEL, np.int64(-1),
                   rec["pulse_index"].astype(np.int64))
    meta = {}
    try:
        with open(str(path) + ".meta") as f:
            meta = _parse_meta(f.readlines())
    except FileNotFoundError:
        pass
    return ClickStream(rec["detector"].copy(), idx, rec["timestamp_ns"].copy(),
                       meta=meta)
