"""Reading and writing waveform-database records.

Covers the three file kinds the public arrhythmia databases ship in: the text
header (``<record>.hea``), the packed binary signal (``<record>.dat``, formats
212 and 16), and the binary annotation stream (``<record>.atr``). Parsing is
pure in the byte input, and every writer round-trips bit-exactly through its
parser.

Format 212 packs two 12-bit two's-complement samples into three bytes: the
first sample is the low byte plus the low nibble of the middle byte, the
second is the high nibble of the middle byte (its top four bits) plus the
third byte. Format 16 is 16-bit little-endian two's complement. Annotations
are byte pairs: a 6-bit type code in the top of the second byte and a 10-bit
sample delta; type 59 escapes to a 4-byte delta for long gaps, types 60-63
attach NUM/SUB/CHAN/AUX metadata to the preceding annotation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import (LengthMismatch, MalformedAnnotationStream,
                     MalformedHeader, TruncatedSignal, UnsupportedFormat)

SUPPORTED_FORMATS = (212, 16)

# Standard annotation type codes <-> display symbols.
_CODE_TO_SYMBOL = {
    1: "N", 2: "L", 3: "R", 4: "a", 5: "V", 6: "F", 7: "J", 8: "A", 9: "S",
    10: "E", 11: "j", 12: "/", 13: "Q", 14: "~", 16: "|", 18: "s", 19: "T",
    20: "*", 21: "D", 22: '"', 23: "=", 24: "p", 25: "B", 26: "^", 27: "t",
    28: "+", 29: "u", 30: "?", 31: "!", 32: "[", 33: "]", 34: "e", 35: "n",
    36: "@", 37: "x", 38: "f", 39: "(", 40: ")", 41: "r",
}
_SYMBOL_TO_CODE = {s: c for c, s in _CODE_TO_SYMBOL.items()}

# Annotations that mark a heartbeat. The ST-change ("s") and T-wave-change
# ("T") codes are kept alongside the conventional beat codes because the
# anomaly classes below are defined on them.
_BEAT_SYMBOLS = frozenset("NLRaVFJASEj/QBenfr!?") | {"s", "T"}

_SKIP = 59   # 4-byte delta escape
_NUM = 60
_SUB = 61
_CHAN = 62
_AUX = 63


class AnomalyClass(Enum):
    """The four target classes a beat can belong to."""

    NORMAL = "Normal"
    PVC = "PVC"
    PAC = "PAC"
    MI = "MI"

    def __str__(self):
        return self.value


#: Fixed class order used everywhere (priors, posteriors, tie-breaking).
CLASS_ORDER = (AnomalyClass.NORMAL, AnomalyClass.PVC, AnomalyClass.PAC,
               AnomalyClass.MI)

_CLASS_BY_SYMBOL = {
    "N": AnomalyClass.NORMAL,
    "V": AnomalyClass.PVC,
    "A": AnomalyClass.PAC,
    "s": AnomalyClass.MI,
    "T": AnomalyClass.MI,
}


def map_class(code: str) -> AnomalyClass | None:
    """Map an annotation symbol to its anomaly class, or None if excluded."""
    return _CLASS_BY_SYMBOL.get(code)


@dataclass
class SignalSpec:
    """Per-lead block of a record header."""

    filename: str
    format_code: int
    gain: float          # ADC units per mV
    baseline: int        # ADC value of 0 mV
    lead_name: str
    adc_resolution: int = 12
    adc_zero: int = 0


@dataclass
class RecordHeader:
    record_name: str
    n_signals: int
    sampling_rate: float
    n_samples: int
    signals: list[SignalSpec] = field(default_factory=list)

    def lead_index(self, lead: str | int) -> int:
        if isinstance(lead, int):
            if not 0 <= lead < self.n_signals:
                raise IndexError(f"lead index {lead} out of range")
            return lead
        for i, spec in enumerate(self.signals):
            if spec.lead_name == lead:
                return i
        raise KeyError(lead)


@dataclass
class BeatAnnotation:
    """One annotation with an absolute sample position.

    ``known`` is False when the stream carried a type code outside the
    standard alphabet; the raw code is preserved in ``type_code`` so the
    stream can be audited and re-encoded without loss.
    """

    sample_index: int
    code: str
    type_code: int = 0
    known: bool = True

    def __post_init__(self):
        if self.type_code == 0 and self.code in _SYMBOL_TO_CODE:
            self.type_code = _SYMBOL_TO_CODE[self.code]

    @property
    def anomaly_class(self) -> AnomalyClass | None:
        return map_class(self.code)


@dataclass
class EcgRecord:
    """A parsed record: header, per-lead mV signals, beat annotations."""

    header: RecordHeader
    signals: list[np.ndarray]
    annotations: list[BeatAnnotation] = field(default_factory=list)

    @property
    def sampling_rate(self) -> float:
        return self.header.sampling_rate

    def lead(self, lead: str | int) -> np.ndarray:
        return self.signals[self.header.lead_index(lead)]


# --------------------------------------------------------------------------
# header

def parse_header(text: str) -> RecordHeader:
    """Parse a record header and validate it.

    Raises MalformedHeader (naming the line) on structural problems and
    UnsupportedFormat for signal formats other than 212 and 16.
    """
    lines = [ln for ln in text.splitlines()
             if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise MalformedHeader("empty header")
    fields = lines[0].split()
    if len(fields) < 4:
        raise MalformedHeader(
            "record line needs name, signal count, sampling rate and "
            "sample count", line=1)
    name = fields[0].split("/")[0]
    try:
        n_signals = int(fields[1])
        sampling_rate = float(fields[2].split("/")[0])
        n_samples = int(fields[3])
    except ValueError as exc:
        raise MalformedHeader(str(exc), line=1) from None
    if n_signals < 1:
        raise MalformedHeader(f"record declares {n_signals} signals; "
                              "at least one is required", line=1)
    if sampling_rate <= 0:
        raise MalformedHeader(f"sampling rate {sampling_rate} must be > 0",
                              line=1)
    if n_samples < 0:
        raise MalformedHeader(f"negative sample count {n_samples}", line=1)
    if len(lines) - 1 < n_signals:
        raise MalformedHeader(
            f"record declares {n_signals} signals but header has "
            f"{len(lines) - 1} signal lines", line=1)

    specs = []
    for i in range(n_signals):
        specs.append(_parse_signal_line(lines[1 + i], line_no=i + 2))
    return RecordHeader(record_name=name, n_signals=n_signals,
                        sampling_rate=sampling_rate, n_samples=n_samples,
                        signals=specs)


def _parse_signal_line(line: str, line_no: int) -> SignalSpec:
    fields = line.split()
    if len(fields) < 3:
        raise MalformedHeader(
            "signal line needs file name, format and gain", line=line_no)
    filename = fields[0]

    fmt_field = fields[1]
    for sep in ("x", ":", "+"):
        if sep in fmt_field:
            raise UnsupportedFormat(fmt_field)
    try:
        fmt = int(fmt_field)
    except ValueError:
        raise MalformedHeader(f"bad format field {fmt_field!r}",
                              line=line_no) from None
    if fmt not in SUPPORTED_FORMATS:
        raise UnsupportedFormat(fmt)

    gain_field = fields[2]
    units = None
    if "/" in gain_field:
        gain_field, units = gain_field.split("/", 1)
    baseline = None
    if "(" in gain_field:
        if not gain_field.endswith(")"):
            raise MalformedHeader(f"unbalanced baseline in {fields[2]!r}",
                                  line=line_no)
        gain_field, base_field = gain_field[:-1].split("(", 1)
        try:
            baseline = int(base_field)
        except ValueError:
            raise MalformedHeader(f"bad baseline {base_field!r}",
                                  line=line_no) from None
    try:
        gain = float(gain_field)
    except ValueError:
        raise MalformedHeader(f"bad gain {gain_field!r}",
                              line=line_no) from None
    if gain == 0:
        gain = 200.0  # format default when the header leaves gain unset
    if gain < 0:
        raise MalformedHeader(f"gain {gain} must be > 0", line=line_no)

    adc_res, adc_zero = 12, 0
    rest = fields[3:]
    if rest:
        try:
            adc_res = int(rest[0])
            if len(rest) > 1:
                adc_zero = int(rest[1])
        except ValueError:
            raise MalformedHeader("bad ADC fields", line=line_no) from None
    # description (the lead name) is everything after the five numeric fields
    lead_name = " ".join(rest[5:]) if len(rest) > 5 else ""
    if baseline is None:
        baseline = adc_zero
    return SignalSpec(filename=filename, format_code=fmt, gain=gain,
                      baseline=baseline, lead_name=lead_name,
                      adc_resolution=adc_res, adc_zero=adc_zero)


def write_header(header: RecordHeader) -> str:
    lines = [f"{header.record_name} {header.n_signals} "
             f"{_fmt_rate(header.sampling_rate)} {header.n_samples}"]
    for spec in header.signals:
        gain = _fmt_rate(spec.gain)
        lines.append(
            f"{spec.filename} {spec.format_code} {gain}({spec.baseline})/mV "
            f"{spec.adc_resolution} {spec.adc_zero} 0 0 0 {spec.lead_name}")
    return "\n".join(lines) + "\n"


def _fmt_rate(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(value)


# --------------------------------------------------------------------------
# signal

def decode_raw_212(data: bytes, n_values: int) -> np.ndarray:
    """Unpack 12-bit two's-complement values from a format-212 byte stream."""
    n_bytes_needed = math.ceil(n_values / 2) * 3
    if len(data) < n_bytes_needed:
        raise TruncatedSignal(
            f"need {n_bytes_needed} bytes for {n_values} samples, "
            f"got {len(data)}")
    if len(data) > n_bytes_needed:
        raise LengthMismatch(
            f"{len(data)} bytes is more than the {n_bytes_needed} required "
            f"for {n_values} samples")
    b = np.frombuffer(data, dtype=np.uint8).astype(np.int64).reshape(-1, 3)
    first = ((b[:, 1] & 0x0F) << 8) | b[:, 0]
    second = ((b[:, 1] & 0xF0) << 4) | b[:, 2]
    values = np.empty(2 * len(b), dtype=np.int64)
    values[0::2] = first
    values[1::2] = second
    values = np.where(values > 2047, values - 4096, values)
    return values[:n_values]


def encode_raw_212(values) -> bytes:
    values = np.asarray(values, dtype=np.int64)
    if np.any(values < -2048) or np.any(values > 2047):
        raise LengthMismatch("values exceed the 12-bit range of format 212")
    if len(values) % 2:
        values = np.concatenate([values, [0]])  # pad final half-triplet
    u = np.where(values < 0, values + 4096, values)
    first = u[0::2]
    second = u[1::2]
    out = np.empty((len(first), 3), dtype=np.uint8)
    out[:, 0] = first & 0xFF
    out[:, 1] = ((second >> 8) << 4) | (first >> 8)
    out[:, 2] = second & 0xFF
    return out.tobytes()


def decode_raw_16(data: bytes, n_values: int) -> np.ndarray:
    if len(data) < 2 * n_values:
        raise TruncatedSignal(
            f"need {2 * n_values} bytes for {n_values} samples, "
            f"got {len(data)}")
    if len(data) > 2 * n_values:
        raise LengthMismatch(
            f"{len(data)} bytes is more than the {2 * n_values} required")
    return np.frombuffer(data, dtype="<i2", count=n_values).astype(np.int64)


def encode_raw_16(values) -> bytes:
    values = np.asarray(values, dtype=np.int64)
    if np.any(values < -32768) or np.any(values > 32767):
        raise LengthMismatch("values exceed the 16-bit range of format 16")
    return values.astype("<i2").tobytes()


def read_signal(header: RecordHeader, data: bytes) -> list[np.ndarray]:
    """Decode a signal file into per-lead mV arrays.

    All leads of a record share one file with samples interleaved frame by
    frame; physical value = (raw - baseline) / gain.
    """
    fmt = header.signals[0].format_code
    if any(s.format_code != fmt for s in header.signals):
        raise UnsupportedFormat("mixed per-record signal formats")
    total = header.n_samples * header.n_signals
    if fmt == 212:
        raw = decode_raw_212(data, total)
    elif fmt == 16:
        raw = decode_raw_16(data, total)
    else:
        raise UnsupportedFormat(fmt)
    frames = raw.reshape(header.n_samples, header.n_signals)
    leads = []
    for i, spec in enumerate(header.signals):
        leads.append((frames[:, i] - spec.baseline) / spec.gain)
    return leads


def write_signal(header: RecordHeader, signals: list[np.ndarray]) -> bytes:
    """Encode per-lead mV arrays to the record's signal format."""
    if len(signals) != header.n_signals:
        raise LengthMismatch(
            f"{len(signals)} leads given, header declares {header.n_signals}")
    for s in signals:
        if len(s) != header.n_samples:
            raise LengthMismatch(
                f"lead length {len(s)} != header n_samples {header.n_samples}")
    raw = np.empty((header.n_samples, header.n_signals), dtype=np.int64)
    for i, spec in enumerate(header.signals):
        raw[:, i] = np.rint(np.asarray(signals[i]) * spec.gain
                            + spec.baseline).astype(np.int64)
    flat = raw.reshape(-1)
    fmt = header.signals[0].format_code
    if fmt == 212:
        return encode_raw_212(flat)
    if fmt == 16:
        return encode_raw_16(flat)
    raise UnsupportedFormat(fmt)


# --------------------------------------------------------------------------
# annotations

def read_annotations_detailed(data: bytes) -> tuple[list[BeatAnnotation], int]:
    """Decode an annotation stream.

    Returns the kept annotations (beat codes, the ST/T-change codes, and any
    unknown type codes flagged ``known=False``) plus the count of recognized
    non-beat annotations that were skipped. Sample positions are cumulative
    over the stream's deltas, so they come out strictly increasing for any
    stream with positive deltas.
    """
    kept: list[BeatAnnotation] = []
    skipped = 0
    pos = 0
    ts = 0
    n = len(data)
    while pos + 1 < n:
        b0, b1 = data[pos], data[pos + 1]
        code = b1 >> 2
        delta = ((b1 & 0x03) << 8) | b0
        if code == 0 and delta == 0:
            return kept, skipped  # end-of-stream pair
        if code == _SKIP:
            if pos + 8 > n:
                raise MalformedAnnotationStream(
                    "skip escape runs past end of stream", offset=pos)
            ts += _read_skip_interval(data, pos + 2)
            pos += 6
            b0, b1 = data[pos], data[pos + 1]
            code = b1 >> 2
            delta = ((b1 & 0x03) << 8) | b0
            if code in (_SKIP, _NUM, _SUB, _CHAN, _AUX):
                raise MalformedAnnotationStream(
                    f"type code {code} cannot follow a skip escape",
                    offset=pos)
        elif code in (_NUM, _SUB, _CHAN, _AUX):
            raise MalformedAnnotationStream(
                f"dangling modifier code {code} with no annotation",
                offset=pos)
        ts += delta
        pos += 2
        # consume any NUM/SUB/CHAN/AUX modifiers attached to this annotation
        while pos + 1 < n:
            m0, m1 = data[pos], data[pos + 1]
            mcode = m1 >> 2
            if mcode < _NUM:
                break
            pos += 2
            if mcode == _AUX:
                aux_pairs = math.ceil(m0 / 2)
                if pos + 2 * aux_pairs > n:
                    raise MalformedAnnotationStream(
                        "aux data runs past end of stream", offset=pos)
                pos += 2 * aux_pairs
        symbol = _CODE_TO_SYMBOL.get(code)
        if symbol is None:
            kept.append(BeatAnnotation(sample_index=ts, code="?",
                                       type_code=code, known=False))
        elif symbol in _BEAT_SYMBOLS:
            kept.append(BeatAnnotation(sample_index=ts, code=symbol,
                                       type_code=code))
        else:
            skipped += 1
    if pos < n:
        raise MalformedAnnotationStream("stream ends on a half byte pair",
                                        offset=pos)
    return kept, skipped


def read_annotations(data: bytes) -> list[BeatAnnotation]:
    """Decode an annotation stream, returning beat-level annotations."""
    return read_annotations_detailed(data)[0]


def _read_skip_interval(data: bytes, pos: int) -> int:
    # 4-byte interval, stored as two little-endian 16-bit words,
    # most-significant word first.
    high = data[pos] | (data[pos + 1] << 8)
    low = data[pos + 2] | (data[pos + 3] << 8)
    value = (high << 16) | low
    if value >= 1 << 31:
        value -= 1 << 32
    return value


def write_annotations(annotations: list[BeatAnnotation]) -> bytes:
    """Encode annotations (canonical form: skip escape for deltas > 1023)."""
    out = bytearray()
    prev = 0
    for ann in annotations:
        if ann.sample_index < prev:
            raise MalformedAnnotationStream(
                f"sample indices must be non-decreasing; {ann.sample_index} "
                f"follows {prev}")
        delta = ann.sample_index - prev
        prev = ann.sample_index
        code = ann.type_code
        if not 1 <= code <= 49:
            raise MalformedAnnotationStream(
                f"type code {code} out of the 6-bit annotation range")
        if delta > 1023:
            out += bytes([0, _SKIP << 2])
            out += bytes([(delta >> 16) & 0xFF, (delta >> 24) & 0xFF,
                          delta & 0xFF, (delta >> 8) & 0xFF])
            delta_low = 0
        else:
            delta_low = delta
        out += bytes([delta_low & 0xFF, (code << 2) | (delta_low >> 8)])
    out += bytes([0, 0])
    return bytes(out)


def annotations_to_csv(annotations: list[BeatAnnotation]) -> str:
    """Render annotations as ``sample_index,code,class`` CSV text."""
    lines = ["sample_index,code,class"]
    for ann in annotations:
        cls = ann.anomaly_class
        lines.append(f"{ann.sample_index},{ann.code},"
                     f"{cls.value if cls else ''}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# whole records

def read_record(path_prefix: str | Path) -> EcgRecord:
    """Read ``<prefix>.hea`` + ``.dat`` (+ ``.atr`` when present)."""
    prefix = Path(path_prefix)
    header = parse_header(prefix.with_suffix(".hea").read_text())
    dat = prefix.with_suffix(".dat")
    if not dat.exists() and header.signals:
        candidate = prefix.parent / header.signals[0].filename
        if candidate.exists():
            dat = candidate
    signals = read_signal(header, dat.read_bytes())
    atr = prefix.with_suffix(".atr")
    annotations = read_annotations(atr.read_bytes()) if atr.exists() else []
    _check_record(header, signals, annotations)
    return EcgRecord(header=header, signals=signals, annotations=annotations)


def write_record(record: EcgRecord, directory: str | Path) -> Path:
    """Write header, signal and annotation files; returns the path prefix."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    prefix = directory / record.header.record_name
    prefix.with_suffix(".hea").write_text(write_header(record.header))
    prefix.with_suffix(".dat").write_bytes(
        write_signal(record.header, record.signals))
    if record.annotations:
        prefix.with_suffix(".atr").write_bytes(
            write_annotations(record.annotations))
    return prefix


def _check_record(header, signals, annotations):
    for s in signals:
        if len(s) != header.n_samples:
            raise LengthMismatch(
                f"decoded lead length {len(s)} != header n_samples "
                f"{header.n_samples}")
    last = -1
    for ann in annotations:
        if ann.sample_index <= last:
            raise MalformedAnnotationStream(
                f"annotation sample {ann.sample_index} not strictly "
                f"increasing")
        if ann.sample_index >= header.n_samples:
            raise MalformedAnnotationStream(
                f"annotation sample {ann.sample_index} beyond record end "
                f"{header.n_samples}")
        last = ann.sample_index
