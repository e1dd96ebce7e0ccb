"""
Two-part telemetry header: a fixed shim plus per-hop metadata, followed by
conditional E_curr / V_aux fields.

Wire layout, big-endian:
    shim: version (8) | hop count (10) | presence bitmap (6)
    hop metadata, path order: node id (10) | anomaly flags (3), packed
    zero padding to a byte boundary
    conditional fields in bitmap order, 32 bits each
Bitmap bits, most significant first: latency value, latency aux, jitter value,
jitter aux, loss value, loss aux.
"""
import math
from typing import Dict, List, Optional

from pyslicemon.core import MetricKind
from pyslicemon.core.constants import (AUX_BITS, HEADER_VERSION, HOP_METADATA_BITS, LOSS_UNITS, NODE_ID_BITS,
                                       NS_PER_MS, SHIM_BITS, VALUE_BITS)
from pyslicemon.core.errors import HeaderDecodeError

INT32_MIN = -(1 << 31)
INT32_MAX = (1 << 31) - 1
UINT32_MASK = (1 << 32) - 1
BITMAP_BITS = 2 * len(MetricKind)
MAX_HOPS = (1 << 10) - 1


def toWire(metric: MetricKind, value: float) -> int:
    """Quantizes a metric value to a saturating signed 32-bit field."""
    scale = LOSS_UNITS if metric == MetricKind.LOSS else NS_PER_MS
    code = int(round(value * scale))
    return max(INT32_MIN, min(INT32_MAX, code))


def fromWire(metric: MetricKind, code: int) -> float:
    scale = LOSS_UNITS if metric == MetricKind.LOSS else NS_PER_MS
    return code / scale


class HopMetadata:
    __slots__ = ('nodeId', 'flags')

    def __init__(self, nodeId: int, flags: int = 0):
        self.nodeId = int(nodeId)
        self.flags = int(flags)

    def __eq__(self, other):
        return isinstance(other, HopMetadata) and (self.nodeId, self.flags) == (other.nodeId, other.flags)

    def __repr__(self):
        return f'HopMetadata(nodeId={self.nodeId}, flags={self.flags})'


class Report:
    __slots__ = ('value', 'aux')

    def __init__(self, value: int, aux: Optional[int] = None):
        self.value = int(value)
        self.aux = None if aux is None else int(aux) & UINT32_MASK

    def __eq__(self, other):
        return isinstance(other, Report) and (self.value, self.aux) == (other.value, other.aux)

    def __repr__(self):
        return f'Report(value={self.value}, aux={self.aux})'


class TelemetryHeader:
    def __init__(self, hops: Optional[List[HopMetadata]] = None,
                 reports: Optional[Dict[MetricKind, Report]] = None, version: int = HEADER_VERSION):
        self.version = version
        self.hops: List[HopMetadata] = list(hops) if hops else []
        self.reports: Dict[MetricKind, Report] = dict(reports) if reports else {}

    def getHopCount(self) -> int:
        return len(self.hops)

    def getBitmap(self) -> int:
        bitmap = 0
        for metric, report in self.reports.items():
            bitmap |= 1 << (BITMAP_BITS - 1 - 2 * int(metric))
            if report.aux is not None:
                bitmap |= 1 << (BITMAP_BITS - 2 - 2 * int(metric))
        return bitmap

    def getSizeBytes(self) -> int:
        conditional = sum(4 + (4 if r.aux is not None else 0) for r in self.reports.values())
        return headerSize(self.getHopCount(), 0) + conditional

    def getConditionalBits(self) -> int:
        return sum(VALUE_BITS + (AUX_BITS if r.aux is not None else 0) for r in self.reports.values())

    def copy(self) -> 'TelemetryHeader':
        return TelemetryHeader([HopMetadata(h.nodeId, h.flags) for h in self.hops],
                               {m: Report(r.value, r.aux) for m, r in self.reports.items()}, self.version)

    def __eq__(self, other):
        return (isinstance(other, TelemetryHeader) and self.version == other.version
                and self.hops == other.hops and self.reports == other.reports)

    def __repr__(self):
        return f'TelemetryHeader(version={self.version}, hops={self.hops}, reports={self.reports})'


def headerSize(hopCount: int, reportsWithAux: int, reportsWithoutAux: int = 0) -> int:
    """Encoded header size in bytes."""
    return 3 + math.ceil(HOP_METADATA_BITS * hopCount / 8) + 8 * reportsWithAux + 4 * reportsWithoutAux


def maxHeaderSize(hopCount: int, metrics: int) -> int:
    return headerSize(hopCount, metrics)


def encodeHeader(h: TelemetryHeader) -> bytes:
    hopCount = h.getHopCount()
    if hopCount > MAX_HOPS:
        raise ValueError(f'{hopCount} hops do not fit the shim')
    acc = (h.version & 0xFF) << 16 | hopCount << BITMAP_BITS | h.getBitmap()
    nbits = SHIM_BITS
    for hop in h.hops:
        acc = (acc << HOP_METADATA_BITS) | ((hop.nodeId & ((1 << NODE_ID_BITS) - 1)) << 3) | (hop.flags & 0x7)
        nbits += HOP_METADATA_BITS
    pad = (-nbits) % 8
    acc <<= pad
    nbits += pad
    for metric in sorted(h.reports):
        report = h.reports[metric]
        acc = (acc << VALUE_BITS) | (report.value & UINT32_MASK)
        nbits += VALUE_BITS
        if report.aux is not None:
            acc = (acc << AUX_BITS) | report.aux
            nbits += AUX_BITS
    return acc.to_bytes(nbits // 8, 'big')


def decodeHeader(data: bytes, hopCount: Optional[int] = None, bitmap: Optional[int] = None) -> TelemetryHeader:
    """Parses a header; hopCount and bitmap, when given, must agree with the shim."""
    if len(data) < 3:
        raise HeaderDecodeError('header shorter than the shim')
    shim = int.from_bytes(data[:3], 'big')
    version = shim >> 16
    wireHops = (shim >> BITMAP_BITS) & MAX_HOPS
    wireBitmap = shim & ((1 << BITMAP_BITS) - 1)
    if hopCount is not None and hopCount != wireHops:
        raise HeaderDecodeError(f'hop count {wireHops} on the wire, expected {hopCount}')
    if bitmap is not None and bitmap != wireBitmap:
        raise HeaderDecodeError(f'bitmap {wireBitmap:06b} on the wire, expected {bitmap:06b}')

    layout = []
    for metric in MetricKind:
        hasValue = bool(wireBitmap & (1 << (BITMAP_BITS - 1 - 2 * int(metric))))
        hasAux = bool(wireBitmap & (1 << (BITMAP_BITS - 2 - 2 * int(metric))))
        if hasAux and not hasValue:
            raise HeaderDecodeError(f'aux bit set without a value for {metric}')
        if hasValue:
            layout.append((metric, hasAux))

    expected = headerSize(wireHops, sum(1 for _, a in layout if a), sum(1 for _, a in layout if not a))
    if len(data) != expected:
        raise HeaderDecodeError(f'header length {len(data)} does not match {expected} implied by the shim')

    acc = int.from_bytes(data, 'big')
    totalBits = len(data) * 8
    pos = SHIM_BITS

    def take(width):
        nonlocal pos
        value = (acc >> (totalBits - pos - width)) & ((1 << width) - 1)
        pos += width
        return value

    hops = []
    for _ in range(wireHops):
        raw = take(HOP_METADATA_BITS)
        hops.append(HopMetadata(raw >> 3, raw & 0x7))
    pos += (-pos) % 8
    reports = {}
    for metric, hasAux in layout:
        value = take(VALUE_BITS)
        if value & (1 << 31):
            value -= 1 << 32
        aux = take(AUX_BITS) if hasAux else None
        reports[metric] = Report(value, aux)
    return TelemetryHeader(hops, reports, version)


def dumpHeader(h: TelemetryHeader) -> str:
    """Text rendering used by golden-file tests."""
    lines = [f'shim version={h.version} hops={h.getHopCount()} bitmap={h.getBitmap():06b} size={h.getSizeBytes()}B']
    for i, hop in enumerate(h.hops):
        lines.append(f'  hop[{i}] node={hop.nodeId} flags={hop.flags:03b}')
    for metric in sorted(h.reports):
        report = h.reports[metric]
        aux = '' if report.aux is None else f' aux={report.aux}'
        lines.append(f'  {metric} value={report.value}{aux}')
    return '\n'.join(lines)
