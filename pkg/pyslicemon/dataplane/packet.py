from typing import Dict, List, Optional

from pyslicemon.dataplane.header import TelemetryHeader


class Packet:
    __slots__ = ('sliceId', 'pathId', 'seq', 'sizeBytes', 'createdNs', 'header', 'hopIndex', 'ingressNs',
                 'egressNs', 'headerBytes', 'telemetryBits', 'hopLatencies', 'hopLoss', 'upCount', 'hopSamples')

    def __init__(self, sliceId: int, pathId: int, seq: int, sizeBytes: int, createdNs: int = 0,
                 header: Optional[TelemetryHeader] = None):
        self.sliceId = sliceId
        self.pathId = pathId
        # Per-(slice, path) sequence number stamped by the source host, starting at 1.
        self.seq = seq
        self.sizeBytes = sizeBytes
        self.createdNs = createdNs
        self.header = header if header is not None else TelemetryHeader()
        self.hopIndex = 0
        self.ingressNs = 0
        self.egressNs = 0
        # Telemetry bytes currently carried on the wire.
        self.headerBytes = 0
        # Header bits written by the switches along the path.
        self.telemetryBits = 0
        # Ground truth, filled in by the simulator.
        self.hopLatencies: List[float] = []
        self.hopLoss: List[float] = []
        self.upCount = seq
        # Per-hop latency values written by sampling schemes: {hop index: ms}.
        self.hopSamples: Optional[Dict[int, float]] = None

    def getWireBytes(self) -> int:
        return self.sizeBytes + self.headerBytes

    def __repr__(self):
        return (f'Packet(sliceId={self.sliceId}, pathId={self.pathId}, seq={self.seq}, '
                f'sizeBytes={self.sizeBytes}, hopIndex={self.hopIndex})')
