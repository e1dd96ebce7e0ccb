"""defining constants"""
from pyslicemon.core import MetricKind, SliceType, WorkloadMix

SLA_TABLE_VERSION = '1'

# Per slice type: SLA ranges (ms for latency/jitter, fraction for loss),
# packet size range (bytes), per-user rate range (Mbps), user count range.
SLA_TABLE = {
    SliceType.URLLC: {
        'Sla': {
            MetricKind.LATENCY: (1.0, 5.0),
            MetricKind.JITTER: (0.1, 1.0),
            MetricKind.LOSS: (1e-6, 1e-5),
        },
        'PacketBytes': (20, 250),
        'UserRateMbps': (1.0, 10.0),
        'Users': (3, 10),
    },
    SliceType.EMBB: {
        'Sla': {
            MetricKind.LATENCY: (10.0, 50.0),
            MetricKind.JITTER: (5.0, 30.0),
            MetricKind.LOSS: (1e-3, 1e-2),
        },
        'PacketBytes': (1000, 1500),
        'UserRateMbps': (15.0, 50.0),
        'Users': (10, 20),
    },
    SliceType.MMTC: {
        'Sla': {
            MetricKind.LATENCY: (50.0, 100.0),
            MetricKind.JITTER: (50.0, 100.0),
            MetricKind.LOSS: (0.01, 0.1),
        },
        'PacketBytes': (20, 125),
        'UserRateMbps': (0.001, 0.1),
        'Users': (9000, 11000),
    },
}

MIX_FRACTIONS = {
    WorkloadMix.SP: (0.6, 0.2, 0.2),
    WorkloadMix.BAL: (1 / 3, 1 / 3, 1 / 3),
    WorkloadMix.LP: (0.2, 0.6, 0.2),
}

DEFAULT_TOLERANCE_FRACTION = 0.05

# Telemetry header cost constants, bits.
SHIM_BITS = 24
HOP_METADATA_BITS = 13
NODE_ID_BITS = 10
VALUE_BITS = 32
AUX_BITS = 32
PATH_ID_BITS = 16

HEADER_VERSION = 1

NS_PER_MS = 1_000_000
LOSS_UNITS = 1_000_000_000

DEFAULT_WRR_WEIGHTS = {SliceType.URLLC: 4, SliceType.EMBB: 2, SliceType.MMTC: 1}

P90_INTERVAL_MS = 500
