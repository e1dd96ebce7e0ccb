"""
Output port with per-class FIFO queues, weighted round-robin service and a
shared byte buffer.
"""
from collections import deque
from typing import Deque, Dict, List, Optional

from pyslicemon.core import SliceType


class PortQueueSet:
    """
    :param capacityBytes: Shared buffer of the port.
    :type capacityBytes: float.
    :param weights: WRR weight, in packets per round, of each class.
    :type weights: dict.
    """

    def __init__(self, capacityBytes: float, weights: Dict[SliceType, int]):
        if any(w < 1 for w in weights.values()):
            raise ValueError('WRR weights must be positive integers')
        self.__capacity = capacityBytes
        self.__order: List[SliceType] = sorted(weights)
        self.__weights = dict(weights)
        self.__queues: Dict[SliceType, Deque] = {c: deque() for c in self.__order}
        self.__bytes = 0
        self.__packets = 0
        self.__pointer = 0
        self.__credit = self.__weights[self.__order[0]]
        self.served: Dict[SliceType, int] = {c: 0 for c in self.__order}
        self.drops: Dict[SliceType, int] = {c: 0 for c in self.__order}
        self.busy = False
        self.busyNs = 0
        self.peakBytes = 0

    def getBytes(self) -> int:
        return self.__bytes

    def __len__(self):
        return self.__packets

    def enqueue(self, item, nBytes: int, cls: SliceType) -> bool:
        """Appends item to its class queue; returns False (and counts a drop) when the buffer is full."""
        if self.__bytes + nBytes > self.__capacity:
            self.drops[cls] += 1
            return False
        self.__queues[cls].append((item, nBytes))
        self.__bytes += nBytes
        self.__packets += 1
        self.peakBytes = max(self.peakBytes, self.__bytes)
        return True

    def dequeue(self) -> Optional[object]:
        if self.__packets == 0:
            return None
        while True:
            cls = self.__order[self.__pointer]
            queue = self.__queues[cls]
            if queue and self.__credit > 0:
                self.__credit -= 1
                item, nBytes = queue.popleft()
                self.__bytes -= nBytes
                self.__packets -= 1
                self.served[cls] += 1
                return item
            self.__pointer = (self.__pointer + 1) % len(self.__order)
            self.__credit = self.__weights[self.__order[self.__pointer]]
