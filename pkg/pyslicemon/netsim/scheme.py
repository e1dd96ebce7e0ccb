"""
Monitoring schemes plug into the simulator's egress and delivery hooks.
"""
import abc
import logging
from typing import Dict, List, Optional, Tuple

import pandas as pd
import six

from pyslicemon.core import MetricKind
from pyslicemon.core.errors import HeaderOverflowError
from pyslicemon.dataplane.buckets import BucketArrays
from pyslicemon.dataplane.header import fromWire
from pyslicemon.dataplane.switch import MissNotification, SwitchState
from pyslicemon.netsim.collector import CollectorView

logger = logging.getLogger(__name__)


@six.add_metaclass(abc.ABCMeta)
class MonitoringScheme(object):
    """Base class for monitoring schemes.

    .. note::
        This is a base class and should not be used directly.
    """

    NAME = 'base'

    def __init__(self):
        self.__sim = None
        self.__view = CollectorView(perPacket=True)

    def attach(self, sim):
        self.__sim = sim

    def getSimulation(self):
        return self.__sim

    def getCollectorView(self) -> CollectorView:
        return self.__view

    def _setCollectorView(self, view: CollectorView):
        self.__view = view

    def getMetrics(self, slice) -> List[MetricKind]:
        return slice.getMetrics()

    def getEpochNs(self) -> Optional[int]:
        return None

    def getExportNs(self) -> Optional[int]:
        return None

    def onEpoch(self, nowNs: int):
        pass

    def onExport(self, nowNs: int):
        pass

    def onNotification(self, notification):
        pass

    def getStats(self) -> dict:
        return {}

    def getDecisionLog(self) -> pd.DataFrame:
        return pd.DataFrame()

    @abc.abstractmethod
    def onEgress(self, switchId: int, pkt, nowNs: int):
        """Runs at the egress pipeline of switchId; may grow pkt.headerBytes and pkt.telemetryBits."""
        raise NotImplementedError()

    @abc.abstractmethod
    def onDeliver(self, pkt, nowNs: int):
        """Runs when pkt reaches its egress host; records reports and estimates in the collector view."""
        raise NotImplementedError()


class ChangeTriggeredScheme(MonitoringScheme):
    """Change-triggered telemetry driven by a controller (adaptive or static)."""

    NAME = 'adaptive'

    def __init__(self, controller, name: Optional[str] = None):
        super(ChangeTriggeredScheme, self).__init__()
        self.__controller = controller
        self.__switches: Dict[int, SwitchState] = {}
        self.__overflows = 0
        self.__reports = 0
        if name:
            self.NAME = name

    def getController(self):
        return self.__controller

    def getSwitches(self) -> Dict[int, SwitchState]:
        return self.__switches

    def attach(self, sim):
        super(ChangeTriggeredScheme, self).attach(sim)
        config = sim.getConfig()
        for switchId in sim.getTopology().getSwitches():
            buckets = BucketArrays(config.bucketArrays, config.bucketWidth, config.hashSeed)
            self.__switches[switchId] = SwitchState(switchId, buckets, sim.getPaths(), config.headroomBytes,
                                                    config.scaleFactor, config.reservoirSize, config.shimPerHop)
        self.__controller.start(self)

    def getEpochNs(self) -> Optional[int]:
        if not getattr(self.__controller, 'CLOSED_LOOP', True):
            return None
        return self.getSimulation().getConfig().getEpochNs()

    # Controller context.
    def pollReservoirs(self) -> Dict[Tuple[int, MetricKind, int], List[float]]:
        merged: Dict[Tuple[int, MetricKind, int], List[float]] = {}
        for switchId in sorted(self.__switches):
            for key, samples in self.__switches[switchId].pollReservoirs().items():
                merged.setdefault(key, []).extend(samples)
        return merged

    def deployThresholds(self, assignment):
        for switchId in sorted(self.__switches):
            self.__switches[switchId].deployThresholds(assignment)

    def onEpoch(self, nowNs: int):
        self.__controller.runEpoch(self)

    def onEgress(self, switchId: int, pkt, nowNs: int):
        switch = self.__switches[switchId]
        try:
            switch.processPacket(pkt)
        except HeaderOverflowError as e:
            self.__overflows += 1
            logger.warning(f'{e}; forwarding without this hop\'s telemetry')
        for notification in switch.drainNotifications():
            self.getSimulation().sendNotification(notification)

    def onNotification(self, notification: MissNotification):
        switch = self.__switches[notification.toSwitch]
        switch.onMissNotification(notification)
        for forwarded in switch.drainNotifications():
            self.getSimulation().sendNotification(forwarded)

    def onDeliver(self, pkt, nowNs: int):
        view = self.getCollectorView()
        for metric, report in pkt.header.reports.items():
            view.report(pkt.sliceId, pkt.pathId, metric, nowNs, fromWire(metric, report.value))
            self.__reports += 1
        for metric in self.getSimulation().getMetrics(pkt.sliceId):
            view.estimate(pkt.sliceId, pkt.pathId, metric, nowNs)

    def getStats(self) -> dict:
        lookups = sum(s.getStats().lookups for s in self.__switches.values())
        misses = sum(s.getStats().misses for s in self.__switches.values())
        return {
            'lookups': lookups,
            'misses': misses,
            'miss_rate': misses / lookups if lookups else 0.0,
            'evictions': sum(s.getStats().evictions for s in self.__switches.values()),
            'insertions': sum(s.getStats().insertions for s in self.__switches.values()),
            'forced_insertions': sum(s.getStats().forcedInsertions for s in self.__switches.values()),
            'forced_bits': sum(s.getStats().forcedBits for s in self.__switches.values()),
            'notifications': sum(s.getStats().notificationsSent for s in self.__switches.values()),
            'header_overflows': self.__overflows,
            'collector_reports': self.__reports,
        }

    def getDecisionLog(self) -> pd.DataFrame:
        return self.__controller.getDecisionLog()
