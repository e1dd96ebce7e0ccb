"""
Typed simulator events on top of simpy's event queue.

simpy orders its heap by (time, priority, event id); the event kind is used as
the priority so that simultaneous events resolve by kind, then insertion order.
"""
from typing import Any, Callable

import simpy

from pyslicemon.core import EventKind


class SimEvent(simpy.Event):
    """An event that fires `callback(event)` after `delayNs` simulated nanoseconds."""

    def __init__(self, env: simpy.Environment, kind: EventKind, delayNs: int, callback: Callable[['SimEvent'], Any],
                 payload: Any = None):
        if delayNs < 0:
            raise ValueError(f'negative delay {delayNs} for {kind}')
        super().__init__(env)
        self.kind = kind
        self.payload = payload
        self._ok = True
        self._value = payload
        self.callbacks.append(callback)
        env.schedule(self, int(kind), int(delayNs))

    def __repr__(self):
        return f'SimEvent(kind={self.kind}, payload={self.payload!r})'


def schedule(env: simpy.Environment, kind: EventKind, delayNs: int, callback, payload=None) -> SimEvent:
    return SimEvent(env, kind, delayNs, callback, payload)
