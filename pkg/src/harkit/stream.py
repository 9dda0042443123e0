"""Replay-driven real-time prediction with post-jump debounce."""
from __future__ import annotations

import logging
import queue
import threading
import time
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

import numpy as np

from .dataset import read_raw_stream
from .features import window_feature_row
from .signal import WINDOW_SIZE, FilterConfig, SensorSample, SensorWindow

log = logging.getLogger(__name__)

JUMPS = frozenset({"jump_left", "jump_right"})
STEP = WINDOW_SIZE // 2
EVENT_LOG_HEADER = ("at_ms", "label", "confidence", "suppressed")


@dataclass(frozen=True)
class ActivityEvent:
    label: Optional[str]
    at_ms: int
    confidence: float
    suppressed: bool = False
    sample_index: int = 0
    error: Optional[str] = None


@dataclass
class DebounceState:
    """Quiet period armed by an emitted jump.

    Every prediction that lands less than ``quiet_window_ms`` after the arming
    jump is flagged suppressed. Suppressed events never re-arm or extend the
    window; only an unsuppressed jump does.
    """

    quiet_window_ms: int = 1000
    last_jump_at_ms: Optional[int] = None

    def __post_init__(self):
        if self.quiet_window_ms <= 0:
            raise ValueError("quiet_window_ms must be positive")

    def observe(self, label, at_ms: int) -> bool:
        """Register a prediction; returns True when it must be suppressed."""
        if self.last_jump_at_ms is not None and at_ms - self.last_jump_at_ms < self.quiet_window_ms:
            return True
        if label in JUMPS:
            self.last_jump_at_ms = at_ms
        return False


def replay(path, rate: float = 50.0, realtime: bool = False,
           clock=time.monotonic, sleep=time.sleep) -> Iterator[SensorSample]:
    """Yield the samples of a raw CSV in file order.

    In realtime mode sample ``i`` is released no earlier than ``i / rate``
    seconds after the first one.
    """
    stream = read_raw_stream(path)
    period = 1.0 / rate
    start = clock()
    for i in range(len(stream)):
        if realtime:
            delay = start + i * period - clock()
            if delay > 0:
                sleep(delay)
        yield SensorSample.from_array(stream.timestamps[i], stream.data[i])


def buffered(feed: Iterable, maxsize: int = WINDOW_SIZE) -> Iterator:
    """Run ``feed`` on a producer thread with a bounded hand-off queue."""
    q = queue.Queue(maxsize=maxsize)
    done = object()
    failure = []

    def produce():
        try:
            for item in feed:
                q.put(item)
        except BaseException as exc:  # re-raised on the consumer side
            failure.append(exc)
        finally:
            q.put(done)

    t = threading.Thread(target=produce, name="harkit-feed", daemon=True)
    t.start()
    while True:
        item = q.get()
        if item is done:
            break
        yield item
    t.join()
    if failure:
        raise failure[0]


def streaming_predict(feed: Iterable[SensorSample], model, filters: Optional[FilterConfig] = None,
                      debounce: Optional[DebounceState] = None) -> Iterator[ActivityEvent]:
    """Classify the stream every 32 samples once 64 have arrived.

    ``model`` needs ``feature_names`` and ``predict(row) -> Prediction``
    (a :class:`~harkit.models.TrainedModel` qualifies). Feature errors are
    reported on the event of the offending window and the stream continues.
    """
    if filters is None:
        filters = getattr(model, "filters", None) or FilterConfig()
    debounce = DebounceState() if debounce is None else debounce
    names = tuple(model.feature_names)
    values = deque(maxlen=WINDOW_SIZE)
    stamps = deque(maxlen=WINDOW_SIZE)
    count = 0
    for sample in feed:
        values.append(sample.as_array())
        stamps.append(sample.timestamp_ms)
        count += 1
        if count < WINDOW_SIZE or (count - WINDOW_SIZE) % STEP:
            continue
        at_ms = int(stamps[-1])
        try:
            window = SensorWindow(np.array(values), np.array(stamps))
            row = window_feature_row(window, filters, names)
            pred = model.predict(row)
        except Exception as exc:
            log.warning("window ending at sample %d failed: %s", count, exc)
            yield ActivityEvent(None, at_ms, 0.0, False, count, error=str(exc))
            continue
        suppressed = debounce.observe(pred.label, at_ms)
        yield ActivityEvent(pred.label, at_ms, float(pred.confidence), suppressed, count)


def format_event(event: ActivityEvent) -> str:
    label = event.label if event.label is not None else ""
    return f"{event.at_ms},{label},{event.confidence:.6f},{'true' if event.suppressed else 'false'}\n"


def event_log(events: Iterable[ActivityEvent], path) -> int:
    """Write events as CSV, flushing after each row; returns the row count."""
    n = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(EVENT_LOG_HEADER) + "\n")
        fh.flush()
        for event in events:
            fh.write(format_event(event))
            fh.flush()
            n += 1
    return n
