import threading
from typing import Optional

from .events import ControllerRetained, EpochCompleted, ExperimentFinished, ReplicationFailed
from ..utils.logger import get_logger


class ProgressFormatter:
    def format_epoch_completed(self, event: EpochCompleted) -> str:
        return (
            f"[{event.label}] epoch {event.epoch} ({event.length} steps, cap {event.amplitude_cap:.4g}): "
            f"err_A={event.err_A:.4g} err_B={event.err_B:.4g} "
            f"radius={event.closed_loop_radius:.4f} status={event.status}"
        )

    def format_controller_retained(self, event: ControllerRetained) -> str:
        return f"[{event.label}] epoch {event.epoch}: previous controller kept ({event.reason})"

    def format_replication_failed(self, event: ReplicationFailed) -> str:
        where = f" at step {event.step}" if event.step is not None else ""
        return f"[{event.label}] replication {event.replication} failed{where}: {event.error_message}"

    def format_experiment_finished(self, event: ExperimentFinished) -> str:
        outputs = ", ".join(event.outputs) if event.outputs else "none"
        return (
            f"{event.command} finished: {event.replications} replications, "
            f"{event.failures} failed, {event.elapsed:.1f}s; wrote {outputs}"
        )


class ProgressReporter:
    """Routes experiment events to the log.

    Notifications may arrive from worker threads; counters are guarded by a lock.
    Epoch events are logged at DEBUG unless ``verbose`` is set.
    """

    def __init__(self, enabled: bool = True, verbose: bool = False, formatter: Optional[ProgressFormatter] = None):
        self.logger = get_logger(__name__)
        self.enabled = enabled
        self.verbose = verbose
        self._formatter = formatter or ProgressFormatter()
        self._lock = threading.Lock()
        self.epochs_completed = 0
        self.controllers_retained = 0
        self.failures: list[ReplicationFailed] = []

    def notify_epoch_completed(self, label: str, state) -> None:
        event = EpochCompleted(
            label=label,
            epoch=state.index,
            length=state.length,
            amplitude_cap=state.amplitude_cap,
            err_A=state.err_A,
            err_B=state.err_B,
            closed_loop_radius=state.closed_loop_radius,
            status=state.status,
        )
        with self._lock:
            self.epochs_completed += 1
        if not self.enabled:
            return
        message = self._formatter.format_epoch_completed(event)
        if self.verbose:
            self.logger.info(message)
        else:
            self.logger.debug(message)

    def notify_controller_retained(self, label: str, state) -> None:
        event = ControllerRetained(label=label, epoch=state.index, reason=state.status)
        with self._lock:
            self.controllers_retained += 1
        if self.enabled:
            self.logger.warning(self._formatter.format_controller_retained(event))

    def notify_replication_failed(self, event: ReplicationFailed) -> None:
        with self._lock:
            self.failures.append(event)
        if self.enabled:
            self.logger.error(self._formatter.format_replication_failed(event))

    def notify_experiment_finished(self, event: ExperimentFinished) -> None:
        if self.enabled:
            self.logger.info(self._formatter.format_experiment_finished(event))
