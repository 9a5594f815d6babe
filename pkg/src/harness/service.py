import asyncio
import time
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Callable, Optional, Sequence, Type

from ..errors import NumericalError, StateBlowup
from ..utils.logger import get_logger

if TYPE_CHECKING:
    from ..reporting import ProgressReporter


@dataclass
class JobOutcome:
    index: int
    value: Any = None
    error: Optional[NumericalError] = None

    @property
    def ok(self) -> bool:
        return self.error is None


class ExperimentService:
    """Runs independent replications on a bounded pool of worker threads.

    Results come back in submission order whatever the worker count, so the
    CSV assembled from them does not depend on scheduling.
    """

    def __init__(self, workers: int = 1, reporter: Optional["ProgressReporter"] = None):
        if workers < 1:
            raise ValueError(f"workers must be at least 1, got {workers}")
        self.workers = workers
        self.reporter = reporter
        self.logger = get_logger(__name__)
        self._started: Optional[float] = None

    async def run(
        self,
        job: Callable[[Any], Any],
        items: Sequence[Any],
        tolerate: tuple[Type[NumericalError], ...] = (),
        label: str = "",
    ) -> list[JobOutcome]:
        """Apply ``job`` to every item; errors listed in ``tolerate`` become failed outcomes."""
        semaphore = asyncio.Semaphore(self.workers)
        if self._started is None:
            self._started = time.monotonic()

        async def run_one(index: int, item: Any) -> JobOutcome:
            async with semaphore:
                try:
                    value = await asyncio.to_thread(job, item)
                except tolerate as e:
                    self._report_failure(label, index, e)
                    return JobOutcome(index=index, error=e)
                return JobOutcome(index=index, value=value)

        self.logger.debug(f"{label or 'jobs'}: dispatching {len(items)} items on {self.workers} workers")
        return list(await asyncio.gather(*(run_one(i, item) for i, item in enumerate(items))))

    def _report_failure(self, label: str, index: int, error: NumericalError) -> None:
        from ..reporting import ReplicationFailed

        step = error.step if isinstance(error, StateBlowup) else None
        self.logger.warning(f"{label or 'job'} #{index} failed: {error}")
        if self.reporter:
            self.reporter.notify_replication_failed(
                ReplicationFailed(label=label, replication=index, error_message=str(error), step=step)
            )

    @property
    def elapsed(self) -> float:
        return 0.0 if self._started is None else time.monotonic() - self._started

    def finish(self, command: str, replications: int, failures: int, outputs: Sequence[str]) -> None:
        from ..reporting import ExperimentFinished

        if self.reporter:
            self.reporter.notify_experiment_finished(
                ExperimentFinished(
                    command=command,
                    replications=replications,
                    failures=failures,
                    elapsed=self.elapsed,
                    outputs=[str(o) for o in outputs],
                )
            )
