"""Job queue for oracle validation runs.

A validation run checks one estimand (or one rewrite step) against many
seeded random models. Each seed is an independent job; worker threads drain
a priority queue and the summary is merged in seed order so that the result
does not depend on the number of workers.
"""

from __future__ import annotations

import logging
import math
import time
import uuid
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field
from enum import Enum, auto
from queue import Empty, PriorityQueue
from threading import Lock, Thread

from .config import get_config
from .estimand import Estimand, ProbTerm
from .graph import Graph
from .oracle import (
    OracleError,
    estimand_error,
    evaluate,
    max_abs_difference,
    model_family,
    random_scm,
)

logger = logging.getLogger(__name__)


class JobStatus(Enum):
    """Status of a validation job."""

    QUEUED = auto()
    RUNNING = auto()
    COMPLETED = auto()
    FAILED = auto()
    CANCELLED = auto()


@dataclass
class ValidationJob:
    """One seeded check: `check(seed)` returns the largest absolute error."""

    check: Callable[[int], float]
    seed: int
    label: str = ""
    # The check should find a gap, not agreement
    expect_gap: bool = False
    job_id: str = field(default_factory=lambda: str(uuid.uuid4()))
    priority: int = 0  # Higher = more urgent
    status: JobStatus = JobStatus.QUEUED
    result: float | None = None
    error: str | None = None
    created_at: float = field(default_factory=time.time)
    started_at: float | None = None
    completed_at: float | None = None

    on_complete: Callable[[ValidationJob], None] | None = None

    def __lt__(self, other: ValidationJob) -> bool:
        """Higher priority first, then label and seed."""
        if self.priority != other.priority:
            return self.priority > other.priority
        return (self.label, self.seed) < (other.label, other.seed)


@dataclass
class ValidationSummary:
    """Merged outcome of a validation run."""

    seeds: int
    max_abs_error: float
    failures: list[tuple[str, int, str]] = field(default_factory=list)
    tolerance: float = 1e-9
    # Gap checks: label -> number of seeds whose gap reached `gap`
    gapped: dict[str, int] = field(default_factory=dict)
    gap: float = 1e-6
    gap_quorum: float = 0.95

    @property
    def gaps_hold(self) -> bool:
        """Every gap check shows its gap in at least the quorum of seeds."""
        return all(self.seeds and n / self.seeds >= self.gap_quorum for n in self.gapped.values())

    @property
    def success(self) -> bool:
        return not self.failures and self.max_abs_error <= self.tolerance and self.gaps_hold

    @classmethod
    def merge(
        cls,
        jobs: Iterable[ValidationJob],
        tolerance: float,
        gap: float | None = None,
        gap_quorum: float | None = None,
    ) -> ValidationSummary:
        defaults = get_config().oracle
        gap = gap if gap is not None else defaults.gap
        gap_quorum = gap_quorum if gap_quorum is not None else defaults.gap_quorum
        ordered = sorted(jobs, key=lambda j: (j.label, j.seed))
        failures = [(j.label, j.seed, j.error or j.status.name) for j in ordered if j.result is None]
        errors = [j.result for j in ordered if j.result is not None and not j.expect_gap]
        gapped: dict[str, int] = {}
        for j in ordered:
            if j.expect_gap:
                reached = j.result is not None and j.result >= gap
                gapped[j.label] = gapped.get(j.label, 0) + int(reached)
        return cls(
            seeds=len({j.seed for j in ordered}),
            max_abs_error=max(errors, default=0.0),
            failures=failures,
            tolerance=tolerance,
            gapped=gapped,
            gap=gap,
            gap_quorum=gap_quorum,
        )


class ValidationQueue:
    """Worker pool over seeded validation jobs.

    Provides:
    - Job queuing with priorities
    - Background worker threads
    - Completion callbacks
    - Job cancellation
    """

    def __init__(self, workers: int | None = None, max_history: int = 10_000):
        self._queue: PriorityQueue[ValidationJob] = PriorityQueue()
        self._jobs: dict[str, ValidationJob] = {}
        self._jobs_lock = Lock()
        self._running = False
        self._threads: list[Thread] = []
        self._workers = workers or get_config().search.workers
        self._max_history = max_history

        self.on_job_completed: Callable[[ValidationJob], None] | None = None

    def add(self, job: ValidationJob) -> str:
        """Add a job to the queue and return its ID."""
        with self._jobs_lock:
            self._jobs[job.job_id] = job
        self._queue.put(job)
        logger.debug(
            "Job queued (job_id=%s, label=%s, seed=%d, queue_size=%d)",
            job.job_id,
            job.label,
            job.seed,
            self._queue.qsize(),
        )
        return job.job_id

    def submit(
        self,
        check: Callable[[int], float],
        seed: int,
        label: str = "",
        priority: int = 0,
        on_complete: Callable[[ValidationJob], None] | None = None,
    ) -> str:
        """Create a job for `check` at `seed` and queue it."""
        return self.add(
            ValidationJob(check=check, seed=seed, label=label, priority=priority, on_complete=on_complete)
        )

    def get_job(self, job_id: str) -> ValidationJob | None:
        with self._jobs_lock:
            return self._jobs.get(job_id)

    def jobs(self) -> list[ValidationJob]:
        with self._jobs_lock:
            return list(self._jobs.values())

    def cancel(self, job_id: str) -> bool:
        """Cancel a queued job. Running jobs finish.

        Returns:
            True if the job was found queued and cancelled
        """
        with self._jobs_lock:
            job = self._jobs.get(job_id)
            if not job or job.status != JobStatus.QUEUED:
                return False
            job.status = JobStatus.CANCELLED
        return True

    def start(self) -> None:
        """Start the worker threads."""
        if self._running:
            return
        logger.info("Starting %d validation worker(s)", self._workers)
        self._running = True
        self._threads = [
            Thread(target=self._worker, name=f"validation-{i}", daemon=True)
            for i in range(self._workers)
        ]
        for t in self._threads:
            t.start()

    def wait(self) -> None:
        """Block until every queued job has been taken and processed."""
        self._queue.join()

    def stop(self, wait: bool = True) -> None:
        self._running = False
        if wait:
            for t in self._threads:
                t.join(timeout=30.0)
        self._threads = []

    def clear(self) -> int:
        """Cancel all queued jobs and return how many were cancelled."""
        cleared = 0
        with self._jobs_lock:
            for job in self._jobs.values():
                if job.status == JobStatus.QUEUED:
                    job.status = JobStatus.CANCELLED
                    cleared += 1
        return cleared

    @property
    def queue_size(self) -> int:
        return self._queue.qsize()

    @property
    def is_running(self) -> bool:
        return self._running

    def _worker(self) -> None:
        logger.debug("Validation worker started")
        while self._running:
            try:
                job = self._queue.get(timeout=0.1)
            except Empty:
                continue
            try:
                if job.status == JobStatus.CANCELLED:
                    logger.debug("Skipping cancelled job: %s", job.job_id)
                    continue
                self._process_job(job)
            except Exception as e:
                logger.error("Validation worker error: %s", e, exc_info=True)
            finally:
                self._queue.task_done()
        logger.debug("Validation worker stopped")

    def _process_job(self, job: ValidationJob) -> None:
        with self._jobs_lock:
            if job.status == JobStatus.CANCELLED:
                return
            job.status = JobStatus.RUNNING
        job.started_at = time.time()

        try:
            value = job.check(job.seed)
            if math.isnan(value):
                raise OracleError("comparison produced NaN")
            job.result = value
            job.status = JobStatus.COMPLETED
        except Exception as e:
            logger.warning("Validation job failed (label=%s, seed=%d): %s", job.label, job.seed, e)
            job.status = JobStatus.FAILED
            job.error = str(e)
        finally:
            job.completed_at = time.time()
            elapsed = job.completed_at - (job.started_at or job.completed_at)
            logger.debug(
                "Job completed (job_id=%s, status=%s, time=%.2fs)",
                job.job_id,
                job.status.name,
                elapsed,
            )
            if job.on_complete:
                job.on_complete(job)
            if self.on_job_completed:
                self.on_job_completed(job)
            self._cleanup_history()

    def _cleanup_history(self) -> None:
        """Drop the oldest finished jobs once history exceeds its limit."""
        with self._jobs_lock:
            if len(self._jobs) <= self._max_history:
                return
            finished = [
                (jid, j)
                for jid, j in self._jobs.items()
                if j.status in (JobStatus.COMPLETED, JobStatus.FAILED, JobStatus.CANCELLED)
            ]
            finished.sort(key=lambda x: x[1].completed_at or 0)
            for jid, _ in finished[: len(self._jobs) - self._max_history]:
                del self._jobs[jid]

    def run(
        self,
        checks: dict[str, Callable[[int], float]],
        seeds: int,
        tolerance: float | None = None,
        on_complete: Callable[[ValidationJob], None] | None = None,
        start: int = 0,
        gap_checks: dict[str, Callable[[int], float]] | None = None,
    ) -> ValidationSummary:
        """Run every check at seeds start..start+seeds-1 and merge the results.

        `checks` must agree within the tolerance on every seed; `gap_checks`
        must reach the configured gap on at least the quorum of seeds.
        """
        tolerance = tolerance if tolerance is not None else get_config().oracle.tolerance
        labelled = [(label, check, False) for label, check in sorted(checks.items())]
        labelled += [(label, check, True) for label, check in sorted((gap_checks or {}).items())]
        jobs = [
            ValidationJob(
                check=check, seed=seed, label=label, expect_gap=expect_gap, on_complete=on_complete
            )
            for label, check, expect_gap in labelled
            for seed in range(start, start + seeds)
        ]
        for job in jobs:
            self.add(job)
        started_here = not self._running
        self.start()
        try:
            self.wait()
        finally:
            if started_here:
                self.stop()
        summary = ValidationSummary.merge(jobs, tolerance)
        logger.info(
            "Validation finished (checks=%d, seeds=%d, max_abs_error=%.3g, failures=%d, gaps_hold=%s)",
            len(labelled),
            seeds,
            summary.max_abs_error,
            len(summary.failures),
            summary.gaps_hold,
        )
        return summary


# =============================================================================
# Checks
# =============================================================================


def estimand_check(
    query: ProbTerm, e: Estimand, g: Graph, domains: Iterable[str]
) -> Callable[[int], float]:
    """Gap between an estimand and the query's true value, per seed."""
    doms = frozenset(domains)

    def check(seed: int) -> float:
        return estimand_error(query, e, g, doms, seed)

    return check


def step_check(before: Estimand, after: Estimand, g: Graph, domains: Iterable[str]) -> Callable[[int], float]:
    """Gap between the two sides of one rewrite step, per seed."""
    doms = frozenset(domains)

    def check(seed: int) -> float:
        family = model_family(g, random_scm(g, seed), doms, seed)
        return max_abs_difference(evaluate(before, family), evaluate(after, family))

    return check


__all__ = [
    "JobStatus",
    "ValidationJob",
    "ValidationQueue",
    "ValidationSummary",
    "estimand_check",
    "step_check",
]
