###############################################################################
# WORKER POOL
# Runs independent study jobs across processes and keeps run statistics
###############################################################################

import os
import time
import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence

logger = logging.getLogger(__name__)


class WorkerPool:
    """Process pool for per-sample measurements; a failed job yields None"""

    def __init__(self, workers: Optional[int] = None):
        self.workers = max(1, workers or os.cpu_count() or 1)
        self._executor = None
        self.stats = self._empty_stats()

    @staticmethod
    def _empty_stats() -> Dict[str, Any]:
        return {
            'jobs_run': 0,
            'jobs_failed': 0,
            'elapsed_s': 0.0,
            'errors': []
        }

    def start(self):
        """Start the worker processes"""
        if self._executor is not None:
            return
        self._executor = ProcessPoolExecutor(max_workers=self.workers)
        logger.info(f"Worker pool started with {self.workers} processes")

    def stop(self):
        """Stop the worker processes"""
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def __enter__(self) -> 'WorkerPool':
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.stop()

    def map(self, fn: Callable[..., Any], jobs: Iterable[Sequence[Any]]) -> List[Any]:
        """fn(*job) for every job, in job order"""
        jobs = list(jobs)
        results: List[Any] = [None] * len(jobs)
        started = time.perf_counter()
        owned = self._executor is None
        self.start()
        try:
            futures = {self._executor.submit(fn, *job): i for i, job in enumerate(jobs)}
            for future in as_completed(futures):
                index = futures[future]
                self.stats['jobs_run'] += 1
                try:
                    results[index] = future.result()
                except Exception as e:
                    error_msg = f"Job {jobs[index]} failed: {e}"
                    logger.error(error_msg)
                    self.stats['jobs_failed'] += 1
                    self.stats['errors'].append(error_msg)
        finally:
            if owned:
                self.stop()
        self.stats['elapsed_s'] += time.perf_counter() - started

        if self.stats['jobs_failed']:
            logger.warning(f"{self.stats['jobs_failed']} of {self.stats['jobs_run']} jobs failed")
        return results

    def get_stats(self) -> Dict[str, Any]:
        return dict(self.stats)
