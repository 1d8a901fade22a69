# src/montecarlo/workers.py
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import List

logger = logging.getLogger(__name__)


class BatchWorker:
    """ Runs one pulse batch of a simulation plan; may be cancelled before it starts. """

    def __init__(self, plan, index: int):
        self.plan = plan
        self.index = index
        self._is_cancelled = False

    def run(self):
        """ Returns the BatchResult, or None when cancelled before starting. """
        if self._is_cancelled:
            logger.debug(f"Batch {self.index}: cancelled before starting")
            return None
        start_time = time.time()
        result = self.plan.simulate_batch(self.index)
        logger.debug(f"Batch {self.index}: {result.n_pairs} pairs in {time.time() - start_time:.2f}s")
        return result

    def cancel(self):
        self._is_cancelled = True


def run_batches(plan, workers: int = 1) -> List:
    """
    Runs every batch of `plan`, serially or on a thread pool. Results come back
    in batch order, so the merged stream does not depend on `workers`.
    """
    batch_workers = [BatchWorker(plan, index) for index in range(plan.n_batches)]
    if workers <= 1 or len(batch_workers) == 1:
        return [worker.run() for worker in batch_workers]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(worker.run) for worker in batch_workers]
        try:
            return [future.result() for future in futures]
        except BaseException:
            logger.error("Batch failed; cancelling the remaining batches")
            for worker in batch_workers:
                worker.cancel()
            raise
