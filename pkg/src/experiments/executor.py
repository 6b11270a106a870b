"""
Worker Pool
Fans independent work items out to a bounded thread pool with a Rich
progress bar. Results come back keyed and sorted, so emission order never
depends on completion order.
"""

from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Any, Callable, Dict, Hashable, Mapping

from rich.progress import Progress

from utils.logger import get_logger

logger = get_logger(__name__)


def run_jobs(
    jobs: Mapping[Hashable, Callable[[], Any]],
    threads: int = 1,
    description: str = "Running",
    show_progress: bool = True,
) -> Dict[Hashable, Any]:
    """
    Run every job and return {key: result} in sorted key order.

    The first failing job's exception is re-raised after the pool drains.
    """
    results: Dict[Hashable, Any] = {}
    errors: Dict[Hashable, BaseException] = {}
    keys = sorted(jobs)

    with Progress(disable=not show_progress, transient=True) as progress:
        task = progress.add_task(f"[cyan]{description}...", total=len(keys))
        if threads <= 1 or len(keys) <= 1:
            for key in keys:
                results[key] = jobs[key]()
                progress.advance(task)
        else:
            with ThreadPoolExecutor(max_workers=threads) as executor:
                future_to_key = {executor.submit(jobs[key]): key for key in keys}
                for future in as_completed(future_to_key):
                    key = future_to_key[future]
                    try:
                        results[key] = future.result()
                    except Exception as e:
                        logger.error(f"Job {key} failed: {e}")
                        errors[key] = e
                    progress.advance(task)

    if errors:
        raise errors[sorted(errors)[0]]
    return {key: results[key] for key in keys}
