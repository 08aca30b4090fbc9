"""Capacity search: the largest user count that keeps enough users reliable."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from ..traces import HapticTrace
from .config import SimConfig
from .engine import run_sim

logger = logging.getLogger(__name__)


@dataclass
class CapacityResult:
    capacity: int                 # 0 when no examined count passed
    rows: list                    # (users, n_satisfied, frac_satisfied)


def capacity_search(cfg: SimConfig, u_range, satisfied_frac: float = 0.95,
                    trace: HapticTrace | None = None) -> CapacityResult:
    """Scan ascending user counts; a count passes when at least
    ``satisfied_frac`` of its users meet the dropout threshold.

    The scan stops early after a failure is confirmed by the next count;
    a pass following a failure is logged as non-monotone and the scan
    continues.  The channel profile is re-resolved per user count (synthetic
    per-user streams are stable, so existing users keep their channels).
    """
    u_list = list(u_range)
    if not u_list:
        raise ValueError("u_range must contain at least one user count")
    if any(b <= a for a, b in zip(u_list, u_list[1:])) or u_list[0] < 1:
        raise ValueError("u_range must be ascending positive user counts")

    capacity = 0
    rows = []
    failed_once = False
    for users in u_list:
        run_cfg = cfg.with_users(users)
        metrics = run_sim(run_cfg, trace=trace)
        ok = metrics.satisfied(cfg.satisfaction_threshold)
        n_ok = int(ok.sum())
        frac = n_ok / users
        rows.append((users, n_ok, frac))
        passed = frac >= satisfied_frac - 1e-12
        logger.debug("U=%d: %d/%d satisfied (%s)", users, n_ok, users,
                     "pass" if passed else "fail")
        if passed:
            if failed_once:
                logger.warning("non-monotone satisfaction: U=%d passes after a "
                               "failure", users)
                failed_once = False
            capacity = users
        else:
            if failed_once:
                break  # failure confirmed at two consecutive counts
            failed_once = True
    return CapacityResult(capacity=capacity, rows=rows)
