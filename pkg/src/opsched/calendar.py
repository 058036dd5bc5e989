"""Integer interval arithmetic over machine unavailability calendars.

A calendar is a tuple of ``(start, end)`` pairs, sorted by start and pairwise
disjoint. Each pair is the closed downtime ``[start, end]``; the machine
processes nothing strictly between ``start`` and ``end``. Processing may be
interrupted by a downtime and resumes at its end. Setups may not.
"""

from __future__ import annotations

Calendar = tuple[tuple[int, int], ...]


def _first_ending_after(cal: Calendar, t: int) -> int:
    """Index of the first period whose end is strictly greater than ``t``."""
    lo, hi = 0, len(cal)
    while lo < hi:
        mid = (lo + hi) // 2
        if cal[mid][1] <= t:
            lo = mid + 1
        else:
            hi = mid
    return lo


def is_valid_start(cal: Calendar, s: int) -> bool:
    """True iff ``s`` is not inside ``[start, end)`` of any period."""
    idx = _first_ending_after(cal, s)
    return idx == len(cal) or s < cal[idx][0]


def is_valid_completion(cal: Calendar, c: int) -> bool:
    """True iff ``c`` is not inside ``(start, end]`` of any period."""
    idx = _first_ending_after(cal, c - 1)
    return idx == len(cal) or c <= cal[idx][0]


def earliest_start(cal: Calendar, lb: int, setup: int) -> int:
    """Smallest ``s >= lb`` whose setup window ``(s - setup, s]`` avoids every period.

    ``s`` itself must also avoid ``[start, end)``, which only adds a condition
    when ``setup == 0``.
    """
    s = lb
    idx = _first_ending_after(cal, s - setup) if setup else _first_ending_after(cal, s)
    while idx < len(cal):
        a, b = cal[idx]
        if setup:
            clash = a <= s and s - setup < b
        else:
            clash = a <= s < b
        if not clash:
            if s < a:
                break
            idx += 1
            continue
        s = b + setup
        idx += 1
    return s


def completion_time(cal: Calendar, s: int, p: int) -> tuple[int, int]:
    """Completion of ``p`` units of resumable work started at ``s``.

    Returns ``(c, u)`` with ``c`` the smallest instant at which ``p`` units of
    available time have elapsed and ``u`` the downtime inside ``[s, c]``. A
    completion that would land inside ``(start, end]`` is pulled back to
    ``start``, which the smallest-instant rule gives for free.
    """
    t = s
    remaining = p
    u = 0
    idx = _first_ending_after(cal, s)
    while idx < len(cal):
        a, b = cal[idx]
        if t + remaining <= a:
            break
        if a > t:
            remaining -= a - t
        u += b - max(a, t)
        t = b
        idx += 1
    return t + remaining, u


def partial_completion(cal: Calendar, s: int, p_bar: int) -> int:
    """Instant at which the first ``p_bar`` units of work started at ``s`` are done."""
    return completion_time(cal, s, p_bar)[0]


def downtime_between(cal: Calendar, a: int, b: int) -> int:
    """Size of ``[a, b]`` intersected with the union of the periods."""
    if b <= a:
        return 0
    total = 0
    idx = _first_ending_after(cal, a)
    while idx < len(cal):
        lo, hi = cal[idx]
        if lo >= b:
            break
        total += min(hi, b) - max(lo, a)
        idx += 1
    return total


def completion_lower_bound(cal: Calendar, c_lb: int) -> int:
    """Move a completion bound lying in ``(start, end]`` to ``end + 1``."""
    idx = _first_ending_after(cal, c_lb - 1)
    if idx < len(cal):
        a, b = cal[idx]
        if a < c_lb <= b:
            return b + 1
    return c_lb


def compute_delay(cal: Calendar, c: int, c_lb: int) -> int:
    """Available machine time between a completion ``c`` and its lower bound."""
    c_hat = completion_lower_bound(cal, c_lb)
    return (c_hat - c) - downtime_between(cal, c, c_hat)


def sorted_periods(periods) -> Calendar:
    return tuple(sorted((int(a), int(b)) for a, b in periods))


__all__ = [
    "Calendar",
    "compute_delay",
    "completion_lower_bound",
    "completion_time",
    "downtime_between",
    "earliest_start",
    "is_valid_completion",
    "is_valid_start",
    "partial_completion",
    "sorted_periods",
]
