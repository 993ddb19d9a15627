"""Sound belief reward: the largest belief mass on one certified winning support."""

from __future__ import annotations

from typing import Mapping

from .support import CertifiedStructure


def support_of(b: Mapping[int, float]) -> frozenset[int]:
    return frozenset(s for s, p in b.items() if p > 0)


def sound_reward(b: Mapping[int, float], c: CertifiedStructure) -> tuple[float, frozenset[int] | None]:
    """Return ``(value, theta_star)``.

    The value is 1 when the support of ``b`` is itself certified, otherwise
    the maximum of ``b(theta)`` over certified supports strictly inside it
    (0 when there are none). ``theta_star`` is the maximiser, the earliest in
    canonical order on ties, or the support itself in the winning case.
    """
    supp = support_of(b)
    if not supp:
        return 0.0, None
    g = c.graph
    sid = g.ids.get(supp)
    if sid is None:
        sid = g.intern(supp)
    if c.is_winning(sid):
        return 1.0, supp
    best, arg = 0.0, None
    for w in c.k_hat(sid):
        th = g.supports[w]
        mass = sum(b[s] for s in th)
        if mass > best + 1e-15:
            best, arg = mass, th
    return min(best, 1.0), arg


def support_reward_bound(theta: frozenset[int], c: CertifiedStructure) -> str:
    """Classify a support: ``winning``, ``partial`` or ``none``."""
    sid = c.graph.intern(theta)
    if c.is_winning(sid):
        return "winning"
    return "partial" if c.k_hat(sid) else "none"
