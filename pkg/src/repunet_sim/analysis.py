"""Summaries over a finished run's logs."""

from __future__ import annotations

import numpy as np


def _entry(result, round):
    if round < 0:
        round = len(result.logs) + round
    return result.logs[round]


def mean_reputation(result, round: int, subjects: str = "attackers", evaluators: str = "benign") -> float:
    """Mean final reputation held by ``evaluators`` about ``subjects`` at ``round``.

    Both arguments take "attackers", "benign" or "all". Returns NaN when no
    (evaluator, subject) link qualifies.
    """
    def pick(node, which):
        if which == "all":
            return True
        return (node in result.attackers) == (which == "attackers")

    vals = [link.reputation for link in _entry(result, round).links
            if pick(link.node, evaluators) and pick(link.neighbor, subjects)]
    return float(np.mean(vals)) if vals else float("nan")


def reputation_series(result, subjects: str = "attackers", evaluators: str = "benign") -> list:
    return [mean_reputation(result, e.round, subjects, evaluators) for e in result.logs]


def mean_f1(result, round: int = -1, benign_only: bool = True) -> float:
    vals = [rec.f1 for rec in _entry(result, round).nodes
            if not (benign_only and rec.is_attacker)]
    return float(np.mean(vals)) if vals else float("nan")


def mean_accepted(result, round: int = -1, benign_only: bool = True) -> float:
    vals = [rec.accepted_models for rec in _entry(result, round).nodes
            if not (benign_only and rec.is_attacker)]
    return float(np.mean(vals)) if vals else float("nan")


def total_cost(result, benign_only: bool = True) -> int:
    return int(sum(rec.cost_units for e in result.logs for rec in e.nodes
                   if not (benign_only and rec.is_attacker)))


def links_toward(result, round: int, subjects: str = "attackers"):
    """Link records at ``round`` from benign evaluators toward ``subjects``."""
    want_attacker = subjects == "attackers"
    return [link for link in _entry(result, round).links
            if link.node not in result.attackers and (link.neighbor in result.attackers) == want_attacker]
