"""Delivery metrics of replications and their aggregation."""

import logging
import math
from typing import Dict, List, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..protocol.messages import Message
from ..utils.errors import UndefinedMetricError

logger = logging.getLogger(__name__)

METRIC_NAMES = (
    "delivery_ratio_cmr_neighbor",
    "delivery_ratio_cmr",
    "delivery_ratio_portal",
    "mean_hops_to_cmr",
    "collision_count",
)


class ReplicationMetrics(BaseModel):
    """Metrics of one replication."""
    model_config = ConfigDict(frozen=True)

    replication: int = 0
    seed: int = 0
    injected: int = Field(default=0, ge=0)
    delivery_ratio_cmr_neighbor: float = Field(default=0.0, ge=0, le=1)
    delivery_ratio_cmr: float = Field(default=0.0, ge=0, le=1)
    delivery_ratio_portal: float = Field(default=0.0, ge=0, le=1)
    mean_hops_to_cmr: float = math.nan  # nan when no message reached a CMR
    collision_count: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check_order(self) -> "ReplicationMetrics":
        if not self.delivery_ratio_portal <= self.delivery_ratio_cmr <= self.delivery_ratio_cmr_neighbor:
            raise ValueError("delivery ratios must satisfy portal <= cmr <= cmr_neighbor")
        return self

    @classmethod
    def from_messages(cls, messages: Sequence[Message], collisions: int = 0,
                      replication: int = 0, seed: int = 0) -> "ReplicationMetrics":
        """Count delivery flags over the injected messages of a replication."""
        injected = [m for m in messages if m.injected]
        n = len(injected)
        hops = [m.hops_to_cmr for m in injected if m.hops_to_cmr is not None]
        if n == 0:
            return cls(replication=replication, seed=seed, collision_count=collisions)
        return cls(
            replication=replication,
            seed=seed,
            injected=n,
            delivery_ratio_cmr_neighbor=sum(m.reached_cmr_neighbor for m in injected) / n,
            delivery_ratio_cmr=sum(m.reached_cmr for m in injected) / n,
            delivery_ratio_portal=sum(m.reached_portal for m in injected) / n,
            mean_hops_to_cmr=float(np.mean(hops)) if hops else math.nan,
            collision_count=collisions,
        )


def _mean_sd(values: Sequence[float]) -> Dict[str, float]:
    data = np.asarray([v for v in values if not math.isnan(v)], dtype=float)
    if data.size == 0:
        return {"mean": math.nan, "sd": math.nan}
    sd = float(np.std(data, ddof=1)) if data.size > 1 else 0.0
    return {"mean": float(np.mean(data)), "sd": sd}


class RunMetrics(BaseModel):
    """
    Metrics of a run: every replication plus mean and sample standard deviation.

    Replications without any injected message carry no ratio and are left out
    of the ratio statistics.
    """
    model_config = ConfigDict(frozen=True)

    replications: List[ReplicationMetrics]
    mean: Dict[str, float] = Field(default_factory=dict)
    sd: Dict[str, float] = Field(default_factory=dict)

    @classmethod
    def aggregate(cls, replications: Sequence[ReplicationMetrics]) -> "RunMetrics":
        """
        Raises:
            UndefinedMetricError: No replication injected a message
        """
        ordered = sorted(replications, key=lambda r: r.replication)
        counted = [r for r in ordered if r.injected > 0]
        if not counted:
            raise UndefinedMetricError("no message was injected in any replication")
        if len(counted) < len(ordered):
            logger.warning(f"{len(ordered) - len(counted)} replication(s) injected no message")
        mean: Dict[str, float] = {}
        sd: Dict[str, float] = {}
        for name in METRIC_NAMES:
            source = ordered if name == "collision_count" else counted
            stats = _mean_sd([float(getattr(r, name)) for r in source])
            mean[name] = stats["mean"]
            sd[name] = stats["sd"]
        return cls(replications=ordered, mean=mean, sd=sd)

    @property
    def delivery_ratio_cmr_neighbor(self) -> float:
        return self.mean["delivery_ratio_cmr_neighbor"]

    @property
    def delivery_ratio_cmr(self) -> float:
        return self.mean["delivery_ratio_cmr"]

    @property
    def delivery_ratio_portal(self) -> float:
        return self.mean["delivery_ratio_portal"]

    @property
    def mean_hops_to_cmr(self) -> float:
        return self.mean["mean_hops_to_cmr"]

    @property
    def collision_count(self) -> float:
        return self.mean["collision_count"]


def delivery_ratio_cmr_neighbor(logs: Sequence[Sequence[Message]]) -> float:
    """
    Share of injected messages that reached a CMR or a one-hop neighbor of a
    CMR, averaged over replications.

    Args:
        logs: Message ledger of every replication

    Returns:
        Mean ratio over the replications that injected at least one message

    Raises:
        UndefinedMetricError: No message was injected at all
    """
    ratios = []
    for ledger in logs:
        injected = [m for m in ledger if m.injected]
        if injected:
            ratios.append(sum(m.reached_cmr_neighbor for m in injected) / len(injected))
    if not ratios:
        raise UndefinedMetricError("delivery ratio is undefined without injected messages")
    return float(np.mean(ratios))
