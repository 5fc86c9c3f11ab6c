"""Benchmark run configuration."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from ..core import SessionConfig
from ..errors import InvalidInputError
from ..gateway import GenerationConfig


class SystemMode(str, Enum):
    MACRS = "macrs"
    MACRS_WO_IR = "macrs_wo_ir"
    MACRS_WO_SR = "macrs_wo_sr"
    MACRS_WO_SR_IR = "macrs_wo_sr_ir"
    SINGLE_AGENT = "single_agent"


@dataclass(frozen=True)
class RunConfig:
    mode: SystemMode = SystemMode.MACRS
    max_turns: int = 5
    fallback_size: int = 10
    hit_ks: tuple[int, ...] = (5, 10)
    concurrency: int = 1
    seed: int = 0
    count_fallback_turn: bool = True
    parallel_fanout: bool = False
    config_id: str = ""
    generation: GenerationConfig = field(default_factory=GenerationConfig)

    def __post_init__(self) -> None:
        if self.max_turns < 1:
            raise InvalidInputError("max_turns must be >= 1")
        if self.concurrency < 1:
            raise InvalidInputError("concurrency must be >= 1")
        if not self.hit_ks or any(k < 1 for k in self.hit_ks):
            raise InvalidInputError("hit_ks must be positive")
        if not self.config_id:
            object.__setattr__(self, "config_id", self.mode.value)

    @property
    def session_config(self) -> SessionConfig:
        return SessionConfig(
            max_turns=self.max_turns,
            fallback_size=self.fallback_size,
            count_fallback_turn=self.count_fallback_turn,
        )

    @property
    def ir_enabled(self) -> bool:
        """Information-level reflection active (profiles maintained and prompted)."""
        return self.mode in (SystemMode.MACRS, SystemMode.MACRS_WO_SR)

    @property
    def sr_enabled(self) -> bool:
        """Strategy-level reflection active (failure summaries produced)."""
        return self.mode in (SystemMode.MACRS, SystemMode.MACRS_WO_IR)

    @staticmethod
    def from_dict(data: dict) -> "RunConfig":
        gen = data.get("generation", {})
        return RunConfig(
            mode=SystemMode(data.get("mode", "macrs")),
            max_turns=data.get("max_turns", 5),
            fallback_size=data.get("fallback_size", 10),
            hit_ks=tuple(data.get("hit_ks", (5, 10))),
            concurrency=data.get("concurrency", 1),
            seed=data.get("seed", 0),
            count_fallback_turn=data.get("count_fallback_turn", True),
            parallel_fanout=data.get("parallel_fanout", False),
            config_id=data.get("config_id", ""),
            generation=GenerationConfig(
                model=gen.get("model", "gpt-3.5-turbo"),
                temperature=gen.get("temperature", 0.0),
                max_tokens=gen.get("max_tokens", 512),
                request_timeout=gen.get("request_timeout", 60.0),
                retry_budget=gen.get("retry_budget", 3),
            ),
        )
