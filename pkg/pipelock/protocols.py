"""
Module for defining protocols for type checking.

The protocols defined here match the engines in `pipelock.pipeline` and the mixins in `pipelock.mixins`.
"""
from __future__ import annotations

from typing import Protocol, Sequence

from .pipeline import Event, PipelineConfig, SimOutcome
from .trace import ClockedHeader


class SupportsBatchRun(Protocol):
    config: PipelineConfig
    record_events: bool

    def run_batch(self, headers: Sequence[ClockedHeader]) -> SimOutcome: ...

    # noinspection PyPropertyDefinition
    @property
    def events(self) -> list[Event]: ...


class EngineFactory(Protocol):
    def __call__(self, config: PipelineConfig, record_events: bool = False) -> SupportsBatchRun: ...
