"""Loading engine fixtures from JSON documents and DSL files."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..context.clock import SimClock
from ..context.hub import ContextHub
from ..context.infopoint import InfoPoint
from ..errors import ConfigError
from ..lifecycle.session import SessionRuntime
from ..templates.model import PolicyTemplate, parse_policy_template
from ..tr.ast import TrPolicy
from ..tr.parser import parse_tr_source


@dataclass
class EngineFixtures:
    tr_policies: dict[str, TrPolicy]
    templates: tuple[PolicyTemplate, ...]
    goal_map: dict[str, str]
    info_point: InfoPoint
    locations: dict[str, str] = field(default_factory=dict)
    clock_start: str = "2012-06-18T09:00:00"
    emergency: bool = False
    role_level_emergency: bool = False
    tokens: dict[str, dict[str, str]] = field(default_factory=dict)
    callback_url: str | None = None

    def build_runtime(
        self,
        *,
        clock: SimClock | None = None,
        locations: dict[str, str] | None = None,
        emergency: bool | None = None,
    ) -> SessionRuntime:
        hub = ContextHub(
            clock=clock or SimClock(self.clock_start),
            info_point=self.info_point,
            locations=self.locations if locations is None else locations,
            emergency=self.emergency if emergency is None else emergency,
        )
        runtime = SessionRuntime(
            tr_policies=dict(self.tr_policies),
            templates=self.templates,
            goal_map=dict(self.goal_map),
            hub=hub,
            role_level_emergency=self.role_level_emergency,
        )
        runtime.validate()
        return runtime


def _load_json(path: Path) -> Any:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"fixture file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"fixture file {path} is not valid JSON: {exc}") from exc


def load_fixtures(doc: dict[str, Any], base_dir: Path) -> EngineFixtures:
    """Build fixtures from an engine document; relative paths resolve
    against ``base_dir``."""
    if not isinstance(doc, dict):
        raise ConfigError("fixtures document must be an object")

    tr_policies: dict[str, TrPolicy] = {}
    for entry in doc.get("trPolicies", []):
        if isinstance(entry, str) and "\n" not in entry:
            source = (base_dir / entry).read_text(encoding="utf-8")
        else:
            source = str(entry)
        for policy in parse_tr_source(source):
            if policy.name in tr_policies:
                raise ConfigError(f"duplicate rule policy {policy.name!r}")
            tr_policies[policy.name] = policy

    templates: list[PolicyTemplate] = []
    for entry in doc.get("templates", []):
        template_doc = _load_json(base_dir / entry) if isinstance(entry, str) else entry
        templates.append(parse_policy_template(template_doc))
    ids = [t.id for t in templates]
    if len(ids) != len(set(ids)):
        raise ConfigError("duplicate template ids in fixture library")

    info_raw = doc.get("infoPoint", {})
    if isinstance(info_raw, str):
        info_point = InfoPoint.from_file(base_dir / info_raw)
    else:
        info_point = InfoPoint.from_document(info_raw)

    tokens = doc.get("tokens", {})
    if not isinstance(tokens, dict):
        raise ConfigError("tokens must be an object keyed by bearer token")

    return EngineFixtures(
        tr_policies=tr_policies,
        templates=tuple(templates),
        goal_map=dict(doc.get("goalMap", {})),
        info_point=info_point,
        locations=dict(doc.get("locations", {})),
        clock_start=str(doc.get("clock", "2012-06-18T09:00:00")),
        emergency=bool(doc.get("emergency", False)),
        role_level_emergency=bool(doc.get("roleLevelEmergency", False)),
        tokens={str(k): dict(v) for k, v in tokens.items()},
        callback_url=doc.get("callbackUrl"),
    )


def load_fixtures_file(path: str | Path) -> EngineFixtures:
    path = Path(path)
    return load_fixtures(_load_json(path), path.parent)
