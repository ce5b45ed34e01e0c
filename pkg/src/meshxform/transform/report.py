from __future__ import annotations

import json
from dataclasses import dataclass, field

# R1 is never counted: with copy-on-assignment it coincides with R3.
RULE_IDS = ("R1", "R2", "R3", "R4", "R5", "R6", "R7", "R8", "SHIFT_INC", "COALESCE")


@dataclass
class TransformReport:
    rule_counts: dict[str, int] = field(default_factory=lambda: dict.fromkeys(RULE_IDS, 0))
    temps_before: int = 0
    temps_after: int = 0
    assignments_rewritten: int = 0
    warnings: list[str] = field(default_factory=list)

    def count(self, rule: str, n: int = 1) -> None:
        self.rule_counts[rule] += n

    def to_dict(self) -> dict:
        out: dict = dict(self.rule_counts)
        out["temps_before"] = self.temps_before
        out["temps_after"] = self.temps_after
        out["assignments_rewritten"] = self.assignments_rewritten
        out["warnings"] = len(self.warnings)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_text(self) -> str:
        return "".join(f"{k}: {v}\n" for k, v in self.to_dict().items())
