from typing import Dict, List, Optional, TypedDict


class CheckMetadata(TypedDict):
    name: str
    description: str
    order: int


class CheckRegistry:
    _checks: Dict[str, CheckMetadata] = {}

    @classmethod
    def register_check(cls, name: str, description: str, order: int = 100):
        """Register an oracle-gate check; ``order`` fixes its position in the gate."""
        cls._checks[name] = {"name": name, "description": description, "order": order}

    @classmethod
    def get_all_checks(cls) -> List[CheckMetadata]:
        """Retrieve metadata for all registered checks in gate order."""
        return sorted(cls._checks.values(), key=lambda c: (c["order"], c["name"]))

    @classmethod
    def get_check(cls, name: str) -> Optional[CheckMetadata]:
        return cls._checks.get(name)
