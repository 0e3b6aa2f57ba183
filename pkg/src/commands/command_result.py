from dataclasses import dataclass, field
from typing import Dict, List


@dataclass
class CommandResult:
    """Results document body, human-readable summary lines and extra CSV attachments"""
    results: Dict = field(default_factory=dict)
    lines: List[str] = field(default_factory=list)
    attachments: Dict[str, List[Dict]] = field(default_factory=dict)  # suffix -> CSV rows
    exit_code: int = 0
