from dataclasses import dataclass
from typing import Dict, List


@dataclass
class CommandInfo:
    command: str
    description: str
    usage: str
    category: str


class CommandRegistry:
    def __init__(self):
        self.commands: List[CommandInfo] = []

    def register(self, command: str, description: str, usage: str = "", category: str = "General"):
        self.commands.append(CommandInfo(
            command=command,
            description=description,
            usage=usage or command,
            category=category
        ))

    def get(self, command: str) -> CommandInfo:
        for info in self.commands:
            if info.command == command:
                return info
        raise KeyError(command)

    def get_help_text(self) -> str:
        categories: Dict[str, List[CommandInfo]] = {}
        for cmd in self.commands:
            categories.setdefault(cmd.category, []).append(cmd)

        category_emojis = {
            "CHECK": "🔎",
            "BUILD": "🧬",
            "STATS": "📊",
            "ORACLE": "🧪",
        }

        help_text = "commands:\n"
        for category, commands in categories.items():
            emoji = category_emojis.get(category, "📌")
            help_text += f"\n{emoji} {category}\n"
            for cmd in commands:
                help_text += f"  {cmd.usage}\n      {cmd.description}\n"
        return help_text


command_registry = CommandRegistry()

command_registry.register(
    "verify", "Checks that a network explains every character and reports origins",
    "verify NETWORK MATRIX", category="CHECK"
)
command_registry.register(
    "complete", "Adds transfer edges to a tree to get a galled network for the characters",
    "complete TREE MATRIX [--out dot|structured] [--drop-blocking] [--refine]", category="BUILD"
)
command_registry.register(
    "compat", "Decides whether some galled network explains the characters",
    "compat MATRIX [--taxa FILE] [--out dot|structured|newick]", category="BUILD"
)
command_registry.register(
    "fa-stats", "Tabulates first appearances per character",
    "fa-stats TREE MATRIX [--summary]", category="STATS"
)
command_registry.register(
    "oracle", "Compares an algorithm with exhaustive search",
    "oracle complete|compat FILES... | --random N [--seed S] [--jobs J]", category="ORACLE"
)
