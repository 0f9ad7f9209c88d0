"""The group:artifact:version coordinate triple."""

from __future__ import annotations

from dataclasses import dataclass

_FORBIDDEN = (",", "\n", "\r")


@dataclass(frozen=True, order=True)
class GavCoordinate:
    """Identifies one build artifact.

    All three fields must be non-empty and free of commas and line breaks,
    so coordinates can be emitted as one unambiguous CSV row.
    """

    group: str
    artifact: str
    version: str

    def __post_init__(self) -> None:
        for name in ("group", "artifact", "version"):
            value = getattr(self, name)
            if not value:
                raise ValueError(f"coordinate {name} must be non-empty")
            if any(ch in value for ch in _FORBIDDEN):
                raise ValueError(f"coordinate {name} {value!r} contains a comma or line break")

    def __str__(self) -> str:
        return f"{self.group}:{self.artifact}:{self.version}"

    @property
    def csv_row(self) -> str:
        return f"{self.group},{self.artifact},{self.version}"

    @classmethod
    def parse(cls, text: str) -> "GavCoordinate":
        """Parse a colon-separated g:a:v string."""
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"expected group:artifact:version, got {text!r}")
        return cls(*parts)
