from .core import Core, write_provenance


__all__ = [
    "Core",
    "write_provenance",
]
