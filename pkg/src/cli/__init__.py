from .harness import build_parser, run

__all__ = ["run", "build_parser"]
