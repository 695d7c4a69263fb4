# cli_app/__init__.py

from .config import GridSpec, RunConfig, load_manifest, parse_tolerances
from .main import build_parser, main
from .verify import run_suite

__all__ = ["GridSpec", "RunConfig", "build_parser", "load_manifest", "main", "parse_tolerances", "run_suite"]
