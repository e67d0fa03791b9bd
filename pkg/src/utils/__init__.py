"""Utilities package initialization."""
from src.utils.config_loader import load_config
from src.utils.report_generator import ReportGenerator
from src.utils.trace_export import export_trace

__all__ = ["ReportGenerator", "export_trace", "load_config"]
