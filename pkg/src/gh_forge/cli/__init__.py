from .main import cli, main
from .options import CommandLine, OptionsParser
from .report import ReportRow, reproduce_report

__all__ = ["CommandLine", "OptionsParser", "ReportRow", "cli", "main", "reproduce_report"]
