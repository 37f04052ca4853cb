"""Command-line tests run in process against ``main``."""
