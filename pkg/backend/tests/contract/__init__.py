"""Contract tests package."""
