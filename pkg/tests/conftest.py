"""Makes this directory importable so test modules can share fixtures
and frozen tables (see frozen.py)."""
