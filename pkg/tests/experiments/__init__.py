# tests/experiments/__init__.py
