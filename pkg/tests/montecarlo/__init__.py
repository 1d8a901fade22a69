# tests/montecarlo/__init__.py
