# tests/persistence/__init__.py
