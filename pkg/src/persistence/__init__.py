# src/persistence/__init__.py
