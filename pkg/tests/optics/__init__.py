# tests/optics/__init__.py
