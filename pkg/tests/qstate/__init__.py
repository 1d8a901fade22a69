# tests/qstate/__init__.py
