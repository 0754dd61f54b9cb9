"""Shared helpers: singleton metaclass, input validation, ordered parallel map."""
