"""Toolkit for reconstructing and characterizing attention cascades in group chats."""

__version__ = "0.1.0"
