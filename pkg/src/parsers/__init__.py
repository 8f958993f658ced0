"""
Parser modules for input sequences
"""

from .example_parser import ExampleCSVParser

__all__ = ["ExampleCSVParser"]
