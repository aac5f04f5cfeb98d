"""PDF parsing and tagged-PDF writing."""

from .objects import MalformedPdf
from .reader import parse_pdf
from .writer import InvalidTree, MissingMeta, UnresolvedContent, write_tagged_pdf

__all__ = [
    "parse_pdf", "write_tagged_pdf", "MalformedPdf", "InvalidTree",
    "UnresolvedContent", "MissingMeta",
]
