"""Faithfulness-aware evaluation harness for multi-line handwritten-math OCR."""

__version__ = "0.1.0"
