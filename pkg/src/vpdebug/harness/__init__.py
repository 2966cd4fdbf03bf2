"""Datasets, metrics, experiment runners and the command line.

Submodules are imported explicitly (``vpdebug.harness.metrics`` etc.) to
keep this package free of import cycles with ``inject`` and ``loop``.
"""
