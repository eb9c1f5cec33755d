"""Mediation gates for agent runtimes: hash-chained audit, biconditional
reconciliation, signed-extension admission, DLP and prompt-shield detectors,
plus a seeded adversarial harness that measures them."""

__version__ = "0.1.0"
