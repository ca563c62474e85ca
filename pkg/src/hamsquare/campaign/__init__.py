"""Run exhaustive verification campaigns over graph corpora."""
