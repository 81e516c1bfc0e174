"""Morita extensions, recoding and Morleyization for coherent theories."""
