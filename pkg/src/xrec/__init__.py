"""Explainable recommendation engine: joint rating/keyphrase/justification
model over review corpora, with latent-space critiquing and a small
serving layer on top."""

__version__ = "0.1.0"
