"""Bundled data: lemma library, corpus, sample problems."""
