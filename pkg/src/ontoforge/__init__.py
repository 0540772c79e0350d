"""ontoforge: a staged, LLM-assisted ontology engineering workbench."""

__version__ = "0.1.0"
