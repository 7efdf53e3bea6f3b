"""chorale_extractor: batch conversion of the music21 Bach chorale corpus
into the newline-delimited JSON ingestion format consumed by choralegraph."""

__version__ = "0.1.0"
