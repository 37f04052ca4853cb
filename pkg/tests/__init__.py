"""Test suite for percolated-gff."""
