"""Unit tests for the gapflow package."""
