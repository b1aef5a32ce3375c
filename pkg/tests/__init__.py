"""Tests for trpcalab."""
