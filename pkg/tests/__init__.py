"""Tests for the gh_forge package."""
