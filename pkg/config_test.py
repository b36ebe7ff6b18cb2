"""
Tests for PencilSettings and its PENCILS_* environment variables.
"""

from fractions import Fraction

import pytest

from config import DEFAULT_SUITE_MAX_G, PencilSettings
from errors import InvalidParameterError


class TestFromEnv:

    def test_defaults(self):
        settings = PencilSettings.from_env()
        assert settings.granularity is None
        assert settings.max_refinements == 4
        assert settings.jobs == 1
        assert settings.max_seconds is None
        assert settings.output_format == "text"
        assert settings.suite_max_g == DEFAULT_SUITE_MAX_G
        assert settings.class_count_max_g == 4

    def test_overrides(self, monkeypatch):
        monkeypatch.setenv("PENCILS_GRANULARITY", "1/2")
        monkeypatch.setenv("PENCILS_JOBS", "3")
        monkeypatch.setenv("PENCILS_MAX_SECONDS", "2.5")
        monkeypatch.setenv("PENCILS_FORMAT", "tsv")
        monkeypatch.setenv("PENCILS_MAX_G_BRILL_NOETHER", "2")
        settings = PencilSettings.from_env()
        assert settings.granularity == Fraction(1, 2)
        assert settings.jobs == 3
        assert settings.max_seconds == 2.5
        assert settings.output_format == "tsv"
        assert settings.suite_max_g["brill-noether"] == 2
        assert settings.suite_max_g["prop2"] == 8

    def test_blank_value_means_default(self, monkeypatch):
        monkeypatch.setenv("PENCILS_MAX_REFINEMENTS", "  ")
        assert PencilSettings.from_env().max_refinements == 4

    @pytest.mark.parametrize("name, value", [
        ("PENCILS_GRANULARITY", "half"),
        ("PENCILS_GRANULARITY", "1/0"),
        ("PENCILS_GRANULARITY", "-1"),
        ("PENCILS_MAX_SECONDS", "soon"),
        ("PENCILS_JOBS", "0"),
        ("PENCILS_FORMAT", "json"),
    ])
    def test_bad_values(self, monkeypatch, name, value):
        monkeypatch.setenv(name, value)
        with pytest.raises(InvalidParameterError):
            PencilSettings.from_env()


class TestSettings:

    def test_suite_bounds_are_not_shared(self):
        a, b = PencilSettings(), PencilSettings()
        a.suite_max_g["prop2"] = 2
        assert b.suite_max_g["prop2"] == 8

    def test_negative_refinements(self):
        with pytest.raises(InvalidParameterError):
            PencilSettings(max_refinements=-1)
