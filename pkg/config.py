"""
Configuration for the chain-of-loops pencil toolkit.
Values come from the environment (optionally a .env file); CLI flags override them.
"""

import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional

from dotenv import load_dotenv

from errors import InvalidParameterError

DEFAULT_MAX_REFINEMENTS = 4
SUITES = ('prop2', 'sigma', 'bijection', 'brill-noether')
DEFAULT_SUITE_MAX_G = {'prop2': 8, 'sigma': 8, 'bijection': 8, 'brill-noether': 4}
OUTPUT_FORMATS = ('text', 'tsv')


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == '':
        return default
    try:
        return int(raw)
    except ValueError:
        raise InvalidParameterError(f"{name} must be an integer, got {raw!r}") from None


@dataclass
class PencilSettings:
    """Tunable limits and defaults shared by the CLI and the verification suites."""
    granularity: Optional[Fraction] = None
    max_refinements: int = DEFAULT_MAX_REFINEMENTS
    jobs: int = 1
    max_seconds: Optional[float] = None
    output_format: str = 'text'
    suite_max_g: Dict[str, int] = field(default_factory=lambda: dict(DEFAULT_SUITE_MAX_G))
    class_count_max_g: int = 4

    def __post_init__(self):
        if self.granularity is not None and self.granularity <= 0:
            raise InvalidParameterError("granularity must be positive")
        if self.max_refinements < 0:
            raise InvalidParameterError("max_refinements must be >= 0")
        if self.jobs < 1:
            raise InvalidParameterError("jobs must be >= 1")
        if self.max_seconds is not None and self.max_seconds <= 0:
            raise InvalidParameterError("max_seconds must be positive")
        if self.output_format not in OUTPUT_FORMATS:
            raise InvalidParameterError(f"output format must be one of {', '.join(OUTPUT_FORMATS)}")

    @classmethod
    def from_env(cls) -> 'PencilSettings':
        """
        Read settings from PENCILS_* environment variables.

        Returns:
            PencilSettings with defaults for every unset variable
        """
        load_dotenv()
        raw_granularity = os.getenv('PENCILS_GRANULARITY')
        try:
            granularity = Fraction(raw_granularity) if raw_granularity else None
        except (ValueError, ZeroDivisionError):
            raise InvalidParameterError(
                f"PENCILS_GRANULARITY must be rational, got {raw_granularity!r}") from None
        raw_seconds = os.getenv('PENCILS_MAX_SECONDS')
        try:
            max_seconds = float(raw_seconds) if raw_seconds else None
        except ValueError:
            raise InvalidParameterError(
                f"PENCILS_MAX_SECONDS must be a number, got {raw_seconds!r}") from None
        suite_max_g = {
            suite: _env_int(f"PENCILS_MAX_G_{suite.upper().replace('-', '_')}", bound)
            for suite, bound in DEFAULT_SUITE_MAX_G.items()
        }
        return cls(
            granularity=granularity,
            max_refinements=_env_int('PENCILS_MAX_REFINEMENTS', DEFAULT_MAX_REFINEMENTS),
            jobs=_env_int('PENCILS_JOBS', 1),
            max_seconds=max_seconds,
            output_format=os.getenv('PENCILS_FORMAT', 'text'),
            suite_max_g=suite_max_g,
            class_count_max_g=_env_int('PENCILS_MAX_G_CLASS_COUNT', 4),
        )
