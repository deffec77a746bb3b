"""
Shared constants, exception types, logging and configuration helpers.
"""

import os
import datetime
from fractions import Fraction
from pathlib import Path
from typing import Optional


# Constants
SCHEME_DIR_ENV = "PROJCOH_SCHEME_DIR"
GAMMA_ENV = "PROJCOH_GAMMA"
BUILTIN_SCHEME_DIR = Path(__file__).resolve().parent.parent / "schemes"
DEFAULT_GAMMA = Fraction(1, 3)

EXIT_INPUT_ERROR = 1
EXIT_INFINITE_ORBITS = 2
EXIT_ROUTE_DISAGREEMENT = 3
EXIT_UNSUPPORTED_CODIM = 4


class SchemeError(Exception):
    """Exception raised when a scheme description is malformed or structurally invalid."""
    pass


class InfiniteOrbits(Exception):
    """Exception raised when an intersection splits into infinitely many translation orbits."""
    pass


class DepthExceeded(Exception):
    """Exception raised when the intersection closure does not stabilize in time."""
    pass


class RationalityError(Exception):
    """Exception raised when an intersection has a direction rank not divisible by nu."""
    pass


class UnsupportedCodim(Exception):
    """Exception raised when no pipeline exists for the requested codimension."""
    pass


class RouteDisagreement(Exception):
    """Exception raised when the two cohomology routes give incompatible answers."""
    pass


class ConsistencyError(Exception):
    """Exception raised when an internal identity (d∘d = 0, a torsion lemma) fails."""
    pass


def print_ts(*args, **kwargs):
    """Print with timestamp."""
    now = datetime.datetime.now().strftime("[%Y-%m-%d %H:%M:%S]")
    print(now, *args, **kwargs)


def parse_rational(text) -> Fraction:
    """Parse "p/q", "p" or an int into a Fraction.

    Floats and decimal strings are refused so that no binary rounding leaks
    into offsets; "p/q" must be in lowest terms with a positive denominator.
    """
    if isinstance(text, bool) or isinstance(text, float):
        raise SchemeError(f"Rational values must be strings or integers, got {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise SchemeError(f"Cannot parse rational from {text!r}")
    numerator, slash, denominator = text.strip().partition("/")
    try:
        p = int(numerator)
        q = int(denominator) if slash else 1
    except ValueError:
        raise SchemeError(f"Cannot parse rational {text!r}: expected an integer or p/q")
    if q <= 0:
        raise SchemeError(f"Rational {text!r} needs a positive denominator")
    value = Fraction(p, q)
    if value.denominator != q:
        raise SchemeError(f"Rational {text!r} is not in lowest terms (expected {format_rational(value)})")
    return value


def format_rational(value: Fraction) -> str:
    """Render a Fraction as "p/q" ("p" when integral)."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def get_scheme_dir() -> Optional[Path]:
    """Return the user scheme directory from the environment, if set."""
    raw = os.getenv(SCHEME_DIR_ENV)
    if not raw:
        return None
    return Path(raw)


def get_default_gamma() -> Fraction:
    """Return gamma for generalized_penrose, honouring PROJCOH_GAMMA."""
    raw = os.getenv(GAMMA_ENV)
    if not raw:
        return DEFAULT_GAMMA
    return parse_rational(raw)
