"""
Constants for the Bananaworld Correlation Analyzer
Contains encodings, tolerances, the CHSH variant table and the reference tables
"""

import math
from fractions import Fraction

SCENARIO = "2x2x2x2"
LIBRARY_VERSION = "1.0.0"

# Tolerances
DEFAULT_FLOAT_TOLERANCE = 1e-9
ALGEBRAIC_TOLERANCE = 1e-12
BORN_TOLERANCE = 1e-9
BOUNDARY_BAND_FACTOR = 1000

# Run defaults
DEFAULT_TRIALS = 100000
DEFAULT_SEED = 20121
DEFAULT_BLOCK_SIZE = 10000
DEFAULT_MAX_WORKERS = 4
DEFAULT_GRID_STEPS = 72

# Entry order for flattened arrays: context-major, then Alice's and Bob's outcome.
# Position of p(ab|xy) is 8x + 4y + 2a + b.
ENTRY_KEYS = tuple(
    (a, b, x, y)
    for x in (0, 1)
    for y in (0, 1)
    for a in (0, 1)
    for b in (0, 1)
)
CONTEXTS = ((0, 0), (0, 1), (1, 0), (1, 1))

# CHSH variants
#
#   index  minus sign on  overall sign
#   0      BB             +    K = <YY> + <YB> + <BY> - <BB>
#   1      BY             +
#   2      YB             +
#   3      YY             +
#   4      BB             -
#   5      BY             -
#   6      YB             -
#   7      YY             -
#
# index = 4 * sign_bit + minus_code, minus_code = 3 - (2x + y) of the minus term.
CHSH_VARIANT_COUNT = 8
CHSH_MINUS_CONTEXT = {0: (1, 1), 1: (1, 0), 2: (0, 1), 3: (0, 0)}
CLASSICAL_CHSH_BOUND = 2
TSIRELSON_BOUND = 2 * math.sqrt(2)

# Klyachko pentagram geometry
# Adjacent pentagram vertices subtend 4*pi/5 at the centre of the equatorial circle;
# the lifted circle is chosen where they subtend pi/2 at the origin instead.
PENTAGRAM_STEP_ANGLE = 4 * math.pi / 5
KLYACHKO_CLASSICAL_BOUND = 2
KLYACHKO_BANANA_VALUE = Fraction(5, 2)

# Reference tables, keyed by (a, b, x, y) with x = Alice's peeling, y = Bob's
HALF = Fraction(1, 2)

TABLE_RULES = {
    # (E)PR pair: a xor b = x * y
    1: lambda a, b, x, y: HALF if (a ^ b) == (x & y) else Fraction(0),
    # all tastes ordinary for every peeling
    2: lambda a, b, x, y: Fraction(1) if (a, b) == (0, 0) else Fraction(0),
    # Alice tastes Bob's peeling, Bob tastes Alice's peeling
    3: lambda a, b, x, y: Fraction(1) if (a, b) == (y, x) else Fraction(0),
    # relabeled (E)PR pair: a xor b = x * y xor 1
    4: lambda a, b, x, y: HALF if (a ^ b) == ((x & y) ^ 1) else Fraction(0),
}

TABLE_TITLES = {
    1: "(E)PR correlation array",
    2: "Extremal no-signaling deterministic correlation array",
    3: "Extremal signaling deterministic correlation array",
    4: "(E)PR correlation array related to the standard one by relabeling",
}
