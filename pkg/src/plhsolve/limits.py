"""Resource caps.  PLH_MAX_DOMAIN overrides the sampled-domain size cap."""

import os

MAX_FORMULA_ATOMS = 64
MAX_RELATION_ARITY = 3
MAX_ORACLE_SUMMANDS = 12
MAX_ASSIGNMENTS = 2_000_000
MAX_TABLE_CELLS = 20_000_000
MAX_PAIR_CHECKS = 2_500_000_000
MAX_SFM_GENERATORS = 20
MAX_FAMILY_SIZE = 100_000

_DEFAULT_MAX_SAMPLE = 4000


def max_sample_size() -> int:
    raw = os.environ.get("PLH_MAX_DOMAIN")
    if raw is None:
        return _DEFAULT_MAX_SAMPLE
    try:
        return int(raw)
    except ValueError:
        return _DEFAULT_MAX_SAMPLE
