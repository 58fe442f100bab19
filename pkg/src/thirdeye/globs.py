"""Anchored glob matching with exactly two metacharacters.

'*' matches any run of characters (including none), '?' exactly one.
Everything else is literal; there are no character classes.
"""

import re
from functools import lru_cache


@lru_cache(maxsize=1024)
def glob_to_regex(pattern: str) -> "re.Pattern[str]":
    parts = []
    for ch in pattern:
        if ch == "*":
            parts.append(".*")
        elif ch == "?":
            parts.append(".")
        else:
            parts.append(re.escape(ch))
    return re.compile("".join(parts) + r"\Z", re.DOTALL)


def glob_match(pattern: str, text: str) -> bool:
    return bool(glob_to_regex(pattern).match(text))
