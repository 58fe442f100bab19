"""Shared fixtures and independent oracles.

The oracles here deliberately re-derive semantics through different code
paths than the package (label-list comparisons instead of string suffixes,
backtracking glob instead of regex, a literal transcription of the decision
rules) so that agreement between the two sides actually means something.
"""

import random

import pytest

from thirdeye.access_events import build_registry
from thirdeye.policy import RequestHost

EXAMPLE_CONFIG = """\
<Location /private>
Order allow,deny
Allow from goodguys.org
Deny from badguys.com
Allow from 127.0.0.1 // Localhost
Allow from 123.156.3.5
</Location>
"""


@pytest.fixture
def registry():
    return build_registry()


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)


# --- independent matching oracle ---------------------------------------------------


def oracle_glob(pattern: str, text: str) -> bool:
    """Backtracking glob: '*' any run, '?' one character, anchored."""
    if not pattern:
        return not text
    if pattern[0] == "*":
        return any(oracle_glob(pattern[1:], text[i:]) for i in range(len(text) + 1))
    if not text:
        return False
    if pattern[0] == "?" or pattern[0] == text[0]:
        return oracle_glob(pattern[1:], text[1:])
    return False


def oracle_match(pattern_raw: str, hostname: "str | None", ip: str) -> bool:
    """Directive-pattern matching re-derived with label-list comparisons."""
    if pattern_raw == "all":
        return True
    if "*" in pattern_raw or "?" in pattern_raw:
        if hostname is not None and oracle_glob(pattern_raw.lower(), hostname.lower()):
            return True
        return oracle_glob(pattern_raw, ip)
    labels = pattern_raw.split(".")
    if all(label.isdigit() for label in labels):
        return ip.split(".")[: len(labels)] == labels
    if hostname is None:
        return False
    host_labels = hostname.lower().split(".")
    pattern_labels = pattern_raw.lower().split(".")
    if len(pattern_labels) > len(host_labels):
        return False
    return host_labels[len(host_labels) - len(pattern_labels):] == pattern_labels


def oracle_match_host(pattern_raw: str, host: RequestHost) -> bool:
    return oracle_match(pattern_raw, host.hostname, host.ip)


# --- independent decision oracle ----------------------------------------------------


def oracle_rules_fired(ordering_value: str, has_allow: bool, has_deny: bool) -> list[str]:
    """Literal transcription of the four decision rules."""
    fired = []
    if ordering_value == "allow,deny":
        if has_allow and not has_deny:
            fired.append("A")
        if (not has_allow) or has_deny:
            fired.append("B")
    elif ordering_value == "deny,allow":
        if (not has_deny) or has_allow:
            fired.append("A")
        if has_deny and not has_allow:
            fired.append("B")
    else:
        raise ValueError(ordering_value)
    return fired


def oracle_decide(ordering_value: str, directives, host: RequestHost) -> bool:
    """Expected decision for (kind, pattern_raw) directive pairs; asserts
    that exactly one rule fires."""
    has_allow = any(
        kind == "allow" and oracle_match_host(raw, host) for kind, raw in directives
    )
    has_deny = any(
        kind == "deny" and oracle_match_host(raw, host) for kind, raw in directives
    )
    fired = oracle_rules_fired(ordering_value, has_allow, has_deny)
    assert len(fired) == 1, f"rules {fired} fired for A={has_allow} D={has_deny}"
    return fired == ["A"]
