"""Host access policy: directives, orderings and the decision rules.

A location's policy is a set of allow/deny directives plus an ordering.
With A = "some allow directive matches the host" and D = "some deny
directive matches":

    ordering allow,deny:  allowed iff A and not D   (rule A)
                          denied  iff not A or D    (rule B)
    ordering deny,allow:  allowed iff not D or A    (rule A)
                          denied  iff D and not A   (rule B)

The two rules are logical complements under each ordering, so exactly one
fires for every request. A directive matches a request through either its
hostname or its IP address, which is what lets a deny on a domain name reach
an address that a plain IP directive would have allowed.
"""

import re
from dataclasses import dataclass
from enum import Enum

from .errors import BadHostPattern, ConfigParseError
from .globs import glob_match

_IPV4_RE = re.compile(r"(\d{1,3})(\.\d{1,3}){3}\Z")
_LABEL_RE = re.compile(r"[A-Za-z0-9-]+\Z")


class Ordering(Enum):
    DENY_ALLOW = "deny,allow"
    ALLOW_DENY = "allow,deny"


DEFAULT_ORDERING = Ordering.DENY_ALLOW


class DirectiveKind(Enum):
    ALLOW = "allow"
    DENY = "deny"


class PatternClass(Enum):
    ALL = "all"
    DOMAIN = "domain"
    IP_PREFIX = "ip_prefix"
    GLOB = "glob"


def is_ipv4(text: str) -> bool:
    """Full dotted-quad address with octets in range."""
    if not _IPV4_RE.fullmatch(text):
        return False
    return all(0 <= int(octet) <= 255 for octet in text.split("."))


def _is_ip_prefix(text: str) -> bool:
    octets = text.split(".")
    if not 1 <= len(octets) <= 4:
        return False
    return all(o.isdigit() and 0 <= int(o) <= 255 for o in octets)


def _is_domain(text: str) -> bool:
    labels = text.split(".")
    if not all(_LABEL_RE.fullmatch(label) for label in labels):
        return False
    return any(any(c.isalpha() for c in label) for label in labels)


@dataclass(frozen=True)
class HostPattern:
    """One host specification from a directive, pre-classified."""

    raw: str
    klass: PatternClass

    @classmethod
    def parse(cls, raw: str) -> "HostPattern":
        if raw == "all":
            return cls(raw, PatternClass.ALL)
        if "*" in raw or "?" in raw:
            return cls(raw, PatternClass.GLOB)
        if _is_ip_prefix(raw):
            return cls(raw, PatternClass.IP_PREFIX)
        if _is_domain(raw):
            return cls(raw, PatternClass.DOMAIN)
        raise BadHostPattern(f"unusable host pattern {raw!r}")

    def __str__(self) -> str:
        return self.raw


@dataclass(frozen=True)
class RequestHost:
    """The requesting client: always an IP, plus the hostname when reverse
    resolution knows one. Hostnames are normalized to lower case."""

    ip: str
    hostname: str | None = None

    def __post_init__(self):
        if not is_ipv4(self.ip):
            raise BadHostPattern(f"request host needs a full IPv4 address, got {self.ip!r}")
        if self.hostname is not None:
            object.__setattr__(self, "hostname", self.hostname.lower())

    def identity(self) -> str:
        """How the host presents itself in logs: name when known, else IP."""
        return self.hostname if self.hostname is not None else self.ip

    def __str__(self) -> str:
        if self.hostname is None:
            return self.ip
        return f"{self.hostname} ({self.ip})"


Stamp = tuple[int, int]  # (timestamp_ns, seq); ties break on seq


@dataclass(frozen=True)
class Directive:
    """One allow/deny rule for a location, stamped with when it was read."""

    location: str
    kind: DirectiveKind
    pattern: HostPattern
    stamp: Stamp = (0, 0)

    def __str__(self) -> str:
        return f"{self.kind.value.capitalize()} from {self.pattern.raw}"


@dataclass(frozen=True)
class PolicySnapshot:
    """The effective policy for one location at one instant."""

    location: str
    ordering: Ordering = DEFAULT_ORDERING
    directives: tuple[Directive, ...] = ()


def match_host(pattern: HostPattern, host: RequestHost) -> bool:
    """Does a directive's host specification cover this client?

    Domain patterns match the hostname by whole-label suffix; IP patterns
    match the address by whole-octet prefix; globs try the hostname first,
    then the dotted address text. Domain comparison ignores case.
    """
    if pattern.klass is PatternClass.ALL:
        return True
    if pattern.klass is PatternClass.DOMAIN:
        if host.hostname is None:
            return False
        wanted = pattern.raw.lower()
        return host.hostname == wanted or host.hostname.endswith("." + wanted)
    if pattern.klass is PatternClass.IP_PREFIX:
        return host.ip == pattern.raw or host.ip.startswith(pattern.raw + ".")
    if host.hostname is not None and glob_match(pattern.raw.lower(), host.hostname):
        return True
    return glob_match(pattern.raw, host.ip)


@dataclass(frozen=True)
class Decision:
    """An access decision with its justification."""

    allowed: bool
    rule: str  # "A" (the allow rule) or "B" (the deny rule)
    ordering: Ordering
    matched: tuple[Directive, ...]

    @property
    def label(self) -> str:
        return "allowed" if self.allowed else "denied"


def decide(snapshot: PolicySnapshot, host: RequestHost) -> Decision:
    """Evaluate the rules for one host against one policy snapshot.

    The outcome depends only on whether any allow / any deny directive
    matches and on the ordering, never on directive list order.
    """
    matched = tuple(d for d in snapshot.directives if match_host(d.pattern, host))
    has_allow = any(d.kind is DirectiveKind.ALLOW for d in matched)
    has_deny = any(d.kind is DirectiveKind.DENY for d in matched)
    if snapshot.ordering is Ordering.ALLOW_DENY:
        allowed = has_allow and not has_deny
    else:
        allowed = not has_deny or has_allow
    return Decision(allowed, "A" if allowed else "B", snapshot.ordering, matched)


# --- configuration files --------------------------------------------------------
#
# <Location /path> blocks containing:
#     Order allow,deny | deny,allow
#     Allow from <pattern> [<pattern> ...]
#     Deny from <pattern> [<pattern> ...]
# '#' and '//' start comments. Keywords are case-insensitive.


@dataclass(frozen=True)
class ConfigOrder:
    ordering: Ordering
    line_no: int


@dataclass(frozen=True)
class ConfigDirective:
    kind: DirectiveKind
    pattern: HostPattern
    line_no: int


def _strip_comment(line: str) -> str:
    cut = len(line)
    hash_pos = line.find("#")
    if hash_pos != -1:
        cut = hash_pos
    slash_pos = line.find("//")
    if slash_pos != -1:
        cut = min(cut, slash_pos)
    return line[:cut]


def _parse_ordering_token(token: str, line_no: int) -> Ordering:
    lowered = token.lower()
    if lowered == "mutual-failure":
        raise ConfigParseError(line_no, "ordering 'mutual-failure' is not supported")
    for ordering in Ordering:
        if lowered == ordering.value:
            return ordering
    raise ConfigParseError(line_no, f"bad ordering token {token!r}")


def parse_config(text: str) -> dict[str, list]:
    """Parse configuration text into per-location item lists (file order).

    Repeated blocks for the same location are merged in order. Every
    directive line must sit inside a location block.
    """
    result: dict[str, list] = {}
    current: str | None = None
    opened_at = 0
    for line_no, raw_line in enumerate(text.split("\n"), start=1):
        line = _strip_comment(raw_line).strip()
        if not line:
            continue
        lowered = line.lower()
        if lowered.startswith("<location"):
            if current is not None:
                raise ConfigParseError(line_no, "nested <Location> block")
            match = re.fullmatch(r"<location\s+(\S+)\s*>", line, flags=re.IGNORECASE)
            if match is None:
                raise ConfigParseError(line_no, f"bad location header {line!r}")
            location = match.group(1)
            if not location.startswith("/"):
                raise ConfigParseError(line_no, f"location must start with '/': {location!r}")
            current = location
            opened_at = line_no
            result.setdefault(current, [])
            continue
        if lowered == "</location>":
            if current is None:
                raise ConfigParseError(line_no, "</Location> without open block")
            current = None
            continue
        tokens = line.split()
        keyword = tokens[0].lower()
        if keyword not in ("order", "allow", "deny"):
            raise ConfigParseError(line_no, f"unknown directive {tokens[0]!r}")
        if current is None:
            raise ConfigParseError(line_no, f"directive {tokens[0]!r} outside a location block")
        if keyword == "order":
            if len(tokens) != 2:
                raise ConfigParseError(line_no, "Order takes exactly one argument")
            result[current].append(ConfigOrder(_parse_ordering_token(tokens[1], line_no), line_no))
            continue
        if len(tokens) < 3 or tokens[1].lower() != "from":
            raise ConfigParseError(line_no, f"expected '{tokens[0]} from <pattern>...'")
        kind = DirectiveKind.ALLOW if keyword == "allow" else DirectiveKind.DENY
        for raw_pattern in tokens[2:]:
            try:
                pattern = HostPattern.parse(raw_pattern)
            except BadHostPattern as exc:
                raise ConfigParseError(line_no, str(exc)) from exc
            result[current].append(ConfigDirective(kind, pattern, line_no))
    if current is not None:
        raise ConfigParseError(opened_at, f"<Location {current}> never closed")
    return result


def snapshot_from_config(location: str, items: list) -> PolicySnapshot:
    """Collapse parsed config items into the policy a server would hold:
    latest Order wins, directives keep file order (stamped by position)."""
    ordering = DEFAULT_ORDERING
    directives = []
    for index, item in enumerate(items, start=1):
        if isinstance(item, ConfigOrder):
            ordering = item.ordering
        else:
            directives.append(Directive(location, item.kind, item.pattern, stamp=(0, index)))
    return PolicySnapshot(location, ordering, tuple(directives))
