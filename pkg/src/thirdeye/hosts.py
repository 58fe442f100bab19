"""Static hostname/IP resolution.

Real DNS is out of the picture: one `hostname ip` table drives both forward
resolution (name -> address) and reverse resolution (address -> first name
declared for it). The simulated server and the validator share this module,
so a request identity always resolves to the same RequestHost on both sides.
"""

from pathlib import Path

from .errors import ThirdEyeError, UnresolvableHost
from .policy import RequestHost, is_ipv4


class HostMap:
    """Bidirectional static host table; hostnames are case-insensitive."""

    def __init__(self, mapping: "dict[str, str] | None" = None):
        self._forward: dict[str, str] = {}
        self._reverse: dict[str, str] = {}
        for name, ip in (mapping or {}).items():
            self.add(name, ip)

    def add(self, hostname: str, ip: str) -> None:
        hostname = hostname.lower()
        if not is_ipv4(ip):
            raise ThirdEyeError(f"host map: {hostname!r} maps to bad address {ip!r}")
        self._forward[hostname] = ip
        # first declaration wins for reverse lookups
        self._reverse.setdefault(ip, hostname)

    def __contains__(self, hostname: str) -> bool:
        return hostname.lower() in self._forward

    def __len__(self) -> int:
        return len(self._forward)

    def items(self):
        return self._forward.items()

    def ip_of(self, hostname: str) -> str | None:
        return self._forward.get(hostname.lower())

    def name_of(self, ip: str) -> str | None:
        return self._reverse.get(ip)

    def resolve(self, identity: str) -> RequestHost:
        """Turn a logged host identity (name or dotted address) into a
        RequestHost, attaching the reverse-resolved name when one is known."""
        if is_ipv4(identity):
            return RequestHost(ip=identity, hostname=self._reverse.get(identity))
        ip = self._forward.get(identity.lower())
        if ip is None:
            raise UnresolvableHost(f"host {identity!r} is not in the host map")
        return RequestHost(ip=ip, hostname=identity)

    def format(self) -> str:
        return "".join(f"{name} {ip}\n" for name, ip in self._forward.items())

    @classmethod
    def parse(cls, text: str) -> "HostMap":
        """Parse `hostname<SPACE>ip` lines; blanks and '#' comments allowed."""
        host_map = cls()
        for line_no, raw_line in enumerate(text.split("\n"), start=1):
            line = raw_line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ThirdEyeError(f"host map line {line_no}: expected 'hostname ip', got {line!r}")
            host_map.add(parts[0], parts[1])
        return host_map

    @classmethod
    def load(cls, path) -> "HostMap":
        return cls.parse(Path(path).read_text(encoding="utf-8"))
