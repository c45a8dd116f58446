"""Parsing and truncation of IPC symbols.

A symbol such as ``G06F 17/30`` is read as section ``G``, class ``06``,
subclass ``F``, main group ``17`` and subgroup ``30``. Any contiguous
prefix of that hierarchy is a valid symbol (``G``, ``G06``, ``G06F``,
``G06F17``).
"""

from __future__ import annotations

import enum
import functools
import re
from dataclasses import dataclass

from .errors import LevelUnavailable, MalformedIpc

SECTIONS = "ABCDEFGH"

_IPC_RE = re.compile(
    r"""
    ^(?P<section>[A-Za-z])
    (?:(?P<cls>\d{2})
      (?:(?P<subclass>[A-Za-z])
        (?:\s*(?P<main>\d{1,4})
          (?:\s*/\s*(?P<sub>\d{1,6}))?
        )?
      )?
    )?$
    """,
    re.VERBOSE | re.ASCII,
)


@functools.total_ordering
class IpcLevel(enum.Enum):
    SECTION = 1
    CLASS = 2
    SUBCLASS = 3
    MAIN_GROUP = 4
    SUBGROUP = 5

    def __lt__(self, other):
        if not isinstance(other, IpcLevel):
            return NotImplemented
        return self.value < other.value

    @property
    def slug(self) -> str:
        return self.name.lower().replace("_", "-")

    @classmethod
    def parse(cls, text: str | IpcLevel) -> IpcLevel:
        """Accept ``subclass``, ``main-group``, ``main_group``, ``MainGroup`` ..."""
        if isinstance(text, IpcLevel):
            return text
        key = re.sub(r"[^a-z]", "", str(text).lower())
        for level in cls:
            if level.name.lower().replace("_", "") == key:
                return level
        raise ValueError(f"unknown IPC level: {text!r}")


@functools.total_ordering
@dataclass(frozen=True)
class IpcCode:
    """A structurally valid IPC symbol.

    ``subgroup`` is kept as its digit string so ``17/30`` and ``17/300``
    stay distinct.
    """

    section: str
    class_digits: str | None = None
    subclass_letter: str | None = None
    main_group: int | None = None
    subgroup: str | None = None

    def __post_init__(self):
        if self.section not in SECTIONS or len(self.section) != 1:
            raise MalformedIpc(f"section must be one of A..H, got {self.section!r}")
        fields = (self.class_digits, self.subclass_letter, self.main_group, self.subgroup)
        seen_gap = False
        for value in fields:
            if value is None:
                seen_gap = True
            elif seen_gap:
                raise MalformedIpc("IPC fields must form a contiguous prefix of the hierarchy")
        if self.class_digits is not None and not re.fullmatch(r"[0-9]{2}", self.class_digits):
            raise MalformedIpc(f"class must be two digits, got {self.class_digits!r}")
        if self.subclass_letter is not None and not re.fullmatch(r"[A-Z]", self.subclass_letter):
            raise MalformedIpc(f"subclass must be one uppercase letter, got {self.subclass_letter!r}")
        if self.main_group is not None and not 1 <= self.main_group <= 9999:
            raise MalformedIpc(f"main group out of range: {self.main_group}")
        if self.subgroup is not None and not re.fullmatch(r"[0-9]{1,6}", self.subgroup):
            raise MalformedIpc(f"subgroup must be 1-6 digits, got {self.subgroup!r}")

    @property
    def level(self) -> IpcLevel:
        if self.subgroup is not None:
            return IpcLevel.SUBGROUP
        if self.main_group is not None:
            return IpcLevel.MAIN_GROUP
        if self.subclass_letter is not None:
            return IpcLevel.SUBCLASS
        if self.class_digits is not None:
            return IpcLevel.CLASS
        return IpcLevel.SECTION

    def __str__(self) -> str:
        return format_ipc(self)

    def __lt__(self, other):
        if not isinstance(other, IpcCode):
            return NotImplemented
        return format_ipc(self) < format_ipc(other)


def parse_ipc(raw: str) -> IpcCode:
    """Parse a raw IPC symbol, tolerating case and the space before the main group.

    >>> parse_ipc("g06f 17/30")
    IpcCode(section='G', class_digits='06', subclass_letter='F', main_group=17, subgroup='30')
    """
    if not isinstance(raw, str):
        raise MalformedIpc(f"IPC symbol must be text, got {type(raw).__name__}")
    text = raw.strip()
    if not text:
        raise MalformedIpc("empty IPC symbol")
    m = _IPC_RE.match(text)
    if m is None:
        raise MalformedIpc(f"malformed IPC symbol: {raw!r}")
    section = m["section"].upper()
    if section not in SECTIONS:
        raise MalformedIpc(f"section outside A..H: {raw!r}")
    main = m["main"]
    return IpcCode(
        section=section,
        class_digits=m["cls"],
        subclass_letter=m["subclass"].upper() if m["subclass"] else None,
        main_group=int(main) if main is not None else None,
        subgroup=m["sub"],
    )


def truncate(code: IpcCode, level: IpcLevel) -> IpcCode:
    if level > code.level:
        raise LevelUnavailable(f"{format_ipc(code)} has no {level.slug} component")
    if level == code.level:
        return code
    keep = level.value
    return IpcCode(
        section=code.section,
        class_digits=code.class_digits if keep >= 2 else None,
        subclass_letter=code.subclass_letter if keep >= 3 else None,
        main_group=code.main_group if keep >= 4 else None,
        subgroup=None,
    )


def format_ipc(code: IpcCode) -> str:
    parts = [code.section]
    if code.class_digits is not None:
        parts.append(code.class_digits)
    if code.subclass_letter is not None:
        parts.append(code.subclass_letter)
    if code.main_group is not None:
        parts.append(str(code.main_group))
    if code.subgroup is not None:
        parts.append("/" + code.subgroup)
    return "".join(parts)
