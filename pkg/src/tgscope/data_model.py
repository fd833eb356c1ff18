"""Channel archive records, parsing, text normalization and fingerprinting."""

from __future__ import annotations

import hashlib
import json
import unicodedata
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1

CHANNEL_CLASSES = ("verified", "scam", "standard")


class DataError(ValueError):
    """Invalid archive content."""


class ParseError(DataError):
    def __init__(self, path, line: int, message: str):
        self.path = str(path)
        self.line = line
        self.reason = message
        super().__init__(f"{self.path}:{line}: {message}")


@dataclass(frozen=True, slots=True)
class ForwardOrigin:
    from_channel_id: Optional[int]
    from_name: Optional[str]
    from_date: int
    author: Optional[str] = None


@dataclass(frozen=True, slots=True)
class ChannelRecord:
    id: int
    username: Optional[str]
    title: str
    description: str
    creation_date: int
    subscribers: int
    verified: bool = False
    scam: bool = False
    language: Optional[str] = None

    @property
    def kind(self) -> str:
        if self.verified:
            return "verified"
        if self.scam:
            return "scam"
        return "standard"


@dataclass(frozen=True, slots=True)
class MessageRecord:
    channel_id: int
    message_id: int
    date: int
    kind: str
    text: Optional[str] = None
    media_title: Optional[str] = None
    media_format: Optional[str] = None
    fwd: Optional[ForwardOrigin] = None

    @property
    def is_text(self) -> bool:
        return self.kind == "text"

    @property
    def is_forward(self) -> bool:
        return self.fwd is not None


@dataclass
class Dataset:
    """Immutable-by-convention container of channels and their messages.

    ``messages`` maps every channel id to a tuple sorted by (date, message_id).
    ``reference_time`` defaults to the latest message date (0 when empty).
    """

    channels: dict[int, ChannelRecord]
    messages: dict[int, tuple[MessageRecord, ...]]
    reference_time: int = 0
    _by_username: dict[str, int] = field(default_factory=dict, repr=False)

    @classmethod
    def build(
        cls,
        channels: Iterable[ChannelRecord],
        messages: Iterable[MessageRecord],
        reference_time: Optional[int] = None,
    ) -> "Dataset":
        chans: dict[int, ChannelRecord] = {}
        names: dict[str, int] = {}
        for ch in channels:
            _check_channel(ch)
            if ch.id in chans:
                raise DataError(f"duplicate channel id {ch.id}")
            if ch.username is not None:
                if ch.username in names:
                    raise DataError(f"duplicate username {ch.username!r}")
                names[ch.username] = ch.id
            chans[ch.id] = ch
        per: dict[int, list[MessageRecord]] = defaultdict(list)
        for m in messages:
            if m.channel_id not in chans:
                raise DataError(f"message {m.message_id} references unknown channel {m.channel_id}")
            _check_message(m)
            per[m.channel_id].append(m)
        for cid, msgs in per.items():
            if len({m.message_id for m in msgs}) != len(msgs):
                raise DataError(f"duplicate message id in channel {cid}")
        return cls._assemble(chans, per, reference_time, names)

    @classmethod
    def _assemble(cls, chans, per, reference_time, names) -> "Dataset":
        ordered = {}
        latest = 0
        for cid in sorted(chans):
            msgs = per.get(cid, [])
            msgs.sort(key=lambda m: (m.date, m.message_id))
            if msgs:
                latest = max(latest, msgs[-1].date)
            ordered[cid] = tuple(msgs)
        channels = {cid: chans[cid] for cid in sorted(chans)}
        ref = latest if reference_time is None else int(reference_time)
        return cls(channels, ordered, ref, names)

    def __len__(self) -> int:
        return len(self.channels)

    @property
    def n_messages(self) -> int:
        return sum(len(v) for v in self.messages.values())

    def channel_messages(self, cid: int) -> tuple[MessageRecord, ...]:
        return self.messages.get(cid, ())

    def by_username(self, username: str) -> Optional[ChannelRecord]:
        cid = self._by_username.get(username)
        return None if cid is None else self.channels[cid]

    def with_reference_time(self, ref: int) -> "Dataset":
        return Dataset(self.channels, self.messages, int(ref), self._by_username)

    def subset(self, ids: Iterable[int]) -> "Dataset":
        keep = sorted(set(ids))
        chans = {c: self.channels[c] for c in keep}
        msgs = {c: self.messages[c] for c in keep}
        names = {ch.username: ch.id for ch in chans.values() if ch.username is not None}
        return Dataset(chans, msgs, self.reference_time, names)


def _check_int(value, name: str, lo: int = INT64_MIN, hi: int = INT64_MAX) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise DataError(f"field {name!r} must be an integer, got {value!r}")
    if value < lo or value > hi:
        raise DataError(f"field {name!r} out of range: {value}")
    return value


def _check_channel(ch: ChannelRecord) -> None:
    _check_int(ch.id, "id")
    _check_int(ch.subscribers, "subscribers", lo=0)
    _check_int(ch.creation_date, "creation_date", lo=1)
    if ch.verified and ch.scam:
        raise DataError(f"channel {ch.id} is both verified and scam")


def _check_message(m: MessageRecord) -> None:
    _check_int(m.message_id, "message_id")
    _check_int(m.date, "date", lo=1)
    if m.kind == "text":
        if not isinstance(m.text, str):
            raise DataError(f"text message {m.message_id} has no text")
    elif m.kind == "media":
        if not isinstance(m.media_title, str) or not isinstance(m.media_format, str):
            raise DataError(f"media message {m.message_id} lacks media title/format")
    else:
        raise DataError(f"unknown message kind {m.kind!r}")
    if m.fwd is not None:
        _check_int(m.fwd.from_date, "fwd.from_date", lo=0)
        if m.fwd.from_channel_id is not None:
            _check_int(m.fwd.from_channel_id, "fwd.from_channel_id")
        if m.fwd.from_date > m.date:
            raise DataError(f"message {m.message_id} forwarded from the future ({m.fwd.from_date} > {m.date})")


# ---------------------------------------------------------------------------
# line-oriented archive format

def _opt_str(obj: Mapping, key: str) -> Optional[str]:
    v = obj.get(key)
    if v is not None and not isinstance(v, str):
        raise DataError(f"field {key!r} must be a string or null")
    return v


def _req_str(obj: Mapping, key: str) -> str:
    v = obj.get(key)
    if not isinstance(v, str):
        raise DataError(f"field {key!r} must be a string")
    return v


def _req_bool(obj: Mapping, key: str) -> bool:
    v = obj.get(key, False)
    if not isinstance(v, bool):
        raise DataError(f"field {key!r} must be a boolean")
    return v


def channel_from_json(obj: Mapping) -> ChannelRecord:
    if not isinstance(obj, dict):
        raise DataError("record is not a JSON object")
    if "id" not in obj:
        raise DataError("missing field 'id'")
    ch = ChannelRecord(
        id=_check_int(obj["id"], "id"),
        username=_opt_str(obj, "username"),
        title=_req_str(obj, "title"),
        description=obj.get("description") or "",
        creation_date=_check_int(obj.get("creation_date"), "creation_date", lo=1),
        subscribers=_check_int(obj.get("subscribers"), "subscribers", lo=0),
        verified=_req_bool(obj, "verified"),
        scam=_req_bool(obj, "scam"),
        language=_opt_str(obj, "language"),
    )
    if not isinstance(ch.description, str):
        raise DataError("field 'description' must be a string")
    _check_channel(ch)
    return ch


def message_from_json(obj: Mapping) -> MessageRecord:
    if not isinstance(obj, dict):
        raise DataError("record is not a JSON object")
    for key in ("channel_id", "message_id", "date", "kind"):
        if key not in obj:
            raise DataError(f"missing field {key!r}")
    kind = obj["kind"]
    text = media_title = media_format = None
    if kind == "text":
        text = _req_str(obj, "text")
    elif kind == "media":
        media = obj.get("media")
        if not isinstance(media, dict):
            raise DataError("media message without 'media' object")
        media_title = _req_str(media, "title")
        media_format = _req_str(media, "format")
    else:
        raise DataError(f"unknown message kind {kind!r}")
    fwd = None
    raw = obj.get("fwd")
    if raw is not None:
        if not isinstance(raw, dict):
            raise DataError("field 'fwd' must be an object or null")
        src = raw.get("from_channel_id")
        fwd = ForwardOrigin(
            from_channel_id=None if src is None else _check_int(src, "fwd.from_channel_id"),
            from_name=_opt_str(raw, "from_name"),
            from_date=_check_int(raw.get("from_date"), "fwd.from_date", lo=0),
            author=_opt_str(raw, "author"),
        )
    m = MessageRecord(
        channel_id=_check_int(obj["channel_id"], "channel_id"),
        message_id=_check_int(obj["message_id"], "message_id"),
        date=_check_int(obj["date"], "date", lo=1),
        kind=kind,
        text=text,
        media_title=media_title,
        media_format=media_format,
        fwd=fwd,
    )
    _check_message(m)
    return m


def channel_to_json(ch: ChannelRecord) -> dict:
    return {
        "id": ch.id,
        "username": ch.username,
        "title": ch.title,
        "description": ch.description,
        "creation_date": ch.creation_date,
        "subscribers": ch.subscribers,
        "verified": ch.verified,
        "scam": ch.scam,
        "language": ch.language,
    }


def message_to_json(m: MessageRecord) -> dict:
    out: dict = {"channel_id": m.channel_id, "message_id": m.message_id, "date": m.date, "kind": m.kind}
    if m.kind == "text":
        out["text"] = m.text
    else:
        out["media"] = {"title": m.media_title, "format": m.media_format}
    if m.fwd is not None:
        out["fwd"] = {
            "from_channel_id": m.fwd.from_channel_id,
            "from_name": m.fwd.from_name,
            "from_date": m.fwd.from_date,
            "author": m.fwd.author,
        }
    return out


def _read_lines(path: Path):
    with open(path, "r", encoding="utf-8", newline="\n") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if line.endswith("\r"):
                line = line[:-1]
            if not line.strip():
                continue
            yield lineno, line


def parse_dataset(
    channels_path,
    messages_path,
    reference_time: Optional[int] = None,
) -> Dataset:
    """Read a two-file archive, validating every record.

    Raises :class:`ParseError` (carrying path and line number) for malformed
    lines, duplicate channel ids or usernames, unknown channel references and
    out-of-range numbers.
    """
    channels_path, messages_path = Path(channels_path), Path(messages_path)
    for p in (channels_path, messages_path):
        if not p.is_file():
            raise DataError(f"no such archive file: {p}")

    chans: dict[int, ChannelRecord] = {}
    names: dict[str, int] = {}
    loads = json.loads
    for lineno, line in _read_lines(channels_path):
        try:
            ch = channel_from_json(loads(line))
        except json.JSONDecodeError as exc:
            raise ParseError(channels_path, lineno, f"malformed JSON ({exc.msg})") from None
        except DataError as exc:
            raise ParseError(channels_path, lineno, str(exc)) from None
        if ch.id in chans:
            raise ParseError(channels_path, lineno, f"duplicate channel id {ch.id}")
        if ch.username is not None:
            if ch.username in names:
                raise ParseError(channels_path, lineno, f"duplicate username {ch.username!r}")
            names[ch.username] = ch.id
        chans[ch.id] = ch

    per: dict[int, list[MessageRecord]] = defaultdict(list)
    seen_ids: dict[int, set] = defaultdict(set)
    for lineno, line in _read_lines(messages_path):
        try:
            m = message_from_json(loads(line))
        except json.JSONDecodeError as exc:
            raise ParseError(messages_path, lineno, f"malformed JSON ({exc.msg})") from None
        except DataError as exc:
            raise ParseError(messages_path, lineno, str(exc)) from None
        if m.channel_id not in chans:
            raise ParseError(messages_path, lineno, f"unknown channel {m.channel_id}")
        ids = seen_ids[m.channel_id]
        if m.message_id in ids:
            raise ParseError(messages_path, lineno, f"duplicate message ({m.channel_id}, {m.message_id})")
        ids.add(m.message_id)
        per[m.channel_id].append(m)
    del seen_ids
    return Dataset._assemble(chans, per, reference_time, names)


def write_dataset(dataset: Dataset, channels_path, messages_path) -> None:
    """Serialize ``dataset`` in the archive format (inverse of :func:`parse_dataset`)."""
    dumps = json.dumps
    with open(channels_path, "w", encoding="utf-8", newline="\n") as fh:
        for ch in dataset.channels.values():
            fh.write(dumps(channel_to_json(ch), ensure_ascii=False))
            fh.write("\n")
    with open(messages_path, "w", encoding="utf-8", newline="\n") as fh:
        for msgs in dataset.messages.values():
            for m in msgs:
                fh.write(dumps(message_to_json(m), ensure_ascii=False))
                fh.write("\n")


# ---------------------------------------------------------------------------
# text utilities

def normalize_text(raw: str) -> str:
    """NFC-normalize and collapse whitespace runs; ends are trimmed, case is kept."""
    return " ".join(unicodedata.normalize("NFC", raw).split())


def fingerprint(normalized: str) -> bytes:
    """128-bit BLAKE2b digest of already-normalized text.

    For n distinct inputs the collision probability is about n**2 / 2**129,
    i.e. below 1e-26 for a million messages.
    """
    return hashlib.blake2b(normalized.encode("utf-8"), digest_size=16).digest()


def text_fingerprint(raw: str) -> bytes:
    return fingerprint(normalize_text(raw))


DEFAULT_SERVICE_PATTERNS: tuple[tuple[str, ...], ...] = (
    ("violated", "terms of service"),
    ("unavailable", "copyright"),
)


def is_violated_terms(text: str, patterns: Sequence[Sequence[str]] = DEFAULT_SERVICE_PATTERNS) -> bool:
    """True when every phrase of any pattern occurs in ``text`` (case-insensitive)."""
    if not text:
        return False
    folded = text.casefold()
    return any(all(p.casefold() in folded for p in pat) for pat in patterns)


# ---------------------------------------------------------------------------
# statistics

@dataclass
class Cdf:
    """Empirical CDF as sorted distinct values with cumulative fractions."""

    values: np.ndarray
    fractions: np.ndarray
    n: int

    @classmethod
    def of(cls, samples) -> "Cdf":
        arr = np.sort(np.asarray(samples, dtype=float))
        if arr.size == 0:
            return cls(np.empty(0), np.empty(0), 0)
        vals, counts = np.unique(arr, return_counts=True)
        fr = np.cumsum(counts) / arr.size
        fr[-1] = 1.0
        return cls(vals, fr, int(arr.size))

    def at(self, x: float) -> float:
        i = np.searchsorted(self.values, x, side="right")
        return 0.0 if i == 0 else float(self.fractions[i - 1])

    def points(self) -> list[tuple[float, float]]:
        return [(float(v), float(f)) for v, f in zip(self.values, self.fractions)]


STAT_METRICS = ("subscribers", "text_messages", "media_messages", "forwarded_ratio")


@dataclass
class ChannelStats:
    counts: dict[str, int]
    cdfs: dict[tuple[str, str], Cdf]
    means: dict[tuple[str, str], float]


def channel_metrics(dataset: Dataset, cid: int) -> dict[str, float]:
    msgs = dataset.channel_messages(cid)
    n_text = sum(1 for m in msgs if m.kind == "text")
    n_fwd = sum(1 for m in msgs if m.fwd is not None)
    return {
        "subscribers": float(dataset.channels[cid].subscribers),
        "text_messages": float(n_text),
        "media_messages": float(len(msgs) - n_text),
        "forwarded_ratio": n_fwd / len(msgs) if msgs else 0.0,
    }


def channel_stats(dataset: Dataset) -> ChannelStats:
    """Per-class (verified / scam / standard) CDFs and means of headline metrics."""
    samples = {(k, m): [] for k in CHANNEL_CLASSES for m in STAT_METRICS}
    counts = dict.fromkeys(CHANNEL_CLASSES, 0)
    for cid, ch in dataset.channels.items():
        counts[ch.kind] += 1
        for name, value in channel_metrics(dataset, cid).items():
            samples[(ch.kind, name)].append(value)
    cdfs = {key: Cdf.of(vals) for key, vals in samples.items()}
    means = {key: (float(np.mean(vals)) if vals else 0.0) for key, vals in samples.items()}
    return ChannelStats(counts, cdfs, means)
