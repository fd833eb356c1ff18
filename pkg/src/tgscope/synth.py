"""Ground-truthed synthetic channel universes and a snowball-crawl simulator.

Text is token soup drawn from per-role pseudo-word vocabularies; every
original message text is unique across the universe, so any shared content is
scripted (forwards and clone copies, plus optional copy noise).
"""

from __future__ import annotations

import configparser
import csv
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .data_model import ChannelRecord, Dataset, ForwardOrigin, MessageRecord, write_dataset

DAY = 86_400
LINK_HOSTS = ("twitter.com", "instagram.com", "facebook.com", "youtube.com", "t.me", "example.org")
TITLE_MARKS = ("✅", "☑️", "⭐", "🇺🇸", "🔥", "✔️")


class SpecError(ValueError):
    pass


@dataclass
class StandardSpec:
    n_standard: int = 200
    n_verified: int = 0
    n_scam: int = 0
    messages_min: int = 20
    messages_max: int = 60
    media_fraction: float = 0.3
    forward_prob: float = 0.7        # chance a channel forwards at all
    forward_sources: int = 3         # max distinct sources per forwarding channel
    forward_fraction: float = 0.083  # forwarded share of a standard channel's messages
    verified_forward_fraction: float = 0.026
    scam_forward_fraction: float = 0.075
    n_topics: int = 5
    hub_in_degree: int = 0
    copy_noise: float = 0.0          # chance a channel reposts a few texts from a peer
    language: str = "en"


@dataclass
class FakeSpec:
    n_official: int = 0
    n_fake: int = 0
    official_link_mean: float = 2006.24
    fake_link_mean: float = 682.74
    link_sigma: float = 0.9
    official_messages_min: int = 80
    official_messages_max: int = 160
    fake_messages_min: int = 40
    fake_messages_max: int = 120
    fake_active_days: int = 120
    fake_title_emoji_prob: float = 0.7
    fake_repost_prob: float = 0.06
    history_days: int = 720


@dataclass
class CloneSpec:
    n_originals: int = 0
    clones_per_original: int = 2
    copy_fraction: float = 0.6
    extra_rate: float = 0.4
    delay_min: int = 600
    delay_max: int = 3 * DAY


@dataclass
class NetworkSpec:
    size: int = 0
    anchors: int = 11
    core_messages: int = 40
    member_messages_min: int = 1
    member_messages_max: int = 4
    native_messages: int = 2
    initial_messages: int = 1
    fast_fraction: float = 0.95
    spread_mean: int = 1800
    language_groups: str = "it:4,de:4"
    bridges: int = 3


@dataclass
class UniverseSpec:
    seed: int = 0
    start_time: int = 1_577_836_800  # 2020-01-01
    end_time: int = 1_640_995_200    # 2022-01-01
    standard: StandardSpec = field(default_factory=StandardSpec)
    fakes: FakeSpec = field(default_factory=FakeSpec)
    clones: CloneSpec = field(default_factory=CloneSpec)
    network: NetworkSpec = field(default_factory=NetworkSpec)

    def validate(self) -> None:
        if self.end_time <= self.start_time + 200 * DAY:
            raise SpecError("end_time must be at least 200 days after start_time")
        for section in (self.standard, self.fakes, self.clones, self.network):
            for f in dataclasses.fields(section):
                v = getattr(section, f.name)
                if isinstance(v, (int, float)) and not isinstance(v, bool) and v < 0:
                    raise SpecError(f"{f.name} must be >= 0")
                if isinstance(v, float) and (f.name.endswith("_prob") or f.name.endswith("fraction") or f.name == "copy_noise") and v > 1:
                    raise SpecError(f"{f.name} must lie in [0, 1]")
        s, c, n = self.standard, self.clones, self.network
        if s.messages_min > s.messages_max:
            raise SpecError("messages_min > messages_max")
        if c.n_originals + (1 if s.hub_in_degree else 0) > s.n_standard:
            raise SpecError(f"{c.n_originals} clone originals requested but only {s.n_standard} standard channels")
        if c.n_originals and c.clones_per_original < 1:
            raise SpecError("clones_per_original must be >= 1")
        if n.size:
            if n.size < 3:
                raise SpecError("network size must be >= 3")
            if n.anchors > n.size - 1:
                raise SpecError("more anchors than network members")
            if sum(k for _, k in parse_groups(n.language_groups)) > n.size - 1 - n.anchors:
                raise SpecError("language groups exceed plain network members")
            if n.bridges > s.n_standard:
                raise SpecError("more bridges than standard channels")
        if s.hub_in_degree and s.hub_in_degree > s.n_standard - 1:
            raise SpecError("hub_in_degree exceeds available standard channels")
        if self.fakes.n_fake and not self.fakes.n_official:
            raise SpecError("fakes impersonate officials; n_official must be > 0")

    @classmethod
    def from_config(cls, path) -> "UniverseSpec":
        """Read ``key = value`` pairs grouped in [universe], [standard], [fakes], [clones], [network] sections."""
        cp = configparser.ConfigParser()
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
        spec = cls()
        sections = {"standard": spec.standard, "fakes": spec.fakes, "clones": spec.clones, "network": spec.network}
        for name in cp.sections():
            target = spec if name == "universe" else sections.get(name)
            if target is None:
                raise SpecError(f"unknown section [{name}]")
            known = {f.name: f for f in dataclasses.fields(target)}
            for key, raw in cp.items(name):
                if key not in known or key in sections:
                    raise SpecError(f"unknown key {key!r} in [{name}]")
                default = getattr(target, key)
                try:
                    value = type(default)(raw) if not isinstance(default, int) else int(raw)
                except ValueError as exc:
                    raise SpecError(f"bad value for {name}.{key}: {raw!r}") from exc
                setattr(target, key, value)
        spec.validate()
        return spec


def parse_groups(text: str) -> list[tuple[str, int]]:
    out = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        lang, _, n = part.partition(":")
        out.append((lang.strip(), int(n)))
    return out


@dataclass
class GroundTruth:
    roles: dict[int, str] = field(default_factory=dict)
    clone_pairs: list[tuple[int, int]] = field(default_factory=list)  # (original, clone)
    network: set[int] = field(default_factory=set)
    anchors: list[int] = field(default_factory=list)
    core: Optional[int] = None
    hub: Optional[int] = None
    stats: dict[str, float] = field(default_factory=dict)

    def labels(self) -> dict[int, int]:
        """1 for fake, 0 for official, over the fake-channel population."""
        return {c: int(r == "fake") for c, r in self.roles.items() if r in ("official", "fake")}


class _Words:
    """Deterministic pseudo-word vocabularies."""

    SYL = ("ka", "lo", "mi", "ten", "ra", "vo", "sul", "pe", "dra", "ni", "ko", "bar", "ze", "tu", "fin", "gal",
           "mor", "si", "qua", "len", "dor", "ve", "xi", "pla")

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.used: set[str] = set()

    def vocab(self, size: int) -> np.ndarray:
        words: list[str] = []
        while len(words) < size:
            n = int(self.rng.integers(2, 4))
            w = "".join(self.SYL[i] for i in self.rng.integers(0, len(self.SYL), n))
            if w not in self.used and len(w) >= 4:
                self.used.add(w)
                words.append(w)
        return np.array(words)


class _Builder:
    def __init__(self, spec: UniverseSpec):
        self.spec = spec
        self.rng = np.random.default_rng(spec.seed)
        self.words = _Words(np.random.default_rng([spec.seed, 1]))
        self.channels: list[ChannelRecord] = []
        self.messages: dict[int, list[MessageRecord]] = {}
        self.texts: set[str] = set()
        self.truth = GroundTruth()
        self.next_id = 1000
        self.common = self.words.vocab(300)

    # -- primitives --------------------------------------------------------
    def new_channel(self, role: str, title: str, description: str, creation: int, subscribers: int,
                    verified=False, scam=False, language: Optional[str] = "en") -> int:
        cid = self.next_id
        self.next_id += 1
        self.channels.append(ChannelRecord(cid, f"{role}_{cid}", title, description, int(creation), int(subscribers),
                                           verified, scam, language))
        self.messages[cid] = []
        self.truth.roles[cid] = role
        return cid

    def add(self, cid: int, date: int, kind="text", text=None, fwd: Optional[ForwardOrigin] = None) -> MessageRecord:
        msgs = self.messages[cid]
        if kind == "text":
            m = MessageRecord(cid, len(msgs) + 1, int(date), "text", text=text, fwd=fwd)
        else:
            m = MessageRecord(cid, len(msgs) + 1, int(date), "media", media_title=text, media_format="jpg", fwd=fwd)
        msgs.append(m)
        return m

    def unique_texts(self, vocab: np.ndarray, count: int, lo: int = 6, hi: int = 16, tail: Optional[list[str]] = None) -> list[str]:
        out = []
        lengths = self.rng.integers(lo, hi + 1, size=count)
        picks = self.rng.integers(0, vocab.size, size=int(lengths.sum()))
        pos = 0
        for i, n in enumerate(lengths):
            while True:
                words = vocab[picks[pos:pos + n]] if pos + n <= picks.size else vocab[self.rng.integers(0, vocab.size, n)]
                pos += n
                text = " ".join(words.tolist())
                if tail and tail[i]:
                    text = f"{text} {tail[i]}"
                if text not in self.texts:
                    self.texts.add(text)
                    out.append(text)
                    break
        return out

    def phrase(self, k: int) -> str:
        return " ".join(self.common[self.rng.integers(0, self.common.size, k)].tolist())

    def originals(self, cid: int) -> list[MessageRecord]:
        return [m for m in self.messages[cid] if m.kind == "text" and m.fwd is None]

    def forward(self, cid: int, src: int, m: MessageRecord, date: int) -> None:
        self.add(cid, max(date, m.date), "text", m.text,
                 ForwardOrigin(src, self.name_of(src), m.date, None))

    def name_of(self, cid: int) -> str:
        return self._titles[cid]

    # -- populations -------------------------------------------------------
    def build(self) -> tuple[Dataset, GroundTruth]:
        self._titles: dict[int, str] = {}
        std = self.build_standard()
        self.build_fakes()
        self.build_clones(std)
        self.build_forwards(std)
        self.build_network(std)
        ds = Dataset.build(self.channels, (m for msgs in self.messages.values() for m in msgs))
        return ds, self.truth

    def _register(self, cid: int, title: str) -> None:
        self._titles[cid] = title

    def build_standard(self) -> list[int]:
        s, sp = self.spec.standard, self.spec
        rng = self.rng
        topics = [self.words.vocab(60) for _ in range(max(1, s.n_topics))]
        ids = []
        kinds = ["standard"] * s.n_standard + ["verified"] * s.n_verified + ["scam"] * s.n_scam
        sub_mu = {"standard": 7.0, "verified": 11.0, "scam": 9.5}
        for i, kind in enumerate(kinds):
            topic = topics[i % len(topics)]
            vocab = np.concatenate([topic, topic, topic, self.common[rng.integers(0, self.common.size, 40)]])
            created = int(rng.integers(sp.start_time, sp.end_time - 150 * DAY))
            title = self.phrase(2).title()
            cid = self.new_channel(kind, title, self.phrase(3), created,
                                   int(rng.lognormal(sub_mu[kind], 1.2)), verified=kind == "verified",
                                   scam=kind == "scam", language=s.language)
            self._register(cid, title)
            n = int(rng.integers(s.messages_min, s.messages_max + 1))
            n_media = int(round(n * s.media_fraction))
            dates = np.sort(rng.integers(created, sp.end_time, size=n))
            media_slots = set(rng.choice(n, size=n_media, replace=False).tolist()) if n_media else set()
            texts = iter(self.unique_texts(vocab, n - len(media_slots)))
            for j, d in enumerate(dates):
                if j in media_slots:
                    self.add(cid, d, "media", f"photo {j}")
                else:
                    self.add(cid, d, "text", next(texts))
            ids.append(cid)
        return ids

    def build_forwards(self, std: list[int]) -> None:
        s = self.spec.standard
        rng = self.rng
        pool = [c for c in std]
        if len(pool) < 2:
            return
        roles = self.truth.roles
        frac = {"standard": s.forward_fraction, "verified": s.verified_forward_fraction, "scam": s.scam_forward_fraction,
                "original": s.forward_fraction}
        hub = None
        if s.hub_in_degree:
            hub = pool[0]
            self.truth.hub = hub
            roles[hub] = "hub"
        originals_cache = {c: self.originals(c) for c in pool}
        for cid in pool:
            if roles[cid] in ("hub",) or rng.random() > s.forward_prob:
                continue
            n_own = len(self.messages[cid])
            n_fwd = max(1, int(round(n_own * frac.get(roles[cid], s.forward_fraction) / (1 - frac.get(roles[cid], s.forward_fraction)))))
            k = int(rng.integers(1, s.forward_sources + 1))
            others = [c for c in pool if c != cid and c != hub and originals_cache[c]]
            if not others:
                continue
            sources = rng.choice(others, size=min(k, len(others)), replace=False)
            for j in range(n_fwd):
                src = int(sources[j % len(sources)])
                m = originals_cache[src][int(rng.integers(len(originals_cache[src])))]
                self.forward(cid, src, m, m.date + int(rng.integers(60, 30 * DAY)))
        if hub is not None:
            hub_msgs = originals_cache[hub]
            followers = rng.choice([c for c in pool if c != hub], size=s.hub_in_degree, replace=False)
            for cid in followers:
                m = hub_msgs[int(rng.integers(len(hub_msgs)))]
                self.forward(int(cid), hub, m, m.date + int(rng.integers(60, 5 * DAY)))
        if s.copy_noise:
            for cid in pool:
                if roles[cid] != "standard" or rng.random() >= s.copy_noise:
                    continue
                peers = [c for c in pool if c != cid and roles[c] == "standard" and originals_cache[c]]
                if not peers:
                    continue
                src = int(rng.choice(peers))
                own = len(originals_cache[cid])
                # stays well below the clone threshold
                n_copy = max(1, own // 12)
                for m in rng.choice(len(originals_cache[src]), size=min(n_copy, len(originals_cache[src])), replace=False):
                    orig = originals_cache[src][int(m)]
                    self.add(cid, orig.date + int(rng.integers(60, 10 * DAY)), "text", orig.text)

    def build_fakes(self) -> None:
        f, sp = self.spec.fakes, self.spec
        rng = self.rng
        if not (f.n_official or f.n_fake):
            return
        vocab = np.concatenate([self.words.vocab(120), self.common])
        end = sp.end_time
        official_titles = []
        emojis = ("🔥", "👉", "📢", "✅", "🇺🇸", "⭐", "😂")

        def decorate(n_links: int, emoji_prob: float) -> str:
            parts = [f"https://{LINK_HOSTS[int(rng.integers(len(LINK_HOSTS)))]}/{int(rng.integers(10**6))}"
                     for _ in range(n_links)]
            if rng.random() < emoji_prob:
                parts.append(emojis[int(rng.integers(len(emojis)))])
            return " ".join(parts)

        def fill(cid: int, dates, total_links: int, dup_prob: float, emoji_prob: float) -> None:
            count = len(dates)
            per_msg = rng.multinomial(total_links, np.full(count, 1.0 / count))
            tails = [decorate(int(k), emoji_prob) for k in per_msg]
            texts = self.unique_texts(vocab, count, 6, 30, tails)
            last_link_text = None
            for d, t, n_links in zip(dates, texts, per_msg):
                if last_link_text is not None and rng.random() < dup_prob:
                    self.add(cid, d, "text", last_link_text)
                    continue
                self.add(cid, d, "text", t)
                if n_links:
                    last_link_text = t

        def links(mean: float) -> int:
            return int(rng.lognormal(np.log(mean) - f.link_sigma**2 / 2, f.link_sigma))

        def blurb(target: str) -> str:
            marks = "".join(rng.choice(list("!.,:-|"), size=int(rng.integers(0, 6))).tolist())
            return f"{target} {self.phrase(4)}{marks}"

        for _ in range(f.n_official):
            name = self.phrase(2).title()
            official_titles.append(name)
            span = int(rng.integers(45, f.history_days + 1)) * DAY
            title = name if rng.random() >= 0.15 else f"{name} {TITLE_MARKS[int(rng.integers(len(TITLE_MARKS)))]}"
            cid = self.new_channel("official", title, blurb(name), end - span - DAY,
                                   int(rng.lognormal(10.5, 1.3)), verified=True)
            self._register(cid, title)
            n = int(rng.integers(f.official_messages_min, f.official_messages_max + 1))
            # some official channels have gone quiet recently
            last = end if rng.random() < 0.8 else end - int(rng.integers(30, 200)) * DAY
            dates = np.sort(rng.integers(end - span, max(last, end - span + DAY), size=n))
            fill(cid, dates, links(f.official_link_mean), 0.03, 0.1)

        for _ in range(f.n_fake):
            target = official_titles[int(rng.integers(len(official_titles)))]
            style = rng.random()
            if style < f.fake_title_emoji_prob:
                title = f"{target} {TITLE_MARKS[int(rng.integers(len(TITLE_MARKS)))]}"
            elif style < f.fake_title_emoji_prob + (1 - f.fake_title_emoji_prob) / 2:
                title = f"{target} Official"
            else:
                title = target + "s"
            active = max(7, int(rng.lognormal(np.log(max(f.fake_active_days, 1)), 0.7))) * DAY
            active_end = end - (0 if rng.random() < 0.35 else int(rng.integers(0, f.history_days // 2)) * DAY)
            active_start = active_end - active
            cid = self.new_channel("fake", title, blurb(target), active_start - DAY, int(rng.lognormal(8.5, 1.5)))
            self._register(cid, title)
            n = int(rng.integers(f.fake_messages_min, f.fake_messages_max + 1))
            dates = np.sort(rng.integers(active_start, active_end, size=n))
            fill(cid, dates, links(f.fake_link_mean), f.fake_repost_prob, 0.2)
    def build_clones(self, std: list[int]) -> None:
        c = self.spec.clones
        rng = self.rng
        if not c.n_originals:
            return
        plain = [cid for cid in std if self.truth.roles[cid] == "standard"]
        originals = plain[-c.n_originals:]  # the hub (if any) is std[0]
        kinds = ("perfect", "titled", "plain")
        for o_idx, orig in enumerate(originals):
            self.truth.roles[orig] = "original"
            o_ch = next(ch for ch in self.channels if ch.id == orig)
            src = self.originals(orig)
            base = rng.integers(c.delay_min, c.delay_max + 1, size=len(src))
            n_sib = c.clones_per_original
            for j in range(n_sib):
                kind = kinds[(o_idx * n_sib + j) % 3]
                if kind == "perfect":
                    title, desc = o_ch.title, o_ch.description
                elif kind == "titled":
                    title, desc = o_ch.title + " " + TITLE_MARKS[0], "backup of " + o_ch.description
                else:
                    title, desc = self.phrase(2).title(), "mirror channel"
                cid = self.new_channel("clone", title, desc, o_ch.creation_date + DAY, int(rng.lognormal(6, 1)),
                                       language=o_ch.language)
                self._register(cid, title)
                copied = 0
                for r, m in enumerate(src):
                    # ranks below n_sib are copied by every sibling with rotated
                    # offsets, so no sibling is uniformly later than another
                    if r >= n_sib and rng.random() >= c.copy_fraction:
                        continue
                    self.add(cid, m.date + int(base[r]) + ((r + j) % n_sib) * 60, "text", m.text)
                    copied += 1
                n_extra = int(copied * c.extra_rate)
                if n_extra:
                    vocab = self.words.vocab(40)
                    dates = rng.integers(o_ch.creation_date + DAY, self.spec.end_time, size=n_extra)
                    for d, t in zip(dates, self.unique_texts(vocab, n_extra)):
                        self.add(cid, d, "text", t)
                self.truth.clone_pairs.append((orig, cid))

    def build_network(self, std: list[int]) -> None:
        n, sp = self.spec.network, self.spec
        rng = self.rng
        if not n.size:
            return
        vocab = self.words.vocab(150)
        t0 = sp.end_time - 120 * DAY
        groups = parse_groups(n.language_groups)
        members = []
        core = self.new_channel("core", "Core Awakening", "the source", t0 - 200 * DAY, 130_000)
        self._register(core, "Core Awakening")
        members.append(core)
        langs = {core: "en"}
        plan = ["network_fake"] * n.anchors
        for lang, k in groups:
            plan += [f"lang:{lang}"] * k
        plan += ["network"] * (n.size - 1 - len(plan))
        for p in plan:
            lang = p.split(":", 1)[1] if p.startswith("lang:") else "en"
            role = "network_fake" if p == "network_fake" else "network"
            title = self.phrase(2).title()
            if role == "network_fake":
                title += " Official"
            cid = self.new_channel(role, title, "truth and awakening", int(rng.integers(t0 - 40 * DAY, t0 - 30 * DAY)),
                                   int(rng.lognormal(9, 1)), language=lang)
            self._register(cid, title)
            members.append(cid)
            langs[cid] = lang
            if role == "network_fake":
                self.truth.anchors.append(cid)
        self.truth.core = core
        self.truth.network = set(members)
        others = members[1:]
        fast = []
        total = distinct = never = 0

        def first_delay() -> int:
            if rng.random() < n.fast_fraction:
                return int(rng.integers(0, FAST + 1))
            return int(rng.integers(FAST + 1, DAY))

        def spread(origin_ch: int, m: MessageRecord, audience: list[int]) -> None:
            nonlocal total, never
            if not audience:
                never += 1
                return
            f = first_delay()
            fast.append(f <= FAST)
            order = rng.permutation(len(audience))
            for rank, idx in enumerate(order):
                d = f if rank == 0 else f + int(rng.exponential(n.spread_mean))
                self.forward(audience[idx], origin_ch, m, m.date + d)
            total += len(audience)

        # initial activity, never forwarded
        for cid in others:
            for t in self.unique_texts(vocab, n.initial_messages):
                self.add(cid, int(rng.integers(t0 - 30 * DAY, t0)), "text", t)
                total += 1
                distinct += 1
                never += 1
        for t in self.unique_texts(vocab, n.core_messages):
            m = self.add(core, int(rng.integers(t0, sp.end_time - 2 * DAY)), "text", t)
            total += 1
            distinct += 1
            spread(core, m, others)
        by_lang: dict[str, list[int]] = {}
        for cid in others:
            by_lang.setdefault(langs[cid], []).append(cid)
        for i, cid in enumerate(others):
            k = int(rng.integers(n.member_messages_min, n.member_messages_max + 1))
            for r, t in enumerate(self.unique_texts(vocab, max(1, k))):
                m = self.add(cid, int(rng.integers(t0, sp.end_time - 2 * DAY)), "text", t)
                total += 1
                distinct += 1
                peers = [c for c in others if c != cid]
                size = int(rng.integers(1, len(peers) + 1))
                audience = set(rng.choice(peers, size=size, replace=False).tolist())
                if r == 0:
                    audience.add(others[i - 1])  # ring keeps the members strongly connected
                audience.discard(cid)
                spread(cid, m, sorted(audience))
            if langs[cid] != "en":
                group = [c for c in by_lang[langs[cid]] if c != cid]
                for t in self.unique_texts(vocab, n.native_messages):
                    m = self.add(cid, int(rng.integers(t0, sp.end_time - 2 * DAY)), "text", f"{langs[cid]} {t}")
                    total += 1
                    distinct += 1
                    spread(cid, m, group)
        # a few outside channels pick up core content
        if n.bridges and std:
            core_msgs = self.originals(core)
            # prefer channels already tied to several sources so they stay in their own community
            linked = [c for c in std if len({m.fwd.from_channel_id for m in self.messages[c] if m.fwd}) >= 2]
            pool = linked if len(linked) >= n.bridges else std
            for b in rng.choice(pool, size=n.bridges, replace=False):
                m = core_msgs[int(rng.integers(len(core_msgs)))]
                self.forward(int(b), core, m, m.date + DAY)
        self.truth.stats.update(
            network_total=total,
            network_distinct=distinct,
            never_forwarded=never,
            fast_first_fraction=float(np.mean(fast)) if fast else 0.0,
        )


FAST = 600


def generate_universe(spec: UniverseSpec) -> tuple[Dataset, GroundTruth]:
    spec.validate()
    return _Builder(spec).build()


def write_universe(dataset: Dataset, truth: GroundTruth, out_dir) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "channels": out / "channels.jsonl",
        "messages": out / "messages.jsonl",
        "ground_truth": out / "ground_truth.csv",
        "ground_truth_stats": out / "ground_truth_stats.csv",
    }
    write_dataset(dataset, paths["channels"], paths["messages"])
    clone_of = {c: o for o, c in truth.clone_pairs}
    with open(paths["ground_truth"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["channel_id", "role", "clone_of", "network", "core", "anchor"])
        anchors = set(truth.anchors)
        for cid in sorted(truth.roles):
            w.writerow([cid, truth.roles[cid], clone_of.get(cid, ""), int(cid in truth.network),
                        int(cid == truth.core), int(cid in anchors)])
    with open(paths["ground_truth_stats"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["key", "value"])
        if truth.hub is not None:
            w.writerow(["hub", truth.hub])
        for k in sorted(truth.stats):
            w.writerow([k, repr(truth.stats[k])])
    return paths


def read_ground_truth(path) -> GroundTruth:
    gt = GroundTruth()
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            cid = int(row["channel_id"])
            gt.roles[cid] = row["role"]
            if row["clone_of"]:
                gt.clone_pairs.append((int(row["clone_of"]), cid))
            if row["network"] == "1":
                gt.network.add(cid)
            if row["core"] == "1":
                gt.core = cid
            if row["anchor"] == "1":
                gt.anchors.append(cid)
    gt.clone_pairs.sort()
    return gt


# ---------------------------------------------------------------------------
# crawl simulation

@dataclass
class CrawlIteration:
    iteration: int
    processed: int
    new_channels: int
    explored_fraction: float  # processed channels whose forward origins are all known
    idle_fraction: float = 0.0  # channels of this round that brought no new channel


@dataclass
class CrawlResult:
    dataset: Dataset
    discovered: set[int]
    iterations: list[CrawlIteration]
    pending: set[int]

    @property
    def reached_fixed_point(self) -> bool:
        return not self.pending


def window_origins(universe: Dataset, cid: int, window: int) -> set[int]:
    """In-universe forward origins within the channel's last ``window`` messages."""
    msgs = universe.channel_messages(cid)[-window:] if window > 0 else ()
    return {m.fwd.from_channel_id for m in msgs
            if m.fwd is not None and m.fwd.from_channel_id in universe.channels and m.fwd.from_channel_id != cid}


def simulate_crawl(universe: Dataset, seeds: Iterable[int], window: int = 10_000,
                   max_iterations: int = 100) -> CrawlResult:
    """Snowball crawl: download the last ``window`` messages of every newly
    known channel, add the channels they forward from, and repeat until no
    new channel appears or ``max_iterations`` rounds have run."""
    seeds = sorted(set(seeds))
    missing = [s for s in seeds if s not in universe.channels]
    if missing:
        raise KeyError(f"seed channels not in universe: {missing[:5]}")
    known = set(seeds)
    frontier = list(seeds)
    processed: set[int] = set()
    origins: dict[int, set[int]] = {}
    report = []
    it = 0
    while frontier and it < max_iterations:
        it += 1
        found = set()
        idle = 0
        for cid in frontier:
            origins[cid] = window_origins(universe, cid, window)
            processed.add(cid)
            fresh = origins[cid] - known
            idle += not fresh
            found |= fresh
        known |= found
        explored = sum(1 for c in processed if origins[c] <= processed) / len(processed)
        report.append(CrawlIteration(it, len(frontier), len(found), explored, idle / len(frontier)))
        frontier = sorted(found)
    crawled = universe.subset(processed)
    crawled = Dataset(
        crawled.channels,
        {c: (universe.channel_messages(c)[-window:] if window > 0 else ()) for c in crawled.channels},
        universe.reference_time,
        crawled._by_username,
    )
    return CrawlResult(crawled, known, report, set(frontier))
