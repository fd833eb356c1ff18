"""Small script + stopword-profile language identifier.

Covers en, ru, de, fa, hi, ar, it, bg, et, id, mr. Archive-supplied labels
always win over detection.
"""

from __future__ import annotations

import re
from collections import Counter
from typing import Iterable, Optional

from .data_model import ChannelRecord, MessageRecord

UNDETERMINED = "und"
MIN_TOKENS = 20
MIN_CONFIDENCE = 0.5

_STOPWORDS = {
    "en": """the of and to in is it that for on with as was be this are by at from or an
        have not but they you he she we his her their what which will would there been
        has had were all can if so no do just about over into than them out up our your""",
    "de": """der die und in den von zu das mit sich des auf für ist im dem nicht ein eine
        als auch es an werden aus er hat dass sie nach wird bei einer um am sind noch wie
        einem über einen so zum war haben nur oder aber vor zur bis mehr durch man""",
    "it": """il di che la e in un per non una sono del da le si con al lo della ma gli
        come anche più dei nel alla questo ci ha se io mi ho delle questa sul nella cosa
        tutto essere quando molto perché già loro fare stato""",
    "et": """ja on ei et see ta kui mis ka oli selle aga nii siis mida või kes oma veel
        kõik mina sina tema nad meie teie kus seda sest juba pole olnud ning üle""",
    "id": """yang dan di ini itu dengan untuk tidak dari dalam akan pada juga ke karena
        ada mereka oleh saya kami kita bisa sudah atau seperti lebih harus telah tersebut
        hanya bahwa kalau apa""",
    "ru": """и в не на что я с он как а то все она так его но да ты к у же вы за бы по
        только ее мне было вот от меня еще нет о из ему теперь когда даже ну ли если уже
        или быть был него до вас нибудь опять уж вам ведь там потом себя ничего это для
        при этого""",
    "bg": """и в на не да се от за с че е по като са от което това той тя те си ще ако
        или но до във със към след беше бъде има няма още също тази този тези които
        може както""",
    "ar": """في من على أن إلى عن مع هذا هذه التي الذي كان لا ما هو هي قد كل بعد عند
        ذلك بين أو لم ثم حتى إن كما لقد منذ وقد""",
    "fa": """و در به از که این را با است برای آن یک هم تا می شود بر شده کرد های خود
        ما نیز باید دارد اما کند هر بود ولی پس""",
    "hi": """के है में की और से को का एक यह पर भी हैं था कि नहीं तो गया कर लिए ने
        जो हो रहा होता किया इस वह""",
    "mr": """आणि आहे या व हे की तो ते ती मी आम्ही आहेत होते केले करून त्या त्यांनी
        म्हणून नाही पण आता हा""",
}
STOPWORDS = {lang: frozenset(words.split()) for lang, words in _STOPWORDS.items()}

_SCRIPT_LANGS = {
    "latin": ("en", "de", "it", "et", "id"),
    "cyrillic": ("ru", "bg"),
    "arabic": ("ar", "fa"),
    "devanagari": ("hi", "mr"),
}

_TOKEN = re.compile(r"[^\W\d_]+")
_PERSIAN_LETTERS = set("پچژگکی")


def _script(ch: str) -> Optional[str]:
    cp = ord(ch)
    if cp < 0x250:
        return "latin" if ch.isalpha() else None
    if 0x400 <= cp <= 0x52F:
        return "cyrillic"
    if 0x600 <= cp <= 0x6FF or 0x750 <= cp <= 0x77F or 0xFB50 <= cp <= 0xFEFF:
        return "arabic"
    if 0x900 <= cp <= 0x97F:
        return "devanagari"
    return None


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.casefold())


def classify_text(text: str) -> tuple[str, float, int]:
    """Return (language, confidence, token count) for a single message."""
    tokens = tokenize(text)
    if not tokens:
        return UNDETERMINED, 0.0, 0
    scripts = Counter(s for s in map(_script, "".join(tokens)) if s)
    if not scripts:
        return UNDETERMINED, 0.0, len(tokens)
    script, n_script = scripts.most_common(1)[0]
    script_share = n_script / sum(scripts.values())
    hits = {lang: sum(1 for t in tokens if t in STOPWORDS[lang]) for lang in _SCRIPT_LANGS[script]}
    if script == "arabic":
        # letters absent from Arabic proper
        hits["fa"] += sum(1 for c in text if c in _PERSIAN_LETTERS)
    total = sum(hits.values())
    if total == 0:
        return UNDETERMINED, 0.0, len(tokens)
    best = max(sorted(hits), key=lambda k: hits[k])
    return best, script_share * hits[best] / total, len(tokens)


def detect_language_texts(texts: Iterable[str]) -> str:
    """Token-weighted majority vote over per-message classifications."""
    votes: Counter = Counter()
    n_tokens = 0
    for text in texts:
        lang, conf, n = classify_text(text)
        n_tokens += n
        if lang != UNDETERMINED:
            votes[lang] += n * conf
    if n_tokens < MIN_TOKENS or not votes:
        return UNDETERMINED
    lang, weight = max(sorted(votes.items()), key=lambda kv: kv[1])
    return lang if weight / n_tokens > MIN_CONFIDENCE else UNDETERMINED


def detect_language(channel: ChannelRecord, messages: Iterable[MessageRecord]) -> str:
    if channel.language:
        return channel.language
    return detect_language_texts(m.text for m in messages if m.kind == "text" and m.text)


def channel_languages(dataset) -> dict[int, str]:
    return {cid: detect_language(ch, dataset.channel_messages(cid)) for cid, ch in dataset.channels.items()}
