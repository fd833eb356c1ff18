"""Large archive writer and a timed ingest/fingerprint/scan run for the performance check."""

import json
import resource
import sys
import time

import numpy as np

WORDS = [f"tok{i}" for i in range(5000)]


def write_corpus(channels_path, messages_path, n_channels=1000, per_channel=1000, seed=0):
    """Write ``n_channels * per_channel`` messages; every tenth channel copies a third
    of its texts from the previous channel one day later."""
    rng = np.random.default_rng(seed)
    with open(channels_path, "w", encoding="utf-8") as fh:
        for c in range(n_channels):
            fh.write(json.dumps({"id": c, "username": f"c{c}", "title": f"Channel {c}", "description": "",
                                 "creation_date": 1_500_000_000, "subscribers": 100, "verified": False,
                                 "scam": False, "language": "en"}) + "\n")
    prev = None
    with open(messages_path, "w", encoding="utf-8") as fh:
        for c in range(n_channels):
            picks = rng.integers(0, len(WORDS), size=(per_channel, 7))
            dates = np.sort(rng.integers(1_600_000_000, 1_630_000_000, per_channel))
            texts = [f"c{c} m{i} " + " ".join(WORDS[j] for j in row) for i, row in enumerate(picks)]
            if prev is not None and c % 10 == 1:
                k = per_channel // 3
                texts[:k] = prev[0][:k]
                dates[:k] = prev[1][:k] + 86_400
            lines = []
            for i in range(per_channel):
                rec = {"channel_id": c, "message_id": i + 1, "date": int(dates[i]), "kind": "text", "text": texts[i]}
                if i % 50 == 49:
                    rec["fwd"] = {"from_channel_id": (c + 1) % n_channels, "from_name": None,
                                  "from_date": int(dates[i]) - 60, "author": None}
                lines.append(json.dumps(rec))
            fh.write("\n".join(lines) + "\n")
            prev = (texts, dates)


def run(channels_path, messages_path, threads):
    from tgscope.clones import find_clones
    from tgscope.data_model import parse_dataset

    t0 = time.perf_counter()
    ds = parse_dataset(channels_path, messages_path)
    found = find_clones(ds, workers=threads)
    elapsed = time.perf_counter() - t0
    peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024  # kB on Linux
    pairs = [[e.original_id, e.clone_id, e.shared, e.eligible] for e in found]
    print(json.dumps({"seconds": elapsed, "peak_bytes": peak, "messages": ds.n_messages, "pairs": pairs}))


if __name__ == "__main__":
    run(sys.argv[1], sys.argv[2], int(sys.argv[3]))
