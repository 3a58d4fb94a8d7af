"""
Persistence and the HTTP service
================================

Saves a trained model to the binary container, then serves it with the CLI
and walks the JSON API with stdlib HTTP calls: category metadata, element
lookup with typo suggestions, and related-element queries.
"""

import json
import subprocess
import sys
import tempfile
import time
import urllib.error
import urllib.parse
import urllib.request
from pathlib import Path

from bibvec import (SyntheticSpec, TrainConfig, build_vocabulary,
                    encode_papers, init_model, load_model, save_model,
                    synth_corpus, train)
from bibvec.corpus import AUTHOR, DEFAULT_CATEGORY_SPECS

records = synth_corpus(SyntheticSpec(2, 3, 20, 60, 0.05), seed=7)
vocab = build_vocabulary(records, DEFAULT_CATEGORY_SPECS)
model = init_model(vocab, dim=16, seed=0)
train(model, encode_papers(vocab, records), TrainConfig(epochs=80, seed=0))

workdir = Path(tempfile.mkdtemp(prefix="bibvec-demo-"))
path = workdir / "model.bv"
save_model(model, vocab, path)
print(f"saved {path} ({path.stat().st_size} bytes)")

# The round trip is bitwise exact; a checksum guards against corruption.
loaded, _ = load_model(path)
print("round trip bitwise equal:",
      loaded.target[AUTHOR].tobytes() == model.target[AUTHOR].tobytes())

base = "http://127.0.0.1:8214"
server = subprocess.Popen(
    [sys.executable, "-m", "bibvec", "serve", "--model", str(path),
     "--bind", "127.0.0.1:8214"],
    stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)


def get(url: str):
    with urllib.request.urlopen(url) as resp:
        return json.load(resp)


try:
    for _ in range(100):
        try:
            get(base + "/healthz")
            break
        except urllib.error.URLError:
            time.sleep(0.1)

    info = get(base + "/api/categories")
    print("\ncategories:", [c["name"] for c in info["categories"]],
          "defaults:", info["defaults"])

    token = vocab.cat(AUTHOR).tokens[0]
    quoted = urllib.parse.quote(token)
    print(f"\nGET /api/element for {token!r}:",
          get(f"{base}/api/element?category={AUTHOR}&token={quoted}"))

    rel = get(f"{base}/api/related?category={AUTHOR}&token={quoted}"
              f"&target={AUTHOR}&measure=cosine&k=3")
    print("\nrelated authors:")
    for r in rel["results"]:
        print(f"  {r['score']:8.3f}  {r['token']}")

    # Unknown tokens answer 404 with the same suggestions the library raises.
    try:
        get(f"{base}/api/element?category={AUTHOR}&token={quoted[:-1]}x")
    except urllib.error.HTTPError as exc:
        print("\nunknown token ->", exc.code, json.load(exc))
finally:
    server.terminate()
    server.wait()
