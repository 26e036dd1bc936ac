#!/usr/bin/env python3
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Regenerates data/demo: punctuated references, noisy ASR, held-out text."""

import pathlib
import random

SUBJECTS = ["I", "You", "We", "They", "She", "He", "My sister", "Our neighbour", "The teacher",
            "Dr. Lee", "Mr. Brown", "The kids"]
VERBS = {"I": "am", "You": "are", "We": "are", "They": "are", "The kids": "are"}
STATES = ["hungry", "sleepy", "tired", "happy", "late", "ready", "cold", "busy", "bored", "lost"]
ACTIONS = ["went home", "made some tea", "read a book", "called a friend", "fixed the bike",
           "cooked dinner", "took the bus", "watched the news", "walked the dog", "cleaned the kitchen",
           "wrote a letter", "played the piano"]
TAILS = ["", "", "", " today", " again", " this morning", " after work", " in the evening"]
QUESTIONS = ["Are you hungry?", "Is it late?", "Did you eat?", "Where are the keys?",
             "Can we go now?", "What time is it?"]
FILLERS = ["uh", "um", "well"]


def sentence(rng):
    r = rng.random()
    if r < 0.15:
        return rng.choice(QUESTIONS)
    subj = rng.choice(SUBJECTS)
    if r < 0.55:
        verb = VERBS.get(subj, "is")
        return f"{subj} {verb} {rng.choice(STATES)}{rng.choice(TAILS)}."
    return f"{subj} {rng.choice(ACTIONS)}{rng.choice(TAILS)}."


def normalize(text):
    out = []
    for tok in text.split():
        t = "".join(c for c in tok.lower() if c.isalnum() or c == "'").replace("'", "")
        if t:
            out.append(t)
    return out


def corrupt(tokens, rng, rate):
    out = []
    for t in tokens:
        r = rng.random()
        if r < rate / 3:
            continue  # deletion
        if r < 2 * rate / 3:
            out.append(t + "s")  # substitution
            continue
        out.append(t)
        if r < rate:
            out.append(rng.choice(FILLERS))  # insertion
    return out


def main():
    root = pathlib.Path(__file__).resolve().parent.parent / "data" / "demo"
    rng = random.Random(20240601)
    for sub in ["reference", "asr", "heldout/reference", "heldout/asr"]:
        (root / sub).mkdir(parents=True, exist_ok=True)
    for d in range(24):
        text = " ".join(sentence(rng) for _ in range(rng.randint(25, 45)))
        (root / "reference" / f"talk{d:02d}.txt").write_text(text + "\n")
        asr = corrupt(normalize(text), rng, 0.06)
        (root / "asr" / f"talk{d:02d}.txt").write_text(" ".join(asr) + "\n")
    for d in range(4):
        text = " ".join(sentence(rng) for _ in range(40))
        (root / "heldout" / "reference" / f"held{d}.txt").write_text(text + "\n")
        (root / "heldout" / "asr" / f"held{d}.txt").write_text(" ".join(normalize(text)) + "\n")


if __name__ == "__main__":
    main()
