"""Reference keywords from the `yake` package (0.4.8) using our stopword list.

    python3 tools/oracles/yake_reference.py > tests/fixtures/yake_reference.json
"""
import json
import pathlib

import yake

ROOT = pathlib.Path(__file__).resolve().parents[2]
STOPWORDS = {w.strip() for w in (ROOT / "data" / "stopwords_en.txt").read_text().splitlines() if w.strip()}

TEXTS = [
    "A sign advertising a toilet for sale.",
    "A sign that says The Sign with a toilet symbol.",
    "A sign with a man and a woman on it.",
    "A black and white sign of a man and woman holding hands.",
    "Two people holding hands.",
    "A person's finger with a red nail polish.",
    "A woman with red nails and a yellow shirt.",
    "two large trucks parked next to each other on a road",
    "a view of a road with trees lining both sides of it",
    "several pink trucks are parked in front of a building",
    "a bowl of broccoli and mushrooms on a wooden table",
    "a glass of red wine on a bar counter next to a bottle of beer",
    "a large red truck on a road with a tree",
    "an old shiny blue car near a bus",
    "Google is acquiring data science community Kaggle. Sources tell us that Google is acquiring Kaggle, "
    "a platform that hosts data science and machine learning competitions.",
]


def main():
    out = []
    for text in TEXTS:
        kw = yake.KeywordExtractor(lan="en", n=3, dedupLim=0.9, dedupFunc="seqm", windowsSize=1, top=5,
                                   stopwords=STOPWORDS)
        out.append({"text": text, "keywords": [[k, s] for k, s in kw.extract_keywords(text)]})
    print(json.dumps({"yake_version": "0.4.8", "cases": out}, indent=2))


if __name__ == "__main__":
    main()
