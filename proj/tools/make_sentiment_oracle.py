"""Freeze reference compound scores for tests/data/sentiment_fixture.tsv.

Runs the reference rule-based analyzer (vaderSentiment 3.3.2) with its output
rounding disabled and writes `sentence<TAB>compound<TAB>pos<TAB>neu<TAB>neg`.
"""
import sys

import vaderSentiment.vaderSentiment as vs

vs.round = lambda x, n=None: x  # keep full precision

analyzer = vs.SentimentIntensityAnalyzer()
src, dst = sys.argv[1], sys.argv[2]
with open(src, encoding="utf-8") as f, open(dst, "w", encoding="utf-8") as out:
    for line in f:
        sentence = line.rstrip("\n")
        if not sentence:
            continue
        s = analyzer.polarity_scores(sentence)
        out.write(f"{sentence}\t{s['compound']:.12f}\t{s['pos']:.12f}\t{s['neu']:.12f}\t{s['neg']:.12f}\n")
