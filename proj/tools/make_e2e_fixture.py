"""Generate tests/data/e2e_tweets.jsonl, the 500-tweet end-to-end fixture.

Two user communities (ids 1001-1060 and 1061-1120) retweet mostly within
their own group. First-person housing tweets are all strongly negative,
first-person hope and volunteer tweets positive; news and power-cut tweets
are impersonal. Output is fixed by the seed.
"""
import json
import random
import sys
from datetime import datetime, timedelta, timezone

rng = random.Random(20200520)

PLACES = ["Kolkata", "Howrah", "Bakkhali", "Digha", "Sundarbans", None]
START = datetime(2020, 5, 18, tzinfo=timezone.utc)

HOUSING = [
    "I lost my house, the roof collapsed and our home is {adj}",
    "our home is gone, the walls fell and my house is {adj}",
    "my hut was destroyed, we are homeless and the house is {adj}",
    "the roof of my house flew away, our home is {adj}",
    "we lost our house, every wall broke, my home is {adj}",
]
HOUSING_ADJ = ["ruined and I am devastated", "destroyed and we are scared", "wrecked and I feel terrible",
               "gone and we are crying", "broken and I am hopeless"]

HOPE = [
    "we hope to rebuild together with strength, feeling {adj}",
    "I am hopeful we will recover together, so {adj}",
    "our community will rebuild stronger, together we hope, {adj}",
    "we have faith and hope, recovery together makes me {adj}",
]
HOPE_ADJ = ["grateful", "happy and proud", "thankful and glad", "very optimistic and happy"]

VOLUNTEER = [
    "we volunteered with our team helping families today, {adj}",
    "our volunteers served food, proud of the team, {adj}",
    "I joined the ngo team helping the community, {adj}",
]
VOLUNTEER_ADJ = ["great day", "so proud", "wonderful work", "good vibes"]

NEWS = [
    "cyclone landfall update: wind speed {n} kmph near {p}, alert issued",
    "breaking: imd bulletin warns of strong wind at {p}, track the update",
    "power outage across {p}, electricity poles down and transformer damaged",
    "blackout continues in {p}, current not restored, grid down",
    "relief camps opened at {p}, ration kits distributed",
]
SPEEDS = ["150", "165", "180"]


def community(uid):
    return 0 if uid <= 1060 else 1


def make_tweets():
    users = list(range(1001, 1121))
    followers = {u: rng.choice([50, 120, 300, 800, 2500, 12000]) for u in users}
    location = {u: rng.choice(PLACES) for u in users}
    # community 0 leans toward housing and volunteers, community 1 toward hope and news
    topic_mix = [
        [("housing", 0.45), ("volunteer", 0.25), ("news", 0.3)],
        [("hope", 0.45), ("news", 0.4), ("volunteer", 0.15)],
    ]
    tweets = []
    originals = {0: [], 1: []}

    def stamp(i):
        return (START + timedelta(minutes=37 * i)).strftime("%Y-%m-%dT%H:%M:%SZ")

    def text_for(kind):
        if kind == "housing":
            return rng.choice(HOUSING).format(adj=rng.choice(HOUSING_ADJ))
        if kind == "hope":
            return rng.choice(HOPE).format(adj=rng.choice(HOPE_ADJ))
        if kind == "volunteer":
            return rng.choice(VOLUNTEER).format(adj=rng.choice(VOLUNTEER_ADJ))
        p = rng.choice([x for x in PLACES if x])
        return rng.choice(NEWS).format(n=rng.choice(SPEEDS), p=p)

    n_original = 300
    for i in range(n_original):
        u = users[i % len(users)] if i < len(users) else rng.choice(users)
        c = community(u)
        r = rng.random()
        acc = 0.0
        for kind, w in topic_mix[c]:
            acc += w
            if r <= acc:
                break
        t = {
            "id": str(100000 + i),
            "text": text_for(kind),
            "lang": "en",
            "created_at": stamp(i),
            "author_id": str(u),
            "author_followers": followers[u],
            "author_location": location[u],
            "kind": "original",
            "ref_tweet_id": None,
            "ref_author_id": None,
        }
        tweets.append(t)
        originals[c].append(t)

    for j in range(200):
        i = n_original + j
        u = rng.choice(users)
        c = community(u)
        pool = originals[c] if rng.random() < 0.9 else originals[1 - c]
        src = rng.choice([t for t in pool if t["author_id"] != str(u)])
        kind = "retweet" if rng.random() < 0.8 else "reply"
        text = f"RT @user{src['author_id']}: {src['text']}" if kind == "retweet" else f"@user{src['author_id']} {src['text']}"
        tweets.append({
            "id": str(100000 + i),
            "text": text,
            "lang": "en",
            "created_at": stamp(i),
            "author_id": str(u),
            "author_followers": followers[u],
            "author_location": location[u],
            "kind": kind,
            "ref_tweet_id": src["id"],
            "ref_author_id": src["author_id"],
        })
    return tweets


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "tests/data/e2e_tweets.jsonl"
    with open(out, "w", encoding="utf-8") as f:
        for t in make_tweets():
            f.write(json.dumps(t, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
