"""Text features: vocabulary, repetition, hashtags and lexicon sentiment.

Run: python3 demos/02_text_features.py
"""

from botsentinel.corpus import UserHistory
from botsentinel.semantic import bundled_lexicons, semantic_features, tokenize

print(tokenize("Grab the DEAL now!! #win #promo http://t.co/abc"))

lexicons = bundled_lexicons()
print("lexicons:", [(lx.name, len(lx.scores)) for lx in lexicons])

person = UserHistory.from_tweets("alice", [
    (0, "Lovely walk by the river this morning"),
    (3600, "Coffee with an old friend, great chat #sunday"),
    (9000, "Terrible traffic on the way back, so tired"),
    (20000, "Reading a new novel tonight, hope it is good"),
])
spammer = UserHistory.from_tweets("promo_bot", [
    (0, "best deal now free bonus #deal #win"),
    (7200, "best deal now free prize #deal #win"),
    (14400, "best deal now free bonus #deal #win"),
    (21600, "best deal today free bonus #deal #win http://t.co/x"),
])

for h in (person, spammer):
    f = semantic_features(h, lexicons)
    print(f"\n{h.user_id}")
    print(f"  lexical diversity {f.lexical_diversity:.3f} ({f.unique_words} unique words)")
    print(f"  words per tweet {f.mean_words:.2f} (variance {f.var_words:.2f}), hashtags per tweet {f.hashtag_freq:.2f}")
    print(f"  top-5 word shares {[round(r, 3) for r in f.rho]}")
    print(f"  sentiment {dict(zip((lx.name for lx in lexicons), (round(s, 3) for s in f.sentiment)))}")
