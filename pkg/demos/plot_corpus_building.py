"""
Building a length-stratified corpus
===================================

Candidates are sorted by length, cut into buckets of equal size and sampled
per bucket, so short and long sentences are equally represented.
"""

import random

from entity_guard import CandidateSentence, CorpusBuildConfig, build_corpus, corpus_stats
from entity_guard.corpus import bucket_by_length

rng = random.Random(0)
words = "the old ferry left the harbour before dawn while gulls circled".split()


def candidate():
    body = [rng.choice(words) for _ in range(rng.randint(3, 30))]
    body.insert(rng.randint(0, len(body)), f"10.{rng.randint(0, 255)}.{rng.randint(0, 255)}.7")
    return CandidateSentence(" ".join(body).capitalize() + ".", "en", "ip")


candidates = [candidate() for _ in range(600)]

# a few generator mishaps the pipeline has to survive
candidates.append(CandidateSentence("Server 1.1.1.1 mirrors 2.2.2.2.", "en", "ip"))
candidates.append(CandidateSentence("Adresse 9.9.9.9.\n\n(English: address)", "en", "ip"))

###############################################################################
# Bucket boundaries only ever increase.

buckets = bucket_by_length([c.text for c in candidates], 5)
print([(len(b[0]), len(b[-1])) for b in buckets])

###############################################################################
# Ten buckets of twenty. The grammar check here is a stand-in for an external
# tool; any callable taking (text, language) works.

config = CorpusBuildConfig(bucket_count=10, per_bucket=20, rng_seed=42)
build = build_corpus(candidates, config, grammar_checker=lambda text, lang: "ferry ferry" not in text)
print(len(build.samples), "samples,", len(build.rejections), "rejected")
print(sorted({r.reason.value for r in build.rejections}))
print(build.samples[0].id, "|", build.samples[0].text)

stats = corpus_stats(build.samples)
print(f"tokens {stats.tokens.mean:.2f} +- {stats.tokens.std:.2f}, "
      f"entity length {stats.entity_chars.mean:.2f} +- {stats.entity_chars.std:.2f}")
