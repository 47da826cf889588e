"""
Scoring translations and aggregating accuracy
=============================================

A translation keeps the entity when the same pattern finds the identical
string on the target side. Anything else is a no-match or a modified entity
with its edit distance.
"""

import random

from entity_guard import Direction, TranslationRecord, levenshtein, render_table, score_corpus
from entity_guard.analytics import BY_DIRECTION, accuracy_table, error_histogram, top_error_table
from entity_guard.corpus import LanguageCode, Sample
from entity_guard.entities import validate_single

print(levenshtein("PL60109010000000000000000000", "PL601090100000000000000000"))

texts = {
    "iban": "Bitte überweisen Sie auf PL60109010000000000000000000 bis Freitag.",
    "social": "Folgt uns unter @klimatyzacja für Neuigkeiten.",
    "url": "Mehr auf www.irgendwohin.com lesen.",
    "ip": "Der Server 192.168.1.108 antwortet nicht.",
}
corpus = [
    Sample(f"de-{cat}-00-000", LanguageCode.DE, validate_single(text, cat).category, text,
           validate_single(text, cat))
    for cat, text in texts.items()
]

###############################################################################
# Three pretend systems: one copies entities, one rewrites some, one drops them.

rng = random.Random(1)


def translate(system, sample):
    if system == "careful":
        return sample.text
    if system == "creative":
        return sample.text.replace("klimatyzacja", "airconditioning").replace("irgendwohin", "somewhere")
    return "Das habe ich vergessen." if rng.random() < 0.5 else sample.text


translations = [
    TranslationRecord(s.id, Direction("de", tgt), system, translate(system, s))
    for s in corpus for tgt in ("en", "pl") for system in ("careful", "creative", "forgetful")
]
scores = score_corpus(corpus, translations)
for s in scores[:6]:
    print(s.system_id, s.category.value, s.outcome, s.target_entity)

###############################################################################
# Paper-shaped tables, rendered deterministically.

print(render_table(accuracy_table(scores), "markdown", "Accuracy per category").text)
print(render_table(accuracy_table(scores, BY_DIRECTION), "csv").text)
print(render_table(error_histogram(scores), "markdown").text)
print(render_table(top_error_table(scores), "markdown").text)
