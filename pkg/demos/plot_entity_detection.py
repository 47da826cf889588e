"""
Finding no-translate entities in a sentence
===========================================

Every category has one regular expression. A sentence is usable for
evaluation only when its category's pattern fires exactly once.
"""

from entity_guard import EntityCategory, detect_entities, pattern_for, validate_single
from entity_guard.errors import EntityValidationError

sentence = "Die Katze las www.irgendwohin.com vor dem Frühstück."
for m in detect_entities(sentence, EntityCategory.URL):
    print(m.category, repr(m.surface), m.span)

# the registry keeps the pattern text exactly as written
print(pattern_for("ip").pattern_text)

# an ISBN label is matched but left out of the entity
print(validate_single("Das Buch ISBN 978-83-12-34567-8 liegt hier.", "isbn").surface)

# emoji sequences joined with ZWJ count as one entity
family = "\U0001F468‍\U0001F469‍\U0001F467"
print(len(detect_entities(f"We are a {family} today", "emoji")))

###############################################################################
# The corpus gate rejects sentences with zero or several entities.

for text in ("no entity here.", "a@b.com and c@d.com", "write to anna@example.org"):
    try:
        print("ok  ", validate_single(text, "email").surface)
    except EntityValidationError as exc:
        print("drop", type(exc).__name__, "-", text)
