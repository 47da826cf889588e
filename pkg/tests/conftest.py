import random
from dataclasses import dataclass

import pytest

from entity_guard.corpus import CandidateSentence, LanguageCode, Sample
from entity_guard.entities import EntityCategory, validate_single
from entity_guard.scoring import OutcomeKind, ScoreRecord, TransferOutcome
from entity_guard.translation import all_directions


@dataclass(frozen=True)
class ErrorCase:
    category: EntityCategory
    source_lang: str
    target_lang: str
    source_entity: str
    target_entity: str | None
    source_text: str
    target_text: str


# Google Translate error examples, checked by hand against the published table
ERROR_CASES = [
    ErrorCase(
        EntityCategory.IBAN, "pl", "de",
        "PL60109010000000000000000000", "PL601090100000000000000000",
        "Panie profesorze Janie Kowalski, może przesłać mi nową listę prac do sprawdzenia "
        "na konto o numerze PL60109010000000000000000000?",
        "Professor Jan Kowalski, können Sie mir eine neue Liste der zu prüfenden Werke an "
        "die Kontonummer PL601090100000000000000000 senden?",
    ),
    ErrorCase(
        EntityCategory.SOCIAL, "pl", "de",
        "@klimatyzacja", "@airconditioning",
        "Przechodząc przez park, nagle usłyszałam @klimatyzacja śpiewającą piosenkę o letnim słońcu.",
        "Als ich durch den Park spazierte, hörte ich plötzlich @airconditioning ein Lied über "
        "die Sommersonne singen.",
    ),
    ErrorCase(
        EntityCategory.ALPHANUMERIC, "pl", "de",
        "tenotypic123CBSprk", "tenotypisch123CBSprk",
        "Gniazdo pająka, o symbolu tenotypic123CBSprk, wisiało pod niebem usianym szumami.",
        "Das Spinnennest, Symbol tenotypisch123CBSprk, hing unter einem mit Lärm übersäten Himmel.",
    ),
    ErrorCase(
        EntityCategory.URL, "de", "en",
        "www.irgendwohin.com", "www.somewhere.com",
        "Die Katze las www.irgendwohin.com vor dem Frühstück und kraulte verschmitzt um Aufmerksamkeit.",
        "The cat read www.somewhere.com before breakfast and playfully scratched for attention.",
    ),
    ErrorCase(
        EntityCategory.EMAIL, "de", "en",
        "liebevollchenpinguin@aya.at", "lovingchenpinguin@aya.at",
        "Die sprechende Mandarine geschickt ein Bild an liebevollchenpinguin@aya.at.",
        "The talking mandarin sent a picture to lovingchenpinguin@aya.at.",
    ),
    ErrorCase(
        EntityCategory.IP, "pl", "de",
        "192.168.1.108", None,
        "Wiatr gonił pożółkłe liście, aż mu się zadało z 192.168.1.108 i spróbowało wziąć pod nie chwytem.",
        "Der Wind verfolgte die vergilbten Blätter, bis er müde wurde und versuchte, sie zu ergreifen.",
    ),
    ErrorCase(
        EntityCategory.PHONE, "de", "pl",
        "49 030 1234567890", None,
        "Die alten Ratten spielten Karten und diskutierten leidenschaftlich laut vor Telefonnummer "
        "+49 030 1234567890 verband 123politisch.",
        "Stare szczury grały w karty i głośno i namiętnie dyskutowały o polityce.",
    ),
    ErrorCase(
        EntityCategory.ISBN, "pl", "de",
        "978-83-12-34567-8", None,
        "Podczas lekcji astronomii, Paweł natknął się na książkę o istocie czasoprzestrzeni, "
        "której ISBN 978-83-12-34567-8 zdradził tajemnicę kosmicznej harmonii.",
        "Während einer Astronomiestunde stieß Paweł auf ein Buch über die Natur der Raumzeit, "
        "das das Geheimnis der kosmischen Harmonie enthüllte.",
    ),
]


def make_sample(text, category, language="en", sample_id="s1"):
    entity = validate_single(text, category)
    return Sample(sample_id, LanguageCode(language), EntityCategory(category), text, entity)


_WORDS = (
    "the quiet river carried old letters past a sleepy harbour where gulls argued "
    "about bread while the lighthouse keeper counted boats and hummed forgotten songs"
).split()


def synthetic_candidates(n, seed=0, language="en"):
    """``n`` distinct sentences of varied length, each holding one IP address."""
    rng = random.Random(seed)
    seen, out = set(), []
    while len(out) < n:
        words = [rng.choice(_WORDS) for _ in range(rng.randint(4, 40))]
        ip = ".".join(str(rng.randint(0, 255)) for _ in range(4))
        words.insert(rng.randint(0, len(words)), ip)
        text = " ".join(words).capitalize() + "."
        if text not in seen:
            seen.add(text)
            out.append(CandidateSentence(text, LanguageCode(language), EntityCategory.IP))
    return out


@pytest.fixture(scope="session")
def candidates_5000():
    return synthetic_candidates(5000, seed=7)


def random_outcome(rng, p_exact=0.6):
    roll = rng.random()
    if roll < p_exact:
        return TransferOutcome.exact()
    if roll < p_exact + 0.1:
        return TransferOutcome.no_match()
    return TransferOutcome.modified(rng.choice([1, 1, 2, 3, 4, 5, 6, 9, 14]))


def score_record(sample_id, direction, system, category, outcome, source="entity"):
    if outcome.kind is OutcomeKind.EXACT:
        target = source
    elif outcome.kind is OutcomeKind.MODIFIED:
        target = source + "x" * outcome.distance
    else:
        target = None
    return ScoreRecord(sample_id, direction, system, EntityCategory(category), source, outcome, target)


def random_scores(rng, systems=("A", "B"), per_cell=None, categories=None, directions=None):
    """Scores over the category x direction grid; ``per_cell`` fixes cell sizes."""
    categories = categories or list(EntityCategory)
    directions = directions or all_directions()
    out = []
    for system in systems:
        p = rng.random()
        for cat in categories:
            for d in directions:
                n = per_cell if per_cell is not None else rng.randint(1, 6)
                for i in range(n):
                    sid = f"{d.source.value}-{cat.value}-{i:03}"
                    out.append(score_record(sid, d, system, cat, random_outcome(rng, p)))
    return out


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda ln: int(ln.split("]")[1].split(".")[0])):
            terminalreporter.write_line(line)
