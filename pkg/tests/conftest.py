from pathlib import Path

import hypothesis
import pytest

from sugmine.annotate import FixtureAnnotator, load_fixture
from sugmine.corpus import LabeledDataset, LabeledSentence

hypothesis.settings.register_profile(
    "suite", deadline=None, max_examples=50, derandomize=True
)
hypothesis.settings.load_profile("suite")

FIXTURES = Path(__file__).parent / "fixtures"

TIP_SENTENCE = (
    "Tip if you want a beach chair at the beach or pool , go there before 9 am "
    "or so and put your magazine or towel on your chair ."
)
RECOMMEND_SENTENCE = "I recommend this hotel ."
SUGGEST_SENTENCE = "I suggest you take the early bus ."
WESTIN_SENTENCE = "We stayed in the Westin Grand Berlin in July 2007 ."
ROOMS_SENTENCE = "But the rooms are small and not very functional ."


@pytest.fixture(scope="session")
def parse_fixture() -> FixtureAnnotator:
    return load_fixture(FIXTURES / "parses.jsonl")


def build_dataset(labels: list[int], prefix: str = "s") -> LabeledDataset:
    """A minimal dataset whose texts are unique placeholder sentences."""
    return LabeledDataset(
        tuple(
            LabeledSentence(id=f"{prefix}{i:04d}", text=f"sentence number {i}", label=lbl)
            for i, lbl in enumerate(labels)
        )
    )
