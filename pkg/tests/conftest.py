from dataclasses import dataclass
from pathlib import Path

import pytest

from modalign.ingest import build_index
from modalign.synth import SynthSpec, synth_corpus


@dataclass(frozen=True)
class CorpusPaths:
    root: Path
    manifest: Path
    index: Path
    ground_truth: Path


@pytest.fixture(scope="session")
def planted_corpus(tmp_path_factory) -> CorpusPaths:
    """One synthetic corpus with a planted +0.15 SD effect, shared across tests."""
    root = tmp_path_factory.mktemp("corpus")
    spec = SynthSpec(seed=7, speakers=4, words_per_speech=120, planted_pitch_effect=0.15)
    manifest = synth_corpus(spec, root / "raw")
    index = build_index(manifest, root / "idx")
    return CorpusPaths(root, manifest, index, root / "raw" / "ground_truth.json")
