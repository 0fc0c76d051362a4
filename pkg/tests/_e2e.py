"""Shared helper: run the full synthetic pipeline and regress the planted effect."""

from modalign.cli import PitchSettings, RunConfig, build_panel
from modalign.ingest import build_index, CorpusIndex
from modalign.stats import fe_regress
from modalign.synth import SynthSpec, synth_corpus

FAST_PITCH = PitchSettings(frame_length=1024, hop=256)


def planted_run(spec: SynthSpec, workdir, pitch=FAST_PITCH):
    """Synthesize, index, and regress; returns the fitted RegressionResult.

    The coefficient of interest is ``addressing_x_<other party>`` — the
    planted boost applies to non-target-party speakers inside segments.
    """
    manifest = synth_corpus(spec, workdir / "raw")
    index = CorpusIndex(build_index(manifest, workdir / "idx"))
    cfg = RunConfig(pitch=pitch)
    rows, parties, skipped = build_panel(index, cfg)
    return fe_regress(rows)


def interaction_name(spec: SynthSpec) -> str:
    return f"addressing_x_{spec.other_party}"
