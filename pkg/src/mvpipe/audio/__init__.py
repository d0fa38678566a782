from .buffer import ANALYSIS_SAMPLE_RATE, AudioBuffer, AudioError, load_wav, save_wav
from .bundle import AnalysisBundle, analyze, analyze_file
from .pulse import BeatGrid, PulseCurve, extract_beats, predominant_local_pulse
from .spectral import (
    FEATURE_NAMES,
    OnsetEnvelope,
    Spectrogram,
    WindowFeatures,
    compute_spectrogram,
    mel_filterbank,
    onset_strength,
    window_features,
)

__all__ = [
    "ANALYSIS_SAMPLE_RATE",
    "AudioBuffer",
    "AudioError",
    "load_wav",
    "save_wav",
    "AnalysisBundle",
    "analyze",
    "analyze_file",
    "BeatGrid",
    "PulseCurve",
    "extract_beats",
    "predominant_local_pulse",
    "FEATURE_NAMES",
    "OnsetEnvelope",
    "Spectrogram",
    "WindowFeatures",
    "compute_spectrogram",
    "mel_filterbank",
    "onset_strength",
    "window_features",
]
