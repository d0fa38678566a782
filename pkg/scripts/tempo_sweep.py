#!/usr/bin/env python3
"""Beat-tracking accuracy sweep: synthetic click tracks across a BPM range.

Prints the relative error of the median inter-beat interval per tempo.
"""

import argparse

import numpy as np

from mvpipe.audio import (
    ANALYSIS_SAMPLE_RATE,
    AudioBuffer,
    compute_spectrogram,
    extract_beats,
    onset_strength,
    predominant_local_pulse,
)


def click_track(bpm: float, duration: float) -> AudioBuffer:
    sr = ANALYSIS_SAMPLE_RATE
    samples = np.zeros(int(duration * sr))
    for beat in np.arange(0, duration, 60.0 / bpm):
        samples[int(beat * sr)] = 1.0
    return AudioBuffer(samples=samples, sample_rate=sr)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--lo", type=float, default=60.0)
    parser.add_argument("--hi", type=float, default=180.0)
    parser.add_argument("--step", type=float, default=10.0)
    parser.add_argument("--duration", type=float, default=20.0)
    args = parser.parse_args()

    worst = 0.0
    for bpm in np.arange(args.lo, args.hi + 1e-9, args.step):
        env = onset_strength(compute_spectrogram(click_track(bpm, args.duration)))
        beats = extract_beats(predominant_local_pulse(env))
        expected = 60.0 / bpm
        if len(beats) < 2:
            print(f"{bpm:6.1f} BPM: only {len(beats)} beats found")
            continue
        ibi = float(np.median(np.diff(beats.beat_times)))
        err = abs(ibi - expected) / expected
        worst = max(worst, err)
        print(f"{bpm:6.1f} BPM: median IBI {ibi:.4f}s (expected {expected:.4f}s, {err:6.2%})")
    print(f"worst relative error: {worst:.2%}")


if __name__ == "__main__":
    main()
