#!/usr/bin/env python3
"""Generate synthetic fixture audio (click tracks, tones) for experiments."""

import argparse
from pathlib import Path

import numpy as np

from mvpipe.audio import ANALYSIS_SAMPLE_RATE, AudioBuffer, save_wav


def click_track(bpm: float, duration: float, sr: int) -> AudioBuffer:
    samples = np.zeros(int(duration * sr))
    t = 0.0
    while t < duration:
        idx = int(t * sr)
        # 5 ms exponentially decaying click; softer than a bare impulse
        n = min(int(0.005 * sr), len(samples) - idx)
        samples[idx : idx + n] += np.exp(-np.arange(n) / (0.001 * sr))
        t += 60.0 / bpm
    return AudioBuffer(samples=np.clip(samples, -1, 1), sample_rate=sr)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("output", type=Path)
    parser.add_argument("--bpm", type=float, default=120.0)
    parser.add_argument("--duration", type=float, default=30.0)
    parser.add_argument("--sr", type=int, default=ANALYSIS_SAMPLE_RATE)
    args = parser.parse_args()
    save_wav(args.output, click_track(args.bpm, args.duration, args.sr))
    print(f"wrote {args.output} ({args.duration}s at {args.bpm} BPM)")


if __name__ == "__main__":
    main()
