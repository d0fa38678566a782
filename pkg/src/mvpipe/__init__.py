"""Music-video frame pipeline engine and CHARCHA liveness protocol."""

__version__ = "0.1.0"
