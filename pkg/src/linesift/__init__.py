"""Line-level vulnerability labeling for commits via committee-based active learning."""

__version__ = "0.1.0"
