"""Desk-scale monitor for public chat groups and channels.

Pipeline: parse chat-export archives into pseudonymized messages, fingerprint
every piece of content (perceptual hash for images, checksum for other media,
shingle sets for text), group copies into content clusters, rank them by
popularity per day and media type, and serve the results over an
authenticated HTTP API.
"""

__version__ = "0.1.0"
