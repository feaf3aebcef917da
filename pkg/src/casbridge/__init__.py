"""Bridge layer between line-oriented computer-algebra REPLs and rich clients.

The package is organized around the path a byte takes from a backend
process to a rendered formula on screen:

- :mod:`casbridge.profiles` describes each backend's prompt grammar.
- :mod:`casbridge.segmenter` turns a raw output stream into typed segments.
- :mod:`casbridge.formula` parses framed LaTeX math into an AST and renders
  it back out as canonical LaTeX, presentation MathML, or 2D text layout.
- :mod:`casbridge.session` drives a live or replayed backend and keeps an
  event transcript.
- :mod:`casbridge.server` / :mod:`casbridge.wire` expose sessions over a
  newline-delimited JSON protocol (plain TCP or WebSocket).
"""

__version__ = "0.1.0"
