"""ghostwriter: a desk-scale inline code completion stack.

Pieces: trigger-aligned prompt construction, pluggable completion backends
(n-gram reference model, oracle fixture, remote HTTP), a loopback inference
service, a JSON-RPC language server that debounces/caches/suppresses and
records telemetry, adoption metrics, and a masked-line backtest harness.
"""

__version__ = "0.1.0"
