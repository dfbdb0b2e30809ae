"""Extension protocols for Byzantine broadcast and agreement on long messages.

Library layout:

- ``gf``, ``rs``: GF(2^16) arithmetic and the striped Reed-Solomon codec.
- ``accumulator``, ``multisig``: set commitments with membership witnesses
  and aggregate signatures, with nominal-size accounting.
- ``blocks``: the encode / distribute / reconstruct dissemination blocks.
- ``star``: maximum matching and the star-extraction procedure used by the
  error-free protocols.
- ``simnet``: deterministic round and event schedulers, adversary scripts,
  and honest-bit metering.
- ``oracles``: short-message broadcast/agreement primitives (ideal and
  concrete) plus the common-coin source.
- ``protocols``: the seven long-message protocols as party coroutines.
- ``runner``: one-call session execution.
- ``cli``: experiment sweeps and property-suite checks.
"""

from .protocols import PROTOCOLS, SessionParams
from .runner import RunResult, run
from .simnet import BOT, RunMetrics

__all__ = ["BOT", "PROTOCOLS", "RunMetrics", "RunResult", "SessionParams", "run"]
