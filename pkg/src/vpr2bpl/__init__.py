"""Certifying Viper-to-Boogie translator with a bounded-exhaustive translation validator.

The package is organised as a core library wrapped by a FastAPI service and a
thin command-line client:

- ``vpr2bpl.viper``: AST, parser, printer and big-step semantics for the
  supported Viper subset (fractional permissions, inhale/exhale, method calls).
- ``vpr2bpl.boogie``: AST, printer/parser and continuation-based small-step
  semantics for the generated Boogie subset, including the background theory.
- ``vpr2bpl.translate``: the certifying translator.  Besides Boogie code it
  emits a hint stream describing binding choices, variant choices and cursor
  spans of everything it generated.
- ``vpr2bpl.sim``: the forward-simulation calculus: goals, relations, and the
  proof rules used to decompose a per-method simulation claim.
- ``vpr2bpl.validate``: the independent validation engine: the semantic oracle,
  certificate construction and checking, and the end-to-end verdict.
- ``vpr2bpl.service`` / ``vpr2bpl.cli``: FastAPI wrapper and CLI client.
"""

__version__ = "0.1.0"
