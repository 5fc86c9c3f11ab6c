"""convrec: a multi-agent conversational movie recommender.

Three responder agents draft one candidate each (ask / recommend / chit-chat),
a planner agent picks the system response, and two reflection passes turn user
feedback into an evolving profile and failure-driven strategy adjustments.
Ships with an LLM user-simulator benchmark harness, an HTTP chat service, and
a CLI.
"""

__version__ = "0.1.0"
