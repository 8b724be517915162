"""Desk-scale multi-robot mission simulator.

A centralized objective registry, per-robot utility planners and
behavior-tree executives, a deterministic discrete-event world with
QoS-modeled communication, and a KPI engine over mission event logs.
"""

__version__ = "0.1.0"
